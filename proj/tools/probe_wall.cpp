#include <cmath>
#include <cstdio>
#include <random>

#include "crf/tet_geometry.hpp"

using namespace crf;

int main() {
  std::mt19937_64 gen(5);
  auto urand = [&](double lo, double hi) {
    const double x =
        static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
    return lo + (hi - lo) * x;
  };

  for (int shape_k : {0, 2}) {
    const TetShape sh{shape_k};
    double worst = 0.0, worst_phi_rate = 0.0;
    int crossings = 0;
    for (int rep = 0; rep < 30; ++rep) {
      EdgeLengths6 a{}, b{};
      for (int e = 0; e < 6; ++e) {
        a[e] = sh.edge_hh(e) ? urand(0.4, 1.0) : urand(-0.3, 0.3);
        b[e] = urand(-0.5, 0.5);
      }
      if (!is_realizable(sh, a)) { --rep; continue; }
      b[0] = urand(2.5, 4.0);
      b[5] = urand(2.5, 4.0);
      b[1] = urand(-4.0, -2.5);
      b[4] = urand(-4.0, -2.5);
      auto at = [&](double t) {
        EdgeLengths6 l;
        for (int e = 0; e < 6; ++e) l[e] = (1 - t) * a[e] + t * b[e];
        return l;
      };
      if (is_realizable(sh, at(1.0))) continue;
      ++crossings;
      double lo = 0.0, hi = 1.0;
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (is_realizable(sh, at(mid)) ? lo : hi) = mid;
      }
      const double t = 0.5 * (lo + hi);
      const double d = 1e-5;
      const Angles6 am = dihedral_angles_extended(sh, clamp_truncated_edges(sh, at(t - d)));
      const Angles6 ap = dihedral_angles_extended(sh, clamp_truncated_edges(sh, at(t + d)));
      double jump = 0.0;
      for (int e = 0; e < 6; ++e)
        jump = std::max(jump, std::fabs(ap[e] - am[e]));
      // phi slope across the wall for slot 0
      const auto pm = phi(sh, clamp_truncated_edges(sh, at(t - d)));
      const auto pp = phi(sh, clamp_truncated_edges(sh, at(t + d)));
      const double rate = std::fabs(pp[0] - pm[0]) / (2 * d);
      if (jump > worst) { worst = jump; worst_phi_rate = rate; }
    }
    std::printf("shape %s: %d crossings, worst angle jump over"
                " [t*-1e-5, t*+1e-5] = %.6g"
                " (phi slope there ~ %.4g, sqrt(2*slope*1e-5) = %.4g)\n",
                sh.name().c_str(), crossings, worst, worst_phi_rate,
                std::sqrt(2 * worst_phi_rate * 1e-5));
  }
  return 0;
}
