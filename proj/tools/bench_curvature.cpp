// Times the OpenMP tet-angle kernel against the serial reference on a
// disjoint union of many copies of the two-tetrahedron cusped fixture,
// and checks that the two produce identical output.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "crf/complex.hpp"

namespace {

crf::GluingSpec replicated_fixture(int copies) {
  static const int nbr[2][4] = {{1, 1, 1, 1}, {0, 0, 0, 0}};
  static const int tf[2][4] = {{0, 2, 1, 3}, {0, 2, 1, 3}};
  static const int pm[2][4][4] = {
      {{0, 1, 3, 2}, {1, 2, 3, 0}, {2, 3, 1, 0}, {2, 1, 0, 3}},
      {{0, 1, 3, 2}, {3, 2, 0, 1}, {3, 0, 1, 2}, {2, 1, 0, 3}}};
  crf::GluingSpec g;
  g.tet_count = 2 * copies;
  g.gluings.resize(g.tet_count);
  for (int k = 0; k < copies; ++k) {
    for (int t = 0; t < 2; ++t) {
      for (int f = 0; f < 4; ++f) {
        crf::FaceGluing& fg = g.gluings[2 * k + t][f];
        fg.tet = 2 * k + nbr[t][f];
        fg.face = tf[t][f];
        for (int i = 0; i < 4; ++i) fg.perm[i] = pm[t][f][i];
      }
    }
  }
  return g;
}

template <typename F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int copies = argc > 1 ? std::atoi(argv[1]) : 5000;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 10;

  const crf::TriangulatedComplex c =
      crf::build_complex(replicated_fixture(copies));
  std::mt19937_64 gen(7);
  std::vector<double> m(c.edge_count());
  for (double& x : m)
    x = -0.4 + 0.8 * (static_cast<double>(gen() >> 11) / 9007199254740992.0);

  std::vector<crf::Angles6> serial, parallel;
  const double ts = best_of(
      reps, [&] { serial = tet_angles_serial(c, m, crf::AngleMode::Extended); });
  const double tp =
      best_of(reps, [&] { parallel = tet_angles(c, m, crf::AngleMode::Extended); });

  double max_diff = 0.0;
  for (std::size_t t = 0; t < serial.size(); ++t)
    for (int e = 0; e < 6; ++e)
      max_diff =
          std::max(max_diff, std::abs(serial[t][e] - parallel[t][e]));

  std::printf("tets            %d\n", c.tet_count());
  std::printf("serial          %.3f ms\n", ts * 1e3);
  std::printf("parallel        %.3f ms\n", tp * 1e3);
  std::printf("speedup         %.2fx\n", ts / tp);
  std::printf("max |diff|      %.3g\n", max_diff);
  return max_diff == 0.0 ? 0 : 1;
}
