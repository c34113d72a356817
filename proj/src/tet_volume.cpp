#include "crf/tet_volume.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "crf/lobachevsky.hpp"

namespace crf {
namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kAngleSumTol = 1e-8;

// Volume of the 4-0 reference configuration l = (1,...,1), obtained by
// integrating the Schlafli 1-form from the small-length octahedral
// limit 8 lob(pi/4); cross-checked against an independent angle-space
// integration from the ideal limit 3 lob(pi/3) (agreement 3e-12).
constexpr double kVol40Anchor = 2.7234886822499016;

double lob(double x) { return lobachevsky(x); }

void check_angle_domain(TetShape shape, const Angles6& a) {
  for (int e = 0; e < 6; ++e) {
    if (!(a[e] >= -kAngleSumTol && a[e] <= kPi + kAngleSumTol)) {
      throw std::domain_error("tet_volume: angle " + std::to_string(e) +
                              " outside [0, pi]");
    }
  }
  for (int v = 0; v < 4; ++v) {
    double s = 0.0;
    for (int x = 0; x < 4; ++x) {
      if (x != v) s += a[kEdgeIndex[v][x]];
    }
    if (shape.vertex_hyperideal(v)) {
      if (s > kPi + kAngleSumTol) {
        throw std::domain_error(
            "tet_volume: angle sum at hyperideal vertex " +
            std::to_string(v) + " exceeds pi");
      }
    } else if (std::fabs(s - kPi) > kAngleSumTol) {
      throw std::domain_error("tet_volume: angle sum at ideal vertex " +
                              std::to_string(v) + " is not pi");
    }
  }
}

// Vertex group of the 3-1 volume: x, y are the angles on the two
// hyperideal-hyperideal edges at a hyperideal vertex, z the angle on
// its edge to the ideal vertex.
double group31(double x, double y, double z) {
  return lob((kPi + x + y - z) / 2) + lob((kPi + x - y - z) / 2) +
         lob((kPi - x + y - z) / 2) + lob((kPi - x - y - z) / 2);
}

// Vertex group of the 2-2 volume: x, y are the angles on the two
// hyperideal-ideal edges at a hyperideal vertex, z the angle on the
// hyperideal-hyperideal edge.
double group22(double x, double y, double z) {
  return lob((kPi - x - y - z) / 2) + lob((kPi - x - y + z) / 2);
}

// Adaptive Simpson quadrature, plain recursion on the error estimate.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb,
                        double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * eps, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double eps) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return adaptive_simpson(f, a, b, fa, fm, fb, eps, 48);
}

// cov at the per-shape quadrature anchor for the shapes without a
// closed volume form.
EdgeLengths6 quad_anchor(int k) {
  if (k == 1) return {20.0, 20.0, 20.0, 0.0, 0.0, 0.0};
  return {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
}

double quad_anchor_cov(TetShape shape) {
  if (shape.hyperideal_count == 1) {
    // Hyperideal-ideal lengths 20, ideal-ideal lengths 0: the truncated
    // vertex is 20 deep, the tet is regular ideal to machine precision
    // (angle defect ~ e^{-40}); vol = 3 lob(pi/3) and the linear term
    // is 3 * 20 * pi/3.
    return 6.0 * lob(kPi / 3) + 20.0 * kPi;
  }
  const EdgeLengths6 a = quad_anchor(4);
  const Angles6 al = dihedral_angles_extended(TetShape{4}, a);
  double lin = 0.0;
  for (int e = 0; e < 6; ++e) lin += al[e] * a[e];
  return 2.0 * kVol40Anchor + lin;
}

double covolume_by_quadrature(TetShape shape, const EdgeLengths6& l) {
  const EdgeLengths6 a = quad_anchor(shape.hyperideal_count);
  EdgeLengths6 d;
  double len2 = 0.0;
  for (int e = 0; e < 6; ++e) {
    d[e] = l[e] - a[e];
    len2 += d[e] * d[e];
  }
  if (len2 == 0.0) return quad_anchor_cov(shape);
  auto f = [&](double s) {
    EdgeLengths6 x;
    for (int e = 0; e < 6; ++e) x[e] = a[e] + s * d[e];
    const Angles6 al = dihedral_angles_extended(shape, x);
    double v = 0.0;
    for (int e = 0; e < 6; ++e) v += al[e] * d[e];
    return v;
  };
  return quad_anchor_cov(shape) + integrate(f, 0.0, 1.0, 1e-13);
}

}  // namespace

double tet_volume(TetShape shape, const Angles6& alpha) {
  const int k = shape.hyperideal_count;
  if (k == 1 || k == 4) {
    throw unsupported_configuration(
        "tet_volume: no angle-only closed form for shape " + shape.name() +
        "; use tet_volume_from_lengths");
  }
  check_angle_domain(shape, alpha);
  const double a12 = alpha[0], a13 = alpha[1], a14 = alpha[2];
  const double a23 = alpha[3], a24 = alpha[4], a34 = alpha[5];
  if (k == 0) {
    return 0.5 * (lob(a12) + lob(a13) + lob(a14) + lob(a23) + lob(a24) +
                  lob(a34));
  }
  if (k == 2) {
    return 0.5 * (lob(a13) + lob(a23) + lob(a14) + lob(a24) +
                  group22(a13, a14, a12) + group22(a23, a24, a12));
  }
  // k == 3
  return 0.5 * (lob(a14) + lob(a24) + lob(a34) + group31(a12, a13, a14) +
                group31(a12, a23, a24) + group31(a13, a23, a34));
}

double covolume(TetShape shape, const EdgeLengths6& l) {
  const int k = shape.hyperideal_count;
  const EdgeLengths6 lp = clamp_truncated_edges(shape, l);
  if (k == 1 || k == 4) {
    return covolume_by_quadrature(shape, lp);
  }
  const Angles6 a = dihedral_angles_extended(shape, lp);
  double lin = 0.0;
  for (int e = 0; e < 6; ++e) lin += a[e] * lp[e];
  return 2.0 * tet_volume(shape, a) + lin;
}

double tet_volume_from_lengths(TetShape shape, const EdgeLengths6& l) {
  const int k = shape.hyperideal_count;
  const EdgeLengths6 lp = clamp_truncated_edges(shape, l);
  const Angles6 a = dihedral_angles_extended(shape, lp);
  if (k == 1 || k == 4) {
    double lin = 0.0;
    for (int e = 0; e < 6; ++e) lin += a[e] * lp[e];
    return 0.5 * (covolume_by_quadrature(shape, lp) - lin);
  }
  return tet_volume(shape, a);
}

HessianResult covolume_hessian(TetShape shape, const EdgeLengths6& l) {
  if (!is_realizable(shape, l)) {
    throw std::domain_error(
        "covolume_hessian: configuration is not realizable");
  }
  double linf = 0.0;
  for (int e = 0; e < 6; ++e) linf = std::max(linf, std::fabs(l[e]));
  const double h = 1e-5 * std::max(1.0, linf);

  HessianResult r;
  for (int i = 0; i < 6; ++i) {
    EdgeLengths6 lp = l, lm = l;
    lp[i] += h;
    lm[i] -= h;
    if (!is_realizable(shape, lp) || !is_realizable(shape, lm)) {
      r.conditioning_warning = true;
    }
    const Angles6 ap = dihedral_angles_extended(shape, lp);
    const Angles6 am = dihedral_angles_extended(shape, lm);
    for (int j = 0; j < 6; ++j) {
      r.matrix(i, j) = (ap[j] - am[j]) / (2.0 * h);
    }
  }
  return r;
}

}  // namespace crf
