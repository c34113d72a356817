#include "crf/tet_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "crf/exp_poly.hpp"

namespace crf {
namespace {

constexpr double kPhiSaturation = 1e300;
// Strict-path guard: |phi| must stay below 1 - kStrictMargin.
constexpr double kStrictMargin = 1e-14;
// Wall tolerance for the Boundary tags of classify_degeneration.
constexpr double kBoundaryEps = 1e-9;

void check_shape(TetShape shape) {
  if (shape.hyperideal_count < 0 || shape.hyperideal_count > 4) {
    throw std::invalid_argument("tet shape out of range");
  }
}

void check_finite(const EdgeLengths6& l) {
  for (int e = 0; e < 6; ++e) {
    if (!std::isfinite(l[e])) {
      throw std::domain_error("edge length " + std::to_string(e) +
                              " is not finite");
    }
  }
}

}  // namespace

std::string TetShape::name() const {
  return std::to_string(hyperideal_count) + "-" +
         std::to_string(4 - hyperideal_count);
}

const char* to_string(DegenerationClass c) {
  switch (c) {
    case DegenerationClass::InteriorL: return "InteriorL";
    case DegenerationClass::Omega1: return "Omega1";
    case DegenerationClass::Omega2: return "Omega2";
    case DegenerationClass::Omega3: return "Omega3";
    case DegenerationClass::BoundaryX1: return "BoundaryX1";
    case DegenerationClass::BoundaryX2: return "BoundaryX2";
    case DegenerationClass::BoundaryX3: return "BoundaryX3";
  }
  return "?";
}

VertexLink theta_chain(TetShape shape, const EdgeLengths6& l) {
  check_shape(shape);
  check_finite(l);
  for (int e = 0; e < 6; ++e) {
    if (shape.edge_hh(e) && l[e] <= 0.0) {
      throw std::domain_error(
          "theta_chain: hyperideal-hyperideal edge " + std::to_string(e) +
          " must have positive length");
    }
  }

  VertexLink link;
  for (int v = 0; v < 4; ++v) {
    const bool vh = shape.vertex_hyperideal(v);
    link.hyperbolic[v] = vh;
    int others[3], n = 0;
    for (int x = 0; x < 4; ++x) {
      if (x != v) others[n++] = x;
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        int p = others[a], q = others[b];
        if (shape.vertex_hyperideal(q) && !shape.vertex_hyperideal(p)) {
          std::swap(p, q);  // p is the hyperideal one in mixed cases
        }
        const bool ph = shape.vertex_hyperideal(p);
        const bool qh = shape.vertex_hyperideal(q);
        const double lpq = l[kEdgeIndex[p][q]];
        const double lvp = l[kEdgeIndex[v][p]];
        const double lvq = l[kEdgeIndex[v][q]];
        double theta;
        if (vh) {
          // Hyperbolic side of a truncated vertex's link triangle.
          double ct;
          if (ph && qh) {
            ct = (std::cosh(lpq) + std::cosh(lvp) * std::cosh(lvq)) /
                 (std::sinh(lvp) * std::sinh(lvq));
          } else if (ph) {
            ct = (std::exp(lpq) + std::exp(lvq) * std::cosh(lvp)) /
                 (std::exp(lvq) * std::sinh(lvp));
          } else {
            ct = 2.0 * std::exp(lpq - lvp - lvq) + 1.0;
          }
          theta = std::acosh(std::max(1.0, ct));
        } else {
          // Euclidean horocyclic side of an ideal vertex's link; the
          // chains give its square.
          double t2;
          if (ph && qh) {
            t2 = 2.0 * (std::cosh(lpq) + std::cosh(lvp - lvq)) *
                 std::exp(-lvp - lvq);
          } else if (ph) {
            t2 = (std::exp(lpq) + std::exp(lvq - lvp)) *
                 std::exp(-lvp - lvq);
          } else {
            t2 = std::exp(lpq - lvp - lvq);
          }
          theta = std::sqrt(t2);
        }
        if (!std::isfinite(theta)) {
          throw std::runtime_error(
              "theta_chain: exponential overflow at vertex " +
              std::to_string(v) + ", edge pair {" + std::to_string(p) + "," +
              std::to_string(q) + "}");
        }
        link.theta[v][kEdgeIndex[p][q]] = theta;
      }
    }
  }
  return link;
}

std::array<double, 6> phi(TetShape shape, const EdgeLengths6& l) {
  check_shape(shape);
  check_finite(l);
  for (int e = 0; e < 6; ++e) {
    if (shape.edge_hh(e) && l[e] < 0.0) {
      throw std::domain_error(
          "phi: hyperideal-hyperideal edge " + std::to_string(e) +
          " must be nonnegative (closed ambient box)");
    }
  }
  const auto& table = phi_table(shape.hyperideal_count);
  std::array<double, 6> out;
  for (int e = 0; e < 6; ++e) {
    const PhiParts& pp = table[e];
    const ExpPoly::Scaled n = pp.n.eval_scaled(l);
    const ExpPoly::Scaled f1 = pp.f1.eval_scaled(l);
    const ExpPoly::Scaled f2 = pp.f2.eval_scaled(l);
    const double mant = n.mantissa / std::sqrt(f1.mantissa * f2.mantissa);
    const double shift = n.log_scale - 0.5 * (f1.log_scale + f2.log_scale);
    double v;
    if (shift > 690.0) {
      v = (mant > 0 ? kPhiSaturation : -kPhiSaturation);
    } else {
      v = mant * std::exp(shift);
      v = std::clamp(v, -kPhiSaturation, kPhiSaturation);
    }
    out[e] = v;
  }
  return out;
}

bool is_realizable(TetShape shape, const EdgeLengths6& l) {
  if (shape.hyperideal_count < 0 || shape.hyperideal_count > 4) return false;
  for (int e = 0; e < 6; ++e) {
    if (!std::isfinite(l[e])) return false;
    if (shape.edge_hh(e) && l[e] <= 0.0) return false;
  }
  const std::array<double, 6> p = phi(shape, l);
  for (int e = 0; e < 6; ++e) {
    if (!(p[e] > -1.0 && p[e] < 1.0)) return false;
  }
  return true;
}

Angles6 dihedral_angles_strict(TetShape shape, const EdgeLengths6& l) {
  check_shape(shape);
  check_finite(l);
  for (int e = 0; e < 6; ++e) {
    if (shape.edge_hh(e) && l[e] <= 0.0) {
      throw std::domain_error(
          "strict angles: hyperideal-hyperideal edge " + std::to_string(e) +
          " must be positive");
    }
  }
  const std::array<double, 6> p = phi(shape, l);
  Angles6 a;
  for (int e = 0; e < 6; ++e) {
    if (!(std::fabs(p[e]) < 1.0 - kStrictMargin)) {
      throw std::domain_error("strict angles: configuration degenerate at "
                              "edge " + std::to_string(e) +
                              " (phi = " + std::to_string(p[e]) + ")");
    }
    a[e] = std::acos(p[e]);
  }
  return a;
}

EdgeLengths6 clamp_truncated_edges(TetShape shape, EdgeLengths6 l) {
  check_shape(shape);
  for (int e = 0; e < 6; ++e) {
    if (shape.edge_hh(e)) l[e] = std::max(0.0, l[e]);
  }
  return l;
}

Angles6 dihedral_angles_extended(TetShape shape, const EdgeLengths6& l) {
  check_shape(shape);
  check_finite(l);
  const std::array<double, 6> p = phi(shape, clamp_truncated_edges(shape, l));
  Angles6 a;
  for (int e = 0; e < 6; ++e) {
    a[e] = std::acos(std::clamp(p[e], -1.0, 1.0));
  }
  return a;
}

DegenerationClass classify_degeneration(TetShape shape,
                                        const EdgeLengths6& l) {
  check_shape(shape);
  check_finite(l);
  for (int e = 0; e < 6; ++e) {
    if (shape.edge_hh(e) && l[e] < 0.0) {
      throw std::domain_error(
          "classify_degeneration: edge " + std::to_string(e) +
          " outside the closed ambient box");
    }
  }
  const std::array<double, 6> p = phi(shape, l);
  // Pair minima over the three opposite-edge pairs {12,34}, {13,24},
  // {14,23}; on a degenerate component both phis of one pair sit at or
  // below -1 while the other four sit at or above +1.
  double pair_min[3];
  for (int w = 0; w < 3; ++w) {
    pair_min[w] = std::min(p[w], p[kOppositeEdge[w]]);
  }
  for (int w = 0; w < 3; ++w) {
    if (pair_min[w] < -1.0 - kBoundaryEps) {
      return static_cast<DegenerationClass>(
          static_cast<int>(DegenerationClass::Omega1) + w);
    }
  }
  for (int w = 0; w < 3; ++w) {
    if (std::fabs(pair_min[w] + 1.0) <= kBoundaryEps) {
      return static_cast<DegenerationClass>(
          static_cast<int>(DegenerationClass::BoundaryX1) + w);
    }
  }
  bool interior = true;
  for (int e = 0; e < 6; ++e) {
    if (!(p[e] > -1.0 && p[e] < 1.0)) interior = false;
  }
  if (interior) return DegenerationClass::InteriorL;
  // Remaining corner cases (some phi at or above +1 without the paired
  // phi crossing -1 by more than the tolerance): report the nearest
  // wall.
  int best = 0;
  for (int w = 1; w < 3; ++w) {
    if (pair_min[w] < pair_min[best]) best = w;
  }
  return static_cast<DegenerationClass>(
      static_cast<int>(DegenerationClass::BoundaryX1) + best);
}

}  // namespace crf
