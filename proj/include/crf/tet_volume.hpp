#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "crf/tet_geometry.hpp"

namespace crf {

// Raised when an operation has no implemented formula for the given
// shape/input combination (currently: angle-only volume of the 1-3 and
// 4-0 shapes, whose closed Lobachevsky forms are not part of this
// library; use the length-based entry points instead).
struct unsupported_configuration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Hyperbolic volume from dihedral angles, as a finite sum of
// Lobachevsky values. Supported shapes: 0-4, 2-2, 3-1. The angle
// vector must lie in the closure of the shape's angle polytope
// (entries in [0, pi], ideal vertex sums = pi, hyperideal sums <= pi);
// tolerance 1e-8 on the sums. Throws std::domain_error outside it and
// unsupported_configuration for shapes 1-3 and 4-0.
double tet_volume(TetShape shape, const Angles6& alpha);

// Volume for any shape at any finite length vector (values off the
// realizable set follow the continuous extension). Shapes 1-3 and 4-0
// are evaluated through the covolume line integral below.
double tet_volume_from_lengths(TetShape shape, const EdgeLengths6& l);

// The covolume cov(l) = 2 vol + sum_e alpha_e l_e, extended C1 over
// the whole length space; its gradient is the extended angle vector.
// Shapes 0-4/2-2/3-1 use the closed volume forms; 1-3/4-0 integrate
// the (closed) 1-form sum alpha_e dl_e along the straight segment from
// a precomputed per-shape anchor, adaptive quadrature with absolute
// tolerance ~1e-12.
double covolume(TetShape shape, const EdgeLengths6& l);

struct HessianResult {
  // Entry (i, j) holds d alpha_j / d l_i by central finite differences
  // with step 1e-5 * max(1, |l|_inf); this is the covolume Hessian.
  Eigen::Matrix<double, 6, 6> matrix;
  // Set when an FD probe left the realizable set (the probe then falls
  // back to extended angles and the result is less trustworthy).
  bool conditioning_warning = false;
};

// Requires is_realizable(shape, l); throws std::domain_error otherwise.
HessianResult covolume_hessian(TetShape shape, const EdgeLengths6& l);

}  // namespace crf
