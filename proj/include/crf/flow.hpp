#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crf/complex.hpp"

namespace crf {

enum class StepMode { Fixed, Adaptive };

enum class FlowStatus { Converged, MaxTimeReached, DivergenceSuspected };
const char* to_string(FlowStatus s);

struct FlowConfig {
  StepMode step_mode = StepMode::Fixed;
  double initial_step = 0.01;
  double tolerance_curvature = 1e-9;  // infinity norm on the curvature
  double max_time = 1e4;
  double divergence_bound = 1e3;  // infinity norm on the metric
  int sample_stride = 10;         // trajectory sampling, in accepted steps
  bool normalize_decorations = false;
};

struct FlowState {
  double t = 0.0;
  std::vector<double> l;        // metric
  std::vector<double> k_tilde;  // extended curvature at l
  double h_delta = 0.0;         // accumulated integral of -|k|^2 dt
};

struct FlowResult {
  FlowStatus status = FlowStatus::MaxTimeReached;
  FlowState final;
  std::vector<FlowState> trajectory;  // initial state, samples, final state
  // H at the final metric when every tetrahedron admits the closed-form
  // covolume (no quadrature involved).
  std::optional<double> h_closed_form;
};

// H(l) = sum of covolumes - 2 pi sum of edge lengths. Defined for every
// finite metric; its gradient is the negative of the extended curvature.
double h_value(const TriangulatedComplex& c, const std::vector<double>& m);

// One explicit RK4 step of dl/dt = k_tilde(l). Requires s.k_tilde to be
// the curvature at s.l (it is reused as the first stage). h_delta is
// advanced by the Simpson-weighted sum of -|stage curvature|^2, which
// is nonpositive by construction. Throws on non-finite stage values.
FlowState flow_step(const TriangulatedComplex& c, const FlowState& s,
                    double dt);

// Integrates from m0 until the curvature norm falls below tolerance
// with every tetrahedron realizable (Converged), time reaches max_time
// (MaxTimeReached), or the metric norm reaches divergence_bound
// (DivergenceSuspected). Adaptive mode uses step doubling: a step is
// accepted when the full-step and two-half-step results agree to
// 1e-9 * max(1, |l|_inf), and any step raising h_delta by more than
// 1e-12 is rejected and halved. With normalize_decorations, per-ideal-
// vertex length sums are projected back to their initial values after
// every accepted step.
FlowResult run_flow(const TriangulatedComplex& c,
                    const std::vector<double>& m0, const FlowConfig& cfg);

// l plus the decoration moving its per-ideal-vertex length sums as
// close as possible to target_sums (indexed by vertex class; entries at
// hyperideal classes are ignored).
std::vector<double> normalize_to_vertex_sums(
    const TriangulatedComplex& c, const std::vector<double>& l,
    const std::vector<double>& target_sums);

struct ConvergenceReport {
  std::string status;
  double final_time = 0.0;
  double final_curvature_inf = 0.0;
  std::vector<double> edge_angle_sums;  // 2 pi - K per edge class
  std::vector<int> valences;
  int min_valence = 0;
  bool all_valences_ge_10 = false;
  double total_volume = 0.0;
  std::vector<double> vertex_length_sums;
  double h_delta = 0.0;
  std::optional<double> h_closed_form;
  double max_abs_length = 0.0;  // largest |l|_inf over the trajectory
  std::string caveat;           // divergence caveat when suspected
};

ConvergenceReport convergence_report(const TriangulatedComplex& c,
                                     const FlowResult& r);

// CSV rows for the sampled trajectory: t, l_1..l_m, K_1..K_m, h_delta.
void write_trajectory_csv(std::ostream& os, const FlowResult& r);

}  // namespace crf
