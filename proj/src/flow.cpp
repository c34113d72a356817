#include "crf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "crf/tet_volume.hpp"

namespace crf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double sq_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

std::vector<double> axpy(const std::vector<double>& l, double a,
                         const std::vector<double>& k) {
  std::vector<double> out(l);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * k[i];
  return out;
}

struct RawStep {
  std::vector<double> l;
  double dh = 0.0;  // change of h_delta over the step (nonpositive)
};

// RK4 body without the trailing curvature evaluation; k1 must be the
// curvature at l.
RawStep rk4_body(const TriangulatedComplex& c, const std::vector<double>& l,
                 const std::vector<double>& k1, double t, double dt) {
  auto stage_check = [&](const std::vector<double>& v, int stage) {
    if (!all_finite(v)) {
      std::ostringstream os;
      os << "non-finite metric in RK4 stage " << stage << " at t = " << t;
      throw std::runtime_error(os.str());
    }
  };
  const std::vector<double> k2 =
      extended_curvature(c, axpy(l, 0.5 * dt, k1));
  const std::vector<double> k3 =
      extended_curvature(c, axpy(l, 0.5 * dt, k2));
  const std::vector<double> k4 = extended_curvature(c, axpy(l, dt, k3));
  RawStep out;
  out.l = l;
  for (std::size_t i = 0; i < l.size(); ++i)
    out.l[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  stage_check(out.l, 4);
  out.dh = -dt / 6.0 *
           (sq_norm(k1) + 2.0 * sq_norm(k2) + 2.0 * sq_norm(k3) + sq_norm(k4));
  return out;
}

// Pseudo-inverse projection used to pin ideal vertex length sums: finds
// the decoration w with A^T (l + A w) closest to the target sums.
struct SumNormalizer {
  std::vector<int> ideal;
  Eigen::MatrixXd a;                              // edge x ideal
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_of_ata;   // of a^T a

  SumNormalizer(const TriangulatedComplex& c) {
    for (std::size_t v = 0; v < c.vertices.size(); ++v)
      if (!c.vertices[v].hyperideal) ideal.push_back(static_cast<int>(v));
    const Eigen::MatrixXd all = decoration_matrix(c);
    a.resize(c.edge_count(), ideal.size());
    for (std::size_t k = 0; k < ideal.size(); ++k)
      a.col(k) = all.col(ideal[k]);
    if (!ideal.empty()) {
      svd_of_ata.compute(Eigen::MatrixXd(a.transpose() * a),
                         Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd_of_ata.setThreshold(1e-12);
    }
  }

  void project(const TriangulatedComplex& c, std::vector<double>& l,
               const std::vector<double>& target_sums) const {
    if (ideal.empty()) return;
    const std::vector<double> sums = vertex_length_sums(c, l);
    Eigen::VectorXd rhs(ideal.size());
    for (std::size_t k = 0; k < ideal.size(); ++k)
      rhs(k) = target_sums[ideal[k]] - sums[ideal[k]];
    const Eigen::VectorXd w = svd_of_ata.solve(rhs);
    const Eigen::VectorXd dl = a * w;
    for (int e = 0; e < c.edge_count(); ++e) l[e] += dl(e);
  }
};

void push_sample(std::vector<FlowState>& traj, const FlowState& s) {
  if (!traj.empty() && traj.back().t == s.t) return;
  traj.push_back(s);
}

bool closed_form_covolume(const TriangulatedComplex& c) {
  for (const auto& sh : c.shapes)
    if (sh.hyperideal_count == 1 || sh.hyperideal_count == 4) return false;
  return true;
}

}  // namespace

const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Converged:
      return "Converged";
    case FlowStatus::MaxTimeReached:
      return "MaxTimeReached";
    case FlowStatus::DivergenceSuspected:
      return "DivergenceSuspected";
  }
  return "?";
}

double h_value(const TriangulatedComplex& c, const std::vector<double>& m) {
  double h = 0.0;
  for (int t = 0; t < c.tet_count(); ++t)
    h += covolume(c.shapes[t], c.tet_lengths(m, t));
  for (double x : m) h -= kTwoPi * x;
  return h;
}

FlowState flow_step(const TriangulatedComplex& c, const FlowState& s,
                    double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("flow_step requires dt > 0");
  const RawStep raw = rk4_body(c, s.l, s.k_tilde, s.t, dt);
  FlowState out;
  out.t = s.t + dt;
  out.l = raw.l;
  out.k_tilde = extended_curvature(c, out.l);
  out.h_delta = s.h_delta + raw.dh;
  return out;
}

std::vector<double> normalize_to_vertex_sums(
    const TriangulatedComplex& c, const std::vector<double>& l,
    const std::vector<double>& target_sums) {
  if (target_sums.size() != c.vertices.size())
    throw std::invalid_argument(
        "target sums must have one entry per vertex class");
  std::vector<double> out(l);
  SumNormalizer(c).project(c, out, target_sums);
  return out;
}

FlowResult run_flow(const TriangulatedComplex& c,
                    const std::vector<double>& m0, const FlowConfig& cfg) {
  if (!(cfg.initial_step > 0.0) || !(cfg.max_time >= 0.0) ||
      !(cfg.divergence_bound > 0.0) || !(cfg.tolerance_curvature > 0.0) ||
      cfg.tolerance_curvature >= 1.0 || cfg.sample_stride < 1)
    throw std::invalid_argument("invalid flow configuration");
  if (!all_finite(m0))
    throw std::invalid_argument("initial metric has non-finite entries");

  FlowState s;
  s.t = 0.0;
  s.l = m0;
  s.k_tilde = extended_curvature(c, m0);
  s.h_delta = 0.0;

  FlowResult r;
  r.trajectory.push_back(s);

  const SumNormalizer normalizer(c);
  const std::vector<double> initial_sums = vertex_length_sums(c, m0);

  auto finished = [&](const FlowState& st, FlowStatus* status) {
    if (inf_norm(st.k_tilde) <= cfg.tolerance_curvature &&
        metric_realizable(c, st.l)) {
      *status = FlowStatus::Converged;
      return true;
    }
    if (inf_norm(st.l) >= cfg.divergence_bound) {
      *status = FlowStatus::DivergenceSuspected;
      return true;
    }
    if (st.t >= cfg.max_time) {
      *status = FlowStatus::MaxTimeReached;
      return true;
    }
    return false;
  };

  FlowStatus status;
  long step_count = 0;
  double dt = cfg.initial_step;
  bool done = finished(s, &status);

  while (!done) {
    const double remaining = cfg.max_time - s.t;
    if (remaining <= 1e-15 * std::max(1.0, s.t)) {
      s.t = cfg.max_time;
      status = FlowStatus::MaxTimeReached;
      break;
    }
    double dt_try = std::min(dt, remaining);

    FlowState next;
    if (cfg.step_mode == StepMode::Fixed) {
      next = flow_step(c, s, dt_try);
    } else {
      bool accepted = false;
      while (!accepted) {
        const RawStep full = rk4_body(c, s.l, s.k_tilde, s.t, dt_try);
        const RawStep h1 = rk4_body(c, s.l, s.k_tilde, s.t, 0.5 * dt_try);
        const std::vector<double> k_mid = extended_curvature(c, h1.l);
        const RawStep h2 =
            rk4_body(c, h1.l, k_mid, s.t + 0.5 * dt_try, 0.5 * dt_try);
        double disc = 0.0;
        for (std::size_t i = 0; i < full.l.size(); ++i)
          disc = std::max(disc, std::fabs(full.l[i] - h2.l[i]));
        const double thr = 1e-9 * std::max(1.0, inf_norm(s.l));
        const double dh = h1.dh + h2.dh;
        if (disc < thr && dh <= 1e-12) {
          next.t = s.t + dt_try;
          next.l = h2.l;
          next.k_tilde = extended_curvature(c, next.l);
          next.h_delta = s.h_delta + dh;
          accepted = true;
          dt = (disc < thr / 64.0) ? 2.0 * dt_try : dt_try;
        } else {
          dt_try *= 0.5;
          dt = dt_try;
          if (dt_try < 1e-13) {
            std::ostringstream os;
            os << "time step underflow at t = " << s.t
               << " (last good state retained in trajectory)";
            throw std::runtime_error(os.str());
          }
        }
      }
    }

    if (cfg.normalize_decorations) {
      normalizer.project(c, next.l, initial_sums);
      next.k_tilde = extended_curvature(c, next.l);
    }

    s = next;
    ++step_count;
    done = finished(s, &status);
    if (!done && step_count % cfg.sample_stride == 0)
      r.trajectory.push_back(s);
  }

  push_sample(r.trajectory, s);
  r.final = s;
  r.status = status;
  if (closed_form_covolume(c)) r.h_closed_form = h_value(c, s.l);
  return r;
}

ConvergenceReport convergence_report(const TriangulatedComplex& c,
                                     const FlowResult& r) {
  ConvergenceReport rep;
  rep.status = to_string(r.status);
  rep.final_time = r.final.t;
  rep.final_curvature_inf = inf_norm(r.final.k_tilde);
  rep.edge_angle_sums.reserve(r.final.k_tilde.size());
  for (double k : r.final.k_tilde) rep.edge_angle_sums.push_back(kTwoPi - k);
  rep.valences = edge_valences(c);
  rep.min_valence = rep.valences.empty()
                        ? 0
                        : *std::min_element(rep.valences.begin(),
                                            rep.valences.end());
  rep.all_valences_ge_10 = !rep.valences.empty() && rep.min_valence >= 10;
  rep.total_volume = total_volume(c, r.final.l);
  rep.vertex_length_sums = vertex_length_sums(c, r.final.l);
  rep.h_delta = r.final.h_delta;
  rep.h_closed_form = r.h_closed_form;
  double m = 0.0;
  for (const auto& st : r.trajectory) m = std::max(m, inf_norm(st.l));
  rep.max_abs_length = m;
  if (r.status == FlowStatus::DivergenceSuspected)
    rep.caveat =
        "metric norm reached the divergence bound; the flow dichotomy only "
        "guarantees divergence along a subsequence, so absence of a "
        "zero-curvature structure is suspected, not established";
  return rep;
}

void write_trajectory_csv(std::ostream& os, const FlowResult& r) {
  const std::size_t m = r.final.l.size();
  os << "t";
  for (std::size_t i = 1; i <= m; ++i) os << ",l_" << i;
  for (std::size_t i = 1; i <= m; ++i) os << ",K_" << i;
  os << ",h_delta\n";
  char buf[32];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
  };
  for (const auto& s : r.trajectory) {
    put(s.t);
    for (double x : s.l) {
      os << ',';
      put(x);
    }
    for (double x : s.k_tilde) {
      os << ',';
      put(x);
    }
    os << ',';
    put(s.h_delta);
    os << '\n';
  }
}

}  // namespace crf
