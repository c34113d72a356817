#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "crf/flow.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace crf;
using oracle::kPi;

namespace {

TriangulatedComplex fixture() {
  return build_complex(
      load_gluing_file(std::string(CRF_TEST_DATA_DIR) + "/m004.json"));
}

FlowState state_at(const TriangulatedComplex& c, std::vector<double> l) {
  FlowState s;
  s.l = std::move(l);
  s.k_tilde = extended_curvature(c, s.l);
  return s;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

TEST_CASE("a flat metric is a fixed point of the step") {
  const TriangulatedComplex c = fixture();
  const FlowState s = state_at(c, {0.05, 0.05});
  CHECK(inf_norm(s.k_tilde) < 1e-13);
  const FlowState next = flow_step(c, s, 0.25);
  CHECK(next.t == doctest::Approx(0.25));
  CHECK(std::fabs(next.l[0] - 0.05) < 1e-13);
  CHECK(std::fabs(next.l[1] - 0.05) < 1e-13);
  CHECK(next.h_delta <= 0.0);
  CHECK(next.h_delta > -1e-24);
}

TEST_CASE("starting at equilibrium converges immediately") {
  const TriangulatedComplex c = fixture();
  const FlowResult r = run_flow(c, {0.0, 0.0}, {});
  CHECK(r.status == FlowStatus::Converged);
  CHECK(r.final.t == 0.0);
  CHECK(r.trajectory.size() == 1);
}

TEST_CASE("flow on the fixture reaches the complete structure") {
  const TriangulatedComplex c = fixture();
  FlowConfig cfg;
  cfg.tolerance_curvature = 1e-11;
  const FlowResult r = run_flow(c, {0.3, -0.2}, cfg);
  REQUIRE(r.status == FlowStatus::Converged);
  CHECK(inf_norm(r.final.k_tilde) <= 1e-11);

  // The curvature sums to zero edge-wise for this gluing, so the total
  // length is a conserved quantity and the limit is the balanced point.
  CHECK(r.final.l[0] + r.final.l[1] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(r.final.l[0] == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(r.final.l[1] == doctest::Approx(0.05).epsilon(1e-6));

  for (const Angles6& a : tet_angles(c, r.final.l, AngleMode::Strict))
    for (int i = 0; i < 6; ++i)
      CHECK(a[i] == doctest::Approx(kPi / 3).epsilon(1e-6));

  REQUIRE(r.h_closed_form.has_value());
  CHECK(*r.h_closed_form ==
        doctest::Approx(h_value(c, r.final.l)).epsilon(1e-12));
}

TEST_CASE("h decreases along the flow and tracks its integral") {
  const TriangulatedComplex c = fixture();
  FlowConfig cfg;
  cfg.sample_stride = 1;
  const FlowResult r = run_flow(c, {0.4, -0.35}, cfg);
  REQUIRE(r.status == FlowStatus::Converged);
  REQUIRE(r.trajectory.size() > 10);

  double prev = 0.0;
  for (const FlowState& s : r.trajectory) {
    CHECK(s.h_delta <= prev + 1e-12);
    prev = s.h_delta;
    // The stage-weighted accumulator follows the actual change of H to
    // the integrator's order (error ~ 6e-6 over this run at dt 0.01).
    const double dh = h_value(c, s.l) - h_value(c, r.trajectory.front().l);
    CHECK(std::fabs(dh - s.h_delta) < 2e-5);
  }
  CHECK(r.final.h_delta < -1e-3);

  // The tracking error is fourth order in the step.
  auto err_at = [&](double dt) {
    FlowConfig f;
    f.initial_step = dt;
    f.max_time = 2.0;
    f.tolerance_curvature = 1e-15;
    const FlowResult rr = run_flow(c, {0.4, -0.35}, f);
    const double dh = h_value(c, rr.final.l) - h_value(c, {0.4, -0.35});
    return std::fabs(dh - rr.final.h_delta);
  };
  const double e1 = err_at(0.01), e2 = err_at(0.001);
  CHECK(e2 < 1e-8);
  CHECK(e2 < 1e-3 * e1);
}

TEST_CASE("the h gradient is the negative curvature") {
  const TriangulatedComplex c = fixture();
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 25; ++rep) {
    const std::vector<double> m{oracle::urand(gen, -0.5, 0.5),
                                oracle::urand(gen, -0.5, 0.5)};
    const std::vector<double> k = extended_curvature(c, m);
    const double h = 1e-6;
    for (int i = 0; i < 2; ++i) {
      std::vector<double> p = m, q = m;
      p[i] += h;
      q[i] -= h;
      const double fd = (h_value(c, p) - h_value(c, q)) / (2 * h);
      CHECK(fd == doctest::Approx(-k[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("flows from decoration-equivalent starts stay equivalent") {
  const TriangulatedComplex c = fixture();
  const std::vector<double> m0{0.3, -0.2};
  const std::vector<double> m1 = apply_decoration(c, m0, {0.21});
  FlowConfig cfg;
  cfg.max_time = 1.0;
  cfg.tolerance_curvature = 1e-15;  // force the full unit of time
  const FlowResult a = run_flow(c, m0, cfg);
  const FlowResult b = run_flow(c, m1, cfg);
  CHECK(a.status == FlowStatus::MaxTimeReached);
  CHECK(b.status == FlowStatus::MaxTimeReached);
  const DecorationFit fit = decoration_residual(c, b.final.l, a.final.l);
  CHECK(fit.residual < 1e-7);
  CHECK(fit.w[0] == doctest::Approx(0.21).epsilon(1e-7));
  for (int i = 0; i < 2; ++i)
    CHECK(b.final.l[i] - 2 * 0.21 ==
          doctest::Approx(a.final.l[i]).epsilon(1e-7));
}

TEST_CASE("per-cusp length sums are conserved without normalization") {
  const TriangulatedComplex c = fixture();
  FlowConfig cfg;
  cfg.initial_step = 1e-3;
  cfg.max_time = 1.0;
  cfg.tolerance_curvature = 1e-15;
  const FlowResult r = run_flow(c, {0.3, -0.2}, cfg);
  const double s0 = vertex_length_sums(c, r.trajectory.front().l)[0];
  const double s1 = vertex_length_sums(c, r.final.l)[0];
  CHECK(std::fabs(s1 - s0) < 1e-8);
}

TEST_CASE("normalization pins the length sums exactly") {
  const TriangulatedComplex c = fixture();
  FlowConfig cfg;
  cfg.normalize_decorations = true;
  cfg.max_time = 2.0;
  cfg.tolerance_curvature = 1e-15;
  const FlowResult r = run_flow(c, {0.5, -0.1}, cfg);
  const double s0 = vertex_length_sums(c, {0.5, -0.1})[0];
  for (const FlowState& s : r.trajectory)
    CHECK(vertex_length_sums(c, s.l)[0] ==
          doctest::Approx(s0).epsilon(1e-12));
}

TEST_CASE("normalize_to_vertex_sums projects onto the target") {
  const TriangulatedComplex c = fixture();
  const std::vector<double> l{0.7, 0.1};
  const std::vector<double> out =
      normalize_to_vertex_sums(c, l, {0.2});
  CHECK(vertex_length_sums(c, out)[0] == doctest::Approx(0.2).epsilon(1e-12));
  // Only a decoration was added.
  CHECK(decoration_residual(c, out, l).residual < 1e-12);
}

TEST_CASE("divergence and time-limit statuses") {
  const TriangulatedComplex c = fixture();
  SUBCASE("metric already outside the bound") {
    FlowConfig cfg;
    cfg.divergence_bound = 0.1;
    const FlowResult r = run_flow(c, {0.3, -0.2}, cfg);
    CHECK(r.status == FlowStatus::DivergenceSuspected);
    CHECK(r.final.t == 0.0);
    const ConvergenceReport rep = convergence_report(c, r);
    CHECK_FALSE(rep.caveat.empty());
  }
  SUBCASE("zero time budget") {
    FlowConfig cfg;
    cfg.max_time = 0.0;
    const FlowResult r = run_flow(c, {0.3, -0.2}, cfg);
    CHECK(r.status == FlowStatus::MaxTimeReached);
    CHECK(r.final.t == 0.0);
  }
}

TEST_CASE("config validation") {
  const TriangulatedComplex c = fixture();
  FlowConfig cfg;
  cfg.initial_step = 0.0;
  CHECK_THROWS_AS((void)run_flow(c, {0.0, 0.0}, cfg),
                  std::invalid_argument);
  cfg = {};
  cfg.tolerance_curvature = 0.0;
  CHECK_THROWS_AS((void)run_flow(c, {0.0, 0.0}, cfg),
                  std::invalid_argument);
  cfg = {};
  CHECK_THROWS_AS((void)run_flow(c, {0.3, std::nan("")}, cfg),
                  std::invalid_argument);
}

TEST_CASE("adaptive stepping matches the fixed-step limit") {
  const TriangulatedComplex c = fixture();
  FlowConfig fixed;
  fixed.tolerance_curvature = 1e-11;
  FlowConfig adaptive = fixed;
  adaptive.step_mode = StepMode::Adaptive;
  adaptive.initial_step = 0.005;
  const FlowResult a = run_flow(c, {0.3, -0.2}, fixed);
  const FlowResult b = run_flow(c, {0.3, -0.2}, adaptive);
  REQUIRE(a.status == FlowStatus::Converged);
  REQUIRE(b.status == FlowStatus::Converged);
  CHECK(std::fabs(a.final.l[0] - b.final.l[0]) < 1e-8);
  CHECK(std::fabs(a.final.l[1] - b.final.l[1]) < 1e-8);
}

TEST_CASE("the step is fourth order") {
  const TriangulatedComplex c = fixture();
  const FlowState s = state_at(c, {0.3, -0.2});
  // Richardson: error(dt) ~ C dt^5 locally, so halving dt shrinks the
  // defect against the doubled-half reference by about 2^5.
  auto defect = [&](double dt) {
    const FlowState full = flow_step(c, s, dt);
    const FlowState half = flow_step(c, flow_step(c, s, dt / 2), dt / 2);
    return std::fabs(full.l[0] - half.l[0]) +
           std::fabs(full.l[1] - half.l[1]);
  };
  const double r = defect(0.4) / defect(0.2);
  CHECK(r > 8.0);
  CHECK(r < 128.0);
}

TEST_CASE("trajectory csv layout") {
  const TriangulatedComplex c = fixture();
  FlowConfig cfg;
  cfg.sample_stride = 5;
  const FlowResult r = run_flow(c, {0.3, -0.2}, cfg);
  std::ostringstream os;
  write_trajectory_csv(os, r);
  std::istringstream in(os.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "t,l_1,l_2,K_1,K_2,h_delta");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  CHECK(rows == r.trajectory.size());
  // The header round-trips the sampled states at full precision.
  CHECK(os.str().find("0.29999999999999999") != std::string::npos);
}

TEST_CASE("convergence report contents") {
  const TriangulatedComplex c = fixture();
  const FlowResult r = run_flow(c, {0.3, -0.2}, {});
  const ConvergenceReport rep = convergence_report(c, r);
  CHECK(rep.status == "Converged");
  CHECK(rep.final_curvature_inf <= 1e-9);
  REQUIRE(rep.edge_angle_sums.size() == 2);
  CHECK(rep.edge_angle_sums[0] == doctest::Approx(2 * kPi).epsilon(1e-9));
  CHECK(rep.valences == std::vector<int>{6, 6});
  CHECK(rep.min_valence == 6);
  CHECK_FALSE(rep.all_valences_ge_10);
  CHECK(rep.total_volume ==
        doctest::Approx(2.02988321281930725004240510855).epsilon(1e-9));
  // At a zero-curvature point the angle sums are 2 pi, so the length
  // terms cancel and H is twice the total volume.
  REQUIRE(rep.h_closed_form.has_value());
  CHECK(*rep.h_closed_form == doctest::Approx(4.0597664256386145).epsilon(1e-9));
  CHECK(rep.max_abs_length >= 0.3);
  CHECK(rep.caveat.empty());
}
