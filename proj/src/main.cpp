#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "CLI11.hpp"
#include "json.hpp"

#include "crf/complex.hpp"
#include "crf/flow.hpp"
#include "crf/tet_volume.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr double kEigenZeroTol = 1e-8;

bool edge_class_hh(const crf::TriangulatedComplex& c, int e) {
  return c.vertices[c.edges[e].endpoint_class[0]].hyperideal &&
         c.vertices[c.edges[e].endpoint_class[1]].hyperideal;
}

std::vector<double> read_metric_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metric file " + path);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::replace(tok.begin(), tok.end(), ',', ' ');
    std::istringstream ts(tok);
    double x;
    while (ts >> x) out.push_back(x);
    if (!ts.eof())
      throw std::runtime_error("metric file " + path +
                               " has a non-numeric entry: " + tok);
  }
  return out;
}

bool try_parse_inline(const std::string& src, std::vector<double>* out) {
  std::string s(src);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> vals;
  double x;
  while (in >> x) vals.push_back(x);
  if (!in.eof() || vals.empty()) return false;
  *out = std::move(vals);
  return true;
}

// Metric sources: "uniform:c", "random:seed,low,high", "file:path", an
// inline comma/space separated list, or (fallback) a bare file path.
// Random metrics sample each edge class uniformly from [low, high] with
// a fixed portable generator; classes joining two hyperideal vertex
// classes are shifted to [0.05, 0.05 + high - low] so the start lies in
// the admissible box.
std::vector<double> make_metric(const crf::TriangulatedComplex& c,
                                const std::string& src) {
  std::vector<double> m;
  if (src.rfind("uniform:", 0) == 0) {
    std::vector<double> one;
    if (!try_parse_inline(src.substr(8), &one) || one.size() != 1)
      throw std::runtime_error("bad metric source \"" + src +
                               "\" (want uniform:c)");
    m.assign(c.edge_count(), one[0]);
  } else if (src.rfind("random:", 0) == 0) {
    std::vector<double> p;
    if (!try_parse_inline(src.substr(7), &p) || p.size() != 3 ||
        !(p[1] <= p[2]))
      throw std::runtime_error("bad metric source \"" + src +
                               "\" (want random:seed,low,high)");
    const double low = p[1], high = p[2];
    std::mt19937_64 gen(static_cast<std::uint64_t>(p[0]));
    for (int e = 0; e < c.edge_count(); ++e) {
      const double x =
          static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
      const double u = low + (high - low) * x;
      m.push_back(edge_class_hh(c, e) ? 0.05 + (u - low) : u);
    }
  } else if (src.rfind("file:", 0) == 0) {
    m = read_metric_file(src.substr(5));
  } else if (!try_parse_inline(src, &m)) {
    m = read_metric_file(src);
  }
  if (static_cast<int>(m.size()) != c.edge_count()) {
    std::ostringstream os;
    os << "metric has " << m.size() << " entries, complex has "
       << c.edge_count() << " edge classes";
    throw std::runtime_error(os.str());
  }
  return m;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

json vertex_detail(const crf::TriangulatedComplex& c) {
  json out = json::array();
  for (std::size_t v = 0; v < c.vertices.size(); ++v) {
    out.push_back({{"index", v},
                   {"type", c.vertices[v].hyperideal ? "hyperideal" : "ideal"},
                   {"incidences", c.vertices[v].members.size()}});
  }
  return out;
}

int cmd_validate(const std::string& path) {
  json rep;
  rep["schema"] = 1;
  std::vector<std::string> errors;
  try {
    const crf::GluingSpec g = crf::load_gluing_file(path);
    errors = crf::validate_gluing(g);
    if (errors.empty()) {
      const crf::TriangulatedComplex c = crf::build_complex(g);
      const std::vector<int> val = crf::edge_valences(c);
      rep["valid"] = true;
      rep["tets"] = c.tet_count();
      rep["edge_classes"] = c.edge_count();
      rep["vertex_classes"] = c.vertices.size();
      rep["valences"] = val;
      rep["min_valence"] =
          val.empty() ? 0 : *std::min_element(val.begin(), val.end());
      rep["all_valences_ge_10"] =
          !val.empty() &&
          *std::min_element(val.begin(), val.end()) >= 10;
      rep["vertices"] = vertex_detail(c);
      rep["errors"] = json::array();
      emit(rep);
      return 0;
    }
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  rep["valid"] = false;
  rep["errors"] = errors;
  emit(rep);
  return 1;
}

json tet_classification(const crf::TriangulatedComplex& c,
                        const std::vector<double>& m) {
  json tets = json::array();
  for (int t = 0; t < c.tet_count(); ++t) {
    const crf::EdgeLengths6 l = c.tet_lengths(m, t);
    const crf::EdgeLengths6 lp = crf::clamp_truncated_edges(c.shapes[t], l);
    json jt;
    jt["tet"] = t;
    jt["shape"] = c.shapes[t].name();
    jt["class"] =
        crf::to_string(crf::classify_degeneration(c.shapes[t], lp));
    const std::array<double, 6> ph = crf::phi(c.shapes[t], lp);
    jt["phi"] = std::vector<double>(ph.begin(), ph.end());
    tets.push_back(jt);
  }
  return tets;
}

int cmd_curvature(const crf::TriangulatedComplex& c,
                  const std::vector<double>& m) {
  json rep;
  rep["schema"] = 1;
  rep["realizable"] = crf::metric_realizable(c, m);
  rep["curvature"] = crf::extended_curvature(c, m);
  rep["tets"] = tet_classification(c, m);
  emit(rep);
  return 0;
}

int cmd_volume(const crf::TriangulatedComplex& c,
               const std::vector<double>& m) {
  json rep;
  rep["schema"] = 1;
  rep["realizable"] = crf::metric_realizable(c, m);
  std::vector<double> vols;
  for (int t = 0; t < c.tet_count(); ++t)
    vols.push_back(
        crf::tet_volume_from_lengths(c.shapes[t], c.tet_lengths(m, t)));
  double total = 0.0;
  for (double v : vols) total += v;
  rep["total_volume"] = total;
  rep["tet_volumes"] = vols;
  emit(rep);
  return 0;
}

int cmd_classify(const crf::TriangulatedComplex& c,
                 const std::vector<double>& m) {
  json rep;
  rep["schema"] = 1;
  rep["realizable"] = crf::metric_realizable(c, m);
  rep["tets"] = tet_classification(c, m);
  emit(rep);
  return 0;
}

int cmd_hessian(const crf::TriangulatedComplex& c,
                const std::vector<double>& m) {
  for (int t = 0; t < c.tet_count(); ++t) {
    if (!crf::is_realizable(c.shapes[t], c.tet_lengths(m, t))) {
      std::cerr << "error: tetrahedron " << t
                << " is not realizable under this metric\n";
      return 1;
    }
  }
  json rep;
  rep["schema"] = 1;
  json per_tet = json::array();
  for (int t = 0; t < c.tet_count(); ++t) {
    const crf::HessianResult hr =
        crf::covolume_hessian(c.shapes[t], c.tet_lengths(m, t));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(
        0.5 * (hr.matrix + hr.matrix.transpose()));
    std::vector<double> ev(es.eigenvalues().data(),
                           es.eigenvalues().data() + 6);
    int rank = 0;
    for (double x : ev)
      if (x > kEigenZeroTol) ++rank;
    per_tet.push_back({{"tet", t},
                       {"shape", c.shapes[t].name()},
                       {"eigenvalues", ev},
                       {"rank", rank},
                       {"conditioning_warning", hr.conditioning_warning}});
  }
  rep["per_tet"] = per_tet;

  const Eigen::MatrixXd hh = crf::h_hessian(c, m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hh);
  std::vector<double> ev(es.eigenvalues().data(),
                         es.eigenvalues().data() + hh.rows());
  int kernel = 0;
  for (double x : ev)
    if (std::fabs(x) <= kEigenZeroTol) ++kernel;

  std::vector<int> ideal;
  for (std::size_t v = 0; v < c.vertices.size(); ++v)
    if (!c.vertices[v].hyperideal) ideal.push_back(static_cast<int>(v));
  int deco_dim = 0;
  if (!ideal.empty()) {
    const Eigen::MatrixXd all = crf::decoration_matrix(c);
    Eigen::MatrixXd a(c.edge_count(), ideal.size());
    for (std::size_t k = 0; k < ideal.size(); ++k)
      a.col(k) = all.col(ideal[k]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    svd.setThreshold(1e-9);
    deco_dim = static_cast<int>(svd.rank());
  }

  rep["complex"] = {{"dim", hh.rows()},
                    {"eigenvalues", ev},
                    {"kernel_dim", kernel},
                    {"decoration_space_dim", deco_dim}};
  emit(rep);
  return 0;
}

int cmd_flow(const crf::TriangulatedComplex& c, const std::vector<double>& m,
             const crf::FlowConfig& cfg, const std::string& out_csv,
             const std::string& out_json) {
  const crf::FlowResult r = crf::run_flow(c, m, cfg);
  const crf::ConvergenceReport cr = crf::convergence_report(c, r);

  json rep;
  rep["schema"] = 1;
  rep["status"] = cr.status;
  int code = 0;
  switch (r.status) {
    case crf::FlowStatus::Converged:
      code = 0;
      break;
    case crf::FlowStatus::MaxTimeReached:
      code = 2;
      break;
    case crf::FlowStatus::DivergenceSuspected:
      code = 3;
      break;
  }
  rep["exit_code"] = code;
  rep["final_time"] = cr.final_time;
  rep["final_metric"] = r.final.l;
  rep["final_metric_normalized"] = crf::normalize_to_vertex_sums(
      c, r.final.l, crf::vertex_length_sums(c, m));
  rep["final_curvature"] = r.final.k_tilde;
  rep["final_curvature_inf"] = cr.final_curvature_inf;
  rep["edge_angle_sums"] = cr.edge_angle_sums;
  rep["valences"] = cr.valences;
  rep["min_valence"] = cr.min_valence;
  rep["all_valences_ge_10"] = cr.all_valences_ge_10;
  rep["total_volume"] = cr.total_volume;
  rep["vertex_length_sums"] = cr.vertex_length_sums;
  rep["h_delta"] = cr.h_delta;
  if (cr.h_closed_form)
    rep["h_closed_form"] = *cr.h_closed_form;
  else
    rep["h_closed_form"] = nullptr;
  rep["max_abs_length"] = cr.max_abs_length;
  if (!cr.caveat.empty()) rep["caveat"] = cr.caveat;
  rep["trajectory_samples"] = r.trajectory.size();

  if (!out_csv.empty()) {
    std::ofstream f(out_csv);
    if (!f) throw std::runtime_error("cannot write " + out_csv);
    crf::write_trajectory_csv(f, r);
  }
  if (!out_json.empty()) {
    std::ofstream f(out_json);
    if (!f) throw std::runtime_error("cannot write " + out_json);
    f << rep.dump(2) << "\n";
  }
  emit(rep);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Decorated hyperbolic polyhedral metrics on triangulated "
      "pseudo 3-manifolds: curvature, volume and combinatorial Ricci flow"};
  app.require_subcommand(1);

  std::string path, metric_src, out_csv, out_json;

  auto* validate = app.add_subcommand("validate", "Check a triangulation file");
  validate->add_option("file", path, "triangulation JSON")->required();

  auto add_metric_cmd = [&](const char* name, const char* desc) {
    auto* cmd = app.add_subcommand(name, desc);
    cmd->add_option("file", path, "triangulation JSON")->required();
    cmd->add_option("--metric", metric_src,
                    "inline list | file | uniform:c | random:seed,low,high")
        ->required();
    return cmd;
  };

  auto* curvature =
      add_metric_cmd("curvature", "Extended combinatorial Ricci curvature");
  auto* volume = add_metric_cmd("volume", "Hyperbolic volume");
  auto* classify =
      add_metric_cmd("classify", "Per-tet degeneration classification");
  auto* hessian = add_metric_cmd("hessian", "Covolume and H-functional spectra");

  auto* flow = add_metric_cmd("flow", "Run the extended combinatorial Ricci flow");
  crf::FlowConfig cfg;
  bool adaptive = false;
  flow->add_option("--dt", cfg.initial_step, "step size (default 0.01)");
  flow->add_option("--tol", cfg.tolerance_curvature,
                   "curvature tolerance (default 1e-9)");
  flow->add_option("--max-time", cfg.max_time, "time horizon (default 1e4)");
  flow->add_option("--bound", cfg.divergence_bound,
                   "divergence bound on |l| (default 1e3)");
  flow->add_flag("--normalize", cfg.normalize_decorations,
                 "re-project ideal vertex length sums each step");
  flow->add_flag("--adaptive", adaptive, "step-doubling adaptive stepping");
  flow->add_option("--stride", cfg.sample_stride,
                   "trajectory sample stride (default 10)");
  flow->add_option("--out-csv", out_csv, "trajectory CSV path");
  flow->add_option("--out-json", out_json, "summary JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(path);

    const crf::TriangulatedComplex c =
        crf::build_complex(crf::load_gluing_file(path));
    const std::vector<double> m = make_metric(c, metric_src);

    if (curvature->parsed()) return cmd_curvature(c, m);
    if (volume->parsed()) return cmd_volume(c, m);
    if (classify->parsed()) return cmd_classify(c, m);
    if (hessian->parsed()) return cmd_hessian(c, m);
    if (flow->parsed()) {
      cfg.step_mode = adaptive ? crf::StepMode::Adaptive : crf::StepMode::Fixed;
      return cmd_flow(c, m, cfg, out_csv, out_json);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
