#include "crf/complex.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/SVD>

#include "crf/tet_volume.hpp"
#include "json.hpp"

namespace crf {

namespace {

std::string join_issues(const std::vector<std::string>& iss) {
  std::ostringstream os;
  os << "invalid triangulation (" << iss.size() << " problem"
     << (iss.size() == 1 ? "" : "s") << ")";
  for (const auto& s : iss) os << "\n  - " << s;
  return os.str();
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

bool is_perm4(const std::array<int, 4>& p) {
  std::array<bool, 4> seen{};
  for (int x : p) {
    if (x < 0 || x > 3 || seen[x]) return false;
    seen[x] = true;
  }
  return true;
}

std::array<int, 4> inverse_perm(const std::array<int, 4>& p) {
  std::array<int, 4> q{};
  for (int i = 0; i < 4; ++i) q[p[i]] = i;
  return q;
}

// Classes numbered by smallest flat member index; flat order is
// lexicographic (tet, slot), which fixes a deterministic numbering.
struct Classes {
  std::vector<int> class_of;                           // flat -> class
  std::vector<std::vector<int>> members;               // class -> flats
};

Classes number_classes(UnionFind& uf, int n) {
  Classes cls;
  cls.class_of.assign(n, -1);
  std::vector<int> id_of_root(n, -1);
  for (int x = 0; x < n; ++x) {
    int r = uf.find(x);
    if (id_of_root[r] < 0) {
      id_of_root[r] = static_cast<int>(cls.members.size());
      cls.members.emplace_back();
    }
    cls.class_of[x] = id_of_root[r];
    cls.members[id_of_root[r]].push_back(x);
  }
  return cls;
}

// Around-edge walker state: sitting in tet t at the directed edge
// (a, b), about to leave through face g (one of the two faces
// containing the edge).
struct WalkState {
  int t, a, b, g;
  bool operator==(const WalkState& o) const {
    return t == o.t && a == o.a && b == o.b && g == o.g;
  }
};

int other_door(int a, int b, int not_this) {
  for (int x = 0; x < 4; ++x)
    if (x != a && x != b && x != not_this) return x;
  return -1;
}

// Checks that the incidences of one edge class close up into a single
// cycle under the face gluings. Returns an empty string on success.
std::string check_edge_cycle(const GluingSpec& g,
                             const std::vector<int>& members) {
  const int size = static_cast<int>(members.size());
  const int t0 = members[0] / 6, e0 = members[0] % 6;
  const int a0 = kEdgeVerts[e0][0], b0 = kEdgeVerts[e0][1];
  WalkState start{t0, a0, b0, other_door(a0, b0, other_door(a0, b0, -1))};
  // start.g is the larger door; either choice works, the orbit is the
  // same cycle traversed in one of the two directions.
  std::vector<char> visited(size, 0);
  auto mark = [&](int t, int a, int b) {
    const int flat = t * 6 + kEdgeIndex[a][b];
    const auto it = std::lower_bound(members.begin(), members.end(), flat);
    if (it != members.end() && *it == flat)
      visited[it - members.begin()] = 1;
  };
  WalkState s = start;
  int steps = 0;
  const int cap = 4 * size + 1;
  do {
    mark(s.t, s.a, s.b);
    const FaceGluing& fg = g.gluings[s.t][s.g];
    const int t2 = fg.tet;
    const int a2 = fg.perm[s.a], b2 = fg.perm[s.b];
    const int f2 = fg.perm[s.g];
    s = WalkState{t2, a2, b2, other_door(a2, b2, f2)};
    ++steps;
  } while (!(s == start) && steps < cap);
  std::ostringstream os;
  if (!(s == start)) {
    os << "around-edge walk from tet " << t0 << " edge (" << a0 << "," << b0
       << ") does not close up";
    return os.str();
  }
  if (steps != size ||
      !std::all_of(visited.begin(), visited.end(), [](char v) { return v; })) {
    os << "edge class of tet " << t0 << " edge (" << a0 << "," << b0
       << ") is not cyclically glued (walk length " << steps << ", valence "
       << size << ")";
    return os.str();
  }
  return {};
}

UnionFind edge_union(const GluingSpec& g) {
  UnionFind uf(6 * g.tet_count);
  for (int t = 0; t < g.tet_count; ++t) {
    for (int f = 0; f < 4; ++f) {
      const FaceGluing& fg = g.gluings[t][f];
      for (int a = 0; a < 4; ++a) {
        if (a == f) continue;
        for (int b = a + 1; b < 4; ++b) {
          if (b == f) continue;
          uf.unite(t * 6 + kEdgeIndex[a][b],
                   fg.tet * 6 + kEdgeIndex[fg.perm[a]][fg.perm[b]]);
        }
      }
    }
  }
  return uf;
}

UnionFind vertex_union(const GluingSpec& g) {
  UnionFind uf(4 * g.tet_count);
  for (int t = 0; t < g.tet_count; ++t) {
    for (int f = 0; f < 4; ++f) {
      const FaceGluing& fg = g.gluings[t][f];
      for (int v = 0; v < 4; ++v) {
        if (v == f) continue;
        uf.unite(t * 4 + v, fg.tet * 4 + fg.perm[v]);
      }
    }
  }
  return uf;
}

Angles6 tet_angles_one(const TriangulatedComplex& c,
                       const std::vector<double>& m, int t, AngleMode mode) {
  const EdgeLengths6 L = c.tet_lengths(m, t);
  Angles6 canon;
  if (mode == AngleMode::Strict) {
    try {
      canon = dihedral_angles_strict(c.shapes[t], L);
    } catch (const std::domain_error& err) {
      std::ostringstream os;
      os << "tetrahedron " << t << " ("
         << to_string(classify_degeneration(
                c.shapes[t], clamp_truncated_edges(c.shapes[t], L)))
         << "): " << err.what();
      throw std::domain_error(os.str());
    }
  } else {
    canon = dihedral_angles_extended(c.shapes[t], L);
  }
  Angles6 out;
  for (int le = 0; le < 6; ++le) out[le] = canon[c.canon_edge_of_local[t][le]];
  return out;
}

std::vector<double> assemble_curvature(const TriangulatedComplex& c,
                                       const std::vector<Angles6>& angles) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::vector<double> k(c.edges.size(), kTwoPi);
  for (std::size_t e = 0; e < c.edges.size(); ++e)
    for (const auto& [t, le] : c.edges[e].incidences) k[e] -= angles[t][le];
  return k;
}

void check_metric_size(const TriangulatedComplex& c,
                       const std::vector<double>& m) {
  if (static_cast<int>(m.size()) != c.edge_count()) {
    std::ostringstream os;
    os << "metric has " << m.size() << " entries, complex has "
       << c.edge_count() << " edge classes";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

validation_error::validation_error(std::vector<std::string> iss)
    : std::runtime_error(join_issues(iss)), issues(std::move(iss)) {}

int TriangulatedComplex::ideal_vertex_count() const {
  int n = 0;
  for (const auto& v : vertices) n += v.hyperideal ? 0 : 1;
  return n;
}

EdgeLengths6 TriangulatedComplex::tet_lengths(const std::vector<double>& m,
                                              int t) const {
  EdgeLengths6 L;
  for (int ec = 0; ec < 6; ++ec)
    L[ec] = m[edge_class_of[t][local_edge_of_canon[t][ec]]];
  return L;
}

std::vector<std::string> validate_gluing(const GluingSpec& g) {
  std::vector<std::string> issues;
  auto issue = [&](const std::string& s) { issues.push_back(s); };

  if (g.tet_count < 0) {
    issue("tetrahedron count is negative");
    return issues;
  }
  if (static_cast<int>(g.gluings.size()) != g.tet_count) {
    std::ostringstream os;
    os << "gluing table has " << g.gluings.size() << " rows for "
       << g.tet_count << " tetrahedra";
    issue(os.str());
    return issues;
  }

  for (int t = 0; t < g.tet_count; ++t) {
    for (int f = 0; f < 4; ++f) {
      const FaceGluing& fg = g.gluings[t][f];
      std::ostringstream os;
      os << "tet " << t << " face " << f;
      const std::string where = os.str();
      if (fg.tet < 0) {
        issue(where + " is unglued");
        continue;
      }
      if (fg.tet >= g.tet_count) {
        issue(where + " is glued to nonexistent tet " +
              std::to_string(fg.tet));
        continue;
      }
      if (fg.face < 0 || fg.face > 3) {
        issue(where + " names invalid target face " +
              std::to_string(fg.face));
        continue;
      }
      if (!is_perm4(fg.perm)) {
        issue(where + " has a gluing map that is not a permutation");
        continue;
      }
      if (fg.perm[f] != fg.face) {
        issue(where + " gluing map does not carry face " +
              std::to_string(f) + " onto target face " +
              std::to_string(fg.face));
      }
    }
  }
  if (!issues.empty()) return issues;

  for (int t = 0; t < g.tet_count; ++t) {
    for (int f = 0; f < 4; ++f) {
      const FaceGluing& fg = g.gluings[t][f];
      const FaceGluing& back = g.gluings[fg.tet][fg.face];
      if (back.tet != t || back.face != f ||
          back.perm != inverse_perm(fg.perm)) {
        std::ostringstream os;
        os << "gluing of tet " << t << " face " << f
           << " is not matched by the inverse gluing of tet " << fg.tet
           << " face " << fg.face;
        issue(os.str());
      }
    }
  }
  if (!issues.empty()) return issues;

  UnionFind edges = edge_union(g);
  const Classes ecls = number_classes(edges, 6 * g.tet_count);
  for (const auto& members : ecls.members) {
    std::string err = check_edge_cycle(g, members);
    if (!err.empty()) issue(err);
  }

  UnionFind verts = vertex_union(g);
  const Classes vcls = number_classes(verts, 4 * g.tet_count);
  for (const auto& [idx, hyper] : g.vertex_flags) {
    (void)hyper;
    if (idx < 0 || idx >= static_cast<int>(vcls.members.size())) {
      std::ostringstream os;
      os << "vertex_flags names class " << idx << ", complex has "
         << vcls.members.size() << " vertex classes";
      issue(os.str());
    }
  }
  return issues;
}

TriangulatedComplex build_complex(const GluingSpec& g) {
  std::vector<std::string> issues = validate_gluing(g);
  if (!issues.empty()) throw validation_error(std::move(issues));

  TriangulatedComplex c;
  c.gluing = g;

  UnionFind vuf = vertex_union(g);
  const Classes vcls = number_classes(vuf, 4 * g.tet_count);
  c.vertices.resize(vcls.members.size());
  for (std::size_t k = 0; k < vcls.members.size(); ++k)
    for (int flat : vcls.members[k])
      c.vertices[k].members.emplace_back(flat / 4, flat % 4);
  for (const auto& [idx, hyper] : g.vertex_flags)
    c.vertices[idx].hyperideal = hyper;

  c.vertex_class_of.resize(g.tet_count);
  for (int t = 0; t < g.tet_count; ++t)
    for (int v = 0; v < 4; ++v)
      c.vertex_class_of[t][v] = vcls.class_of[t * 4 + v];

  UnionFind euf = edge_union(g);
  const Classes ecls = number_classes(euf, 6 * g.tet_count);
  c.edges.resize(ecls.members.size());
  for (std::size_t k = 0; k < ecls.members.size(); ++k) {
    for (int flat : ecls.members[k])
      c.edges[k].incidences.emplace_back(flat / 6, flat % 6);
    const auto [t0, e0] = c.edges[k].incidences.front();
    const int u = c.vertex_class_of[t0][kEdgeVerts[e0][0]];
    const int v = c.vertex_class_of[t0][kEdgeVerts[e0][1]];
    c.edges[k].endpoint_class[0] = std::min(u, v);
    c.edges[k].endpoint_class[1] = std::max(u, v);
  }

  c.edge_class_of.resize(g.tet_count);
  for (int t = 0; t < g.tet_count; ++t)
    for (int e = 0; e < 6; ++e)
      c.edge_class_of[t][e] = ecls.class_of[t * 6 + e];

  c.shapes.resize(g.tet_count);
  c.canon_vertex.resize(g.tet_count);
  c.local_edge_of_canon.resize(g.tet_count);
  c.canon_edge_of_local.resize(g.tet_count);
  for (int t = 0; t < g.tet_count; ++t) {
    std::array<int, 4> order{};
    int pos = 0;
    for (int v = 0; v < 4; ++v)
      if (c.vertices[c.vertex_class_of[t][v]].hyperideal) order[pos++] = v;
    c.shapes[t].hyperideal_count = pos;
    for (int v = 0; v < 4; ++v)
      if (!c.vertices[c.vertex_class_of[t][v]].hyperideal) order[pos++] = v;
    c.canon_vertex[t] = order;
    for (int ec = 0; ec < 6; ++ec) {
      const int le =
          kEdgeIndex[order[kEdgeVerts[ec][0]]][order[kEdgeVerts[ec][1]]];
      c.local_edge_of_canon[t][ec] = le;
      c.canon_edge_of_local[t][le] = ec;
    }
  }
  return c;
}

GluingSpec parse_gluing_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("JSON parse error: ") + e.what());
  }
  try {
    GluingSpec g;
    g.tet_count = j.at("tets").get<int>();
    const auto& rows = j.at("gluings");
    if (!rows.is_array())
      throw std::runtime_error("\"gluings\" must be an array");
    g.gluings.resize(rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
      const auto& row = rows[t];
      if (!row.is_array() || row.size() != 4) {
        std::ostringstream os;
        os << "gluing row " << t << " must list exactly 4 faces";
        throw std::runtime_error(os.str());
      }
      for (int f = 0; f < 4; ++f) {
        const auto& ent = row[f];
        if (ent.is_null()) continue;  // left unglued; validation flags it
        FaceGluing& fg = g.gluings[t][f];
        fg.tet = ent.at("tet").get<int>();
        fg.face = ent.at("face").get<int>();
        const auto& p = ent.at("perm");
        if (!p.is_array() || p.size() != 4) {
          std::ostringstream os;
          os << "tet " << t << " face " << f
             << ": \"perm\" must be an array of 4 integers";
          throw std::runtime_error(os.str());
        }
        for (int i = 0; i < 4; ++i) fg.perm[i] = p[i].get<int>();
      }
    }
    if (j.contains("vertex_flags")) {
      const auto& flags = j.at("vertex_flags");
      if (!flags.is_object())
        throw std::runtime_error("\"vertex_flags\" must be an object");
      for (auto it = flags.begin(); it != flags.end(); ++it) {
        int idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stoi(it.key(), &used);
          if (used != it.key().size()) throw std::invalid_argument(it.key());
        } catch (const std::exception&) {
          throw std::runtime_error("vertex_flags key \"" + it.key() +
                                   "\" is not a vertex class index");
        }
        const std::string val = it.value().get<std::string>();
        if (val == "hyperideal") {
          g.vertex_flags[idx] = true;
        } else if (val == "ideal") {
          g.vertex_flags[idx] = false;
        } else {
          throw std::runtime_error("vertex_flags[" + it.key() +
                                   "] must be \"ideal\" or \"hyperideal\"");
        }
      }
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("triangulation format error: ") +
                             e.what());
  }
}

GluingSpec load_gluing_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_gluing_json(buf.str());
}

std::vector<int> edge_valences(const TriangulatedComplex& c) {
  std::vector<int> v;
  v.reserve(c.edges.size());
  for (const auto& e : c.edges) v.push_back(e.valence());
  return v;
}

std::vector<Angles6> tet_angles_serial(const TriangulatedComplex& c,
                                       const std::vector<double>& m,
                                       AngleMode mode) {
  check_metric_size(c, m);
  std::vector<Angles6> out(c.tet_count());
  for (int t = 0; t < c.tet_count(); ++t)
    out[t] = tet_angles_one(c, m, t, mode);
  return out;
}

std::vector<Angles6> tet_angles(const TriangulatedComplex& c,
                                const std::vector<double>& m, AngleMode mode) {
  check_metric_size(c, m);
  const int n = c.tet_count();
  std::vector<Angles6> out(n);
#ifdef CRF_HAVE_OPENMP
  std::atomic<int> first_bad{n};
#pragma omp parallel for schedule(static)
  for (int t = 0; t < n; ++t) {
    try {
      out[t] = tet_angles_one(c, m, t, mode);
    } catch (const std::exception&) {
      int cur = first_bad.load();
      while (t < cur && !first_bad.compare_exchange_weak(cur, t)) {
      }
    }
  }
  if (first_bad.load() < n) {
    // Reproduce the exception of the lowest-numbered failing tet so the
    // parallel path reports identically to the serial one.
    tet_angles_one(c, m, first_bad.load(), mode);
  }
  return out;
#else
  for (int t = 0; t < n; ++t) out[t] = tet_angles_one(c, m, t, mode);
  return out;
#endif
}

bool metric_realizable(const TriangulatedComplex& c,
                       const std::vector<double>& m) {
  check_metric_size(c, m);
  for (int t = 0; t < c.tet_count(); ++t)
    if (!is_realizable(c.shapes[t], c.tet_lengths(m, t))) return false;
  return true;
}

std::vector<double> curvature(const TriangulatedComplex& c,
                              const std::vector<double>& m) {
  return assemble_curvature(c, tet_angles(c, m, AngleMode::Strict));
}

std::vector<double> extended_curvature(const TriangulatedComplex& c,
                                       const std::vector<double>& m) {
  return assemble_curvature(c, tet_angles(c, m, AngleMode::Extended));
}

Eigen::MatrixXd decoration_matrix(const TriangulatedComplex& c) {
  Eigen::MatrixXd a =
      Eigen::MatrixXd::Zero(c.edge_count(), c.vertices.size());
  for (int e = 0; e < c.edge_count(); ++e) {
    a(e, c.edges[e].endpoint_class[0]) += 1.0;
    a(e, c.edges[e].endpoint_class[1]) += 1.0;
  }
  return a;
}

std::vector<double> apply_decoration(const TriangulatedComplex& c,
                                     const std::vector<double>& m,
                                     const std::vector<double>& w) {
  check_metric_size(c, m);
  if (w.size() != c.vertices.size()) {
    std::ostringstream os;
    os << "decoration has " << w.size() << " entries, complex has "
       << c.vertices.size() << " vertex classes";
    throw std::invalid_argument(os.str());
  }
  for (std::size_t v = 0; v < w.size(); ++v) {
    if (c.vertices[v].hyperideal && w[v] != 0.0) {
      std::ostringstream os;
      os << "decoration is nonzero at hyperideal vertex class " << v;
      throw std::domain_error(os.str());
    }
  }
  std::vector<double> out(m);
  for (int e = 0; e < c.edge_count(); ++e)
    out[e] += w[c.edges[e].endpoint_class[0]] +
              w[c.edges[e].endpoint_class[1]];
  return out;
}

DecorationFit decoration_residual(const TriangulatedComplex& c,
                                  const std::vector<double>& m1,
                                  const std::vector<double>& m2) {
  check_metric_size(c, m1);
  check_metric_size(c, m2);
  std::vector<int> ideal;
  for (std::size_t v = 0; v < c.vertices.size(); ++v)
    if (!c.vertices[v].hyperideal) ideal.push_back(static_cast<int>(v));

  Eigen::VectorXd b(c.edge_count());
  for (int e = 0; e < c.edge_count(); ++e) b(e) = m1[e] - m2[e];

  DecorationFit fit;
  fit.w.assign(c.vertices.size(), 0.0);
  if (ideal.empty()) {
    fit.residual = b.norm();
    return fit;
  }
  const Eigen::MatrixXd a_all = decoration_matrix(c);
  Eigen::MatrixXd a(c.edge_count(), ideal.size());
  for (std::size_t k = 0; k < ideal.size(); ++k) a.col(k) = a_all.col(ideal[k]);
  // Minimum-norm least-squares solution; the decoration action can have
  // a kernel (e.g. alternating signs on a bipartite incidence pattern).
  Eigen::VectorXd x = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                          .setThreshold(1e-12)
                          .solve(b);
  for (std::size_t k = 0; k < ideal.size(); ++k) fit.w[ideal[k]] = x(k);
  fit.residual = (b - a * x).norm();
  return fit;
}

std::vector<double> vertex_length_sums(const TriangulatedComplex& c,
                                       const std::vector<double>& m) {
  check_metric_size(c, m);
  std::vector<double> s(c.vertices.size(), 0.0);
  for (int e = 0; e < c.edge_count(); ++e) {
    s[c.edges[e].endpoint_class[0]] += m[e];
    s[c.edges[e].endpoint_class[1]] += m[e];
  }
  return s;
}

double total_volume(const TriangulatedComplex& c,
                    const std::vector<double>& m) {
  check_metric_size(c, m);
  double vol = 0.0;
  for (int t = 0; t < c.tet_count(); ++t)
    vol += tet_volume_from_lengths(c.shapes[t], c.tet_lengths(m, t));
  return vol;
}

Eigen::MatrixXd h_hessian(const TriangulatedComplex& c,
                          const std::vector<double>& m) {
  check_metric_size(c, m);
  const int n = c.edge_count();
  double scale = 1.0;
  for (double x : m) scale = std::max(scale, std::fabs(x));
  const double h = 1e-5 * scale;
  Eigen::MatrixXd jac(n, n);
  std::vector<double> probe(m);
  for (int j = 0; j < n; ++j) {
    probe[j] = m[j] + h;
    const std::vector<double> kp = extended_curvature(c, probe);
    probe[j] = m[j] - h;
    const std::vector<double> km = extended_curvature(c, probe);
    probe[j] = m[j];
    for (int i = 0; i < n; ++i) jac(i, j) = -(kp[i] - km[i]) / (2.0 * h);
  }
  return 0.5 * (jac + jac.transpose());
}

}  // namespace crf
