#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "crf/tet_geometry.hpp"

namespace crf {

// One face of one tetrahedron glued to a face of another (possibly the
// same) tetrahedron. Face i is the face opposite vertex i. perm is a
// bijection of {0,1,2,3} carrying this face onto the target face, so
// perm[face-of-this-entry] is the target face.
struct FaceGluing {
  int tet = -1;
  int face = -1;
  std::array<int, 4> perm{0, 1, 2, 3};
};

// Raw gluing data as read from a triangulation file. vertex_flags maps
// vertex class index (classes are numbered by their lexicographically
// smallest (tet, vertex) member) to true for hyperideal; classes not
// mentioned default to ideal.
struct GluingSpec {
  int tet_count = 0;
  std::vector<std::array<FaceGluing, 4>> gluings;
  std::map<int, bool> vertex_flags;
};

struct EdgeClassInfo {
  // (tet, local edge slot), every incidence counted separately; sorted.
  std::vector<std::pair<int, int>> incidences;
  int endpoint_class[2] = {-1, -1};  // vertex classes (equal for loops)
  int valence() const { return static_cast<int>(incidences.size()); }
};

struct VertexClassInfo {
  std::vector<std::pair<int, int>> members;  // (tet, local vertex); sorted
  bool hyperideal = false;
};

// Validation failure with the offending simplices spelled out.
struct validation_error : std::runtime_error {
  std::vector<std::string> issues;
  explicit validation_error(std::vector<std::string> iss);
};

struct TriangulatedComplex {
  GluingSpec gluing;
  std::vector<EdgeClassInfo> edges;
  std::vector<VertexClassInfo> vertices;
  std::vector<TetShape> shapes;  // per tet, from its vertex-class flags

  // Per tet: local data index -> class index.
  std::vector<std::array<int, 4>> vertex_class_of;
  std::vector<std::array<int, 6>> edge_class_of;

  // Per tet relabeling into the canonical frame (hyperideal vertices
  // first): canon_vertex[t][slot] is the original local vertex sitting
  // at canonical slot, and the two edge maps are the induced slot
  // permutations.
  std::vector<std::array<int, 4>> canon_vertex;
  std::vector<std::array<int, 6>> local_edge_of_canon;
  std::vector<std::array<int, 6>> canon_edge_of_local;

  int edge_count() const { return static_cast<int>(edges.size()); }
  int tet_count() const { return gluing.tet_count; }
  int ideal_vertex_count() const;

  // Edge lengths of tet t in its canonical frame under metric m.
  EdgeLengths6 tet_lengths(const std::vector<double>& m, int t) const;
};

// Non-throwing validation; returns the list of problems (empty when the
// spec is a closed, involutive, cyclically glued triangulation).
std::vector<std::string> validate_gluing(const GluingSpec& g);

// Builds edge/vertex orbits, shapes and canonical relabelings.
// Throws validation_error when validate_gluing(g) is nonempty.
TriangulatedComplex build_complex(const GluingSpec& g);

// Parses the JSON triangulation format:
//   { "tets": N,
//     "gluings": [ per tet, 4 entries of {"tet": j, "face": f,
//                                         "perm": [p0,p1,p2,p3]} ],
//     "vertex_flags": { "<class index>": "ideal"|"hyperideal" } }
// vertex_flags is optional (default all ideal). Throws
// std::runtime_error on malformed input.
GluingSpec parse_gluing_json(const std::string& text);
GluingSpec load_gluing_file(const std::string& path);

// Valence of every edge class (incidences counted with multiplicity).
std::vector<int> edge_valences(const TriangulatedComplex& c);

enum class AngleMode { Strict, Extended };

// Dihedral angles of every tetrahedron in its local edge slots.
// Strict mode throws std::domain_error naming the tetrahedron and its
// degeneration class when some tet is not realizable; Extended mode is
// total. The default entry point parallelizes over tetrahedra when
// OpenMP is enabled; the _serial variant is the reference
// implementation (identical results, fixed evaluation order).
std::vector<Angles6> tet_angles(const TriangulatedComplex& c,
                                const std::vector<double>& m, AngleMode mode);
std::vector<Angles6> tet_angles_serial(const TriangulatedComplex& c,
                                       const std::vector<double>& m,
                                       AngleMode mode);

// True when every tetrahedron is realizable under m.
bool metric_realizable(const TriangulatedComplex& c,
                       const std::vector<double>& m);

// K_e = 2 pi - sum of dihedral angles over the incidences of e.
// curvature: strict angles (throws on non-realizable tets).
// extended_curvature: extended angles, defined for any finite metric.
std::vector<double> curvature(const TriangulatedComplex& c,
                              const std::vector<double>& m);
std::vector<double> extended_curvature(const TriangulatedComplex& c,
                                       const std::vector<double>& m);

// Vertex-edge incidence action: entry (e, v) counts the endpoints of
// edge class e lying in vertex class v (2 for loops). Columns cover
// all vertex classes, hyperideal ones included.
Eigen::MatrixXd decoration_matrix(const TriangulatedComplex& c);

// m' = m + A w. w is indexed by vertex classes and must vanish at
// hyperideal ones (throws std::domain_error otherwise).
std::vector<double> apply_decoration(const TriangulatedComplex& c,
                                     const std::vector<double>& m,
                                     const std::vector<double>& w);

struct DecorationFit {
  std::vector<double> w;  // minimizer, zero at hyperideal classes
  double residual = 0.0;  // |m1 - m2 - A w|_2
};

// Least-squares fit of a decoration change explaining m1 - m2.
DecorationFit decoration_residual(const TriangulatedComplex& c,
                                  const std::vector<double>& m1,
                                  const std::vector<double>& m2);

// Per vertex class, sum of metric entries over incident edge classes
// counted with endpoint multiplicity (the quantity conserved by the
// flow at ideal vertices); hyperideal entries are reported too.
std::vector<double> vertex_length_sums(const TriangulatedComplex& c,
                                       const std::vector<double>& m);

// Total hyperbolic volume under m (sum of per-tet volumes, extended
// values off the realizable set).
double total_volume(const TriangulatedComplex& c,
                    const std::vector<double>& m);

// Finite-difference Hessian of the H-functional on the complex, i.e.
// the Jacobian of the negated extended curvature, symmetrized. Step
// 1e-5 * max(1, |m|_inf).
Eigen::MatrixXd h_hessian(const TriangulatedComplex& c,
                          const std::vector<double>& m);

}  // namespace crf
