#pragma once

#include <array>
#include <string>

namespace crf {

// Edge lengths and dihedral angles of a decorated tetrahedron are
// indexed in the fixed order
//
//   (l12, l13, l14, l23, l24, l34)
//
// over vertex labels 1..4 (0..3 internally). Vertices 0..k-1 are
// hyperideal (truncated), the remaining 4-k are ideal (decorated with
// horospheres); k is the shape.
using EdgeLengths6 = std::array<double, 6>;
using Angles6 = std::array<double, 6>;

// Vertex pairs of the six edge slots.
inline constexpr int kEdgeVerts[6][2] = {{0, 1}, {0, 2}, {0, 3},
                                         {1, 2}, {1, 3}, {2, 3}};
// Slot of the edge joining two distinct vertices.
inline constexpr int kEdgeIndex[4][4] = {{-1, 0, 1, 2},
                                         {0, -1, 3, 4},
                                         {1, 3, -1, 5},
                                         {2, 4, 5, -1}};
// Opposite edge (disjoint vertex pair) of each slot.
inline constexpr int kOppositeEdge[6] = {5, 4, 3, 2, 1, 0};

struct TetShape {
  int hyperideal_count = 0;  // k in {0,...,4}

  bool vertex_hyperideal(int v) const { return v < hyperideal_count; }
  // True when both endpoints of edge slot e are hyperideal; these are
  // the edges constrained to positive length.
  bool edge_hh(int e) const {
    return kEdgeVerts[e][1] < hyperideal_count;
  }
  std::string name() const;  // "k-(4-k)", e.g. "2-2"
};

// Link triangle data of the four vertices. For vertex v the side
// crossing face {v,p,q} is stored at theta[v][edge slot of {p,q}]
// (entries whose edge contains v are unused and left at zero).
// Hyperideal vertices carry hyperbolic side lengths, ideal vertices
// Euclidean horocyclic ones.
struct VertexLink {
  std::array<std::array<double, 6>, 4> theta{};
  std::array<bool, 4> hyperbolic{};
};

enum class DegenerationClass {
  InteriorL,   // realizable: all phi in (-1, 1)
  Omega1,      // edge pair {12, 34} degenerate (phi <= -1)
  Omega2,      // edge pair {13, 24}
  Omega3,      // edge pair {14, 23}
  BoundaryX1,  // within tolerance of the pair-{12,34} wall
  BoundaryX2,
  BoundaryX3,
};

const char* to_string(DegenerationClass c);

// Side lengths of all four vertex links via the cosine-law chains.
// Requires l in the open ambient box (hyperideal-hyperideal entries
// > 0). Throws std::domain_error outside it and a numeric error when
// the textbook expressions overflow (|l| around 350); the phi-based
// angle path below has no such restriction.
VertexLink theta_chain(TetShape shape, const EdgeLengths6& l);

// The six angle cosines phi_e(l) = n / sqrt(f1 f2), continuous on the
// closed ambient box, equal to cos(dihedral angle) exactly on the
// realizable set. Values may fall outside [-1, 1] off it (that is how
// degeneration is detected); extreme configurations saturate at
// +-1e300 instead of overflowing. Throws std::domain_error when a
// hyperideal-hyperideal entry is negative.
std::array<double, 6> phi(TetShape shape, const EdgeLengths6& l);

// l lies in the open ambient box and every phi is strictly inside
// (-1, 1). Never throws; false outside the box.
bool is_realizable(TetShape shape, const EdgeLengths6& l);

// arccos(phi) for realizable l. Throws std::domain_error when l is not
// realizable (tolerance 1e-14 on |phi| vs 1).
Angles6 dihedral_angles_strict(TetShape shape, const EdgeLengths6& l);

// max(0, .) applied to the hyperideal-hyperideal entries; identity on
// the rest. Result lies in the closed ambient box.
EdgeLengths6 clamp_truncated_edges(TetShape shape, EdgeLengths6 l);

// Continuous extension to all of R^6: clamp the truncated edges, then
// arccos of phi clamped to [-1, 1]. Agrees with the strict angles on
// the realizable set; constant 0 or pi on each degenerate component.
Angles6 dihedral_angles_extended(TetShape shape, const EdgeLengths6& l);

// Locates l relative to the degeneration stratification of the closed
// ambient box (2-2 naming; the same pair structure applies to every
// shape). Boundary tags fire within |phi + 1| <= 1e-9 of a wall.
// Throws std::domain_error outside the closed box.
DegenerationClass classify_degeneration(TetShape shape,
                                        const EdgeLengths6& l);

}  // namespace crf
