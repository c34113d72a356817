#include <cmath>
#include <set>

#include "crf/tet_geometry.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace crf;
using oracle::kPi;

TEST_CASE("edge indexing tables are mutually consistent") {
  for (int e = 0; e < 6; ++e) {
    CHECK(kEdgeIndex[kEdgeVerts[e][0]][kEdgeVerts[e][1]] == e);
    CHECK(kEdgeIndex[kEdgeVerts[e][1]][kEdgeVerts[e][0]] == e);
    const int o = kOppositeEdge[e];
    std::set<int> all{kEdgeVerts[e][0], kEdgeVerts[e][1], kEdgeVerts[o][0],
                      kEdgeVerts[o][1]};
    CHECK(all.size() == 4);  // opposite edges are disjoint
  }
  CHECK(TetShape{2}.edge_hh(0));
  for (int e = 1; e < 6; ++e) CHECK_FALSE(TetShape{2}.edge_hh(e));
  CHECK(TetShape{4}.name() == "4-0");
  CHECK(TetShape{0}.name() == "0-4");
}

TEST_CASE("angle cosines match the vertex-link cosine-law route") {
  for (int k = 0; k <= 4; ++k) {
    const TetShape sh{k};
    std::mt19937_64 gen(100 + k);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const EdgeLengths6 l = oracle::random_realizable(gen, sh);
      const Angles6 a = dihedral_angles_strict(sh, l);
      const Angles6 b = oracle::angles_from_links(sh, l);
      for (int e = 0; e < 6; ++e)
        worst = std::max(worst, std::fabs(a[e] - b[e]));
    }
    CAPTURE(k);
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("regular ideal tetrahedron has all angles pi/3") {
  const Angles6 a = dihedral_angles_strict(TetShape{0}, {0, 0, 0, 0, 0, 0});
  for (int e = 0; e < 6; ++e)
    CHECK(a[e] == doctest::Approx(kPi / 3.0).epsilon(1e-15));
}

TEST_CASE("regular truncated family: angles increase with edge length") {
  const TetShape sh{4};
  double prev = 0.0;
  for (double c : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const EdgeLengths6 l{c, c, c, c, c, c};
    const Angles6 a = dihedral_angles_strict(sh, l);
    for (int e = 1; e < 6; ++e)
      CHECK(a[e] == doctest::Approx(a[0]).epsilon(1e-14));
    CHECK(a[0] > prev);
    prev = a[0];
  }
  CHECK(prev < kPi / 3.0);  // approaches pi/3 from below
}

TEST_CASE("angles are invariant under decoration changes at ideal vertices") {
  std::mt19937_64 gen(17);
  for (int k = 0; k <= 3; ++k) {
    const TetShape sh{k};
    for (int rep = 0; rep < 50; ++rep) {
      const EdgeLengths6 l = oracle::random_realizable(gen, sh);
      double w[4] = {0, 0, 0, 0};
      for (int v = k; v < 4; ++v) w[v] = oracle::urand(gen, -0.2, 0.2);
      EdgeLengths6 lw;
      for (int e = 0; e < 6; ++e)
        lw[e] = l[e] + w[kEdgeVerts[e][0]] + w[kEdgeVerts[e][1]];
      const Angles6 a = dihedral_angles_extended(sh, l);
      const Angles6 b = dihedral_angles_extended(sh, lw);
      for (int e = 0; e < 6; ++e)
        CHECK(b[e] == doctest::Approx(a[e]).epsilon(1e-12));
    }
  }
}

TEST_CASE("ideal vertex links close up: angle sums at ideal vertices") {
  std::mt19937_64 gen(18);
  for (int k = 0; k <= 4; ++k) {
    const TetShape sh{k};
    for (int rep = 0; rep < 50; ++rep) {
      const EdgeLengths6 l = oracle::random_realizable(gen, sh);
      const Angles6 a = dihedral_angles_strict(sh, l);
      for (int v = 0; v < 4; ++v) {
        double sum = 0.0;
        for (int u = 0; u < 4; ++u)
          if (u != v) sum += a[kEdgeIndex[v][u]];
        if (sh.vertex_hyperideal(v)) {
          CHECK(sum < kPi);  // compact link triangle
        } else {
          CHECK(sum == doctest::Approx(kPi).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("label symmetry: permuting ideal vertices permutes angles") {
  // For the all-ideal shape every vertex permutation is allowed.
  const TetShape sh{0};
  std::mt19937_64 gen(19);
  const int perms[3][4] = {{1, 0, 2, 3}, {1, 2, 3, 0}, {3, 2, 1, 0}};
  for (int rep = 0; rep < 30; ++rep) {
    const EdgeLengths6 l = oracle::random_realizable(gen, sh);
    const Angles6 a = dihedral_angles_strict(sh, l);
    for (const auto& p : perms) {
      EdgeLengths6 lp;
      for (int e = 0; e < 6; ++e)
        lp[kEdgeIndex[p[kEdgeVerts[e][0]]][p[kEdgeVerts[e][1]]]] = l[e];
      const Angles6 ap = dihedral_angles_strict(sh, lp);
      for (int e = 0; e < 6; ++e) {
        const int ep = kEdgeIndex[p[kEdgeVerts[e][0]]][p[kEdgeVerts[e][1]]];
        CHECK(ap[ep] == doctest::Approx(a[e]).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("angle cosines stay finite and accurate at extreme lengths") {
  // The shifted-exponent evaluation must survive scales where plain
  // doubles cannot hold the intermediate exponentials.
  const TetShape sh{0};
  const EdgeLengths6 l{500.0, -23.0, 12.0, 4.0, -180.0, 333.0};
  const std::array<double, 6> p = phi(sh, l);
  for (int e = 0; e < 6; ++e) CHECK(std::isfinite(p[e]));
  CHECK_NOTHROW((void)theta_chain(sh, l));

  // The cosine-law route overflows once cosh arguments pass ~710.
  const EdgeLengths6 big{1500.0, -23.0, 12.0, 4.0, -180.0, 999.0};
  const std::array<double, 6> pb = phi(sh, big);
  for (int e = 0; e < 6; ++e) CHECK(std::isfinite(pb[e]));
  try {
    (void)theta_chain(sh, big);
    FAIL("expected an overflow error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("overflow") != std::string::npos);
  }
}

TEST_CASE("one-hyperideal and mixed shapes: phi vs links at moderate scale") {
  std::mt19937_64 gen(21);
  for (int k : {1, 2, 3}) {
    const TetShape sh{k};
    for (int rep = 0; rep < 100; ++rep) {
      const EdgeLengths6 l = oracle::random_realizable(gen, sh);
      const std::array<double, 6> p = phi(sh, l);
      const Angles6 b = oracle::angles_from_links(sh, l);
      for (int e = 0; e < 6; ++e)
        CHECK(p[e] == doctest::Approx(std::cos(b[e])).epsilon(1e-11));
    }
  }
}

TEST_CASE("collapsed truncated edge: phi_12 equals 1 exactly at l_12 = 0") {
  const TetShape sh{2};
  std::mt19937_64 gen(22);
  for (int rep = 0; rep < 100; ++rep) {
    EdgeLengths6 l = oracle::random_box_point(gen, sh, 0.0, 0.0, -1.0, 1.0);
    l[0] = 0.0;
    const std::array<double, 6> p = phi(sh, l);
    CHECK(std::fabs(p[0] - 1.0) < 1e-12);
  }
}

TEST_CASE("clamping negative truncated edges") {
  const TetShape sh{3};
  EdgeLengths6 l{-0.3, 0.5, -0.1, 0.2, 0.4, -0.9};
  const EdgeLengths6 lp = clamp_truncated_edges(sh, l);
  // Shape 3-1 truncates slots 0, 1, 3.
  CHECK(lp[0] == 0.0);
  CHECK(lp[1] == 0.5);
  CHECK(lp[2] == -0.1);
  CHECK(lp[3] == 0.2);
  CHECK(lp[4] == 0.4);
  CHECK(lp[5] == -0.9);
  // Extension is constant in the clamped directions: exact equality.
  const Angles6 a = dihedral_angles_extended(sh, l);
  const Angles6 b = dihedral_angles_extended(sh, lp);
  for (int e = 0; e < 6; ++e) CHECK(a[e] == b[e]);
}

TEST_CASE("extended equals strict on the realizable set") {
  std::mt19937_64 gen(23);
  for (int k = 0; k <= 4; ++k) {
    const TetShape sh{k};
    for (int rep = 0; rep < 50; ++rep) {
      const EdgeLengths6 l = oracle::random_realizable(gen, sh);
      const Angles6 a = dihedral_angles_strict(sh, l);
      const Angles6 b = dihedral_angles_extended(sh, l);
      for (int e = 0; e < 6; ++e) CHECK(a[e] == b[e]);
    }
  }
}

TEST_CASE("strict angles refuse degenerate input, extension classifies it") {
  const TetShape sh{0};
  // Large opposite pair pushes phi past -1 on slots {0, 5}.
  const EdgeLengths6 l{3.0, -4.0, 0.0, 0.0, -4.0, 3.0};
  CHECK_FALSE(is_realizable(sh, l));
  CHECK_THROWS_AS((void)dihedral_angles_strict(sh, l), std::domain_error);
  CHECK(classify_degeneration(sh, l) == DegenerationClass::Omega1);
  const Angles6 a = dihedral_angles_extended(sh, l);
  CHECK(a[0] == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(a[5] == doctest::Approx(kPi).epsilon(1e-15));
  for (int e = 1; e <= 4; ++e)
    CHECK(a[e] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("degenerate strata carry exactly one opposite-pair tag") {
  const TetShape sh{2};
  std::mt19937_64 gen(24);
  const int pair_slots[3][2] = {{0, 5}, {1, 4}, {2, 3}};
  int degen_seen = 0;
  for (int rep = 0; rep < 4000 && degen_seen < 300; ++rep) {
    const EdgeLengths6 l =
        oracle::random_box_point(gen, sh, 0.05, 2.0, -2.0, 2.0);
    if (is_realizable(sh, l)) continue;
    const DegenerationClass dc = classify_degeneration(sh, l);
    if (dc == DegenerationClass::InteriorL) continue;
    ++degen_seen;
    const std::array<double, 6> p = phi(sh, clamp_truncated_edges(sh, l));
    int tags = 0;
    for (int w = 0; w < 3; ++w) {
      const double pmin =
          std::min(p[pair_slots[w][0]], p[pair_slots[w][1]]);
      if (pmin <= -1.0 + 1e-9) ++tags;
    }
    CHECK(tags == 1);
    // Degeneration of a pair forces its opposite pair down and the
    // other two pairs up.
    if (dc == DegenerationClass::Omega1) {
      CHECK(p[0] <= -1.0 + 1e-10);
      CHECK(p[5] <= -1.0 + 1e-10);
      CHECK(p[1] >= 1.0 - 1e-10);
      CHECK(p[2] >= 1.0 - 1e-10);
      CHECK(p[3] >= 1.0 - 1e-10);
      CHECK(p[4] >= 1.0 - 1e-10);
    }
  }
  CHECK(degen_seen >= 300);
}

TEST_CASE("extension is continuous across the degeneration wall") {
  // Walk a segment from a realizable point into Omega_1 (grow the
  // {12,34} pair, sink the {13,24} pair), locate the wall, and measure
  // the two-sided angle gap at shrinking offsets. The extension is
  // Hoelder-1/2 there: the gap scales like sqrt(offset), so halving the
  // offset by 1e4 shrinks the gap by about 1e2.
  const TetShape sh{2};
  std::mt19937_64 gen(25);
  int crossings = 0;
  for (int rep = 0; rep < 200 && crossings < 20; ++rep) {
    const EdgeLengths6 a = oracle::random_realizable(gen, sh);
    EdgeLengths6 b = a;
    b[0] = oracle::urand(gen, 2.5, 4.0);
    b[5] = oracle::urand(gen, 2.5, 4.0);
    b[1] = oracle::urand(gen, -4.0, -2.5);
    b[4] = oracle::urand(gen, -4.0, -2.5);
    if (is_realizable(sh, b)) continue;
    if (classify_degeneration(sh, b) != DegenerationClass::Omega1) continue;
    double lo = 0.0, hi = 1.0;
    auto at = [&](double t) {
      EdgeLengths6 l;
      for (int e = 0; e < 6; ++e) l[e] = (1 - t) * a[e] + t * b[e];
      return l;
    };
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (is_realizable(sh, at(mid)) ? lo : hi) = mid;
    }
    auto gap = [&](double d) {
      const Angles6 in = dihedral_angles_extended(sh, at(lo - d));
      const Angles6 out = dihedral_angles_extended(sh, at(hi + d));
      double g = 0.0;
      for (int e = 0; e < 6; ++e)
        g = std::max(g, std::fabs(in[e] - out[e]));
      return g;
    };
    const double g5 = gap(1e-5);
    const double g9 = gap(1e-9);
    CHECK(g5 < 0.1);
    CHECK(g9 < 1e-3);
    CHECK(g9 < 0.05 * g5);
    ++crossings;
  }
  CHECK(crossings >= 20);
}

TEST_CASE("domain errors for the ambient box") {
  const TetShape sh{4};
  EdgeLengths6 l{1, 1, 1, 1, 1, -0.2};
  CHECK_THROWS_AS((void)phi(sh, l), std::domain_error);
  CHECK_FALSE(is_realizable(sh, l));
  CHECK_THROWS_AS((void)classify_degeneration(sh, l), std::domain_error);
  // Clamping repairs it for the extension.
  const Angles6 a = dihedral_angles_extended(sh, l);
  for (int e = 0; e < 6; ++e) CHECK(std::isfinite(a[e]));
}
