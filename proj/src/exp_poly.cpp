#include "crf/exp_poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "crf/tet_geometry.hpp"

namespace crf {

void ExpPoly::insert(const Key& k, double c) {
  auto it = std::lower_bound(
      atoms_.begin(), atoms_.end(), k,
      [](const Atom& a, const Key& key) { return a.k < key; });
  if (it != atoms_.end() && it->k == k) {
    it->c += c;
    if (it->c == 0.0) atoms_.erase(it);
  } else if (c != 0.0) {
    atoms_.insert(it, Atom{k, c});
  }
}

ExpPoly ExpPoly::constant(double c) {
  ExpPoly p;
  p.insert(Key{0, 0, 0, 0, 0, 0}, c);
  return p;
}

ExpPoly ExpPoly::atom(const Key& k, double c) {
  ExpPoly p;
  p.insert(k, c);
  return p;
}

ExpPoly ExpPoly::edge_exp(int e, int sign, double c) {
  Key k{0, 0, 0, 0, 0, 0};
  k[e] = 2 * sign;
  return atom(k, c);
}

ExpPoly ExpPoly::cosh_edge(int e) {
  return (edge_exp(e, +1) + edge_exp(e, -1)) * 0.5;
}

ExpPoly ExpPoly::sinh2_edge(int e) {
  Key kp{0, 0, 0, 0, 0, 0}, km{0, 0, 0, 0, 0, 0};
  kp[e] = 4;
  km[e] = -4;
  return (atom(kp) + atom(km) - constant(2.0)) * 0.25;
}

ExpPoly ExpPoly::operator+(const ExpPoly& o) const {
  ExpPoly r = *this;
  for (const Atom& a : o.atoms_) r.insert(a.k, a.c);
  return r;
}

ExpPoly ExpPoly::operator-(const ExpPoly& o) const {
  ExpPoly r = *this;
  for (const Atom& a : o.atoms_) r.insert(a.k, -a.c);
  return r;
}

ExpPoly ExpPoly::operator*(const ExpPoly& o) const {
  std::map<Key, double> acc;
  for (const Atom& a : atoms_) {
    for (const Atom& b : o.atoms_) {
      Key k;
      for (int i = 0; i < 6; ++i) k[i] = a.k[i] + b.k[i];
      double& slot = acc[k];
      slot += a.c * b.c;
      if (slot == 0.0) acc.erase(k);
    }
  }
  ExpPoly r;
  r.atoms_.reserve(acc.size());
  for (const auto& [k, c] : acc) r.atoms_.push_back(Atom{k, c});
  return r;
}

ExpPoly ExpPoly::operator*(double s) const {
  if (s == 0.0) return ExpPoly();
  ExpPoly r = *this;
  for (Atom& a : r.atoms_) a.c *= s;
  return r;
}

ExpPoly::Scaled ExpPoly::eval_scaled(const std::array<double, 6>& l) const {
  if (atoms_.empty()) return {0.0, 0.0};
  double m = -std::numeric_limits<double>::infinity();
  for (const Atom& a : atoms_) {
    double d = 0.0;
    for (int i = 0; i < 6; ++i) d += a.k[i] * l[i];
    if (0.5 * d > m) m = 0.5 * d;
  }
  double s = 0.0;
  for (const Atom& a : atoms_) {
    double d = 0.0;
    for (int i = 0; i < 6; ++i) d += a.k[i] * l[i];
    s += a.c * std::exp(0.5 * d - m);
  }
  return {s, m};
}

double ExpPoly::eval(const std::array<double, 6>& l) const {
  Scaled v = eval_scaled(l);
  return v.mantissa * std::exp(v.log_scale);
}

namespace {

int ei(int a, int b) { return kEdgeIndex[a][b]; }

// c * exp(sum over pairs of half * l_edge / 2); half counts half-units,
// so {e, 2} contributes e^{l_e} and {e, -1} contributes e^{-l_e/2}.
ExpPoly halfexp(std::initializer_list<std::pair<int, int>> hs,
                double c = 1.0) {
  ExpPoly::Key k{0, 0, 0, 0, 0, 0};
  for (const auto& [e, h] : hs) k[e] += h;
  return ExpPoly::atom(k, c);
}

ExpPoly E(int e) { return ExpPoly::edge_exp(e, +1); }

std::array<PhiParts, 6> build_phi(int shape) {
  std::array<PhiParts, 6> out;
  const ExpPoly one = ExpPoly::constant(1.0);

  if (shape == 2) {
    // Vertices 0,1 hyperideal; 2,3 ideal.
    const int i12 = ei(0, 1), i13 = ei(0, 2), i14 = ei(0, 3);
    const int i23 = ei(1, 2), i24 = ei(1, 3), i34 = ei(2, 3);
    const ExpPoly c12 = ExpPoly::cosh_edge(i12);
    const ExpPoly s212 = ExpPoly::sinh2_edge(i12);

    out[i12].n = (E(i13) + E(i23) * c12) * (E(i14) + E(i24) * c12) -
                 (2.0 * E(i34) + halfexp({{i23, 2}, {i24, 2}})) * s212;
    out[i12].f1 = halfexp({{i23, 4}}) +
                  2.0 * halfexp({{i23, 2}, {i13, 2}}) * c12 +
                  halfexp({{i13, 4}});
    out[i12].f2 = halfexp({{i14, 4}}) +
                  2.0 * halfexp({{i24, 2}, {i14, 2}}) * c12 +
                  halfexp({{i24, 4}});

    out[i34].n = halfexp({{i24, 2}, {i13, 2}}) +
                 halfexp({{i14, 2}, {i23, 2}}) - 2.0 * E(i34) * c12;
    out[i34].f1 = (halfexp({{i24, 2}, {i23, 2}}) + E(i34)) * 4.0;
    out[i34].f2 = halfexp({{i14, 2}, {i13, 2}}) + E(i34);

    // Hyperideal-ideal edges ik, i in {0,1}, k in {2,3}; j and h are
    // the other hyperideal / ideal vertex.
    for (int i : {0, 1}) {
      const int j = 1 - i;
      for (int k : {2, 3}) {
        const int h = 5 - k;
        const int lik = ei(i, k), lih = ei(i, h), ljk = ei(j, k),
                  ljh = ei(j, h), lkh = ei(k, h), lij = ei(i, j);
        const ExpPoly cij = ExpPoly::cosh_edge(lij);
        const ExpPoly u = halfexp({{lkh, 2}, {lik, -2}, {lih, -2}});
        out[lik].n =
            (2.0 * u + one) * (E(ljk) + E(lik) * cij) -
            (halfexp({{ljh, 2}, {lik, 2}, {lih, -2}}) + E(lik) * cij);
        out[lik].f1 = (u * u + u) * 4.0;
        out[lik].f2 = halfexp({{ljk, 4}}) +
                      2.0 * halfexp({{lik, 2}, {ljk, 2}}) * cij +
                      halfexp({{lik, 4}});
      }
    }
  } else if (shape == 3) {
    // Vertices 0,1,2 hyperideal; 3 ideal.
    for (auto [i, j, k] : {std::array<int, 3>{0, 1, 2},
                           std::array<int, 3>{1, 2, 0},
                           std::array<int, 3>{2, 0, 1}}) {
      const int li4 = ei(i, 3), lj4 = ei(j, 3), lk4 = ei(k, 3);
      const int lij = ei(i, j), lik = ei(i, k), ljk = ei(j, k);
      const ExpPoly cij = ExpPoly::cosh_edge(lij);
      const ExpPoly cik = ExpPoly::cosh_edge(lik);
      const ExpPoly cjk = ExpPoly::cosh_edge(ljk);

      out[li4].n = E(lj4) * E(lk4) +
                   E(li4) * (E(lk4) * cij + E(lj4) * cik - E(li4) * cjk);
      out[li4].f1 = halfexp({{lj4, 4}}) +
                    2.0 * halfexp({{lj4, 2}, {li4, 2}}) * cij +
                    halfexp({{li4, 4}});
      out[li4].f2 = halfexp({{lk4, 4}}) +
                    2.0 * halfexp({{lk4, 2}, {li4, 2}}) * cik +
                    halfexp({{li4, 4}});

      out[lij].n = (E(lj4) + E(li4) * cij) * (cjk + cij * cik) -
                   (E(lk4) + E(li4) * cik) * ExpPoly::sinh2_edge(lij);
      out[lij].f1 = cjk * cjk + cij * cij + cik * cik +
                    2.0 * cjk * cij * cik - one;
      out[lij].f2 = halfexp({{lj4, 4}}) +
                    2.0 * halfexp({{lj4, 2}, {li4, 2}}) * cij +
                    halfexp({{li4, 4}});
    }
  } else if (shape == 0) {
    // All four vertices ideal (Penner pattern).
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        int r = -1, s = -1;
        for (int x = 0; x < 4; ++x) {
          if (x == p || x == q) continue;
          (r < 0 ? r : s) = x;
        }
        const int qr = ei(q, r), qs = ei(q, s), pr = ei(p, r),
                  ps = ei(p, s), pq = ei(p, q), rs = ei(r, s);
        out[pq].n =
            (halfexp({{qr, 1}, {qs, -1}, {pr, -1}, {ps, 1}}) +
             halfexp({{qr, -1}, {qs, 1}, {pr, 1}, {ps, -1}})) *
                0.5 -
            halfexp({{pq, 2}, {rs, 2}, {pr, -1}, {ps, -1}, {qr, -1}, {qs, -1}},
                    0.5);
        out[pq].f1 = one;
        out[pq].f2 = one;
      }
    }
  } else if (shape == 4) {
    // All four vertices hyperideal.
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        int r = -1, s = -1;
        for (int x = 0; x < 4; ++x) {
          if (x == p || x == q) continue;
          (r < 0 ? r : s) = x;
        }
        const ExpPoly cpq = ExpPoly::cosh_edge(ei(p, q));
        const ExpPoly cpr = ExpPoly::cosh_edge(ei(p, r));
        const ExpPoly cps = ExpPoly::cosh_edge(ei(p, s));
        const ExpPoly cqr = ExpPoly::cosh_edge(ei(q, r));
        const ExpPoly cqs = ExpPoly::cosh_edge(ei(q, s));
        const ExpPoly crs = ExpPoly::cosh_edge(ei(r, s));
        out[ei(p, q)].n = cqr * cqs + cpr * cps + crs +
                          cpq * (cqr * cps + cpr * cqs) - cpq * cpq * crs;
        out[ei(p, q)].f1 =
            cqr * cqr + cpq * cpq + cpr * cpr + 2.0 * cqr * cpq * cpr - one;
        out[ei(p, q)].f2 =
            cqs * cqs + cpq * cpq + cps * cps + 2.0 * cqs * cpq * cps - one;
      }
    }
  } else if (shape == 1) {
    // Vertex 0 hyperideal; 1,2,3 ideal.
    for (int q = 1; q < 4; ++q) {
      int r = -1, s = -1;
      for (int x = 1; x < 4; ++x) {
        if (x == q) continue;
        (r < 0 ? r : s) = x;
      }
      const ExpPoly u1 =
          halfexp({{ei(q, r), 2}, {ei(0, q), -2}, {ei(0, r), -2}});
      const ExpPoly u2 =
          halfexp({{ei(q, s), 2}, {ei(0, q), -2}, {ei(0, s), -2}});
      const ExpPoly u3 =
          halfexp({{ei(r, s), 2}, {ei(0, r), -2}, {ei(0, s), -2}});
      out[ei(0, q)].n = 2.0 * u1 * u2 + u1 + u2 - u3;
      out[ei(0, q)].f1 = (u1 * u1 + u1) * 4.0;
      out[ei(0, q)].f2 = u2 * u2 + u2;
    }
    for (int q = 1; q < 4; ++q) {
      for (int r = q + 1; r < 4; ++r) {
        int s = -1;
        for (int x = 1; x < 4; ++x) {
          if (x != q && x != r) s = x;
        }
        const ExpPoly a = halfexp({{ei(0, r), 2}, {ei(q, s), 2}}) +
                          halfexp({{ei(q, r), 2}, {ei(q, s), 2}, {ei(0, q), -2}});
        const ExpPoly b = halfexp({{ei(r, s), 2}, {ei(0, q), 2}});
        const ExpPoly c = halfexp({{ei(0, s), 2}, {ei(q, r), 2}}) +
                          halfexp({{ei(q, s), 2}, {ei(q, r), 2}, {ei(0, q), -2}});
        out[ei(q, r)].n = a + b - c;
        out[ei(q, r)].f1 = a * 4.0;
        out[ei(q, r)].f2 = b;
      }
    }
  } else {
    throw std::invalid_argument("phi_table: shape out of range");
  }
  return out;
}

}  // namespace

const std::array<PhiParts, 6>& phi_table(int hyperideal_count) {
  if (hyperideal_count < 0 || hyperideal_count > 4) {
    throw std::invalid_argument("phi_table: shape out of range");
  }
  static const std::array<std::array<PhiParts, 6>, 5> tables = [] {
    std::array<std::array<PhiParts, 6>, 5> t;
    for (int k = 0; k < 5; ++k) t[k] = build_phi(k);
    return t;
  }();
  return tables[hyperideal_count];
}

}  // namespace crf
