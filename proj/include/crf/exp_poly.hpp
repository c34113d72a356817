#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace crf {

// Polynomial in the edge exponentials: a finite sum of atoms
//
//   c * exp((k . l) / 2),   k an integer 6-vector (half-unit exponents).
//
// The phi functions below are ratios of such polynomials. Evaluating the
// textbook cosh/sinh arrangements directly subtracts numbers of size
// e^{2|l|} that agree to many digits, so double precision degrades
// exponentially in |l|. Expanding every product into atoms once, at
// table-build time, cancels those pairs exactly (all coefficients here
// are dyadic rationals), and the scaled evaluation keeps the residual
// sum well inside double range for any |l|.
class ExpPoly {
 public:
  using Key = std::array<int, 6>;
  struct Atom {
    Key k;
    double c;
  };
  struct Scaled {
    double mantissa;
    double log_scale;  // value = mantissa * exp(log_scale)
  };

  ExpPoly() = default;

  static ExpPoly constant(double c);
  // c * exp((k . l)/2), k in half-units: {2,0,...} means e^{l_0}.
  static ExpPoly atom(const Key& k, double c = 1.0);
  // c * e^{sign * l_e}
  static ExpPoly edge_exp(int e, int sign = +1, double c = 1.0);
  // cosh l_e
  static ExpPoly cosh_edge(int e);
  // sinh^2 l_e
  static ExpPoly sinh2_edge(int e);

  ExpPoly operator+(const ExpPoly& o) const;
  ExpPoly operator-(const ExpPoly& o) const;
  ExpPoly operator*(const ExpPoly& o) const;
  ExpPoly operator*(double s) const;
  friend ExpPoly operator*(double s, const ExpPoly& p) { return p * s; }

  // Factors the largest atom exponent out of the sum so the mantissa
  // stays O(sum |c|) regardless of |l|.
  Scaled eval_scaled(const std::array<double, 6>& l) const;
  // Plain value; may overflow to +-inf for extreme l (callers that care
  // use eval_scaled).
  double eval(const std::array<double, 6>& l) const;

  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }

 private:
  // Kept sorted by exponent key; like atoms merged, zeros dropped.
  std::vector<Atom> atoms_;
  void insert(const Key& k, double c);
};

// One table entry per edge slot: phi_e = n / sqrt(f1 * f2). f1 and f2
// are strictly positive on the shape's ambient box.
struct PhiParts {
  ExpPoly n, f1, f2;
};

// The six phi expressions for the canonical shape with the given number
// of hyperideal vertices (vertices 0..k-1 hyperideal, the rest ideal).
// Built once per shape and cached.
const std::array<PhiParts, 6>& phi_table(int hyperideal_count);

}  // namespace crf
