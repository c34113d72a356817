#include "crf/lobachevsky.hpp"

#include <cmath>
#include <stdexcept>

namespace crf {
namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// zeta(2n) for n = 1..26.
constexpr double kZetaEven[] = {
    0.0,
    1.6449340668482264,   // zeta(2) = pi^2/6
    1.0823232337111381,   // zeta(4) = pi^4/90
    1.0173430619844492,   // zeta(6) = pi^6/945
    1.0040773561979444,   // zeta(8) = pi^8/9450
    1.000994575127818,    // zeta(10) = pi^10/93555
    1.000246086553308,    // zeta(12)
    1.0000612481350588,   // zeta(14)
    1.0000152822594086,   // zeta(16)
    1.000003817293265,    // zeta(18)
    1.0000009539620338,   // zeta(20)
    1.0000002384505027,   // zeta(22)
    1.0000000596081891,   // zeta(24)
    1.0000000149015549,   // zeta(26)
    1.000000003725334,    // zeta(28)
    1.0000000009313275,   // zeta(30)
    1.0000000002328311,   // zeta(32)
    1.0000000000582077,   // zeta(34)
    1.0000000000145519,   // zeta(36)
    1.000000000003638,    // zeta(38)
    1.0000000000009095,   // zeta(40)
    1.0000000000002274,   // zeta(42)
    1.0000000000000568,   // zeta(44)
    1.0000000000000142,   // zeta(46)
    1.0000000000000036,   // zeta(48)
    1.0000000000000009,   // zeta(50)
    1.0000000000000002,   // zeta(52)
};

// Series evaluation on |x| <= pi/2:
//
//   lob(x) = x - x ln|2x| + sum_{n>=1} zeta(2n)/(n(2n+1)) (x/pi)^{2n} x.
//
// At |x| = pi/2 consecutive terms shrink by ~1/4, so truncating after
// n = 26 leaves a tail below 1e-19.
double lob_series(double x) {
  if (x == 0.0) return 0.0;
  double r = x / kPi;
  double r2 = r * r;
  double p = r2;
  double s = 0.0;
  for (int n = 1; n <= 26; ++n) {
    s += kZetaEven[n] / (n * (2.0 * n + 1.0)) * p;
    p *= r2;
  }
  return x * (1.0 - std::log(std::fabs(2.0 * x)) + s);
}

}  // namespace

double lobachevsky(double theta) {
  if (!std::isfinite(theta)) {
    throw std::domain_error("lobachevsky: non-finite argument");
  }
  // Reduce mod pi into [-pi/2, pi/2]; lob is pi-periodic.
  double x = std::remainder(theta, kPi);
  return lob_series(x);
}

double lobachevsky_derivative(double theta) {
  if (!std::isfinite(theta)) {
    throw std::domain_error("lobachevsky_derivative: non-finite argument");
  }
  if (std::remainder(theta, kPi) == 0.0) {
    throw std::domain_error(
        "lobachevsky_derivative: singular at integer multiples of pi");
  }
  return -std::log(std::fabs(2.0 * std::sin(theta)));
}

}  // namespace crf
