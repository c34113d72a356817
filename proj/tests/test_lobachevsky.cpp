#include <cmath>

#include "crf/lobachevsky.hpp"
#include "doctest.h"
#include "oracles.hpp"

using crf::lobachevsky;
using crf::lobachevsky_derivative;
using oracle::kPi;

TEST_CASE("frozen reference values") {
  // 30-digit arbitrary-precision references.
  CHECK(lobachevsky(kPi / 6.0) ==
        doctest::Approx(0.507470803204826812510601277137).epsilon(1e-15));
  CHECK(lobachevsky(kPi / 3.0) ==
        doctest::Approx(0.338313868803217875007067518092).epsilon(1e-15));
  CHECK(lobachevsky(0.3) == doctest::Approx(0.4547503982084090).epsilon(1e-15));
  CHECK(lobachevsky(2.8) ==
        doctest::Approx(-0.4739553257188430).epsilon(1e-15));
  CHECK(lobachevsky(0.0) == 0.0);
  CHECK(std::fabs(lobachevsky(kPi / 2.0)) < 1e-15);
}

TEST_CASE("matches direct quadrature of the defining integral") {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 40; ++i) {
    const double x = oracle::urand(gen, 0.01, kPi - 0.2);
    CHECK(lobachevsky(x) ==
          doctest::Approx(oracle::lobachevsky_quadrature(x)).epsilon(1e-12));
  }
}

TEST_CASE("oddness and pi-periodicity") {
  std::mt19937_64 gen(12);
  for (int i = 0; i < 30; ++i) {
    const double x = oracle::urand(gen, -8.0, 8.0);
    CHECK(lobachevsky(-x) == doctest::Approx(-lobachevsky(x)).epsilon(1e-15));
    CHECK(lobachevsky(x + kPi) ==
          doctest::Approx(lobachevsky(x)).epsilon(5e-14));
  }
}

TEST_CASE("half-angle identity at pi/6") {
  // L(pi/6) = (3/2) L(pi/3), an instance of the multiplication formula.
  CHECK(lobachevsky(kPi / 6.0) ==
        doctest::Approx(1.5 * lobachevsky(kPi / 3.0)).epsilon(1e-15));
}

TEST_CASE("derivative value and finite differences") {
  std::mt19937_64 gen(13);
  for (int i = 0; i < 20; ++i) {
    const double x = oracle::urand(gen, 0.05, kPi - 0.05);
    CHECK(lobachevsky_derivative(x) ==
          doctest::Approx(-std::log(std::fabs(2.0 * std::sin(x))))
              .epsilon(1e-15));
    const double h = 1e-6;
    const double fd = (lobachevsky(x + h) - lobachevsky(x - h)) / (2.0 * h);
    CHECK(lobachevsky_derivative(x) == doctest::Approx(fd).epsilon(1e-8));
  }
  CHECK_THROWS_AS((void)lobachevsky_derivative(0.0), std::domain_error);
  CHECK_THROWS_AS((void)lobachevsky_derivative(kPi), std::domain_error);
}

TEST_CASE("rejects non-finite input") {
  CHECK_THROWS_AS((void)lobachevsky(std::nan("")), std::domain_error);
  CHECK_THROWS_AS((void)lobachevsky(INFINITY), std::domain_error);
}
