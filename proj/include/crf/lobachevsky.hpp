#pragma once

namespace crf {

// Milnor's Lobachevsky function
//
//   lob(theta) = -int_0^theta ln|2 sin t| dt.
//
// Odd, pi-periodic, maximum lob(pi/6) ~ 0.5074708, zero at integer
// multiples of pi/2. Absolute accuracy is ~1e-15 on [0, pi].
// Throws std::domain_error on non-finite input.
double lobachevsky(double theta);

// d/dtheta lob(theta) = -ln|2 sin theta|.
// Throws std::domain_error when theta is an integer multiple of pi
// (the derivative has a logarithmic singularity there).
double lobachevsky_derivative(double theta);

}  // namespace crf
