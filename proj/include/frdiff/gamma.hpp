#pragma once

#include <complex>

namespace frdiff {

// Gamma function for complex argument. Throws DomainError at nonpositive
// integers (within tolerance 1e-14). Relative accuracy ~1e-14 for |z| <= 50.
std::complex<double> complex_gamma(std::complex<double> z);

// log Gamma, analytic continuation along the recurrence (exp of it is exact
// Gamma; the imaginary part is not reduced mod 2*pi). Requires z not on the
// nonpositive real axis poles.
std::complex<double> complex_log_gamma(std::complex<double> z);

// Reciprocal gamma for real argument; returns 0 at nonpositive integers.
double rgamma(double x);

}  // namespace frdiff
