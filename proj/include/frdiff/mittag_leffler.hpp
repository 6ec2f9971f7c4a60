#pragma once

#include <complex>

namespace frdiff {

// Mittag-Leffler function E_alpha(z) = sum_k z^k / Gamma(1 + alpha k),
// alpha in (0,1]. Series on the disk |z| <= min(5, 12^alpha) where
// cancellation stays bounded, a completely monotone spectral integral on the
// negative real axis, a ratio-advanced series (no cancellation) on the
// positive axis. Complex arguments supported only on the series disk.
double mittag_leffler(double alpha, double z);
std::complex<double> mittag_leffler(double alpha, std::complex<double> z);

}  // namespace frdiff
