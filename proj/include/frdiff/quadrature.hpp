#pragma once

#include <functional>
#include <vector>

namespace frdiff::quad {

struct Rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre rule of order n (cached after first construction).
const Rule& gauss_legendre(int n);

// Integrate f over [a, b] with a single n-point Gauss-Legendre rule.
double gl(const std::function<double(double)>& f, double a, double b, int n);

// Composite Gauss-Legendre over explicit panel breakpoints.
double gl_panels(const std::function<double(double)>& f,
                 const std::vector<double>& breaks, int n_per_panel);

// Breakpoints a = b0 < ... < bk = b with geometric refinement toward `a`:
// first panel has length ~ (b-a)*ratio^(k-1).
std::vector<double> geometric_breaks(double a, double b, int k, double ratio);

// Uniform breakpoints.
std::vector<double> uniform_breaks(double a, double b, int k);

// Adaptive quadrature (Gauss-Legendre 10/20 pair with bisection).
// abs_tol is an absolute tolerance target; depth-limited.
double adaptive(const std::function<double(double)>& f, double a, double b,
                double abs_tol, int max_depth = 14);

}  // namespace frdiff::quad
