#pragma once

#include <vector>

namespace frdiff::fractional {

// Time grid on [0, T], node k at T (k/N)^g.
struct TimeGrid {
    std::vector<double> nodes;
    double grading_exponent = 1.0;

    static TimeGrid graded(double T, int N, double grading);
    void validate() const;
    double T() const { return nodes.back(); }
    int size() const { return (int)nodes.size(); }
};

struct SampledFunction {
    TimeGrid grid;
    std::vector<double> values;
    void validate() const;
};

// Caputo derivative of order alpha in (0,1) by product integration of the
// weakly singular kernel against the piecewise-linear interpolant (L1 scheme
// on a nonuniform grid). values[0] is 0 by convention.
SampledFunction caputo_derivative(const SampledFunction& f, double alpha);

// Riemann-Liouville integral of order in (0,1], same product-integration
// scheme (exact integration of the power weight against the interpolant).
SampledFunction rl_integral(const SampledFunction& f, double order);

// Riemann-Liouville derivative of order in (0,1); reported from the second
// node onward (values[0] is NaN: the operator is singular at t = 0).
SampledFunction rl_derivative(const SampledFunction& f, double order);

}  // namespace frdiff::fractional
