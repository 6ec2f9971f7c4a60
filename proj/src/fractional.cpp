#include "frdiff/fractional.hpp"

#include <cmath>
#include <limits>

#include "frdiff/errors.hpp"
#include "frdiff/gamma.hpp"

namespace frdiff::fractional {

TimeGrid TimeGrid::graded(double T, int N, double grading) {
    if (!(T > 0.0)) throw DomainError("TimeGrid: T must be positive");
    if (N < 1) throw DomainError("TimeGrid: N must be positive");
    if (!(grading >= 1.0)) throw DomainError("TimeGrid: grading exponent must be >= 1");
    TimeGrid g;
    g.grading_exponent = grading;
    g.nodes.resize(N + 1);
    for (int k = 0; k <= N; ++k) g.nodes[k] = T * std::pow((double)k / N, grading);
    g.nodes[0] = 0.0;
    g.nodes[N] = T;
    return g;
}

void TimeGrid::validate() const {
    if (nodes.size() < 2 || nodes.front() != 0.0)
        throw DomainError("TimeGrid: must start at 0 with at least two nodes");
    for (size_t k = 1; k < nodes.size(); ++k)
        if (!(nodes[k] > nodes[k - 1]))
            throw DomainError("TimeGrid: nodes must increase strictly");
}

void SampledFunction::validate() const {
    grid.validate();
    if (values.size() != grid.nodes.size())
        throw DomainError("SampledFunction: value/node length mismatch");
}

SampledFunction caputo_derivative(const SampledFunction& f, double alpha) {
    f.validate();
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("caputo_derivative: alpha must lie in (0,1)");
    if (f.values.size() < 4)
        throw DomainError("caputo_derivative: need at least 4 nodes");
    const auto& t = f.grid.nodes;
    const int N = (int)t.size() - 1;
    SampledFunction out;
    out.grid = f.grid;
    out.values.assign(N + 1, 0.0);
    const double pref = rgamma(2.0 - alpha);
    for (int i = 1; i <= N; ++i) {
        double s = 0.0;
        for (int k = 0; k < i; ++k) {
            double slope = (f.values[k + 1] - f.values[k]) / (t[k + 1] - t[k]);
            double A = t[i] - t[k], B = t[i] - t[k + 1];
            s += slope * (std::pow(A, 1.0 - alpha) - std::pow(B, 1.0 - alpha));
        }
        out.values[i] = pref * s;
    }
    return out;
}

SampledFunction rl_integral(const SampledFunction& f, double order) {
    f.validate();
    if (!(order > 0.0 && order <= 1.0))
        throw DomainError("rl_integral: order must lie in (0,1]");
    const auto& t = f.grid.nodes;
    const int N = (int)t.size() - 1;
    const double mu = order;
    SampledFunction out;
    out.grid = f.grid;
    out.values.assign(N + 1, 0.0);
    const double pref = rgamma(mu);
    for (int i = 1; i <= N; ++i) {
        double s = 0.0;
        for (int k = 0; k < i; ++k) {
            double h = t[k + 1] - t[k];
            double A = t[i] - t[k], B = t[i] - t[k + 1];
            double w0 = (std::pow(A, mu) - std::pow(B, mu)) / mu;
            double w1 = A * w0 - (std::pow(A, mu + 1.0) - std::pow(B, mu + 1.0)) / (mu + 1.0);
            s += f.values[k] * w0 + (f.values[k + 1] - f.values[k]) / h * w1;
        }
        out.values[i] = pref * s;
    }
    return out;
}

SampledFunction rl_derivative(const SampledFunction& f, double order) {
    f.validate();
    if (!(order > 0.0 && order < 1.0))
        throw DomainError("rl_derivative: order must lie in (0,1)");
    // D^mu f = (Caputo-mu f) + f(0) t^{-mu} / Gamma(1-mu) for absolutely
    // continuous f; avoids differencing the fractional integral.
    SampledFunction out = caputo_derivative(f, order);
    const double c0 = f.values[0] * rgamma(1.0 - order);
    const auto& t = f.grid.nodes;
    for (size_t i = 1; i < out.values.size(); ++i)
        out.values[i] += c0 * std::pow(t[i], -order);
    out.values[0] = std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace frdiff::fractional
