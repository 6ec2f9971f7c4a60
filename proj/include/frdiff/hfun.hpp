#pragma once

#include <string>
#include <utility>
#include <vector>

namespace frdiff::specfun {

// Mellin-Barnes function of type H^{mu 0}_{p q}: for the family used here
// (nu = 0, mu = q) the integrand is
//   G(s) = prod_k Gamma(d_k + delta_k s) / prod_k Gamma(c_k + gamma_k s)
// and H(z) = (1/2 pi i) Int G(s) z^{-s} ds over a line right of all poles of
// the numerator (pole set P1).
struct HFunctionSpec {
    int mu = 0, nu = 0, p = 0, q = 0;
    std::vector<std::pair<double, double>> upper_params;  // (c_k, gamma_k), p entries
    std::vector<std::pair<double, double>> lower_params;  // (d_k, delta_k), q entries

    double rho() const;           // sum delta - sum gamma, must be > 0
    void validate() const;        // throws DomainError / UnsupportedError
    std::string cache_key() const;

    // Radial profile spec of the order-alpha diffusion kernel in dimension n:
    // upper (1, alpha); lower (n/2, 1), (1, 1).
    static HFunctionSpec z_spec(int n, double alpha);
    // Same with upper (alpha, alpha); profile of the source kernel.
    static HFunctionSpec y_spec(int n, double alpha);
};

struct ContourParams {
    double sigma = 0.0;   // abscissa of the vertical line; <= 0 means automatic
    double t_max = 0.0;   // truncation of |Im s|; <= 0 means automatic
    int n_nodes = 512;    // total quadrature nodes on the half line
};

struct RegimeThresholds {
    double series_max = 0.5;
    double asymptotic_min = 15.0;
};

enum class Regime { series, contour, asymptotic };

struct EvalResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    Regime regime = Regime::contour;
};

// H(z) ~ C z^{power} exp(-rate z^{1/rho}) for z -> inf.
struct AsymptoticShape {
    double a = 0.0, b = 0.0, rho = 0.0;
    double power = 0.0;  // (1 - a)/rho
    double rate = 0.0;   // b^{1/rho} * rho
};
AsymptoticShape asymptotic_shape(const HFunctionSpec& spec);

// Residue series over the first n_terms pole groups (small z).
EvalResult hfun_small_z(const HFunctionSpec& spec, double z, int n_terms);

// Calibrated leading asymptotic term (large z).
EvalResult hfun_large_z(const HFunctionSpec& spec, double z,
                        const RegimeThresholds& thresholds = {});

// Vertical-line Mellin-Barnes quadrature (any z > 0).
EvalResult hfun_contour(const HFunctionSpec& spec, double z,
                        const ContourParams& params = {});

// Regime dispatcher.
EvalResult hfun_eval(const HFunctionSpec& spec, double z,
                     const RegimeThresholds& thresholds = {});

// Spec whose H satisfies d/dz H_spec(z) = -z^{-1} H_result(z).
HFunctionSpec hfun_shift_derivative(const HFunctionSpec& spec);

// Cubic Hermite tables, on a log-spaced grid, of a profile and its derivative
// shift chain; the slope data comes from z H_k'(z) = -H_{k+1}(z), so rows
// 0..max_shift are interpolable and one extra row supplies the slopes.
// Outside the tabulated window evaluation falls back to the direct
// dispatcher. Intended for the inner loops of kernel convolutions, where a
// lookup replaces a contour integral.
class HProfileTable {
public:
    HProfileTable(const HFunctionSpec& base, int max_shift, double z_min = 1e-7,
                  double z_max = 80.0, int n_nodes = 520);
    double eval(int shift, double z) const;
    int max_shift() const { return max_shift_; }

    // Shared table for the diffusion / source profile of dimension n.
    static const HProfileTable& cached(int n, double alpha, bool source_family,
                                       int max_shift = 3);

private:
    std::vector<HFunctionSpec> specs_;  // shifts 0 .. max_shift + 1
    int max_shift_ = 0;
    int n_nodes_ = 0;
    double u_min_ = 0.0, du_ = 0.0;  // grid in u = log z
    std::vector<std::vector<double>> vals_;
};

}  // namespace frdiff::specfun
