#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "frdiff/fractional.hpp"

namespace frdiff::levi {

// Bounded Holder-continuous scalar coefficient from a small analytic family.
// holder_gamma is declared, not estimated; it only enters test envelopes.
struct CoefficientField {
    enum class Family { constant, trig_perturbation, radial_bump };
    Family family = Family::constant;
    std::vector<double> params;
    double holder_gamma = 1.0;
    double sup_bound = 0.0;

    static CoefficientField constant(double value);
    // base + amplitude * sin(frequency * x[axis])
    static CoefficientField trig(double base, double amplitude, double frequency,
                                 int axis = 0);
    // base + amplitude * exp(-|x|^2 / width^2)
    static CoefficientField bump(double base, double amplitude, double width);

    double operator()(const Eigen::VectorXd& x) const;
    void validate() const;
};

// Second-order uniformly elliptic operator sum a_ij d_i d_j + sum b_j d_j + c
// with variable coefficients; delta is the ellipticity constant and gamma the
// common Holder exponent, both declared and spot-checked on sample points.
struct OperatorSpec {
    int n = 0;
    std::vector<std::vector<CoefficientField>> a;  // n x n, symmetric
    std::vector<CoefficientField> b;               // empty means zero drift
    CoefficientField c = CoefficientField::constant(0.0);
    double delta = 0.0;
    double gamma = 1.0;

    static OperatorSpec isotropic(int n, const CoefficientField& a_scalar);
    static OperatorSpec laplacian(int n);

    Eigen::MatrixXd a_at(const Eigen::VectorXd& x) const;
    Eigen::VectorXd b_at(const Eigen::VectorXd& x) const;
    double c_at(const Eigen::VectorXd& x) const;
    void validate() const;
};

// Tensor-product lattice around a base point (per-axis nodes base_d + j h for
// |j| <= radius_cells, row-major flattening) crossed with a graded time grid.
// The half width must cover the exponential kernel envelope: >= 6 T^{alpha/2}.
struct SpaceTimeGrid {
    fractional::TimeGrid time;
    Eigen::VectorXd base;
    double h = 0.0;
    int radius_cells = 0;
    int n = 0;

    static SpaceTimeGrid make(int n, double alpha, const fractional::TimeGrid& time,
                              const Eigen::VectorXd& base, double h,
                              double half_width = 0.0);  // 0 means minimal
    double half_width() const { return radius_cells * h; }
    int per_axis() const { return 2 * radius_cells + 1; }
    int lattice_size() const;
    Eigen::VectorXd node(int flat) const;
    void validate(double alpha) const;
};

// values[i][j]: time level i (level 0 is t = 0), flattened lattice index j.
using GridValues = std::vector<std::vector<double>>;

// Scalar space-time field produced by the Volterra solver.
struct FieldTable {
    SpaceTimeGrid grid;
    GridValues values;
    int iteration_count = 0;
    double residual_norm = 0.0;  // relative sup-norm of the last increment
};

struct QKernelTable {
    SpaceTimeGrid grid;
    Eigen::VectorXd xi;
    GridValues values;
    int iteration_count = 0;
    double residual_norm = 0.0;
};

// Green matrix column at source xi: values = values_parametrix + values_v
// summed entrywise (the decomposition is stored, not recomputed). For n >= 2
// the parametrix entry at the node x = xi is +infinity.
struct GreenMatrixTable {
    SpaceTimeGrid grid;
    Eigen::VectorXd xi;
    GridValues values;
    GridValues values_parametrix;
    GridValues values_v;
    int iteration_count = 0;
    double residual_norm = 0.0;
};

struct SolveOptions {
    double tolerance = 1e-6;  // relative sup-norm residual
    int max_iterations = 50;
};

// Parametrix defect kernels, with the parametrix frozen at the source point:
//   M = sum [a_ij(x) - a_ij(xi)] d_i d_j Z0(t, x - xi; xi)
//       + sum b_i(x) d_i Z0 + c(x) Z0,
// and K is the same expression with Y0 in place of Z0.
double levi_M(const OperatorSpec& op, double alpha, double t,
              const Eigen::VectorXd& x, const Eigen::VectorXd& xi);
double levi_K(const OperatorSpec& op, double alpha, double t,
              const Eigen::VectorXd& x, const Eigen::VectorXd& xi);

// Volterra equations Q = M + K * Q and Psi = K + K * Psi (space-time
// convolution), solved by iterating the Neumann series on the grid.
QKernelTable solve_Q(const OperatorSpec& op, double alpha,
                     const SpaceTimeGrid& grid, const Eigen::VectorXd& xi,
                     const SolveOptions& options = {});
QKernelTable solve_Psi(const OperatorSpec& op, double alpha,
                       const SpaceTimeGrid& grid, const Eigen::VectorXd& xi,
                       const SolveOptions& options = {});

// Z = Z0 + V_Z with V_Z(t,x;xi) = Int_0^t Int Y0(t-l, x-y; y) Q(l,y;xi) dy dl,
// and Y = Y0 + V_Y with Psi in place of Q.
GreenMatrixTable assemble_Z(const OperatorSpec& op, double alpha,
                            const SpaceTimeGrid& grid, const Eigen::VectorXd& xi,
                            const SolveOptions& options = {});
GreenMatrixTable assemble_Y(const OperatorSpec& op, double alpha,
                            const SpaceTimeGrid& grid, const Eigen::VectorXd& xi,
                            const SolveOptions& options = {});

// Engine-level entry points shared with the Cauchy solver: grid-sampled
// space-time convolutions against the table-backed kernels (multilinear in
// space, linear in time between levels; zero outside the lattice), and the
// generic Volterra solve Phi = rhs + K * Phi.
GridValues convolve_K(const OperatorSpec& op, double alpha,
                      const SpaceTimeGrid& grid, const GridValues& f);
GridValues convolve_Y0(const OperatorSpec& op, double alpha,
                       const SpaceTimeGrid& grid, const GridValues& f);
FieldTable solve_density(const OperatorSpec& op, double alpha,
                         const SpaceTimeGrid& grid, const GridValues& rhs,
                         const SolveOptions& options = {});

// Spatial potentials of an analytic datum: Int M(t, x; xi) u0(xi) dxi and
// Int Z0(t, x - xi; xi) u0(xi) dxi on the grid (level 0 holds 0 and u0(x)).
using SpatialFn = std::function<double(const Eigen::VectorXd&)>;
GridValues apply_M(const OperatorSpec& op, double alpha,
                   const SpaceTimeGrid& grid, const SpatialFn& u0);
GridValues parametrix_potential(const OperatorSpec& op, double alpha,
                                const SpaceTimeGrid& grid, const SpatialFn& u0);

// As convolve_K / convolve_Y0 but with the density given analytically as
// f(lambda, y) and sampled exactly at the quadrature abscissae, so neither
// lattice interpolation nor the zero extension enters.
using SpaceTimeFn = std::function<double(double, const Eigen::VectorXd&)>;
GridValues convolve_K_source(const OperatorSpec& op, double alpha,
                             const SpaceTimeGrid& grid, const SpaceTimeFn& f);
GridValues convolve_Y0_source(const OperatorSpec& op, double alpha,
                              const SpaceTimeGrid& grid, const SpaceTimeFn& f);

}  // namespace frdiff::levi
