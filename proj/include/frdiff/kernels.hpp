#pragma once

#include <Eigen/Dense>
#include <vector>

namespace frdiff::kernels {

// Constant symmetric positive definite coefficient matrix a = (a_ij) together
// with its inverse A = (A^(ij)), determinant and ellipticity constant.
struct SPDOperator {
    int n = 0;
    Eigen::MatrixXd a;
    Eigen::MatrixXd a_inv;
    double det_a = 0.0;
    double delta = 0.0;  // smallest eigenvalue of a

    static SPDOperator make(const Eigen::MatrixXd& a);  // validates
    static SPDOperator identity(int n);
    void validate() const;
};

// Point query for a kernel or one of its spatial derivatives. The multi-index
// holds per-coordinate differentiation orders.
struct KernelQuery {
    double alpha = 0.5;
    double t = 1.0;
    Eigen::VectorXd x;
    std::vector<int> m;  // empty means no derivative

    int order() const;  // |m|
    void validate(int n) const;
};

// Anisotropy pseudo-distance ((|x-xi|)/(t-tau)^beta)^(1/(1-beta)); with
// beta = alpha/2 this is the exponent shape appearing in all kernel bounds.
double rho(double t, const Eigen::VectorXd& x, double tau,
           const Eigen::VectorXd& xi, double beta);

// Fundamental-solution kernel of the order-alpha diffusion equation with
// constant coefficients, its source counterpart, and their derivatives.
double z0_eval(const SPDOperator& op, const KernelQuery& q);
double y0_eval(const SPDOperator& op, const KernelQuery& q);
double z0_derivative(const SPDOperator& op, const KernelQuery& q);
double y0_derivative(const SPDOperator& op, const KernelQuery& q);
double z0_time_derivative(const SPDOperator& op, const KernelQuery& q);

// Independent evaluation of Z0 through the inverse Fourier integral of
// k -> E_alpha(-t^alpha <a k, k>); n <= 3. quad_resolution >= 1 multiplies
// the oscillatory-quadrature node budget.
double fourier_oracle_z0(const SPDOperator& op, double alpha, double t,
                         const Eigen::VectorXd& x, int quad_resolution = 1);

// Right-hand-side shapes of the two-branch kernel bounds with C = 1 and a
// configurable exponential rate sigma; callers calibrate the constant.
double envelope_z0(int n, double alpha, int m, double t, double xnorm,
                   double sigma = 0.5);
double envelope_y0(int n, double alpha, int m, double t, double xnorm,
                   double sigma = 0.5);

}  // namespace frdiff::kernels
