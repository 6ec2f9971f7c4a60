// Variable-coefficient Green matrix by the parametrix (Levi) method: defect
// kernels M and K, Volterra equations for the densities Q and Psi, and the
// correction integrals V = Y0 (*) density. The space-time convolutions run on
// table-backed radial profiles; spatial integrals use the self-similar
// substitution y = x + s^{alpha/2} w so one fixed rule in w resolves the
// kernel at every elapsed time s.
#include "frdiff/levi.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "frdiff/errors.hpp"
#include "frdiff/gamma.hpp"
#include "frdiff/hfun.hpp"
#include "frdiff/kernels.hpp"
#include "frdiff/quadrature.hpp"

namespace frdiff::levi {

namespace {

constexpr double kWMax = 14.0;       // support radius of the profiles in w
constexpr int kSubPanels = 10;       // geometric refinement of the last panel
constexpr double kSubRatio = 2.5;

double field_eval(const CoefficientField& f, const double* x, int n) {
    switch (f.family) {
        case CoefficientField::Family::constant:
            return f.params[0];
        case CoefficientField::Family::trig_perturbation:
            return f.params[0] + f.params[1] * std::sin(f.params[2] * x[(int)f.params[3]]);
        case CoefficientField::Family::radial_bump: {
            double r2 = 0.0;
            for (int d = 0; d < n; ++d) r2 += x[d] * x[d];
            return f.params[0] +
                   f.params[1] * std::exp(-r2 / (f.params[2] * f.params[2]));
        }
    }
    throw DomainError("CoefficientField: unknown family");
}

// a(y) (row-major, symmetric), its inverse and determinant; n <= 3.
struct Frozen {
    double a[9];
    double inv[9];
    double det;
};

Frozen freeze(const OperatorSpec& op, const double* y) {
    Frozen f;
    const int n = op.n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = field_eval(op.a[i][j], y, n);
            f.a[i * n + j] = v;
            f.a[j * n + i] = v;
        }
    if (n == 1) {
        f.det = f.a[0];
        f.inv[0] = 1.0 / f.a[0];
    } else if (n == 2) {
        f.det = f.a[0] * f.a[3] - f.a[1] * f.a[2];
        double id = 1.0 / f.det;
        f.inv[0] = f.a[3] * id;
        f.inv[1] = -f.a[1] * id;
        f.inv[2] = -f.a[2] * id;
        f.inv[3] = f.a[0] * id;
    } else {
        const double* a = f.a;
        double c00 = a[4] * a[8] - a[5] * a[7];
        double c01 = a[5] * a[6] - a[3] * a[8];
        double c02 = a[3] * a[7] - a[4] * a[6];
        f.det = a[0] * c00 + a[1] * c01 + a[2] * c02;
        double id = 1.0 / f.det;
        f.inv[0] = c00 * id;
        f.inv[1] = (a[2] * a[7] - a[1] * a[8]) * id;
        f.inv[2] = (a[1] * a[5] - a[2] * a[4]) * id;
        f.inv[3] = c01 * id;
        f.inv[4] = (a[0] * a[8] - a[2] * a[6]) * id;
        f.inv[5] = (a[2] * a[3] - a[0] * a[5]) * id;
        f.inv[6] = c02 * id;
        f.inv[7] = (a[1] * a[6] - a[0] * a[7]) * id;
        f.inv[8] = (a[0] * a[4] - a[1] * a[3]) * id;
    }
    if (!(f.det > 0.0))
        throw DomainError("levi: coefficient matrix lost positivity at a sample point");
    return f;
}

// Coefficients sampled at the observation point of a defect kernel.
struct OuterCoef {
    double a[9] = {0};
    double b[3] = {0};
    double c = 0.0;
    bool has_b = false, has_c = false;
};

int env_thread_count() {
    if (const char* s = std::getenv("FRDIFF_THREADS")) {
        int v = std::atoi(s);
        if (v >= 1) return v;
    }
    int hw = (int)std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(int count, const std::function<void(int)>& body) {
    int nth = std::min(env_thread_count(), count);
    if (nth <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < nth; ++t)
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    for (auto& th : pool) th.join();
}

enum class Kind { kernel_K, kernel_Y0, kernel_M, kernel_Z0 };

class Engine {
public:
    Engine(const OperatorSpec& op, double alpha, const SpaceTimeGrid& grid)
        : op_(op), alpha_(alpha), grid_(grid), n_(op.n),
          nt_(grid.time.size()), nl_(grid.lattice_size()),
          per_axis_(grid.per_axis()),
          zprof_(&specfun::HProfileTable::cached(op.n, alpha, false)),
          yprof_(&specfun::HProfileTable::cached(op.n, alpha, true)) {
        op_.validate();
        grid_.validate(alpha);
        if (!(alpha > 0.0 && alpha < 1.0))
            throw DomainError("levi: alpha must lie in (0,1)");
        build_rules();
        nodes_.resize(nl_ * n_);
        for (int j = 0; j < nl_; ++j) {
            Eigen::VectorXd v = grid_.node(j);
            for (int d = 0; d < n_; ++d) nodes_[j * n_ + d] = v[d];
        }
    }

    GridValues zeros() const {
        return GridValues(nt_, std::vector<double>(nl_, 0.0));
    }

    GridValues sample_defect(Kind kind, const Eigen::VectorXd& xi) const {
        if ((int)xi.size() != n_) throw DomainError("levi: xi dimension mismatch");
        double y[3];
        for (int d = 0; d < n_; ++d) y[d] = xi[d];
        GridValues out = zeros();
        auto oc = outer_coefs();
        for (int i = 1; i < nt_; ++i) {
            SCtx sc = make_sctx(grid_.time.nodes[i]);
            for (int j = 0; j < nl_; ++j)
                out[i][j] = eval_kernel(kind, sc, &nodes_[j * n_], y, &oc[j]);
        }
        return out;
    }

    GridValues convolve(Kind kind, const GridValues& f) const {
        check_shape(f);
        return time_convolve([&](const SCtx& sc, const double* x,
                                 const OuterCoef* ocj, double, int k,
                                 double theta) {
            return spatial_field(kind, sc, x, ocj, f[k], f[k + 1], theta);
        });
    }

    GridValues convolve_source(Kind kind, const SpaceTimeFn& f) const {
        return time_convolve([&](const SCtx& sc, const double* x,
                                 const OuterCoef* ocj, double lam, int,
                                 double) {
            return spatial_source(kind, sc, x, ocj, f, lam);
        });
    }

    GridValues potential(Kind kind, const SpatialFn& u0) const {
        GridValues out = zeros();
        auto oc = outer_coefs();
        parallel_for(nt_ * nl_, [&](int p) {
            int i = p / nl_, j = p % nl_;
            if (i == 0) {
                if (kind == Kind::kernel_Z0) out[0][j] = u0(grid_.node(j));
                return;
            }
            SCtx sc = make_sctx(grid_.time.nodes[i]);
            out[i][j] = spatial_datum(kind, sc, &nodes_[j * n_], &oc[j], u0);
        });
        return out;
    }

    GridValues solve(const GridValues& rhs, const SolveOptions& options,
                     int* iterations, double* residual) const {
        check_shape(rhs);
        if (!(options.tolerance > 0.0) || options.max_iterations < 1)
            throw DomainError("levi: bad solve options");
        double rhs_norm = sup_norm(rhs);
        if (rhs_norm == 0.0) {
            *iterations = 0;
            *residual = 0.0;
            return rhs;
        }
        GridValues q = rhs;
        for (int it = 1; it <= options.max_iterations; ++it) {
            GridValues conv = convolve(Kind::kernel_K, q);
            double diff = 0.0, norm = 0.0;
            for (int i = 0; i < nt_; ++i)
                for (int j = 0; j < nl_; ++j) {
                    double v = rhs[i][j] + conv[i][j];
                    diff = std::max(diff, std::abs(v - q[i][j]));
                    norm = std::max(norm, std::abs(v));
                    q[i][j] = v;
                }
            if (diff <= options.tolerance * norm) {
                *iterations = it;
                *residual = norm > 0.0 ? diff / norm : 0.0;
                return q;
            }
        }
        throw ConvergenceError(
            "levi: Volterra iteration did not meet the residual tolerance");
    }

private:
    struct SCtx {
        double s, omega, spow, scale;
    };

    // Shared time quadrature of Int_0^t field(t - lam, x; lam) d lam: full
    // panels between levels, then the weakly singular last panel in s = t -
    // lam on geometric sub-panels with a power-law tail extrapolation. field
    // receives the elapsed-time context, the quadrature time lam, the level
    // index k with lam in [t_k, t_{k+1}], and the in-panel fraction theta.
    template <class Field>
    GridValues time_convolve(const Field& field) const {
        GridValues out = zeros();
        auto oc = outer_coefs();
        const auto& rule = quad::gauss_legendre(4);
        const auto& tn = grid_.time.nodes;
        parallel_for((nt_ - 1) * nl_, [&](int p) {
            int i = 1 + p / nl_, j = p % nl_;
            const double* x = &nodes_[j * n_];
            const OuterCoef* ocj = &oc[j];
            double t = tn[i], acc = 0.0;
            for (int k = 0; k + 1 < i; ++k) {
                double mid = 0.5 * (tn[k] + tn[k + 1]), half = 0.5 * (tn[k + 1] - tn[k]);
                for (size_t q = 0; q < rule.nodes.size(); ++q) {
                    double lam = mid + half * rule.nodes[q];
                    SCtx sc = make_sctx(t - lam);
                    double theta = (lam - tn[k]) / (tn[k + 1] - tn[k]);
                    acc += half * rule.weights[q] * field(sc, x, ocj, lam, k, theta);
                }
            }
            double delta = t - tn[i - 1];
            double hi = delta, prev = 0.0, last = 0.0;
            for (int m = 0; m < kSubPanels; ++m) {
                double lo = delta * std::pow(kSubRatio, -(m + 1));
                double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
                double I = 0.0;
                for (size_t q = 0; q < rule.nodes.size(); ++q) {
                    double s = mid + half * rule.nodes[q];
                    SCtx sc = make_sctx(s);
                    double theta = (t - s - tn[i - 1]) / delta;
                    I += half * rule.weights[q] * field(sc, x, ocj, t - s, i - 1, theta);
                }
                acc += I;
                prev = last;
                last = I;
                hi = lo;
            }
            if (prev != 0.0) {
                double qr = last / prev;
                if (qr > 0.0 && qr < 0.9) acc += last * qr / (1.0 - qr);
            }
            out[i][j] = acc;
        });
        return out;
    }

    SCtx make_sctx(double s) const {
        SCtx c;
        c.s = s;
        c.omega = 0.25 * std::pow(s, -alpha_);
        c.spow = std::pow(s, alpha_ - 1.0);
        c.scale = std::pow(s, alpha_ / 2.0);
        return c;
    }

    void check_shape(const GridValues& f) const {
        if ((int)f.size() != nt_)
            throw DomainError("levi: field has wrong number of time levels");
        for (auto& row : f)
            if ((int)row.size() != nl_)
                throw DomainError("levi: field has wrong lattice size");
    }

    static double sup_norm(const GridValues& f) {
        double m = 0.0;
        for (auto& row : f)
            for (double v : row) m = std::max(m, std::abs(v));
        return m;
    }

    std::vector<OuterCoef> outer_coefs() const {
        std::vector<OuterCoef> oc(nl_);
        for (int j = 0; j < nl_; ++j) {
            const double* x = &nodes_[j * n_];
            OuterCoef& o = oc[j];
            for (int i = 0; i < n_; ++i)
                for (int k = i; k < n_; ++k) {
                    double v = field_eval(op_.a[i][k], x, n_);
                    o.a[i * n_ + k] = v;
                    o.a[k * n_ + i] = v;
                }
            if (!op_.b.empty()) {
                for (int i = 0; i < n_; ++i) {
                    o.b[i] = field_eval(op_.b[i], x, n_);
                    if (o.b[i] != 0.0) o.has_b = true;
                }
            }
            o.c = field_eval(op_.c, x, n_);
            o.has_c = (o.c != 0.0);
        }
        return oc;
    }

    // angular directions x radial nodes for the substitution y = x + scale r u
    void build_rules() {
        if (n_ == 1) {
            dirs_ = {{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}};
            dir_w_ = {1.0, 1.0};
        } else if (n_ == 2) {
            const int nth = 12;
            for (int k = 0; k < nth; ++k) {
                double th = 2.0 * M_PI * (k + 0.5) / nth;
                dirs_.push_back({std::cos(th), std::sin(th), 0.0});
                dir_w_.push_back(2.0 * M_PI / nth);
            }
        } else {
            const int naz = 8;
            const auto& mu = quad::gauss_legendre(4);
            for (size_t m = 0; m < mu.nodes.size(); ++m)
                for (int k = 0; k < naz; ++k) {
                    double c = mu.nodes[m], st = std::sqrt(1.0 - c * c);
                    double th = 2.0 * M_PI * (k + 0.5) / naz;
                    dirs_.push_back({st * std::cos(th), st * std::sin(th), c});
                    dir_w_.push_back(2.0 * M_PI / naz * mu.weights[m]);
                }
        }
        std::vector<double> breaks = {0.0, 0.6, 1.3, 2.2, 3.3, 4.6,
                                      6.2, 8.2, 10.8, kWMax};
        const auto& rule = quad::gauss_legendre(4);
        for (size_t p = 0; p + 1 < breaks.size(); ++p) {
            double mid = 0.5 * (breaks[p] + breaks[p + 1]);
            double half = 0.5 * (breaks[p + 1] - breaks[p]);
            for (size_t q = 0; q < rule.nodes.size(); ++q) {
                double r = mid + half * rule.nodes[q];
                rad_r_.push_back(r);
                rad_w_.push_back(half * rule.weights[q] * std::pow(r, n_ - 1));
            }
        }
    }

    // Kernel at elapsed time s, observation x, frozen point y. Defect kinds
    // return the full M / K combination; plain kinds return Z0 / Y0.
    double eval_kernel(Kind kind, const SCtx& sc, const double* x,
                      const double* y, const OuterCoef* oc) const {
        const bool source = (kind == Kind::kernel_K || kind == Kind::kernel_Y0);
        const bool defect = (kind == Kind::kernel_K || kind == Kind::kernel_M);
        const specfun::HProfileTable& prof = source ? *yprof_ : *zprof_;
        const double fam = source ? sc.spow : 1.0;

        Frozen fr = freeze(op_, y);
        double d[3], g[3];
        double Q = 0.0;
        for (int i = 0; i < n_; ++i) d[i] = x[i] - y[i];
        for (int i = 0; i < n_; ++i) {
            double gi = 0.0;
            for (int j = 0; j < n_; ++j) gi += fr.inv[i * n_ + j] * d[j];
            g[i] = 2.0 * gi;
            Q += 0.5 * g[i] * d[i];
        }
        const double pref = std::pow(M_PI, -n_ / 2.0) / std::sqrt(fr.det);

        if (Q <= 0.0) {
            if (n_ >= 2) return 0.0;  // measure-zero diagonal node
            double h1 = std::sqrt(M_PI) * rgamma(source ? alpha_ / 2.0 : 1.0 - alpha_ / 2.0);
            double val = fam * pref * h1 * std::sqrt(sc.omega);
            if (!defect) return val;
            return oc->has_c ? oc->c * val : 0.0;  // a-difference and gradient vanish
        }

        const double z = sc.omega * Q;
        const double m0 = n_ / 2.0;
        const double H0 = prof.eval(0, z);
        const double Qm0 = std::pow(Q, -m0);
        double val = fam * pref * Qm0 * H0;
        if (!defect) return val;

        const double H1 = prof.eval(1, z);
        const double H2 = prof.eval(2, z);
        const double F1 = -fam * pref * (Qm0 / Q) * (m0 * H0 + H1);
        const double F2 = fam * pref * (Qm0 / (Q * Q)) *
                          (m0 * (m0 + 1.0) * H0 + (2.0 * m0 + 1.0) * H1 + H2);
        double acc = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                double da = oc->a[i * n_ + j] - fr.a[i * n_ + j];
                if (da == 0.0) continue;
                acc += da * (F2 * g[i] * g[j] + 2.0 * F1 * fr.inv[i * n_ + j]);
            }
        if (oc->has_b)
            for (int i = 0; i < n_; ++i) acc += oc->b[i] * F1 * g[i];
        if (oc->has_c) acc += oc->c * val;
        return acc;
    }

    // Int kern(s, x, y) F(lam, y) dy with F interpolated between time levels.
    double spatial_field(Kind kind, const SCtx& sc, const double* x,
                         const OuterCoef* oc, const std::vector<double>& f0,
                         const std::vector<double>& f1, double theta) const {
        double acc = 0.0, y[3];
        for (size_t dd = 0; dd < dirs_.size(); ++dd) {
            const auto& u = dirs_[dd];
            for (size_t q = 0; q < rad_r_.size(); ++q) {
                double rr = sc.scale * rad_r_[q];
                for (int a = 0; a < n_; ++a) y[a] = x[a] + rr * u[a];
                double fv = (1.0 - theta) * interp(f0, y) + theta * interp(f1, y);
                if (fv == 0.0) continue;
                acc += dir_w_[dd] * rad_w_[q] * eval_kernel(kind, sc, x, y, oc) * fv;
            }
        }
        return acc * std::pow(sc.scale, n_);
    }

    double spatial_datum(Kind kind, const SCtx& sc, const double* x,
                         const OuterCoef* oc, const SpatialFn& u0) const {
        double acc = 0.0, y[3];
        Eigen::VectorXd yv(n_);
        for (size_t dd = 0; dd < dirs_.size(); ++dd) {
            const auto& u = dirs_[dd];
            for (size_t q = 0; q < rad_r_.size(); ++q) {
                double rr = sc.scale * rad_r_[q];
                for (int a = 0; a < n_; ++a) {
                    y[a] = x[a] + rr * u[a];
                    yv[a] = y[a];
                }
                double fv = u0(yv);
                if (fv == 0.0) continue;
                acc += dir_w_[dd] * rad_w_[q] * eval_kernel(kind, sc, x, y, oc) * fv;
            }
        }
        return acc * std::pow(sc.scale, n_);
    }

    double spatial_source(Kind kind, const SCtx& sc, const double* x,
                          const OuterCoef* oc, const SpaceTimeFn& f,
                          double lam) const {
        double acc = 0.0, y[3];
        Eigen::VectorXd yv(n_);
        for (size_t dd = 0; dd < dirs_.size(); ++dd) {
            const auto& u = dirs_[dd];
            for (size_t q = 0; q < rad_r_.size(); ++q) {
                double rr = sc.scale * rad_r_[q];
                for (int a = 0; a < n_; ++a) {
                    y[a] = x[a] + rr * u[a];
                    yv[a] = y[a];
                }
                double fv = f(lam, yv);
                if (fv == 0.0) continue;
                acc += dir_w_[dd] * rad_w_[q] * eval_kernel(kind, sc, x, y, oc) * fv;
            }
        }
        return acc * std::pow(sc.scale, n_);
    }

    // multilinear interpolation on the lattice; zero outside
    double interp(const std::vector<double>& row, const double* y) const {
        int i0[3];
        double fr[3];
        for (int d = 0; d < n_; ++d) {
            double u = (y[d] - grid_.base[d]) / grid_.h + grid_.radius_cells;
            if (u <= -1.0 || u >= per_axis_) return 0.0;
            double fl = std::floor(u);
            i0[d] = (int)fl;
            fr[d] = u - fl;
        }
        double acc = 0.0;
        for (int mask = 0; mask < (1 << n_); ++mask) {
            double w = 1.0;
            int flat = 0;
            bool ok = true;
            for (int d = 0; d < n_; ++d) {
                int bit = (mask >> d) & 1;
                int idx = i0[d] + bit;
                if (idx < 0 || idx >= per_axis_) {
                    ok = false;
                    break;
                }
                w *= bit ? fr[d] : 1.0 - fr[d];
                flat = flat * per_axis_ + idx;
            }
            if (ok && w != 0.0) acc += w * row[flat];
        }
        return acc;
    }

    const OperatorSpec& op_;
    double alpha_;
    const SpaceTimeGrid& grid_;
    int n_, nt_, nl_, per_axis_;
    const specfun::HProfileTable* zprof_;
    const specfun::HProfileTable* yprof_;
    std::vector<std::array<double, 3>> dirs_;
    std::vector<double> dir_w_, rad_r_, rad_w_;
    std::vector<double> nodes_;  // flattened lattice coordinates
};

}  // namespace

CoefficientField CoefficientField::constant(double value) {
    CoefficientField f;
    f.family = Family::constant;
    f.params = {value};
    f.sup_bound = std::abs(value);
    return f;
}

CoefficientField CoefficientField::trig(double base, double amplitude,
                                        double frequency, int axis) {
    CoefficientField f;
    f.family = Family::trig_perturbation;
    f.params = {base, amplitude, frequency, (double)axis};
    f.sup_bound = std::abs(base) + std::abs(amplitude);
    return f;
}

CoefficientField CoefficientField::bump(double base, double amplitude,
                                        double width) {
    CoefficientField f;
    f.family = Family::radial_bump;
    f.params = {base, amplitude, width};
    f.sup_bound = std::abs(base) + std::abs(amplitude);
    return f;
}

double CoefficientField::operator()(const Eigen::VectorXd& x) const {
    validate();
    std::vector<double> raw(x.data(), x.data() + x.size());
    if (family == Family::trig_perturbation && (int)params[3] >= (int)x.size())
        throw DomainError("CoefficientField: trig axis outside dimension");
    return field_eval(*this, raw.data(), (int)x.size());
}

void CoefficientField::validate() const {
    size_t need = family == Family::constant ? 1 : family == Family::radial_bump ? 3 : 4;
    if (params.size() != need)
        throw DomainError("CoefficientField: wrong parameter count for family");
    if (family == Family::radial_bump && !(params[2] > 0.0))
        throw DomainError("CoefficientField: bump width must be positive");
    if (family == Family::trig_perturbation && params[3] < 0.0)
        throw DomainError("CoefficientField: trig axis must be nonnegative");
    if (!(holder_gamma > 0.0 && holder_gamma <= 1.0))
        throw DomainError("CoefficientField: holder_gamma must lie in (0,1]");
}

OperatorSpec OperatorSpec::isotropic(int n, const CoefficientField& a_scalar) {
    if (n < 1 || n > 3) throw UnsupportedError("OperatorSpec: n must lie in 1..3");
    OperatorSpec op;
    op.n = n;
    op.a.assign(n, std::vector<CoefficientField>(n, CoefficientField::constant(0.0)));
    for (int i = 0; i < n; ++i) op.a[i][i] = a_scalar;
    double lo = 0.0;
    switch (a_scalar.family) {
        case CoefficientField::Family::constant:
            lo = a_scalar.params[0];
            break;
        case CoefficientField::Family::trig_perturbation:
            lo = a_scalar.params[0] - std::abs(a_scalar.params[1]);
            break;
        case CoefficientField::Family::radial_bump:
            lo = std::min(a_scalar.params[0], a_scalar.params[0] + a_scalar.params[1]);
            break;
    }
    op.delta = lo;
    op.gamma = a_scalar.holder_gamma;
    return op;
}

OperatorSpec OperatorSpec::laplacian(int n) {
    return isotropic(n, CoefficientField::constant(1.0));
}

Eigen::MatrixXd OperatorSpec::a_at(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = a[i][j](x);
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

Eigen::VectorXd OperatorSpec::b_at(const Eigen::VectorXd& x) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (size_t i = 0; i < b.size(); ++i) v[i] = b[i](x);
    return v;
}

double OperatorSpec::c_at(const Eigen::VectorXd& x) const { return c(x); }

void OperatorSpec::validate() const {
    if (n < 1 || n > 3) throw UnsupportedError("OperatorSpec: n must lie in 1..3");
    if ((int)a.size() != n) throw DomainError("OperatorSpec: a must be n x n");
    for (auto& row : a) {
        if ((int)row.size() != n) throw DomainError("OperatorSpec: a must be n x n");
        for (auto& f : row) f.validate();
    }
    if (!b.empty() && (int)b.size() != n)
        throw DomainError("OperatorSpec: b must be empty or length n");
    for (auto& f : b) f.validate();
    c.validate();
    if (!(delta > 0.0)) throw DomainError("OperatorSpec: delta must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw DomainError("OperatorSpec: gamma must lie in (0,1]");
    // deterministic spot checks of symmetry and ellipticity
    for (int p = 0; p < 5; ++p) {
        Eigen::VectorXd x(n);
        for (int d = 0; d < n; ++d)
            x[d] = 0.61 * p - 1.2 + 0.37 * d * (p % 2 ? -1.0 : 1.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (std::abs(a[i][j](x) - a[j][i](x)) > 1e-12)
                    throw DomainError("OperatorSpec: a is not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_at(x));
        if (es.eigenvalues().minCoeff() < delta - 1e-9)
            throw DomainError("OperatorSpec: ellipticity below declared delta");
    }
}

SpaceTimeGrid SpaceTimeGrid::make(int n, double alpha,
                                  const fractional::TimeGrid& time,
                                  const Eigen::VectorXd& base, double h,
                                  double half_width) {
    SpaceTimeGrid g;
    g.n = n;
    g.time = time;
    g.base = base;
    g.h = h;
    if (half_width <= 0.0)
        half_width = 6.0 * std::pow(time.nodes.back(), alpha / 2.0);
    g.radius_cells = (int)std::ceil(half_width / h - 1e-9);
    g.validate(alpha);
    return g;
}

int SpaceTimeGrid::lattice_size() const {
    int s = 1;
    for (int d = 0; d < n; ++d) s *= per_axis();
    return s;
}

Eigen::VectorXd SpaceTimeGrid::node(int flat) const {
    if (flat < 0 || flat >= lattice_size())
        throw DomainError("SpaceTimeGrid: lattice index out of range");
    Eigen::VectorXd v = base;
    for (int d = n - 1; d >= 0; --d) {
        int idx = flat % per_axis();
        flat /= per_axis();
        v[d] += h * (idx - radius_cells);
    }
    return v;
}

void SpaceTimeGrid::validate(double alpha) const {
    if (n < 1 || n > 3) throw UnsupportedError("SpaceTimeGrid: n must lie in 1..3");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("SpaceTimeGrid: alpha must lie in (0,1)");
    time.validate();
    if ((int)base.size() != n) throw DomainError("SpaceTimeGrid: base dimension mismatch");
    if (!(h > 0.0)) throw DomainError("SpaceTimeGrid: spacing must be positive");
    if (radius_cells < 1) throw DomainError("SpaceTimeGrid: lattice has no extent");
    double need = 6.0 * std::pow(time.nodes.back(), alpha / 2.0);
    if (half_width() + 1e-12 < need)
        throw DomainError("SpaceTimeGrid: half width below the envelope cutoff");
    if (lattice_size() > 2'000'000)
        throw DomainError("SpaceTimeGrid: lattice too large");
}

namespace {

double defect_exact(const OperatorSpec& op, double alpha, double t,
                    const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                    bool source) {
    op.validate();
    if ((int)x.size() != op.n || (int)xi.size() != op.n)
        throw DomainError("levi: point dimension mismatch");
    auto frozen = kernels::SPDOperator::make(op.a_at(xi));
    Eigen::VectorXd d = x - xi;
    Eigen::MatrixXd ax = op.a_at(x), axi = op.a_at(xi);
    kernels::KernelQuery q;
    q.alpha = alpha;
    q.t = t;
    q.x = d;
    double val = 0.0;
    for (int i = 0; i < op.n; ++i)
        for (int j = i; j < op.n; ++j) {
            double da = ax(i, j) - axi(i, j);
            if (da == 0.0) continue;
            q.m.assign(op.n, 0);
            q.m[i] += 1;
            q.m[j] += 1;
            double der = source ? kernels::y0_derivative(frozen, q)
                                : kernels::z0_derivative(frozen, q);
            val += (i == j ? 1.0 : 2.0) * da * der;
        }
    Eigen::VectorXd bx = op.b_at(x);
    for (int i = 0; i < op.n; ++i) {
        if (bx[i] == 0.0) continue;
        q.m.assign(op.n, 0);
        q.m[i] = 1;
        val += bx[i] * (source ? kernels::y0_derivative(frozen, q)
                               : kernels::z0_derivative(frozen, q));
    }
    double cx = op.c_at(x);
    if (cx != 0.0) {
        q.m.clear();
        val += cx * (source ? kernels::y0_eval(frozen, q)
                            : kernels::z0_eval(frozen, q));
    }
    return val;
}

GreenMatrixTable assemble(const OperatorSpec& op, double alpha,
                          const SpaceTimeGrid& grid, const Eigen::VectorXd& xi,
                          const SolveOptions& options, bool source) {
    Engine e(op, alpha, grid);
    GridValues rhs = e.sample_defect(source ? Kind::kernel_K : Kind::kernel_M, xi);
    GreenMatrixTable out;
    out.grid = grid;
    out.xi = xi;
    GridValues density = e.solve(rhs, options, &out.iteration_count,
                                 &out.residual_norm);
    out.values_v = e.convolve(Kind::kernel_Y0, density);

    auto frozen = kernels::SPDOperator::make(op.a_at(xi));
    out.values_parametrix = e.zeros();
    kernels::KernelQuery q;
    q.alpha = alpha;
    for (int i = 0; i < grid.time.size(); ++i)
        for (int j = 0; j < grid.lattice_size(); ++j) {
            Eigen::VectorXd d = grid.node(j) - xi;
            if (i == 0) {
                // distributional initial level: off-diagonal limit is zero
                out.values_parametrix[0][j] =
                    d.norm() == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
                continue;
            }
            q.t = grid.time.nodes[i];
            q.x = d;
            if (op.n >= 2 && d.norm() == 0.0) {
                out.values_parametrix[i][j] = std::numeric_limits<double>::infinity();
                continue;
            }
            out.values_parametrix[i][j] = source ? kernels::y0_eval(frozen, q)
                                                 : kernels::z0_eval(frozen, q);
        }
    out.values = out.values_parametrix;
    for (size_t i = 0; i < out.values.size(); ++i)
        for (size_t j = 0; j < out.values[i].size(); ++j)
            out.values[i][j] += out.values_v[i][j];
    return out;
}

}  // namespace

double levi_M(const OperatorSpec& op, double alpha, double t,
              const Eigen::VectorXd& x, const Eigen::VectorXd& xi) {
    return defect_exact(op, alpha, t, x, xi, false);
}

double levi_K(const OperatorSpec& op, double alpha, double t,
              const Eigen::VectorXd& x, const Eigen::VectorXd& xi) {
    return defect_exact(op, alpha, t, x, xi, true);
}

QKernelTable solve_Q(const OperatorSpec& op, double alpha,
                     const SpaceTimeGrid& grid, const Eigen::VectorXd& xi,
                     const SolveOptions& options) {
    Engine e(op, alpha, grid);
    QKernelTable out;
    out.grid = grid;
    out.xi = xi;
    GridValues rhs = e.sample_defect(Kind::kernel_M, xi);
    out.values = e.solve(rhs, options, &out.iteration_count, &out.residual_norm);
    return out;
}

QKernelTable solve_Psi(const OperatorSpec& op, double alpha,
                       const SpaceTimeGrid& grid, const Eigen::VectorXd& xi,
                       const SolveOptions& options) {
    Engine e(op, alpha, grid);
    QKernelTable out;
    out.grid = grid;
    out.xi = xi;
    GridValues rhs = e.sample_defect(Kind::kernel_K, xi);
    out.values = e.solve(rhs, options, &out.iteration_count, &out.residual_norm);
    return out;
}

GreenMatrixTable assemble_Z(const OperatorSpec& op, double alpha,
                            const SpaceTimeGrid& grid, const Eigen::VectorXd& xi,
                            const SolveOptions& options) {
    return assemble(op, alpha, grid, xi, options, false);
}

GreenMatrixTable assemble_Y(const OperatorSpec& op, double alpha,
                            const SpaceTimeGrid& grid, const Eigen::VectorXd& xi,
                            const SolveOptions& options) {
    return assemble(op, alpha, grid, xi, options, true);
}

GridValues convolve_K(const OperatorSpec& op, double alpha,
                      const SpaceTimeGrid& grid, const GridValues& f) {
    return Engine(op, alpha, grid).convolve(Kind::kernel_K, f);
}

GridValues convolve_Y0(const OperatorSpec& op, double alpha,
                       const SpaceTimeGrid& grid, const GridValues& f) {
    return Engine(op, alpha, grid).convolve(Kind::kernel_Y0, f);
}

FieldTable solve_density(const OperatorSpec& op, double alpha,
                         const SpaceTimeGrid& grid, const GridValues& rhs,
                         const SolveOptions& options) {
    Engine e(op, alpha, grid);
    FieldTable out;
    out.grid = grid;
    out.values = e.solve(rhs, options, &out.iteration_count, &out.residual_norm);
    return out;
}

GridValues convolve_K_source(const OperatorSpec& op, double alpha,
                             const SpaceTimeGrid& grid, const SpaceTimeFn& f) {
    return Engine(op, alpha, grid).convolve_source(Kind::kernel_K, f);
}

GridValues convolve_Y0_source(const OperatorSpec& op, double alpha,
                              const SpaceTimeGrid& grid, const SpaceTimeFn& f) {
    return Engine(op, alpha, grid).convolve_source(Kind::kernel_Y0, f);
}

GridValues apply_M(const OperatorSpec& op, double alpha,
                   const SpaceTimeGrid& grid, const SpatialFn& u0) {
    return Engine(op, alpha, grid).potential(Kind::kernel_M, u0);
}

GridValues parametrix_potential(const OperatorSpec& op, double alpha,
                                const SpaceTimeGrid& grid, const SpatialFn& u0) {
    return Engine(op, alpha, grid).potential(Kind::kernel_Z0, u0);
}

}  // namespace frdiff::levi
