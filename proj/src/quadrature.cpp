#include "frdiff/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace frdiff::quad {

namespace {

Rule build_gauss_legendre(int n) {
    // Newton iteration on Legendre polynomials, standard Golub-Welsch-free method.
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double eps = 1e-15;
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < eps) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

std::map<int, Rule> g_rules;
std::mutex g_rules_mutex;

}  // namespace

const Rule& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
    std::lock_guard<std::mutex> lock(g_rules_mutex);
    auto it = g_rules.find(n);
    if (it == g_rules.end()) it = g_rules.emplace(n, build_gauss_legendre(n)).first;
    return it->second;
}

double gl(const std::function<double(double)>& f, double a, double b, int n) {
    const Rule& r = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
    return s * half;
}

double gl_panels(const std::function<double(double)>& f,
                 const std::vector<double>& breaks, int n_per_panel) {
    double s = 0.0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i)
        s += gl(f, breaks[i], breaks[i + 1], n_per_panel);
    return s;
}

std::vector<double> geometric_breaks(double a, double b, int k, double ratio) {
    std::vector<double> br(k + 1);
    br[0] = a;
    br[k] = b;
    double len = b - a;
    // lengths proportional to ratio^(k-1-j) for panel j (smallest first)
    double scale = 0.0, f = 1.0;
    std::vector<double> lens(k);
    for (int j = k - 1; j >= 0; --j) {
        lens[j] = f;
        scale += f;
        f /= ratio;
    }
    double acc = a;
    for (int j = 0; j < k - 1; ++j) {
        acc += len * lens[j] / scale;
        br[j + 1] = acc;
    }
    return br;
}

std::vector<double> uniform_breaks(double a, double b, int k) {
    std::vector<double> br(k + 1);
    for (int j = 0; j <= k; ++j) br[j] = a + (b - a) * j / k;
    return br;
}

namespace {

double adaptive_rec(const std::function<double(double)>& f, double a, double b,
                    double abs_tol, int depth, double whole) {
    double mid = 0.5 * (a + b);
    double left = gl(f, a, mid, 10), right = gl(f, mid, b, 10);
    double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) < abs_tol) return left + right + delta / 63.0;
    return adaptive_rec(f, a, mid, abs_tol * 0.5, depth - 1, left) +
           adaptive_rec(f, mid, b, abs_tol * 0.5, depth - 1, right);
}

}  // namespace

double adaptive(const std::function<double(double)>& f, double a, double b,
                double abs_tol, int max_depth) {
    double whole = gl(f, a, b, 10);
    return adaptive_rec(f, a, b, abs_tol, max_depth, whole);
}

}  // namespace frdiff::quad
