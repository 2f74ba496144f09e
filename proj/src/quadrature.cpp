#include "heom/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace heom {

namespace {

// w coth(beta w / 2), finite at w = 0 where it tends to 2 / beta.
double omega_coth(double omega, double beta) {
    const double y = 0.5 * beta * omega;
    if (std::abs(y) < 1e-4) return (2.0 / beta) * (1.0 + y * y / 3.0);
    return omega / std::tanh(y);
}

// J(w) coth(beta w / 2) with the w -> 0 singularity of coth removed analytically.
double thermal_density(double omega, const BathSpec& spec, double beta) {
    return spectral_density_over_omega(omega, spec) * omega_coth(omega, beta);
}

std::vector<double> panel_edges(const BathSpec& spec, double omega_max, double t) {
    std::vector<double> edges{0.0, omega_max};
    for (const auto& term : spec.terms) {
        for (auto [o, g] : {std::pair{term.omega1, term.gamma1}, std::pair{term.omega2, term.gamma2}}) {
            for (double m : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
                const double x = o + m * g;
                if (x > 0.0 && x < omega_max) edges.push_back(x);
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    // Geometric refinement of the tail plus an oscillation bound of ~two periods per panel.
    std::vector<double> out{edges.front()};
    const double max_width = t > 0.0 ? 4.0 * std::numbers::pi / t : omega_max;
    for (std::size_t i = 1; i < edges.size(); ++i) {
        double a = out.back();
        const double b = edges[i];
        if (b - a <= 0.0) continue;
        while (b - a > max_width || (a > 0.0 && b > 2.0 * a)) {
            double next = a + max_width;
            if (a > 0.0) next = std::min(next, 2.0 * a);
            out.push_back(next);
            a = next;
        }
        out.push_back(b);
    }
    return out;
}

// Panelwise Gauss-Kronrod with bisection driven by an absolute target
// rel_tol * int |f|; a per-panel relative target would chase oscillatory
// panels whose contributions cancel to nothing.
template <typename F> double integrate_panels(F&& f, const std::vector<double>& edges, double rel_tol) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    struct Piece {
        double a, b, value, error, l1;
    };
    auto eval = [&](double a, double b) {
        Piece p{a, b, 0.0, 0.0, 0.0};
        p.value = GK::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
        p.error *= 0.5 * (b - a); // Boost reports the single-pass estimate on the reference interval
        return p;
    };
    std::vector<Piece> stack;
    double l1 = 0.0;
    for (std::size_t i = 1; i < edges.size(); ++i) {
        stack.push_back(eval(edges[i - 1], edges[i]));
        l1 += stack.back().l1;
    }
    // Each piece gets a share of rel_tol * int|f| proportional to its width, floored
    // at rounding level of its own content.
    const double range = edges.back() - edges.front();
    const double eps = std::numeric_limits<double>::epsilon();
    double total = 0.0;
    std::reverse(stack.begin(), stack.end());
    while (!stack.empty()) {
        const Piece q = stack.back();
        stack.pop_back();
        const double allowed = std::max(rel_tol * l1 * (q.b - q.a) / range, 100.0 * eps * q.l1);
        if (q.error <= allowed || q.b - q.a < 1e-10 * range) {
            total += q.value;
            continue;
        }
        const double m = 0.5 * (q.a + q.b);
        stack.push_back(eval(m, q.b));
        stack.push_back(eval(q.a, m));
    }
    return total;
}

} // namespace

double quadrature_cutoff(const BathSpec& spec, double tail_fraction) {
    const double beta = spec.beta();
    double hi = 0.0;
    for (const auto& t : spec.terms) hi = std::max({hi, t.omega1 + t.gamma1, t.omega2 + t.gamma2});
    double peak = 0.0;
    const int n = 4000;
    for (int i = 1; i <= n; ++i) peak = std::max(peak, std::abs(thermal_density(4.0 * hi * i / n, spec, beta)));
    double omega_max = 4.0 * hi;
    while (std::abs(thermal_density(omega_max, spec, beta)) > tail_fraction * peak) omega_max *= 1.25;
    return omega_max;
}

cplx correlation_by_quadrature(double t, const BathSpec& spec, const QuadratureOptions& opt) {
    spec.validate();
    const double beta = spec.beta();
    const double omega_max = quadrature_cutoff(spec, opt.tail_fraction);
    const auto edges = panel_edges(spec, omega_max, t);
    const double re = integrate_panels(
        [&](double w) { return thermal_density(w, spec, beta) * std::cos(w * t); }, edges, opt.rel_tol);
    const double im = integrate_panels(
        [&](double w) { return -spectral_density(w, spec) * std::sin(w * t); }, edges, opt.rel_tol);
    return cplx{re, im} / std::numbers::pi;
}

double dephasing_exponent(double t, const BathSpec& spec, const QuadratureOptions& opt) {
    spec.validate();
    const double beta = spec.beta();
    const double omega_max = quadrature_cutoff(spec, opt.tail_fraction);
    const auto edges = panel_edges(spec, omega_max, t);
    auto kernel = [t](double w) {
        const double x = w * t;
        if (std::abs(x) < 1e-4) return 0.5 * t * t * (1.0 - x * x / 12.0);
        const double s = std::sin(0.5 * x);
        return 2.0 * s * s / (w * w);
    };
    const double v = integrate_panels([&](double w) { return thermal_density(w, spec, beta) * kernel(w); }, edges,
                                      opt.rel_tol);
    return 4.0 * v / std::numbers::pi;
}

} // namespace heom
