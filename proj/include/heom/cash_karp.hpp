// cash_karp.hpp - embedded Runge-Kutta 4(5) with the Cash-Karp tableau and
// adaptive step control, for Eigen dense vectors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "heom/errors.hpp"
#include "heom/units.hpp"

namespace heom {

struct StepControl {
    double rel_tol{1e-9};
    double abs_tol{1e-12};
    double safety{0.9};
    double max_growth{5.0};
    double max_shrink{0.1};
};

struct StepStats {
    long accepted{0};
    long rejected{0};
};

// Integrates y' = f(t, y) over [t, t_end] (t_end < t integrates backward).
// f is called as f(t, y, dy). The last accepted step size is remembered
// between calls so piecewise integration over a sample grid stays cheap.
template <typename Vec> class CashKarpStepper {
  public:
    explicit CashKarpStepper(StepControl ctl = {}) : ctl_(ctl) {}

    const StepStats& stats() const { return stats_; }
    void reset_step() { h_ = 0.0; }

    template <typename Rhs> void integrate(Rhs&& f, double t, double t_end, Vec& y) {
        const double span = t_end - t;
        if (span == 0.0) return;
        const double dir = span > 0 ? 1.0 : -1.0;
        double h = h_ != 0.0 ? dir * std::abs(h_) : dir * std::min(std::abs(span), initial_step(f, t, y));

        if (!y.allFinite()) fail("non-finite state", t);
        k1_.resize(y.size());
        f(t, y, k1_);
        while (dir * (t_end - t) > 0.0) {
            const double remaining = t_end - t;
            bool clipped = false;
            if (dir * (t + h - t_end) > 0.0) {
                h = remaining;
                clipped = true;
            }
            const double min_step = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
            if (std::abs(h) < min_step) fail("step size underflow", t);

            const double err = trial(f, t, h, y);
            if (!std::isfinite(err)) {
                if (!y_new_.allFinite()) fail("non-finite ADO in trial step", t);
                fail("non-finite error estimate", t);
            }
            if (err <= 1.0) {
                t = clipped ? t_end : t + h;
                y.swap(y_new_);
                ++stats_.accepted;
                const double grow = err > 0.0 ? ctl_.safety * std::pow(err, -0.2) : ctl_.max_growth;
                const double h_next = h * std::min(ctl_.max_growth, grow);
                // A step cut short by the interval end says nothing about the natural size.
                if (!clipped || std::abs(h_next) > std::abs(h_)) h_ = h_next;
                h = dir * std::abs(h_);
                if (dir * (t_end - t) > 0.0) f(t, y, k1_);
            } else {
                ++stats_.rejected;
                h *= std::max(ctl_.max_shrink, ctl_.safety * std::pow(err, -0.25));
                h_ = h;
            }
        }
    }

  private:
    [[noreturn]] static void fail(const char* what, double t) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s at t = %.6g fs", what, units::au_to_fs(t));
        throw NumericalError(buf);
    }

    // Hairer-style starting guess from |y| and |f(t, y)| in the tolerance norm.
    template <typename Rhs> double initial_step(Rhs& f, double t, const Vec& y) {
        Vec dy(y.size());
        f(t, y, dy);
        double d0 = 0.0, d1 = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = ctl_.abs_tol + ctl_.rel_tol * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1 = std::max(d1, std::abs(dy[i]) / sc);
        }
        if (d0 < 1e-5 || d1 < 1e-5) return 1e-6;
        return std::max(1e-6, 0.01 * d0 / d1);
    }

    template <typename Rhs> double trial(Rhs& f, double t, double h, const Vec& y) {
        // Cash-Karp coefficients
        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 3.0 / 5, c5 = 1.0, c6 = 7.0 / 8;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
        constexpr double a51 = -11.0 / 54, a52 = 5.0 / 2, a53 = -70.0 / 27, a54 = 35.0 / 27;
        constexpr double a61 = 1631.0 / 55296, a62 = 175.0 / 512, a63 = 575.0 / 13824, a64 = 44275.0 / 110592,
                         a65 = 253.0 / 4096;
        constexpr double b1 = 37.0 / 378, b3 = 250.0 / 621, b4 = 125.0 / 594, b6 = 512.0 / 1771;
        constexpr double e1 = b1 - 2825.0 / 27648, e3 = b3 - 18575.0 / 48384, e4 = b4 - 13525.0 / 55296,
                         e5 = -277.0 / 14336, e6 = b6 - 1.0 / 4;

        tmp_ = y + h * a21 * k1_;
        f(t + c2 * h, tmp_, k2_);
        tmp_ = y + h * (a31 * k1_ + a32 * k2_);
        f(t + c3 * h, tmp_, k3_);
        tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        f(t + c4 * h, tmp_, k4_);
        tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        f(t + c5 * h, tmp_, k5_);
        tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        f(t + c6 * h, tmp_, k6_);

        y_new_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b6 * k6_);
        tmp_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_);

        double err = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = ctl_.abs_tol + ctl_.rel_tol * std::max(std::abs(y[i]), std::abs(y_new_[i]));
            err = std::max(err, std::abs(tmp_[i]) / sc);
        }
        if (!y_new_.allFinite()) return std::numeric_limits<double>::quiet_NaN();
        return err;
    }

    StepControl ctl_;
    StepStats stats_;
    double h_{0.0};
    Vec k1_, k2_, k3_, k4_, k5_, k6_, tmp_, y_new_;
};

} // namespace heom
