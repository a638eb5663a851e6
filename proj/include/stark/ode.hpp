#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "stark/errors.hpp"

namespace stark::ode {

/// One accepted step of an embedded Dormand-Prince 5(4) pair.
template <std::size_t N>
struct Step {
    double x0, x1;
    std::array<double, N> y0, y1;
    std::array<double, N> f0, f1;  // derivatives at both ends (FSAL)
};

/// Cubic Hermite evaluation on an accepted step.
template <std::size_t N>
inline double hermite(const Step<N>& s, std::size_t k, double x) {
    const double h = s.x1 - s.x0;
    const double t = (x - s.x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * s.y0[k] + h * h10 * s.f0[k] + h01 * s.y1[k] + h * h11 * s.f1[k];
}

/// Explicit embedded RK 5(4) integrator (Dormand-Prince coefficients) with a
/// PI step-size controller. The right-hand side is any callable
///   f(double x, const std::array<double,N>& y, std::array<double,N>& dy).
///
/// The driver owns only local state; callers advance step by step so they can
/// impose range stops, event handling and output policies on top.
template <std::size_t N, class F>
class Rk45 {
public:
    Rk45(F f, double tol) : f_(std::move(f)), atol_(tol), rtol_(tol) {}

    void start(double x, const std::array<double, N>& y) {
        x_ = x;
        y_ = y;
        f_(x_, y_, k1_);
        have_h_ = false;
        err_prev_ = 1.0;
    }

    double x() const { return x_; }
    const std::array<double, N>& y() const { return y_; }
    const std::array<double, N>& dy() const { return k1_; }

    void set_state(double x, const std::array<double, N>& y) { start(x, y); }

    /// Advances by at most hmax (never past it); returns the accepted step.
    /// Throws StiffnessError when the step collapses.
    Step<N> step(double hmax) {
        if (!(hmax > 0)) throw std::invalid_argument("Rk45: hmax must be positive");
        if (!have_h_) {
            h_ = initial_step(hmax);
            have_h_ = true;
        }
        double h = std::min(h_, hmax);
        for (int attempt = 0; attempt < 200; ++attempt) {
            if (!(h > std::abs(x_) * 1e-14 + 1e-300))
                throw StiffnessError("Rk45: step underflow", x_, y_[0], N > 1 ? y_[1] : 0.0);
            const bool clipped = h >= hmax * (1 - 1e-12);
            if (clipped) h = hmax;
            double err = try_step(h);
            if (!std::isfinite(err)) {
                h *= 0.25;
                continue;
            }
            if (err <= 1.0) {
                Step<N> s{x_, x_ + h, y_, ynew_, k1_, k7_};
                x_ += h;
                y_ = ynew_;
                k1_ = k7_;  // FSAL
                // PI controller (order 5)
                double fac = 0.9 * std::pow(err > 1e-14 ? err : 1e-14, -0.7 / 5.0) *
                             std::pow(err_prev_, 0.4 / 5.0);
                fac = std::min(5.0, std::max(0.2, fac));
                h_ = h * fac;
                err_prev_ = std::max(err, 1e-14);
                return s;
            }
            h *= std::min(0.9, std::max(0.2, 0.9 * std::pow(err, -0.2)));
        }
        throw StiffnessError("Rk45: repeated step rejection", x_, y_[0], N > 1 ? y_[1] : 0.0);
    }

private:
    double initial_step(double hmax) const {
        double scale = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            scale = std::max(scale, std::abs(k1_[i]) / (atol_ + rtol_ * std::abs(y_[i])));
        double h = scale > 0 ? 0.01 / scale : hmax;
        return std::min(h, hmax);
    }

    // Returns the scaled error norm; fills ynew_ and k7_.
    double try_step(double h) {
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                         a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                         b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                         e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                         e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

        std::array<double, N> t;
        for (std::size_t i = 0; i < N; ++i) t[i] = y_[i] + h * a21 * k1_[i];
        f_(x_ + h / 5, t, k2_);
        for (std::size_t i = 0; i < N; ++i) t[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        f_(x_ + 3 * h / 10, t, k3_);
        for (std::size_t i = 0; i < N; ++i)
            t[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        f_(x_ + 4 * h / 5, t, k4_);
        for (std::size_t i = 0; i < N; ++i)
            t[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        f_(x_ + 8 * h / 9, t, k5_);
        for (std::size_t i = 0; i < N; ++i)
            t[i] = y_[i] +
                   h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
        f_(x_ + h, t, k6_);
        for (std::size_t i = 0; i < N; ++i)
            ynew_[i] = y_[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] +
                                    b6 * k6_[i]);
        f_(x_ + h, ynew_, k7_);

        double err2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                                  e6 * k6_[i] + e7 * k7_[i]);
            const double sc = atol_ + rtol_ * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
            err2 += (e / sc) * (e / sc);
        }
        return std::sqrt(err2 / N);
    }

    F f_;
    double atol_, rtol_;
    double x_ = 0;
    std::array<double, N> y_{}, ynew_{};
    std::array<double, N> k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{};
    double h_ = 0;
    bool have_h_ = false;
    double err_prev_ = 1.0;
};

}  // namespace stark::ode
