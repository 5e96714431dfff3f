#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsa {

// Uniform output grid on [t0, t1] with `count` points (count >= 2).
struct UniformGrid {
    double t0 = 0.0;
    double t1 = 1.0;
    std::size_t count = 2;

    double step() const { return (t1 - t0) / static_cast<double>(count - 1); }

    Eigen::VectorXd times() const {
        Eigen::VectorXd t(count);
        for (std::size_t k = 0; k < count; ++k)
            t[static_cast<Eigen::Index>(k)] =
                t0 + step() * static_cast<double>(k);
        t[static_cast<Eigen::Index>(count - 1)] = t1;
        return t;
    }
};

// Time grid plus state (or observable) values, one row per time point.
struct Trajectory {
    Eigen::VectorXd times;   // strictly increasing
    Eigen::MatrixXd values;  // |times| x m

    std::size_t points() const { return static_cast<std::size_t>(times.size()); }
};

void validate_trajectory(const Trajectory& t);

// L2 distance sqrt( integral ||y1(t) - y2(t)||^2 dt ) by trapezoid
// quadrature over the shared grid. Throws on grid mismatch.
double trajectory_distance(const Trajectory& a, const Trajectory& b);

// Extract one state column as a scalar trajectory.
Trajectory trajectory_component(const Trajectory& t, std::size_t column);

struct IntegratorOptions {
    double rel_tol = 1e-6;
    double abs_tol = 1e-8;
    double max_step = 0.0;          // 0 -> (t1 - t0) / 10
    std::size_t max_steps = 2000000;  // attempted steps before giving up
    UniformGrid output_grid{0.0, 1.0, 2};
};

namespace detail {

// Dormand-Prince 5(4) tableau and the standard quartic dense-output
// coefficients (the ode45 pair).
struct Dopri5Tableau {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // btilde = b - bhat (5th-minus-4th order weights).
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0,
                            d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0,
                            d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0,
                            d7 = 69997945.0 / 29380423.0;
};

}  // namespace detail

// Adaptive Dormand-Prince 4(5) integrator with PI step-size control and
// quartic dense output resampled onto opts.output_grid. rhs(t, y, dy)
// must fill dy with f(t, y). Throws std::runtime_error on step-size
// underflow, reporting the failure time.
template <class Rhs>
Trajectory integrate_rk45(Rhs&& rhs, const Eigen::VectorXd& y0, double t0,
                          double t1, const IntegratorOptions& opts) {
    using T = detail::Dopri5Tableau;
    if (!(t1 > t0)) throw std::invalid_argument("integrate_rk45: t1 <= t0");
    if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0))
        throw std::invalid_argument("integrate_rk45: tolerances must be positive");
    if (!y0.allFinite())
        throw std::invalid_argument("integrate_rk45: non-finite initial state");

    const Eigen::Index dim = y0.size();
    const Eigen::VectorXd grid = opts.output_grid.times();
    const std::size_t n_out = static_cast<std::size_t>(grid.size());
    if (grid[0] < t0 - 1e-12 || grid[grid.size() - 1] > t1 + 1e-12)
        throw std::invalid_argument("integrate_rk45: output grid outside span");

    Trajectory out;
    out.times = grid;
    out.values.resize(static_cast<Eigen::Index>(n_out), dim);

    Eigen::VectorXd y = y0;
    Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim),
        k7(dim), ytmp(dim), ynew(dim), yerr(dim);
    auto call = [&rhs, dim](double t, const Eigen::VectorXd& state,
                            Eigen::VectorXd& deriv) {
        rhs(t, std::span<const double>(state.data(), static_cast<std::size_t>(dim)),
            std::span<double>(deriv.data(), static_cast<std::size_t>(dim)));
    };

    call(t0, y, k1);

    const double h_max = opts.max_step > 0.0 ? opts.max_step : (t1 - t0) / 10.0;
    // Initial step from the scale of y0 and f(y0).
    double h = h_max;
    {
        double d0 = 0.0, d1n = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double sc = opts.abs_tol + opts.rel_tol * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1n = std::max(d1n, std::abs(k1[i]) / sc);
        }
        if (d1n > 1e-10) h = std::min(h_max, 0.01 * d0 / d1n + 1e-6);
        h = std::min(h, (t1 - t0) / 2.0);
        if (h <= 0.0) h = 1e-6;
    }

    double t = t0;
    std::size_t next_out = 0;
    // Emit grid points equal to t0 immediately.
    while (next_out < n_out && grid[static_cast<Eigen::Index>(next_out)] <= t0) {
        out.values.row(static_cast<Eigen::Index>(next_out)) = y.transpose();
        ++next_out;
    }

    constexpr double kSafety = 0.9, kMinFactor = 0.2, kMaxFactor = 10.0;
    constexpr double kBeta = 0.04, kExpo = 0.2 - kBeta * 0.75;
    double err_old = 1e-4;
    bool previous_rejected = false;

    std::size_t attempted_steps = 0;
    while (t < t1 && next_out < n_out) {
        if (t + h > t1) h = t1 - t;
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw std::runtime_error(
                "integrate_rk45: step size underflow (stiffness?) at t = " +
                std::to_string(t));
        if (++attempted_steps > opts.max_steps)
            throw std::runtime_error(
                "integrate_rk45: step budget exhausted (stiffness?) at t = " +
                std::to_string(t));

        ytmp = y + h * (T::a21 * k1);
        call(t + T::c2 * h, ytmp, k2);
        ytmp = y + h * (T::a31 * k1 + T::a32 * k2);
        call(t + T::c3 * h, ytmp, k3);
        ytmp = y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
        call(t + T::c4 * h, ytmp, k4);
        ytmp = y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
        call(t + T::c5 * h, ytmp, k5);
        ytmp = y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 +
                        T::a65 * k5);
        call(t + h, ytmp, k6);
        ynew = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 +
                        T::b6 * k6);
        call(t + h, ynew, k7);  // FSAL stage
        yerr = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 +
                    T::e6 * k6 + T::e7 * k7);

        double err_sq = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double sc = opts.abs_tol +
                              opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = yerr[i] / sc;
            err_sq += r * r;
        }
        const double err = std::sqrt(err_sq / static_cast<double>(dim));

        if (err <= 1.0) {
            // Accepted: fill all grid points inside (t, t+h] with the
            // quartic dense-output polynomial.
            const double t_new = t + h;
            while (next_out < n_out &&
                   grid[static_cast<Eigen::Index>(next_out)] <= t_new + 1e-12) {
                const double tq = grid[static_cast<Eigen::Index>(next_out)];
                const double theta = std::clamp((tq - t) / h, 0.0, 1.0);
                const double th1 = 1.0 - theta;
                for (Eigen::Index i = 0; i < dim; ++i) {
                    const double ydiff = ynew[i] - y[i];
                    const double bspl = h * k1[i] - ydiff;
                    const double cont1 = y[i];
                    const double cont2 = ydiff;
                    const double cont3 = bspl;
                    const double cont4 = ydiff - h * k7[i] - bspl;
                    const double cont5 =
                        h * (T::d1 * k1[i] + T::d3 * k3[i] + T::d4 * k4[i] +
                             T::d5 * k5[i] + T::d6 * k6[i] + T::d7 * k7[i]);
                    out.values(static_cast<Eigen::Index>(next_out), i) =
                        cont1 +
                        theta * (cont2 +
                                 th1 * (cont3 +
                                        theta * (cont4 + th1 * cont5)));
                }
                ++next_out;
            }

            t = t_new;
            y.swap(ynew);
            k1.swap(k7);

            const double err_floor = std::max(err, 1e-4);
            double factor =
                kSafety * std::pow(err_floor, -kExpo) * std::pow(err_old, kBeta);
            factor = std::clamp(factor, kMinFactor, kMaxFactor);
            if (previous_rejected) factor = std::min(factor, 1.0);
            h = std::min(h * factor, h_max);
            err_old = err_floor;
            previous_rejected = false;
        } else {
            const double factor =
                std::clamp(kSafety * std::pow(err, -0.2), kMinFactor, 1.0);
            h *= factor;
            previous_rejected = true;
        }
    }

    // t1 reached; emit any grid point left at the right endpoint.
    while (next_out < n_out) {
        out.values.row(static_cast<Eigen::Index>(next_out)) = y.transpose();
        ++next_out;
    }
    return out;
}

}  // namespace gsa
