// Independent reference implementations used only by the test suites.
// Everything here is deliberately the "slow obvious" route (dense matrices,
// fixed-step integration, brute-force quadrature) so it cannot share a bug
// with the streaming/adaptive production paths it checks.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "gsa/kernel.hpp"
#include "gsa/ode.hpp"
#include "gsa/rng.hpp"

namespace oracles {

inline Eigen::MatrixXd dense_gaussian_gram(const Eigen::MatrixXd& samples,
                                           double sigma) {
    const Eigen::Index n = samples.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k(i, j) = std::exp(-(samples.row(i) - samples.row(j)).squaredNorm() /
                               (2.0 * sigma * sigma));
    return k;
}

inline Eigen::MatrixXd centering_matrix(Eigen::Index n) {
    return Eigen::MatrixXd::Identity(n, n) -
           Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
}

// K_A = prod_i (J + H K_i H), entrywise, via dense O(n^2) storage.
inline Eigen::MatrixXd dense_augmented_gram(
    const std::vector<gsa::ParameterBlock>& blocks,
    const std::vector<std::size_t>& subset) {
    const Eigen::Index n = static_cast<Eigen::Index>(blocks.front().n());
    const Eigen::MatrixXd h = centering_matrix(n);
    Eigen::MatrixXd out = Eigen::MatrixXd::Ones(n, n);
    for (std::size_t i : subset) {
        const Eigen::MatrixXd k =
            dense_gaussian_gram(blocks[i].samples, blocks[i].bandwidth);
        const Eigen::MatrixXd centered = h * k * h;
        out = out.cwiseProduct(Eigen::MatrixXd::Ones(n, n) + centered);
    }
    return out;
}

// Classic fixed-step RK4 sampled at exact multiples of h that coincide with
// the requested output times.
template <class Rhs>
Eigen::MatrixXd rk4_fixed(Rhs&& rhs, const Eigen::VectorXd& y0, double t0,
                          double h, const Eigen::VectorXd& out_times) {
    const Eigen::Index dim = y0.size();
    Eigen::MatrixXd out(out_times.size(), dim);
    Eigen::VectorXd y = y0, k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    auto call = [&](double t, const Eigen::VectorXd& state, Eigen::VectorXd& d) {
        rhs(t, std::span<const double>(state.data(), static_cast<std::size_t>(dim)),
            std::span<double>(d.data(), static_cast<std::size_t>(dim)));
    };
    double t = t0;
    Eigen::Index next = 0;
    while (next < out_times.size() && out_times[next] <= t + 1e-12) {
        out.row(next++) = y.transpose();
    }
    while (next < out_times.size()) {
        call(t, y, k1);
        tmp = y + 0.5 * h * k1;
        call(t + 0.5 * h, tmp, k2);
        tmp = y + 0.5 * h * k2;
        call(t + 0.5 * h, tmp, k3);
        tmp = y + h * k3;
        call(t + h, tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        while (next < out_times.size() && out_times[next] <= t + 1e-9) {
            out.row(next++) = y.transpose();
        }
    }
    return out;
}

// Composite Simpson on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int panels) {
    if (panels % 2 != 0) ++panels;
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int k = 1; k < panels; ++k) acc += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Total-effect Sobol' indices of the Ishigami function by tensor-grid
// quadrature of E[Var(f | X_{~i})] / Var(f); a numeric cross-check of the
// closed forms.
inline std::array<double, 3> ishigami_totals_quadrature(double a, double b,
                                                        int grid = 64) {
    const double pi = 3.14159265358979323846;
    auto f = [&](double x1, double x2, double x3) {
        return std::sin(x1) + a * std::sin(x2) * std::sin(x2) +
               b * x3 * x3 * x3 * x3 * std::sin(x1);
    };
    const double inv_len = 1.0 / (2.0 * pi);

    // Mean and variance over the full box.
    auto mean_all = [&]() {
        auto inner2 = [&](double x1, double x2) {
            return simpson([&](double x3) { return f(x1, x2, x3); }, -pi, pi, grid) *
                   inv_len;
        };
        auto inner1 = [&](double x1) {
            return simpson([&](double x2) { return inner2(x1, x2); }, -pi, pi, grid) *
                   inv_len;
        };
        return simpson(inner1, -pi, pi, grid) * inv_len;
    }();
    auto second_moment = [&]() {
        auto inner2 = [&](double x1, double x2) {
            return simpson([&](double x3) {
                       const double v = f(x1, x2, x3);
                       return v * v;
                   },
                           -pi, pi, grid) *
                   inv_len;
        };
        auto inner1 = [&](double x1) {
            return simpson([&](double x2) { return inner2(x1, x2); }, -pi, pi, grid) *
                   inv_len;
        };
        return simpson(inner1, -pi, pi, grid) * inv_len;
    }();
    const double variance = second_moment - mean_all * mean_all;

    // E_{x_rest}[ Var_{x_i}( f ) ]: outer quadrature over the complement,
    // inner mean/second-moment over coordinate i.
    auto conditional_total = [&](int i) {
        auto var_over_i = [&](double u, double v) {
            auto eval = [&](double xi) {
                switch (i) {
                    case 0: return f(xi, u, v);
                    case 1: return f(u, xi, v);
                    default: return f(u, v, xi);
                }
            };
            const double m =
                simpson(eval, -pi, pi, grid) * inv_len;
            const double m2 = simpson([&](double xi) {
                                  const double w = eval(xi);
                                  return w * w;
                              },
                                      -pi, pi, grid) *
                              inv_len;
            return m2 - m * m;
        };
        auto inner = [&](double u) {
            return simpson([&](double v) { return var_over_i(u, v); }, -pi, pi,
                           grid) *
                   inv_len;
        };
        return simpson(inner, -pi, pi, grid) * inv_len / variance;
    };

    return {conditional_total(0), conditional_total(1), conditional_total(2)};
}

inline Eigen::MatrixXd random_matrix(gsa::Rng& rng, Eigen::Index rows,
                                     Eigen::Index cols, double lo = -1.0,
                                     double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
    return m;
}

inline Eigen::MatrixXd random_symmetric(gsa::Rng& rng, Eigen::Index n) {
    Eigen::MatrixXd m = random_matrix(rng, n, n);
    return 0.5 * (m + m.transpose());
}

}  // namespace oracles
