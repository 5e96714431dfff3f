#include "gsa/models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gsa {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double ishigami(std::span<const double> x, double a, double b) {
    if (x.size() != 3) throw std::invalid_argument("ishigami: need a 3-vector");
    const double s1 = std::sin(x[0]);
    const double s2 = std::sin(x[1]);
    return s1 + a * s2 * s2 + b * x[2] * x[2] * x[2] * x[2] * s1;
}

IshigamiSobolTotals ishigami_sobol_analytic(double a, double b) {
    const double pi4 = kPi * kPi * kPi * kPi;
    const double pi8 = pi4 * pi4;
    const double variance =
        a * a / 8.0 + b * pi4 / 5.0 + b * b * pi8 / 18.0 + 0.5;
    IshigamiSobolTotals t;
    const double one_plus = 1.0 + b * pi4 / 5.0;
    t.st1 = (0.5 * one_plus * one_plus + 8.0 * b * b * pi8 / 225.0) / variance;
    t.st2 = (a * a / 8.0) / variance;
    t.st3 = (8.0 * b * b * pi8 / 225.0) / variance;
    return t;
}

double portfolio(std::span<const double> x) {
    if (x.size() != 5) throw std::invalid_argument("portfolio: need a 5-vector");
    double y = 0.0;
    for (std::size_t i = 0; i < 5; ++i) y += kPortfolioCoefficients[i] * x[i];
    return y;
}

Eigen::MatrixXd portfolio_sigma(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::invalid_argument("portfolio_sigma: rho must lie in [0, 1]");
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(5, 5);
    sigma(0, 1) = sigma(1, 0) = 0.5 * rho;
    sigma(0, 2) = sigma(2, 0) = 0.5 * rho;
    sigma(0, 4) = sigma(4, 0) = 0.8 * rho;
    sigma(2, 4) = sigma(4, 2) = 0.3 * rho;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    if (eig.eigenvalues().minCoeff() < -1e-10)
        throw std::runtime_error("portfolio_sigma: covariance not PSD");
    return sigma;
}

CholeraParams CholeraParams::nominal() {
    CholeraParams p;
    p.beta_L = 1.5;
    p.beta_H = 7.5;
    p.kappa_L = 1e6;
    p.kappa_H = 7e8;
    p.b = 1.0 / 1560.0;
    p.chi = 1.0 / 168.0;
    p.xi = 70.0;
    p.delta = 7.0 / 30.0;
    p.gamma = 7.0 / 5.0;
    return p;
}

const std::vector<std::string>& CholeraParams::names() {
    static const std::vector<std::string> kNames = {
        "beta_L", "beta_H", "kappa_L", "kappa_H", "b",
        "chi",    "xi",     "delta",   "gamma"};
    return kNames;
}

Eigen::VectorXd CholeraParams::to_vector() const {
    Eigen::VectorXd v(9);
    v << beta_L, beta_H, kappa_L, kappa_H, b, chi, xi, delta, gamma;
    return v;
}

CholeraParams CholeraParams::from_vector(const Eigen::VectorXd& v) {
    if (v.size() != 9)
        throw std::invalid_argument("CholeraParams: need 9 entries");
    CholeraParams p;
    p.beta_L = v[0];
    p.beta_H = v[1];
    p.kappa_L = v[2];
    p.kappa_H = v[3];
    p.b = v[4];
    p.chi = v[5];
    p.xi = v[6];
    p.delta = v[7];
    p.gamma = v[8];
    return p;
}

void CholeraParams::validate() const {
    const Eigen::VectorXd v = to_vector();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!(v[i] > 0.0) || !std::isfinite(v[i]))
            throw std::invalid_argument("CholeraParams: '" + names()[static_cast<std::size_t>(i)] +
                                        "' must be strictly positive");
}

void cholera_rhs(double /*t*/, std::span<const double> y, const CholeraParams& p,
                 double n_pop, std::span<double> dy) {
    const double S = y[0], I = y[1], R = y[2], BH = y[3], BL = y[4];
    const double low = p.beta_L * S * BL / (p.kappa_L + BL);
    const double high = p.beta_H * S * BH / (p.kappa_H + BH);
    dy[0] = p.b * n_pop - low - high - p.b * S;
    dy[1] = low + high - (p.gamma + p.b) * I;
    dy[2] = p.gamma * I - p.b * R;
    dy[3] = p.xi * I - p.chi * BH;
    dy[4] = p.chi * BH - p.delta * BL;
}

IntegratorOptions cholera_default_integrator() {
    IntegratorOptions opts;
    opts.rel_tol = 1e-6;
    opts.abs_tol = 1e-8;
    opts.output_grid = UniformGrid{0.0, kCholeraHorizonWeeks, kCholeraGridPoints};
    return opts;
}

Trajectory cholera_run(const CholeraParams& p, const IntegratorOptions& opts,
                       double n_pop) {
    p.validate();
    Eigen::VectorXd y0(5);
    y0 << n_pop - 1.0, 1.0, 0.0, 0.0, 0.0;
    return integrate_rk45(
        [&p, n_pop](double t, std::span<const double> y, std::span<double> dy) {
            cholera_rhs(t, y, p, n_pop, dy);
        },
        y0, opts.output_grid.t0, opts.output_grid.t1, opts);
}

Trajectory cholera_infected(const CholeraParams& p, const IntegratorOptions& opts,
                            double n_pop) {
    return trajectory_component(cholera_run(p, opts, n_pop), 1);
}

// ---------------------------------------------------------------------------
// Trajectory helpers
// ---------------------------------------------------------------------------

void validate_trajectory(const Trajectory& t) {
    if (t.times.size() < 2)
        throw std::invalid_argument("Trajectory: need at least two time points");
    if (t.values.rows() != t.times.size())
        throw std::invalid_argument("Trajectory: time/value size mismatch");
    for (Eigen::Index k = 1; k < t.times.size(); ++k)
        if (!(t.times[k] > t.times[k - 1]))
            throw std::invalid_argument("Trajectory: times must be strictly increasing");
    if (!t.values.allFinite())
        throw std::invalid_argument("Trajectory: non-finite values");
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size() ||
        (a.times - b.times).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("trajectory_distance: grids differ");
    if (a.values.cols() != b.values.cols())
        throw std::invalid_argument("trajectory_distance: component counts differ");

    // Trapezoid quadrature of the squared pointwise difference.
    const Eigen::Index m = a.times.size();
    double acc = 0.0;
    double prev = (a.values.row(0) - b.values.row(0)).squaredNorm();
    for (Eigen::Index k = 1; k < m; ++k) {
        const double cur = (a.values.row(k) - b.values.row(k)).squaredNorm();
        acc += 0.5 * (prev + cur) * (a.times[k] - a.times[k - 1]);
        prev = cur;
    }
    return std::sqrt(acc);
}

Trajectory trajectory_component(const Trajectory& t, std::size_t column) {
    if (column >= static_cast<std::size_t>(t.values.cols()))
        throw std::out_of_range("trajectory_component: column out of range");
    Trajectory out;
    out.times = t.times;
    out.values = t.values.col(static_cast<Eigen::Index>(column));
    return out;
}

void write_trajectory_csv(const Trajectory& t, const std::string& path,
                          const std::vector<std::string>& column_names) {
    if (column_names.size() != static_cast<std::size_t>(t.values.cols()))
        throw std::invalid_argument("write_trajectory_csv: name count mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    out << "time";
    for (const std::string& name : column_names) out << ',' << name;
    out << '\n';
    char buf[64];
    for (Eigen::Index k = 0; k < t.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", t.times[k]);
        out << buf;
        for (Eigen::Index c = 0; c < t.values.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", t.values(k, c));
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace gsa
