#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "gsa/models.hpp"
#include "gsa/sampling.hpp"

namespace gsa {

// ---------------------------------------------------------------------------
// Generic Gauss-Newton core
// ---------------------------------------------------------------------------

struct GaussNewtonOptions {
    std::size_t max_iter = 100;
    double step_tol = 1e-8;   // relative step size
    double rss_tol = 1e-10;   // relative RSS decrease
    double fd_step = 1e-6;    // forward-difference step (absolute, per coord)
    std::size_t max_halvings = 30;
    // Starting identity damping for the escalation ladder entered when a
    // step fails to descend. 0 starts the ladder at 1e-4.
    double mu_floor = 0.0;
    // When positive, the step is solved only on eigendirections of J^T J
    // whose Gauss-Newton standard error rss/(m-p)/lambda stays below this
    // limit; the iterate never moves along directions the data constrain
    // worse than that. 0 solves the full normal equations (plain
    // Gauss-Newton).
    double step_sd_limit = 0.0;
};

struct GaussNewtonResult {
    Eigen::VectorXd x;
    double rss = 0.0;
    Eigen::MatrixXd jacobian;  // at the solution
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> rss_history;  // accepted RSS per iteration, non-increasing
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Minimizes ||r(x)||^2 with forward finite-difference Jacobians and a
// step-halving line search; accepted steps never increase the RSS.
// Jacobian columns are evaluated concurrently (r must be pure). Throws on
// a numerically singular normal-equation matrix.
GaussNewtonResult gauss_newton(const ResidualFn& residual,
                               const Eigen::VectorXd& x0,
                               const GaussNewtonOptions& opts);

// ---------------------------------------------------------------------------
// Cholera OLS calibration
// ---------------------------------------------------------------------------

struct FitResult {
    Eigen::VectorXd theta_hat;   // CholeraParams order, length 9
    double residual_variance = 0.0;  // RSS / (K - 9)
    Eigen::MatrixXd covariance;  // sigma^2 (J^T J)^{-1}, parameter space
    Eigen::MatrixXd correlation;
    std::size_t iterations = 0;
    bool converged = false;
    double rss = 0.0;
    Eigen::VectorXd observation_times;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct CalibrationOptions {
    std::size_t obs_count = 151;          // evenly spaced in [0, 300]
    double noise_frac_of_peak = 0.01;     // noise sigma = frac * max I(t)
    double theta0_scale = 1.05;           // starting point theta0 = scale * theta*
    // Upper bound on the posterior log-parameter standard deviation. At the
    // nominal values both incidence terms run in their linear regime
    // (B << kappa), so beta/kappa enter the observations only as ratios and
    // J^T J has near-null directions; the raw OLS variance along those
    // directions is unbounded. Directions the data do identify keep their
    // exact OLS variance; the rest are capped at this scale (0 disables the
    // cap and makes a singular J^T J a hard error).
    double log_sd_cap = 0.10;
    // RSS tolerance 1e-4 rather than the generic 1e-10: the flat valley of
    // the unidentified directions keeps a weak downhill tilt, so chasing
    // smaller decreases walks the iterate arbitrarily far without fitting
    // the data any better. The step keeps to directions identified better
    // than log_sd_cap; the rest stay at the starting point, which the
    // capped covariance then covers.
    GaussNewtonOptions gn{100, 1e-8, 1e-4, 1e-6, 30, 1e-2, 0.10};
    IntegratorOptions integrator = cholera_default_integrator();
    double n_pop = kCholeraPopulation;
};

Eigen::VectorXd observation_times(const CalibrationOptions& opts);

// Model I(t_k) at theta on the observation grid.
Eigen::VectorXd cholera_observables(const CholeraParams& theta,
                                    const Eigen::VectorXd& times,
                                    const CalibrationOptions& opts);

// Synthetic observations: nominal trajectory plus i.i.d. N(0, sigma^2)
// noise, deterministic per seed.
Eigen::VectorXd synth_data(const CholeraParams& theta_star,
                           const Eigen::VectorXd& times, double noise_sigma,
                           std::uint64_t seed, const CalibrationOptions& opts);

// OLS fit of the cholera model. Parameters are iterated in log space
// (theta = exp(phi)) so they stay positive; the covariance is mapped back
// to parameter space by the chain rule.
FitResult gauss_newton_fit(const Eigen::VectorXd& data,
                           const Eigen::VectorXd& times,
                           const CholeraParams& theta0,
                           const CalibrationOptions& opts);

// N(theta_hat, covariance), with the covariance eigenvalue-clipped at zero
// if roundoff left it slightly indefinite. Requires a converged fit.
GaussianLaw correlated_law_from_fit(const FitResult& fit);

// JSON round-trip for FitResult files (schema-versioned); the correlation
// matrix is additionally exported as CSV for heatmap consumers.
void write_fit_json(const FitResult& fit, const std::string& path,
                    const std::string& config_hash = "");
FitResult read_fit_json(const std::string& path);
void write_correlation_csv(const FitResult& fit, const std::string& path);

}  // namespace gsa
