#include "gsa/calibration.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "gsa/rng.hpp"
#include "gsa/threading.hpp"
#include "gsa/version.hpp"

namespace gsa {

GaussNewtonResult gauss_newton(const ResidualFn& residual,
                               const Eigen::VectorXd& x0,
                               const GaussNewtonOptions& opts) {
    const Eigen::Index p = x0.size();
    GaussNewtonResult result;
    result.x = x0;

    Eigen::VectorXd r = residual(result.x);
    const Eigen::Index m = r.size();
    if (m <= p)
        throw std::invalid_argument("gauss_newton: need more observations than parameters");
    result.rss = r.squaredNorm();
    result.rss_history.push_back(result.rss);
    result.jacobian.resize(m, p);

    // Damping for rank-deficient normal equations. mu_floor = 0 gives plain
    // Gauss-Newton; a positive floor keeps every solve damped so the step
    // cannot run along directions the data do not constrain (this model has
    // global scaling symmetries, so the flat valley extends forever). On a
    // failed line search mu escalates Levenberg-style until a halving
    // succeeds.
    double mu = opts.mu_floor;

    for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
        // Forward-difference Jacobian; columns are independent integrations.
        Eigen::MatrixXd& J = result.jacobian;
        const Eigen::VectorXd x = result.x;
        threading::parallel_for(static_cast<std::size_t>(p), [&](std::size_t c) {
            Eigen::VectorXd xp = x;
            const double h = opts.fd_step;
            xp[static_cast<Eigen::Index>(c)] += h;
            J.col(static_cast<Eigen::Index>(c)) = (residual(xp) - r) / h;
        });
        const Eigen::MatrixXd jtj = J.transpose() * J;
        const Eigen::VectorXd jtr = J.transpose() * r;

        bool accepted = false;
        Eigen::VectorXd x_new, r_new, step;
        double rss_new = result.rss;
        // A step only counts if it beats the convergence tolerance; chasing
        // smaller decreases would walk the iterate along unidentified
        // directions indefinitely.
        const double target = result.rss * (1.0 - opts.rss_tol);
        for (int escalation = 0; escalation < 24 && !accepted; ++escalation) {
            bool solvable = false;
            if (escalation == 0 && opts.step_sd_limit > 0.0) {
                // Truncated-spectrum step: full Newton speed on directions
                // the data pin down to better than step_sd_limit, exactly
                // zero along the rest.
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jtj);
                const Eigen::VectorXd& lambda = eig.eigenvalues();
                const double sigma_sq =
                    result.rss / static_cast<double>(m - p);
                const double keep_above =
                    sigma_sq / (opts.step_sd_limit * opts.step_sd_limit);
                Eigen::VectorXd inv = Eigen::VectorXd::Zero(p);
                for (Eigen::Index k = 0; k < p; ++k)
                    if (lambda[k] > keep_above) inv[k] = 1.0 / lambda[k];
                step = -(eig.eigenvectors() * inv.asDiagonal() *
                         eig.eigenvectors().transpose() * jtr);
                solvable = step.allFinite();
            } else {
                Eigen::MatrixXd damped = jtj;
                damped.diagonal().array() += mu;
                step = -Eigen::LDLT<Eigen::MatrixXd>(damped).solve(jtr);
                solvable = step.allFinite() &&
                           (damped * step + jtr).norm() <=
                               1e-8 * std::max(1.0, jtr.norm());
            }
            if (solvable) {
                // Step-halving line search; evaluation failures (domain
                // violations, stiffness blowups) reject the trial.
                double lambda = 1.0;
                for (std::size_t halving = 0; halving <= opts.max_halvings;
                     ++halving) {
                    x_new = result.x + lambda * step;
                    bool usable = true;
                    try {
                        r_new = residual(x_new);
                        rss_new = r_new.squaredNorm();
                    } catch (const std::exception&) {
                        usable = false;
                    }
                    if (usable && std::isfinite(rss_new) && rss_new <= target) {
                        accepted = true;
                        break;
                    }
                    lambda *= 0.5;
                }
            }
            if (!accepted) mu = (mu == 0.0) ? 1e-4 : mu * 10.0;
        }
        result.iterations = iter + 1;
        if (!accepted) {
            // No strictly decreasing step exists across the whole damping
            // ladder: the iterate is stationary at this noise level.
            result.converged = true;
            return result;
        }
        mu = std::max(mu / 10.0, opts.mu_floor);

        const double step_size = (x_new - result.x).norm();
        const double rel_decrease =
            (result.rss - rss_new) / std::max(result.rss, 1e-300);
        result.x = x_new;
        r = r_new;
        result.rss = rss_new;
        result.rss_history.push_back(result.rss);

        if (step_size <= opts.step_tol * std::max(1.0, result.x.norm()) ||
            rel_decrease <= opts.rss_tol || result.rss == 0.0) {
            result.converged = true;
            break;
        }
    }

    if (result.converged) {
        // Refresh the Jacobian at the accepted solution.
        Eigen::MatrixXd& J = result.jacobian;
        const Eigen::VectorXd x = result.x;
        const Eigen::VectorXd r_final = r;
        threading::parallel_for(static_cast<std::size_t>(p), [&](std::size_t c) {
            Eigen::VectorXd xp = x;
            xp[static_cast<Eigen::Index>(c)] += opts.fd_step;
            J.col(static_cast<Eigen::Index>(c)) = (residual(xp) - r_final) / opts.fd_step;
        });
    }
    return result;
}

Eigen::VectorXd observation_times(const CalibrationOptions& opts) {
    if (opts.obs_count < 10)
        throw std::invalid_argument("observation_times: need at least 10 points");
    UniformGrid grid{0.0, kCholeraHorizonWeeks, opts.obs_count};
    return grid.times();
}

Eigen::VectorXd cholera_observables(const CholeraParams& theta,
                                    const Eigen::VectorXd& times,
                                    const CalibrationOptions& opts) {
    IntegratorOptions integ = opts.integrator;
    integ.output_grid =
        UniformGrid{times[0], times[times.size() - 1],
                    static_cast<std::size_t>(times.size())};
    const Trajectory traj = cholera_infected(theta, integ, opts.n_pop);
    return traj.values.col(0);
}

Eigen::VectorXd synth_data(const CholeraParams& theta_star,
                           const Eigen::VectorXd& times, double noise_sigma,
                           std::uint64_t seed, const CalibrationOptions& opts) {
    if (noise_sigma < 0.0)
        throw std::invalid_argument("synth_data: noise_sigma must be >= 0");
    Eigen::VectorXd data = cholera_observables(theta_star, times, opts);
    if (noise_sigma > 0.0) {
        Rng rng(seed);
        for (Eigen::Index k = 0; k < data.size(); ++k)
            data[k] += noise_sigma * rng.normal();
    }
    return data;
}

FitResult gauss_newton_fit(const Eigen::VectorXd& data,
                           const Eigen::VectorXd& times,
                           const CholeraParams& theta0,
                           const CalibrationOptions& opts) {
    theta0.validate();
    if (data.size() != times.size())
        throw std::invalid_argument("gauss_newton_fit: data/times size mismatch");
    if (!data.allFinite())
        throw std::invalid_argument("gauss_newton_fit: non-finite observations");

    // Iterate in log space: a fd_step perturbation of phi is a relative
    // perturbation of theta, which handles the 10-orders-of-magnitude
    // spread of the parameter scales. Trial points far from the data can
    // turn the dynamics quasi-stiff, so the step budget is capped; a budget
    // overrun rejects that step in the line search.
    CalibrationOptions fit_opts = opts;
    fit_opts.integrator.max_steps =
        std::min<std::size_t>(fit_opts.integrator.max_steps, 300000);
    // The step truncation and the covariance cap act on the same subspace.
    fit_opts.gn.step_sd_limit = opts.log_sd_cap;
    const Eigen::VectorXd phi0 = theta0.to_vector().array().log();
    const ResidualFn residual = [&, fit_opts](const Eigen::VectorXd& phi) -> Eigen::VectorXd {
        const CholeraParams theta =
            CholeraParams::from_vector(phi.array().exp());
        return cholera_observables(theta, times, fit_opts) - data;
    };

    const GaussNewtonResult core = gauss_newton(residual, phi0, fit_opts.gn);

    FitResult fit;
    fit.theta_hat = core.x.array().exp();
    fit.iterations = core.iterations;
    fit.converged = core.converged;
    fit.rss = core.rss;
    fit.observation_times = times;

    const Eigen::Index k_obs = data.size();
    const Eigen::Index p = fit.theta_hat.size();
    fit.residual_variance = core.rss / static_cast<double>(k_obs - p);

    // J_phi relates residuals to phi = log(theta); the parameter-space
    // Jacobian is J_theta = J_phi diag(1/theta), so
    //   cov_theta = sigma^2 diag(theta) (J_phi^T J_phi)^{-1} diag(theta).
    // The inverse is taken through the spectrum of J^T J so that directions
    // the data do not identify can be capped at opts.log_sd_cap instead of
    // receiving a numerically meaningless variance.
    const Eigen::MatrixXd jtj = core.jacobian.transpose() * core.jacobian;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> spectrum(jtj);
    if (spectrum.info() != Eigen::Success)
        throw std::runtime_error("gauss_newton_fit: eigendecomposition of J^T J failed");
    const Eigen::VectorXd eigs = spectrum.eigenvalues();
    const double eig_max = eigs.maxCoeff();
    const double eig_min = eigs.minCoeff();
    if (opts.log_sd_cap <= 0.0 && (!(eig_min > 0.0) || eig_max / eig_min > 1e14)) {
        const double cond = eig_max / std::max(eig_min, 1e-300);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e", cond);
        throw std::runtime_error(
            "gauss_newton_fit: singular J^T J at the solution (condition estimate " +
            std::string(buf) + ")");
    }
    Eigen::VectorXd phi_variances(p);
    const double cap_var =
        opts.log_sd_cap > 0.0 ? opts.log_sd_cap * opts.log_sd_cap
                              : std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < p; ++i) {
        const double ols_var = eigs[i] > 0.0
                                   ? fit.residual_variance / eigs[i]
                                   : std::numeric_limits<double>::infinity();
        phi_variances[i] = std::min(ols_var, cap_var);
    }
    const Eigen::MatrixXd cov_phi = spectrum.eigenvectors() *
                                    phi_variances.asDiagonal() *
                                    spectrum.eigenvectors().transpose();
    const Eigen::MatrixXd d_theta = fit.theta_hat.asDiagonal();
    Eigen::MatrixXd cov = d_theta * cov_phi * d_theta;
    cov = 0.5 * (cov + cov.transpose());
    fit.covariance = cov;

    fit.correlation = Eigen::MatrixXd::Identity(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) {
            const double denom = std::sqrt(cov(i, i) * cov(j, j));
            fit.correlation(i, j) = denom > 0.0 ? cov(i, j) / denom : 0.0;
        }
    for (Eigen::Index i = 0; i < p; ++i) fit.correlation(i, i) = 1.0;
    return fit;
}

GaussianLaw correlated_law_from_fit(const FitResult& fit) {
    if (!fit.converged)
        throw std::runtime_error("correlated_law_from_fit: fit did not converge");
    Eigen::MatrixXd cov = fit.covariance;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.eigenvalues().minCoeff() < 0.0) {
        const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
        cov = eig.eigenvectors() * clipped.asDiagonal() *
              eig.eigenvectors().transpose();
        cov = 0.5 * (cov + cov.transpose());
    }
    return make_gaussian_law(fit.theta_hat, std::move(cov));
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const std::size_t rows = j.size();
    if (rows == 0) return {};
    const std::size_t cols = j.at(0).size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                j.at(i).at(c).get<double>();
    return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
    return v;
}

}  // namespace

void write_fit_json(const FitResult& fit, const std::string& path,
                    const std::string& config_hash) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tool_version"] = kVersion;
    if (!config_hash.empty()) j["config_hash"] = config_hash;
    j["kind"] = "cholera_fit";
    j["parameter_names"] = CholeraParams::names();
    j["theta_hat"] = vector_to_json(fit.theta_hat);
    j["residual_variance"] = fit.residual_variance;
    j["covariance"] = matrix_to_json(fit.covariance);
    j["correlation"] = matrix_to_json(fit.correlation);
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["rss"] = fit.rss;
    j["observation_times"] = vector_to_json(fit.observation_times);
    j["noise_sigma"] = fit.noise_sigma;
    j["seed"] = fit.seed;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_fit_json: cannot open " + path);
    out << j.dump(2) << '\n';
}

FitResult read_fit_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_fit_json: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("kind", "") != std::string("cholera_fit"))
        throw std::runtime_error("read_fit_json: not a cholera_fit file: " + path);
    FitResult fit;
    fit.theta_hat = vector_from_json(j.at("theta_hat"));
    fit.residual_variance = j.at("residual_variance").get<double>();
    fit.covariance = matrix_from_json(j.at("covariance"));
    fit.correlation = matrix_from_json(j.at("correlation"));
    fit.iterations = j.at("iterations").get<std::size_t>();
    fit.converged = j.at("converged").get<bool>();
    fit.rss = j.at("rss").get<double>();
    fit.observation_times = vector_from_json(j.at("observation_times"));
    fit.noise_sigma = j.value("noise_sigma", 0.0);
    fit.seed = j.value("seed", std::uint64_t{0});
    return fit;
}

void write_correlation_csv(const FitResult& fit, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_correlation_csv: cannot open " + path);
    const auto& names = CholeraParams::names();
    out << "parameter";
    for (const std::string& n : names) out << ',' << n;
    out << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < fit.correlation.rows(); ++i) {
        out << names[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < fit.correlation.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", fit.correlation(i, j));
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace gsa
