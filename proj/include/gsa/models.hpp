#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "gsa/ode.hpp"

namespace gsa {

// ---------------------------------------------------------------------------
// Ishigami
// ---------------------------------------------------------------------------

// f(x) = sin(x1) + a sin^2(x2) + b x3^4 sin(x1).
double ishigami(std::span<const double> x, double a = 5.0, double b = 0.1);

struct IshigamiSobolTotals {
    double st1 = 0.0;
    double st2 = 0.0;
    double st3 = 0.0;
};

// Closed-form total-effect Sobol' indices for the Ishigami function with
// X_i ~ U(-pi, pi):
//   D    = a^2/8 + b pi^4/5 + b^2 pi^8/18 + 1/2
//   S_T1 = ( (1 + b pi^4/5)^2 / 2 + 8 b^2 pi^8 / 225 ) / D
//   S_T2 = (a^2 / 8) / D
//   S_T3 = (8 b^2 pi^8 / 225) / D
IshigamiSobolTotals ishigami_sobol_analytic(double a, double b);

// ---------------------------------------------------------------------------
// Correlated portfolio
// ---------------------------------------------------------------------------

// Y = 20 X1 + 16 X2 + 12 X3 + 10 X4 + 4 X5.
inline constexpr std::array<double, 5> kPortfolioCoefficients{20.0, 16.0, 12.0,
                                                              10.0, 4.0};
double portfolio(std::span<const double> x);

// The rho-parameterized covariance (unit diagonal; offdiagonals
// 0.5, 0.5, 0.8, 0.3 scaled by rho). PSD for all rho in [0, 1], verified
// by an eigenvalue check at construction. Throws for rho outside [0, 1].
Eigen::MatrixXd portfolio_sigma(double rho);

// ---------------------------------------------------------------------------
// Cholera transmission model
// ---------------------------------------------------------------------------

// Compartment parameters; all rates strictly positive.
struct CholeraParams {
    double beta_L;   // low-infectious ingestion rate      [1/week]
    double beta_H;   // high-infectious ingestion rate     [1/week]
    double kappa_L;  // B_L carrying capacity              [bacteria/mL]
    double kappa_H;  // B_H carrying capacity              [bacteria/mL]
    double b;        // birth/death rate                   [1/week]
    double chi;      // B_H -> B_L decay rate              [1/week]
    double xi;       // water contamination rate           [bacteria/mL /(indiv week)]
    double delta;    // B_L death rate                     [1/week]
    double gamma;    // recovery rate                      [1/week]

    static CholeraParams nominal();
    static const std::vector<std::string>& names();

    Eigen::VectorXd to_vector() const;
    static CholeraParams from_vector(const Eigen::VectorXd& v);
    void validate() const;
};

inline constexpr double kCholeraPopulation = 10000.0;
inline constexpr double kCholeraHorizonWeeks = 300.0;
inline constexpr std::size_t kCholeraGridPoints = 601;  // dt = 0.5 week

// State y = (S, I, R, B_H, B_L). Saturating incidence B/(kappa + B);
// states are evaluated as written, without clipping.
void cholera_rhs(double t, std::span<const double> y, const CholeraParams& p,
                 double n_pop, std::span<double> dy);

IntegratorOptions cholera_default_integrator();

// Full 5-state trajectory from (N-1, 1, 0, 0, 0) over [0, 300] weeks.
Trajectory cholera_run(const CholeraParams& p, const IntegratorOptions& opts,
                       double n_pop = kCholeraPopulation);

// Infected compartment I(t) only; the model's quantity of interest.
Trajectory cholera_infected(const CholeraParams& p, const IntegratorOptions& opts,
                            double n_pop = kCholeraPopulation);

// time column + one column per state/observable.
void write_trajectory_csv(const Trajectory& t, const std::string& path,
                          const std::vector<std::string>& column_names);

}  // namespace gsa
