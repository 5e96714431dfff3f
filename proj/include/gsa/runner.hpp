#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gsa/config.hpp"
#include "gsa/hsic.hpp"
#include "gsa/sobol.hpp"

namespace gsa {

// Inputs, outputs, and kernel machinery for one (config, n, seed) cell.
struct StudyData {
    Eigen::MatrixXd x;                    // n x p input samples
    std::vector<std::string> input_names;
    Eigen::VectorXd scalar_y;             // scalar models
    std::vector<Trajectory> trajectory_y; // cholera
    bool function_valued = false;
    InputEnsemble ensemble;
    std::shared_ptr<GramColumnSource> y_source;
    double output_bandwidth = 0.0;
};

// Samples inputs under the config's law and evaluates the model. The law
// dimension must match the model. rho_override replaces the law's rho for
// portfolio sweep cells.
StudyData prepare_study(const ExperimentConfig& config, std::size_t n,
                        std::uint64_t seed, const std::string& out_dir,
                        const double* rho_override = nullptr);

// Subcommand drivers. Each writes its CSV/JSON products under out_dir
// (prefixed with config.out_prefix) and returns the list of files written.
std::vector<std::string> run_indices(const ExperimentConfig& config,
                                     const std::string& out_dir);
std::vector<std::string> run_convergence(const ExperimentConfig& config,
                                         const std::string& out_dir);
std::vector<std::string> run_rho_sweep(const ExperimentConfig& config,
                                       const std::string& out_dir);
std::vector<std::string> run_reduction(const ExperimentConfig& config,
                                       const std::string& out_dir);
std::vector<std::string> run_calibrate(const ExperimentConfig& config,
                                       const std::string& out_dir);
std::vector<std::string> run_bench(const ExperimentConfig& config,
                                   const std::string& out_dir);

// Two-sample Kolmogorov-Smirnov statistic sup_x |F1 - F2|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Serialization helpers shared with the test suites.
void write_report_csv(const SensitivityReport& report,
                      const std::vector<std::string>& input_names,
                      const std::string& path, const std::string& stamp);
void write_report_json(const SensitivityReport& report,
                       const ExperimentConfig& config,
                       const std::vector<std::string>& input_names,
                       const std::string& path, const std::string& stamp);

}  // namespace gsa
