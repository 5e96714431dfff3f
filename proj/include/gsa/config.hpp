#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsa/calibration.hpp"
#include "gsa/models.hpp"
#include "gsa/sampling.hpp"

namespace gsa {

enum class ModelId { ishigami, portfolio, cholera, external_samples };
enum class IndexKind { total_hsic, dcorr, sobol };
enum class LawType {
    uniform_box,        // lower/upper vectors
    gaussian,           // explicit mean/cov
    portfolio_gaussian, // N(0, portfolio_sigma(rho))
    fitted,             // N(theta_hat, cov) from a calibration fit file
    fitted_uniform      // independent uniforms, theta_hat +- half_width_frac
};
enum class ReductionMode { replacement, conditional };
enum class ReductionMetric { ks, mean_curve };

struct LawSpec {
    LawType type = LawType::uniform_box;
    Eigen::VectorXd lower, upper;     // uniform_box
    Eigen::VectorXd mean;             // gaussian
    Eigen::MatrixXd cov;              // gaussian
    double rho = 0.0;                 // portfolio_gaussian
    std::string fit_file;             // fitted / fitted_uniform
    double half_width_frac = 0.10;    // fitted_uniform
};

struct SweepSpec {
    std::vector<double> rho_grid;  // default j/20, j = 0..20
};

struct ConvergenceSpec {
    std::vector<std::size_t> n_grid;
    std::vector<std::uint64_t> seeds;
};

struct ReductionCase {
    std::string label;
    std::optional<double> rho;      // portfolio only; overrides law rho
    std::size_t fix_index = 0;      // 0-based input index
    std::optional<double> value;    // empty -> law mean of that coordinate
    ReductionMode mode = ReductionMode::replacement;
};

struct ReductionSpec {
    std::size_t n = 100000;         // samples per arm
    ReductionMetric metric = ReductionMetric::ks;
    std::size_t bins = 60;
    std::vector<ReductionCase> cases;
};

struct CalibrationSpec {
    CalibrationOptions options;
    double noise_sigma_override = -1.0;  // >= 0 replaces the peak-fraction rule
    std::string fit_file = "cholera_fit.json";
};

struct BenchSpec {
    std::vector<std::size_t> n_grid{2000, 4000, 8000, 20000};
    std::size_t dense_limit = 2000;  // largest n for the dense cross-check
    std::size_t repeats = 3;         // timings take the best of `repeats`
};

struct ExperimentConfig {
    std::string name;
    ModelId model = ModelId::ishigami;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::size_t>> subsets;  // 0-based; empty -> singletons
    std::vector<IndexKind> kinds;
    LawSpec law;
    double ishigami_a = 5.0;
    double ishigami_b = 0.1;
    IntegratorOptions integrator = cholera_default_integrator();
    bool trajectory_cache = true;
    std::size_t sobol_n = 20000;
    SweepSpec sweep;
    ConvergenceSpec convergence;
    ReductionSpec reduction;
    CalibrationSpec calibration;
    BenchSpec bench;
    std::string external_x_csv, external_y_csv;
    std::string out_prefix = "run";

    nlohmann::json raw;  // effective config (after CLI overrides), hashed

    bool wants(IndexKind kind) const;
};

// Parses and validates a config. Field errors are reported with the JSON
// path of the offending entry; parse errors carry the line/offset from the
// JSON parser. Both surface as std::runtime_error.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& source);
ExperimentConfig load_config_file(const std::string& path);

// Named presets shipped with the tool (the bundled study defaults).
std::vector<std::string> preset_names();
const std::string& preset_text(const std::string& name);
ExperimentConfig load_preset(const std::string& name);

// FNV-1a hash of the effective config dump, hex-encoded; embedded in every
// output file.
std::string config_hash_hex(const ExperimentConfig& config);

}  // namespace gsa
