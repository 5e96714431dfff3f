#include "gsa/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gsa/numeric.hpp"

namespace gsa {

namespace {

[[noreturn]] void fail(const std::string& source, const std::string& path,
                       const std::string& what) {
    throw std::runtime_error(source + ": config field '" + path + "': " + what);
}

const nlohmann::json* find(const nlohmann::json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double as_number(const nlohmann::json& j, const std::string& source,
                 const std::string& path) {
    if (!j.is_number()) fail(source, path, "expected a number");
    return j.get<double>();
}

std::size_t as_count(const nlohmann::json& j, const std::string& source,
                     const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        fail(source, path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

std::string as_string(const nlohmann::json& j, const std::string& source,
                      const std::string& path) {
    if (!j.is_string()) fail(source, path, "expected a string");
    return j.get<std::string>();
}

Eigen::VectorXd as_vector(const nlohmann::json& j, const std::string& source,
                          const std::string& path) {
    if (!j.is_array()) fail(source, path, "expected an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] =
            as_number(j.at(i), source, path + "[" + std::to_string(i) + "]");
    return v;
}

Eigen::MatrixXd as_matrix(const nlohmann::json& j, const std::string& source,
                          const std::string& path) {
    if (!j.is_array() || j.empty()) fail(source, path, "expected an array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j.at(0).size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const Eigen::VectorXd row =
            as_vector(j.at(r), source, path + "[" + std::to_string(r) + "]");
        if (static_cast<std::size_t>(row.size()) != cols)
            fail(source, path, "ragged matrix rows");
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

std::size_t model_input_count(ModelId model) {
    switch (model) {
        case ModelId::ishigami: return 3;
        case ModelId::portfolio: return 5;
        case ModelId::cholera: return 9;
        case ModelId::external_samples: return 0;  // known at load time
    }
    return 0;
}

LawSpec parse_law(const nlohmann::json& j, const std::string& source) {
    LawSpec law;
    const std::string type = as_string(j.at("type"), source, "law.type");
    if (type == "uniform-box") {
        law.type = LawType::uniform_box;
        law.lower = as_vector(j.at("lower"), source, "law.lower");
        law.upper = as_vector(j.at("upper"), source, "law.upper");
        if (law.lower.size() != law.upper.size())
            fail(source, "law", "lower/upper size mismatch");
        for (Eigen::Index i = 0; i < law.lower.size(); ++i)
            if (!(law.lower[i] < law.upper[i]))
                fail(source, "law", "lower must be < upper componentwise");
    } else if (type == "gaussian") {
        law.type = LawType::gaussian;
        law.mean = as_vector(j.at("mean"), source, "law.mean");
        law.cov = as_matrix(j.at("cov"), source, "law.cov");
        if (law.cov.rows() != law.mean.size() || law.cov.cols() != law.mean.size())
            fail(source, "law.cov", "dimension mismatch with mean");
    } else if (type == "portfolio-gaussian") {
        law.type = LawType::portfolio_gaussian;
        law.rho = as_number(j.at("rho"), source, "law.rho");
        if (!(law.rho >= 0.0 && law.rho <= 1.0))
            fail(source, "law.rho", "must lie in [0, 1]");
    } else if (type == "fitted") {
        law.type = LawType::fitted;
        law.fit_file = as_string(j.at("fit_file"), source, "law.fit_file");
    } else if (type == "fitted-uniform") {
        law.type = LawType::fitted_uniform;
        law.fit_file = as_string(j.at("fit_file"), source, "law.fit_file");
        if (const auto* h = find(j, "half_width_frac")) {
            law.half_width_frac = as_number(*h, source, "law.half_width_frac");
            if (!(law.half_width_frac > 0.0 && law.half_width_frac < 1.0))
                fail(source, "law.half_width_frac", "must lie in (0, 1)");
        }
    } else {
        fail(source, "law.type", "unknown law type '" + type + "'");
    }
    return law;
}

}  // namespace

bool ExperimentConfig::wants(IndexKind kind) const {
    return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

ExperimentConfig parse_config(const nlohmann::json& j, const std::string& source) {
    if (!j.is_object()) throw std::runtime_error(source + ": config must be a JSON object");
    ExperimentConfig cfg;
    cfg.raw = j;

    if (const auto* v = find(j, "schema_version")) {
        if (as_count(*v, source, "schema_version") != 1)
            fail(source, "schema_version", "unsupported schema version");
    }
    cfg.name = j.value("name", std::string("unnamed"));

    const std::string model = as_string(j.at("model"), source, "model");
    if (model == "ishigami") cfg.model = ModelId::ishigami;
    else if (model == "portfolio") cfg.model = ModelId::portfolio;
    else if (model == "cholera") cfg.model = ModelId::cholera;
    else if (model == "external-samples") cfg.model = ModelId::external_samples;
    else fail(source, "model", "unknown model '" + model + "'");

    cfg.n = as_count(j.at("n"), source, "n");
    if (cfg.n < 2) fail(source, "n", "need n >= 2");
    if (const auto* v = find(j, "seed")) cfg.seed = static_cast<std::uint64_t>(
        as_count(*v, source, "seed"));

    const std::size_t p = model_input_count(cfg.model);

    if (const auto* v = find(j, "subsets")) {
        if (v->is_string()) {
            if (v->get<std::string>() != "singletons")
                fail(source, "subsets", "expected \"singletons\" or an array of arrays");
        } else if (v->is_array()) {
            for (std::size_t s = 0; s < v->size(); ++s) {
                const nlohmann::json& arr = v->at(s);
                if (!arr.is_array())
                    fail(source, "subsets[" + std::to_string(s) + "]",
                         "expected an array of 1-based indices");
                std::vector<std::size_t> subset;
                for (std::size_t k = 0; k < arr.size(); ++k) {
                    const std::size_t idx = as_count(
                        arr.at(k), source,
                        "subsets[" + std::to_string(s) + "][" + std::to_string(k) + "]");
                    if (idx < 1 || (p > 0 && idx > p))
                        fail(source, "subsets[" + std::to_string(s) + "]",
                             "index " + std::to_string(idx) + " outside 1.." +
                                 std::to_string(p));
                    subset.push_back(idx - 1);
                }
                cfg.subsets.push_back(std::move(subset));
            }
        } else {
            fail(source, "subsets", "expected \"singletons\" or an array of arrays");
        }
    }

    if (const auto* v = find(j, "kinds")) {
        if (!v->is_array()) fail(source, "kinds", "expected an array of strings");
        for (std::size_t k = 0; k < v->size(); ++k) {
            const std::string kind =
                as_string(v->at(k), source, "kinds[" + std::to_string(k) + "]");
            if (kind == "total_hsic") cfg.kinds.push_back(IndexKind::total_hsic);
            else if (kind == "dcorr") cfg.kinds.push_back(IndexKind::dcorr);
            else if (kind == "sobol") cfg.kinds.push_back(IndexKind::sobol);
            else fail(source, "kinds", "unknown index kind '" + kind + "'");
        }
    } else {
        cfg.kinds = {IndexKind::total_hsic, IndexKind::dcorr};
    }

    if (const auto* v = find(j, "law")) cfg.law = parse_law(*v, source);
    else fail(source, "law", "missing");

    if (const auto* v = find(j, "model_params")) {
        if (const auto* a = find(*v, "a"))
            cfg.ishigami_a = as_number(*a, source, "model_params.a");
        if (const auto* b = find(*v, "b"))
            cfg.ishigami_b = as_number(*b, source, "model_params.b");
    }

    if (const auto* v = find(j, "integrator")) {
        IntegratorOptions& io = cfg.integrator;
        if (const auto* x = find(*v, "rel_tol"))
            io.rel_tol = as_number(*x, source, "integrator.rel_tol");
        if (const auto* x = find(*v, "abs_tol"))
            io.abs_tol = as_number(*x, source, "integrator.abs_tol");
        if (const auto* x = find(*v, "max_step"))
            io.max_step = as_number(*x, source, "integrator.max_step");
        std::size_t grid_points = io.output_grid.count;
        double t_end = io.output_grid.t1;
        if (const auto* x = find(*v, "grid_points"))
            grid_points = as_count(*x, source, "integrator.grid_points");
        if (const auto* x = find(*v, "t_end"))
            t_end = as_number(*x, source, "integrator.t_end");
        if (grid_points < 2) fail(source, "integrator.grid_points", "need >= 2");
        if (!(t_end > 0.0)) fail(source, "integrator.t_end", "must be positive");
        io.output_grid = UniformGrid{0.0, t_end, grid_points};
        if (!(io.rel_tol > 0.0) || !(io.abs_tol > 0.0))
            fail(source, "integrator", "tolerances must be positive");
    }

    if (const auto* v = find(j, "trajectory_cache"))
        cfg.trajectory_cache = v->get<bool>();

    if (const auto* v = find(j, "sobol")) {
        if (const auto* x = find(*v, "n"))
            cfg.sobol_n = as_count(*x, source, "sobol.n");
        if (cfg.sobol_n < 100) fail(source, "sobol.n", "need >= 100");
    }

    if (const auto* v = find(j, "sweep")) {
        if (const auto* g = find(*v, "rho_grid")) {
            const Eigen::VectorXd grid = as_vector(*g, source, "sweep.rho_grid");
            for (Eigen::Index i = 0; i < grid.size(); ++i) {
                if (!(grid[i] >= 0.0 && grid[i] <= 1.0))
                    fail(source, "sweep.rho_grid", "entries must lie in [0, 1]");
                cfg.sweep.rho_grid.push_back(grid[i]);
            }
        } else if (const auto* d = find(*v, "rho_divisions")) {
            const std::size_t div = as_count(*d, source, "sweep.rho_divisions");
            if (div < 1) fail(source, "sweep.rho_divisions", "need >= 1");
            for (std::size_t k = 0; k <= div; ++k)
                cfg.sweep.rho_grid.push_back(static_cast<double>(k) /
                                             static_cast<double>(div));
        }
    }

    if (const auto* v = find(j, "convergence")) {
        if (const auto* g = find(*v, "n_grid"))
            for (std::size_t k = 0; k < g->size(); ++k)
                cfg.convergence.n_grid.push_back(
                    as_count(g->at(k), source, "convergence.n_grid"));
        if (const auto* g = find(*v, "seeds"))
            for (std::size_t k = 0; k < g->size(); ++k)
                cfg.convergence.seeds.push_back(
                    as_count(g->at(k), source, "convergence.seeds"));
        if (!std::is_sorted(cfg.convergence.n_grid.begin(), cfg.convergence.n_grid.end()))
            fail(source, "convergence.n_grid", "must be increasing");
        for (std::size_t nv : cfg.convergence.n_grid)
            if (nv < 2) fail(source, "convergence.n_grid", "entries must be >= 2");
    }

    if (const auto* v = find(j, "reduction")) {
        if (const auto* x = find(*v, "n"))
            cfg.reduction.n = as_count(*x, source, "reduction.n");
        if (cfg.reduction.n < 2) fail(source, "reduction.n", "need >= 2");
        if (const auto* x = find(*v, "bins")) {
            cfg.reduction.bins = as_count(*x, source, "reduction.bins");
            if (cfg.reduction.bins < 2) fail(source, "reduction.bins", "need >= 2");
        }
        if (const auto* x = find(*v, "metric")) {
            const std::string metric = as_string(*x, source, "reduction.metric");
            if (metric == "ks") cfg.reduction.metric = ReductionMetric::ks;
            else if (metric == "mean-curve")
                cfg.reduction.metric = ReductionMetric::mean_curve;
            else fail(source, "reduction.metric", "expected 'ks' or 'mean-curve'");
        }
        if (const auto* cases = find(*v, "cases")) {
            for (std::size_t c = 0; c < cases->size(); ++c) {
                const nlohmann::json& jc = cases->at(c);
                const std::string where = "reduction.cases[" + std::to_string(c) + "]";
                ReductionCase rc;
                rc.label = jc.value("label", "case" + std::to_string(c));
                if (const auto* x = find(jc, "rho")) {
                    rc.rho = as_number(*x, source, where + ".rho");
                    if (!(*rc.rho >= 0.0 && *rc.rho <= 1.0))
                        fail(source, where + ".rho", "must lie in [0, 1]");
                }
                const std::size_t fix1 =
                    as_count(jc.at("fix_index"), source, where + ".fix_index");
                if (fix1 < 1 || (p > 0 && fix1 > p))
                    fail(source, where + ".fix_index",
                         "1-based index outside 1.." + std::to_string(p));
                rc.fix_index = fix1 - 1;
                if (const auto* x = find(jc, "value"))
                    rc.value = as_number(*x, source, where + ".value");
                if (const auto* x = find(jc, "mode")) {
                    const std::string mode = as_string(*x, source, where + ".mode");
                    if (mode == "replacement") rc.mode = ReductionMode::replacement;
                    else if (mode == "conditional") rc.mode = ReductionMode::conditional;
                    else fail(source, where + ".mode",
                              "expected 'replacement' or 'conditional'");
                }
                cfg.reduction.cases.push_back(std::move(rc));
            }
        }
    }

    if (const auto* v = find(j, "calibration")) {
        CalibrationOptions& co = cfg.calibration.options;
        co.integrator = cfg.integrator;
        if (const auto* x = find(*v, "obs_count"))
            co.obs_count = as_count(*x, source, "calibration.obs_count");
        if (const auto* x = find(*v, "noise_frac_of_peak"))
            co.noise_frac_of_peak = as_number(*x, source, "calibration.noise_frac_of_peak");
        if (const auto* x = find(*v, "noise_sigma"))
            cfg.calibration.noise_sigma_override =
                as_number(*x, source, "calibration.noise_sigma");
        if (const auto* x = find(*v, "theta0_scale"))
            co.theta0_scale = as_number(*x, source, "calibration.theta0_scale");
        if (const auto* x = find(*v, "fd_step"))
            co.gn.fd_step = as_number(*x, source, "calibration.fd_step");
        if (const auto* x = find(*v, "max_iter"))
            co.gn.max_iter = as_count(*x, source, "calibration.max_iter");
        if (const auto* x = find(*v, "log_sd_cap"))
            co.log_sd_cap = as_number(*x, source, "calibration.log_sd_cap");
        if (const auto* x = find(*v, "fit_file"))
            cfg.calibration.fit_file = as_string(*x, source, "calibration.fit_file");
        if (co.noise_frac_of_peak < 0.0)
            fail(source, "calibration.noise_frac_of_peak", "must be >= 0");
    } else {
        cfg.calibration.options.integrator = cfg.integrator;
    }

    if (const auto* v = find(j, "bench")) {
        if (const auto* g = find(*v, "n_grid")) {
            cfg.bench.n_grid.clear();
            for (std::size_t k = 0; k < g->size(); ++k)
                cfg.bench.n_grid.push_back(as_count(g->at(k), source, "bench.n_grid"));
        }
        if (const auto* x = find(*v, "dense_limit"))
            cfg.bench.dense_limit = as_count(*x, source, "bench.dense_limit");
        if (const auto* x = find(*v, "repeats")) {
            cfg.bench.repeats = as_count(*x, source, "bench.repeats");
            if (cfg.bench.repeats < 1) fail(source, "bench.repeats", "need >= 1");
        }
    }

    if (const auto* v = find(j, "external_samples")) {
        cfg.external_x_csv = as_string(v->at("x_csv"), source, "external_samples.x_csv");
        cfg.external_y_csv = as_string(v->at("y_csv"), source, "external_samples.y_csv");
        for (const std::string& path : {cfg.external_x_csv, cfg.external_y_csv})
            if (!std::filesystem::exists(path))
                fail(source, "external_samples", "file not found: " + path);
    } else if (cfg.model == ModelId::external_samples) {
        fail(source, "external_samples", "required for model 'external-samples'");
    }

    if (const auto* v = find(j, "out_prefix")) {
        cfg.out_prefix = as_string(*v, source, "out_prefix");
        if (cfg.out_prefix.empty() ||
            cfg.out_prefix.find('/') != std::string::npos ||
            cfg.out_prefix.find('\\') != std::string::npos)
            fail(source, "out_prefix", "must be a nonempty bare file prefix");
    } else {
        cfg.out_prefix = cfg.name;
    }

    // Cross-field checks.
    const auto law_dim = [&]() -> std::size_t {
        switch (cfg.law.type) {
            case LawType::uniform_box: return static_cast<std::size_t>(cfg.law.lower.size());
            case LawType::gaussian: return static_cast<std::size_t>(cfg.law.mean.size());
            case LawType::portfolio_gaussian: return 5;
            default: return p;  // fitted laws take their dimension from the fit
        }
    }();
    if (p > 0 && law_dim != p)
        fail(source, "law", "law dimension " + std::to_string(law_dim) +
                          " does not match model input count " + std::to_string(p));
    if (cfg.law.type == LawType::portfolio_gaussian && cfg.model != ModelId::portfolio)
        fail(source, "law.type", "portfolio-gaussian requires the portfolio model");
    if ((cfg.law.type == LawType::fitted || cfg.law.type == LawType::fitted_uniform) &&
        cfg.model != ModelId::cholera)
        fail(source, "law.type", "fitted laws require the cholera model");
    if (cfg.wants(IndexKind::sobol) && cfg.law.type != LawType::uniform_box &&
        cfg.law.type != LawType::fitted_uniform)
        fail(source, "kinds", "sobol requires an independent (product) law");
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config file");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports the byte offset; recover the line number for a
        // line-anchored message.
        std::ifstream again(path);
        std::string text((std::istreambuf_iterator<char>(again)),
                         std::istreambuf_iterator<char>());
        std::size_t line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw std::runtime_error(path + ":" + std::to_string(line) +
                                 ": JSON parse error: " + e.what());
    }
    return parse_config(j, path);
}

std::string config_hash_hex(const ExperimentConfig& config) {
    const std::uint64_t h = fnv1a64(config.raw.dump());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace gsa
