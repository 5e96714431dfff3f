#include "gsa/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gsa/numeric.hpp"
#include "gsa/rng.hpp"
#include "gsa/threading.hpp"
#include "gsa/version.hpp"

namespace gsa {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string stamp_line(const ExperimentConfig& config) {
    return std::string("# gsa ") + kVersion + " config " + config_hash_hex(config);
}

std::string out_path(const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    return (std::filesystem::path(out_dir) / name).string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' endings everywhere
    if (!out) throw std::runtime_error("cannot open output file " + path);
    return out;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path,
                                std::vector<std::string>* header_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open samples file " + path);
    std::string line;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> header;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        if (first) {
            first = false;
            // Header row of column names (non-numeric first cell).
            std::stringstream probe(line);
            std::string head;
            std::getline(probe, head, ',');
            char* end = nullptr;
            std::strtod(head.c_str(), &end);
            const bool numeric = end && *end == '\0' && end != head.c_str();
            if (!numeric) {
                while (std::getline(ss, cell, ',')) header.push_back(cell);
                continue;
            }
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error(path + ": ragged CSV rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    if (header_out) {
        if (header.empty())
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                header.push_back("c" + std::to_string(c + 1));
        *header_out = header;
    }
    return m;
}

std::vector<std::string> model_input_names(const ExperimentConfig& config) {
    switch (config.model) {
        case ModelId::ishigami: return {"x1", "x2", "x3"};
        case ModelId::portfolio: return {"x1", "x2", "x3", "x4", "x5"};
        case ModelId::cholera: return CholeraParams::names();
        case ModelId::external_samples: return {};
    }
    return {};
}

GaussianLaw resolve_gaussian_law(const ExperimentConfig& config,
                                 const std::string& out_dir,
                                 const double* rho_override) {
    switch (config.law.type) {
        case LawType::gaussian:
            return make_gaussian_law(config.law.mean, config.law.cov);
        case LawType::portfolio_gaussian: {
            const double rho = rho_override ? *rho_override : config.law.rho;
            return make_gaussian_law(Eigen::VectorXd::Zero(5), portfolio_sigma(rho));
        }
        case LawType::fitted: {
            const std::string path = out_path(out_dir, config.law.fit_file);
            if (!std::filesystem::exists(path))
                throw std::runtime_error(
                    "law.fit_file '" + path +
                    "' not found; run the calibrate subcommand first");
            return correlated_law_from_fit(read_fit_json(path));
        }
        default:
            throw std::runtime_error("resolve_gaussian_law: law is not Gaussian");
    }
}

UniformBoxLaw resolve_uniform_law(const ExperimentConfig& config,
                                  const std::string& out_dir) {
    if (config.law.type == LawType::uniform_box)
        return make_uniform_box(config.law.lower, config.law.upper);
    if (config.law.type == LawType::fitted_uniform) {
        const std::string path = out_path(out_dir, config.law.fit_file);
        if (!std::filesystem::exists(path))
            throw std::runtime_error("law.fit_file '" + path +
                                     "' not found; run the calibrate subcommand first");
        const FitResult fit = read_fit_json(path);
        const Eigen::VectorXd mean = fit.theta_hat;
        const double frac = config.law.half_width_frac;
        return make_uniform_box(mean * (1.0 - frac), mean * (1.0 + frac));
    }
    throw std::runtime_error("resolve_uniform_law: law is not an independent box");
}

Eigen::MatrixXd sample_inputs(const ExperimentConfig& config, std::size_t n,
                              std::uint64_t seed, const std::string& out_dir,
                              const double* rho_override) {
    switch (config.law.type) {
        case LawType::uniform_box:
        case LawType::fitted_uniform:
            return uniform_sample(resolve_uniform_law(config, out_dir), n, seed);
        case LawType::gaussian:
        case LawType::portfolio_gaussian:
            return mvn_sample(resolve_gaussian_law(config, out_dir, rho_override),
                              n, seed);
        case LawType::fitted: {
            // Parameter draws must stay positive for the ODE.
            std::size_t rejected = 0;
            Eigen::MatrixXd x = mvn_sample_positive(
                resolve_gaussian_law(config, out_dir, rho_override), n, seed,
                &rejected);
            if (rejected > 0)
                std::fprintf(stderr,
                             "note: %zu nonpositive parameter draws rejected\n",
                             rejected);
            return x;
        }
    }
    throw std::runtime_error("sample_inputs: unhandled law type");
}

Eigen::VectorXd evaluate_scalar_model(const ExperimentConfig& config,
                                      const Eigen::MatrixXd& x) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    const std::size_t p = static_cast<std::size_t>(x.cols());
    threading::parallel_for(n, [&](std::size_t r) {
        const Eigen::Index i = static_cast<Eigen::Index>(r);
        const Eigen::VectorXd row = x.row(i);
        const std::span<const double> xs(row.data(), p);
        switch (config.model) {
            case ModelId::ishigami:
                y[i] = ishigami(xs, config.ishigami_a, config.ishigami_b);
                break;
            case ModelId::portfolio:
                y[i] = portfolio(xs);
                break;
            default:
                throw std::runtime_error("evaluate_scalar_model: not a scalar model");
        }
    });
    return y;
}

std::vector<Trajectory> evaluate_cholera(const ExperimentConfig& config,
                                         const Eigen::MatrixXd& x) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    std::vector<Trajectory> out(n);
    threading::parallel_for(n, [&](std::size_t r) {
        const CholeraParams p =
            CholeraParams::from_vector(x.row(static_cast<Eigen::Index>(r)));
        out[r] = cholera_infected(p, config.integrator);
    });
    return out;
}

}  // namespace

StudyData prepare_study(const ExperimentConfig& config, std::size_t n,
                        std::uint64_t seed, const std::string& out_dir,
                        const double* rho_override) {
    StudyData data;
    data.input_names = model_input_names(config);

    if (config.model == ModelId::external_samples) {
        data.x = read_csv_matrix(config.external_x_csv, &data.input_names);
        std::vector<std::string> ignored;
        const Eigen::MatrixXd y = read_csv_matrix(config.external_y_csv, &ignored);
        if (y.rows() != data.x.rows())
            throw std::runtime_error("external samples: x/y row count mismatch");
        data.scalar_y = y.col(0);
    } else {
        data.x = sample_inputs(config, n, seed, out_dir, rho_override);
        if (config.model == ModelId::cholera) {
            data.function_valued = true;
            data.trajectory_y = evaluate_cholera(config, data.x);
        } else {
            data.scalar_y = evaluate_scalar_model(config, data.x);
        }
    }

    data.ensemble = ensemble_from_columns(data.x, data.input_names);

    if (data.function_valued) {
        const bool cache = config.trajectory_cache &&
                           data.trajectory_y.size() <= 4096;
        data.output_bandwidth = median_trajectory_bandwidth(data.trajectory_y);
        data.y_source = std::make_shared<TrajectoryGaussianSource>(
            data.trajectory_y, data.output_bandwidth, cache);
    } else {
        data.output_bandwidth = median_bandwidth(data.scalar_y);
        data.y_source = std::make_shared<ScalarGaussianSource>(
            data.scalar_y, data.output_bandwidth);
    }
    return data;
}

void write_report_csv(const SensitivityReport& report,
                      const std::vector<std::string>& input_names,
                      const std::string& path, const std::string& stamp) {
    std::ofstream out = open_out(path);
    out << stamp << '\n';
    out << "subset,inputs,hsic,total_index,dcorr\n";
    for (const SubsetResult& e : report.entries) {
        std::string names;
        for (std::size_t i : e.subset.indices) {
            if (!names.empty()) names += '+';
            names += input_names[i];
        }
        out << e.subset.label() << ',' << names << ',' << fmt(e.hsic.value) << ','
            << fmt(e.total_index) << ',' << fmt(e.dcorr) << '\n';
    }
}

void write_report_json(const SensitivityReport& report,
                       const ExperimentConfig& config,
                       const std::vector<std::string>& input_names,
                       const std::string& path, const std::string& stamp) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["tool_version"] = kVersion;
    j["config_hash"] = config_hash_hex(config);
    j["name"] = config.name;
    j["n"] = report.n;
    j["seed"] = report.seed;
    j["input_names"] = input_names;
    j["input_bandwidths"] = report.input_bandwidths;
    j["output_bandwidth"] = report.output_bandwidth;
    j["hsic_full"] = {{"raw", report.full.raw}, {"value", report.full.value}};
    j["hsic_yy"] = report.hsic_yy;
    j["denominator_guard"] = hsic_denominator_guard(report.n);
    nlohmann::json entries = nlohmann::json::array();
    for (const SubsetResult& e : report.entries) {
        nlohmann::json je;
        nlohmann::json subset = nlohmann::json::array();
        for (std::size_t i : e.subset.indices) subset.push_back(i + 1);
        je["subset"] = std::move(subset);
        je["label"] = e.subset.label();
        je["hsic"] = e.hsic.value;
        je["hsic_raw"] = e.hsic.raw;
        je["total_index"] = e.total_index;
        je["total_index_raw"] = e.total_index_raw;
        je["dcorr"] = e.dcorr;
        entries.push_back(std::move(je));
    }
    j["entries"] = std::move(entries);
    (void)stamp;
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

std::vector<std::string> run_indices(const ExperimentConfig& config,
                                     const std::string& out_dir) {
    const StudyData data = prepare_study(config, config.n, config.seed, out_dir);

    std::vector<SubsetSpec> subsets;
    for (const auto& s : config.subsets) subsets.push_back(SubsetSpec(s));

    ReportOptions opts;
    opts.with_dcorr = config.wants(IndexKind::dcorr);
    opts.seed = config.seed;
    opts.output_bandwidth = data.output_bandwidth;
    const SensitivityReport report =
        full_report(data.ensemble, *data.y_source, subsets, opts);

    const std::string stamp = stamp_line(config);
    std::vector<std::string> files;
    const std::string csv = out_path(out_dir, config.out_prefix + "_indices.csv");
    write_report_csv(report, data.input_names, csv, stamp);
    files.push_back(csv);
    const std::string json = out_path(out_dir, config.out_prefix + "_report.json");
    write_report_json(report, config, data.input_names, json, stamp);
    files.push_back(json);

    if (config.wants(IndexKind::sobol) && config.model != ModelId::external_samples) {
        const UniformBoxLaw law = resolve_uniform_law(config, out_dir);
        ScalarModelFn model;
        if (config.model == ModelId::ishigami) {
            const double a = config.ishigami_a, b = config.ishigami_b;
            model = [a, b](std::span<const double> x) { return ishigami(x, a, b); };
        } else if (config.model == ModelId::portfolio) {
            model = [](std::span<const double> x) { return portfolio(x); };
        } else {
            throw std::runtime_error(
                "sobol index kind is only wired to scalar models");
        }
        const SobolTotals totals = jansen_total(model, law, config.sobol_n, config.seed);
        const std::string sobol_csv = out_path(out_dir, config.out_prefix + "_sobol.csv");
        std::ofstream out = open_out(sobol_csv);
        out << stamp << '\n';
        out << "input,total_sobol,n,variance_hat\n";
        for (std::size_t i = 0; i < totals.total.size(); ++i)
            out << data.input_names[i] << ',' << fmt(totals.total[i]) << ','
                << totals.n << ',' << fmt(totals.variance_hat) << '\n';
        files.push_back(sobol_csv);
    }
    return files;
}

std::vector<std::string> run_convergence(const ExperimentConfig& config,
                                         const std::string& out_dir) {
    if (config.convergence.n_grid.empty() || config.convergence.seeds.empty())
        throw std::runtime_error("run_convergence: config lacks convergence.n_grid/seeds");

    const std::string path =
        out_path(out_dir, config.out_prefix + "_convergence.csv");
    std::ofstream out = open_out(path);
    out << stamp_line(config) << '\n';
    out << "n,seed,input,total_index\n";

    for (std::size_t n : config.convergence.n_grid) {
        for (std::uint64_t seed : config.convergence.seeds) {
            const StudyData data = prepare_study(config, n, seed, out_dir);
            ReportOptions opts;
            opts.with_dcorr = false;
            opts.seed = seed;
            opts.output_bandwidth = data.output_bandwidth;
            const SensitivityReport report =
                full_report(data.ensemble, *data.y_source, {}, opts);
            for (std::size_t i = 0; i < report.entries.size(); ++i)
                out << n << ',' << seed << ',' << data.input_names[i] << ','
                    << fmt(report.entries[i].total_index) << '\n';
        }
    }
    return {path};
}

std::vector<std::string> run_rho_sweep(const ExperimentConfig& config,
                                       const std::string& out_dir) {
    if (config.model != ModelId::portfolio)
        throw std::runtime_error("run_rho_sweep: requires the portfolio model");
    std::vector<double> grid = config.sweep.rho_grid;
    if (grid.empty())
        for (std::size_t j = 0; j <= 20; ++j) grid.push_back(j / 20.0);

    const std::string path = out_path(out_dir, config.out_prefix + "_rho_sweep.csv");
    std::ofstream out = open_out(path);
    out << stamp_line(config) << '\n';
    out << "rho,input,total_index,dcorr\n";

    for (double rho : grid) {
        const StudyData data =
            prepare_study(config, config.n, config.seed, out_dir, &rho);
        ReportOptions opts;
        opts.with_dcorr = true;
        opts.seed = config.seed;
        opts.output_bandwidth = data.output_bandwidth;
        const SensitivityReport report =
            full_report(data.ensemble, *data.y_source, {}, opts);
        for (std::size_t i = 0; i < report.entries.size(); ++i)
            out << fmt(rho) << ',' << data.input_names[i] << ','
                << fmt(report.entries[i].total_index) << ','
                << fmt(report.entries[i].dcorr) << '\n';
    }
    return {path};
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        // Consume whole tie groups before measuring, so equal values never
        // register a spurious CDF gap.
        const double v = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= v) ++ia;
        while (ib < b.size() && b[ib] <= v) ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na -
                                 static_cast<double>(ib) / nb));
    }
    return d;
}

namespace {

// One reduction arm for scalar models: full joint draw, or the reduced law
// with one coordinate pinned.
Eigen::VectorXd portfolio_arm(const GaussianLaw& law, std::size_t n,
                              std::uint64_t seed,
                              const std::optional<std::size_t>& fix_index,
                              double fix_value, ReductionMode mode) {
    Eigen::MatrixXd x;
    if (!fix_index) {
        x = mvn_sample(law, n, seed);
    } else if (mode == ReductionMode::replacement) {
        x = fix_coordinate(mvn_sample(law, n, seed), *fix_index, fix_value);
    } else {
        x = conditional_fixed_sample(law, *fix_index, fix_value, n, seed);
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (Eigen::Index r = 0; r < y.size(); ++r) {
        const Eigen::VectorXd row = x.row(r);
        y[r] = portfolio(std::span<const double>(row.data(), 5));
    }
    return y;
}

Eigen::VectorXd mean_curve(const std::vector<Trajectory>& trajectories) {
    const Eigen::Index m = trajectories.front().times.size();
    Eigen::VectorXd mean(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        KahanAccumulator acc;
        for (const Trajectory& t : trajectories) acc.add(t.values(k, 0));
        mean[k] = acc.sum / static_cast<double>(trajectories.size());
    }
    return mean;
}

}  // namespace

std::vector<std::string> run_reduction(const ExperimentConfig& config,
                                       const std::string& out_dir) {
    if (config.reduction.cases.empty())
        throw std::runtime_error("run_reduction: config lacks reduction.cases");
    const std::string stamp = stamp_line(config);
    const std::string csv_path =
        out_path(out_dir, config.out_prefix + "_reduction.csv");
    const std::string json_path =
        out_path(out_dir, config.out_prefix + "_reduction.json");
    std::ofstream csv = open_out(csv_path);
    csv << stamp << '\n';

    nlohmann::json summary;
    summary["schema_version"] = 1;
    summary["tool_version"] = kVersion;
    summary["config_hash"] = config_hash_hex(config);
    summary["n_per_arm"] = config.reduction.n;
    nlohmann::json case_list = nlohmann::json::array();

    const std::size_t n = config.reduction.n;

    if (config.reduction.metric == ReductionMetric::ks) {
        if (config.model != ModelId::portfolio)
            throw std::runtime_error("run_reduction: ks metric is wired to portfolio");
        csv << "case,bin_lo,bin_hi,count_full,count_reduced\n";
        for (std::size_t c = 0; c < config.reduction.cases.size(); ++c) {
            const ReductionCase& rc = config.reduction.cases[c];
            const double rho = rc.rho.value_or(config.law.rho);
            const GaussianLaw law =
                make_gaussian_law(Eigen::VectorXd::Zero(5), portfolio_sigma(rho));
            const double value = rc.value.value_or(law.mean[
                static_cast<Eigen::Index>(rc.fix_index)]);

            const Eigen::VectorXd y_full =
                portfolio_arm(law, n, derive_seed(config.seed, c, 1), std::nullopt,
                              0.0, rc.mode);
            const Eigen::VectorXd y_red =
                portfolio_arm(law, n, derive_seed(config.seed, c, 2), rc.fix_index,
                              value, rc.mode);

            std::vector<double> full(y_full.data(), y_full.data() + y_full.size());
            std::vector<double> red(y_red.data(), y_red.data() + y_red.size());
            const double ks = ks_statistic(full, red);

            // Shared-range histogram for the comparison plot.
            const double lo = std::min(y_full.minCoeff(), y_red.minCoeff());
            const double hi = std::max(y_full.maxCoeff(), y_red.maxCoeff());
            const std::size_t bins = config.reduction.bins;
            std::vector<std::size_t> count_full(bins, 0), count_red(bins, 0);
            const double width = (hi - lo) / static_cast<double>(bins);
            auto bucket = [&](double v) {
                const auto k = static_cast<std::ptrdiff_t>((v - lo) / width);
                return static_cast<std::size_t>(
                    std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(bins) - 1));
            };
            for (double v : full) ++count_full[bucket(v)];
            for (double v : red) ++count_red[bucket(v)];
            for (std::size_t k = 0; k < bins; ++k)
                csv << rc.label << ',' << fmt(lo + width * static_cast<double>(k))
                    << ',' << fmt(lo + width * static_cast<double>(k + 1)) << ','
                    << count_full[k] << ',' << count_red[k] << '\n';

            nlohmann::json jc;
            jc["label"] = rc.label;
            jc["rho"] = rho;
            jc["fix_index"] = rc.fix_index + 1;
            jc["value"] = value;
            jc["mode"] = rc.mode == ReductionMode::replacement ? "replacement"
                                                               : "conditional";
            jc["ks"] = ks;
            jc["mean_full"] = y_full.mean();
            jc["mean_reduced"] = y_red.mean();
            jc["var_full"] =
                (y_full.array() - y_full.mean()).square().sum() / (n - 1.0);
            jc["var_reduced"] =
                (y_red.array() - y_red.mean()).square().sum() / (n - 1.0);
            case_list.push_back(std::move(jc));
        }
    } else {
        if (config.model != ModelId::cholera)
            throw std::runtime_error(
                "run_reduction: mean-curve metric is wired to cholera");
        csv << "case,time,mean_full,mean_reduced,rel_error\n";
        const GaussianLaw law = resolve_gaussian_law(config, out_dir, nullptr);
        for (std::size_t c = 0; c < config.reduction.cases.size(); ++c) {
            const ReductionCase& rc = config.reduction.cases[c];
            const double value = rc.value.value_or(law.mean[
                static_cast<Eigen::Index>(rc.fix_index)]);

            Eigen::MatrixXd x_full =
                mvn_sample_positive(law, n, derive_seed(config.seed, c, 1));
            Eigen::MatrixXd x_red;
            if (rc.mode == ReductionMode::replacement) {
                x_red = fix_coordinate(
                    mvn_sample_positive(law, n, derive_seed(config.seed, c, 2)),
                    rc.fix_index, value);
            } else {
                x_red = conditional_fixed_sample(law, rc.fix_index, value, n,
                                                 derive_seed(config.seed, c, 2));
            }

            const std::vector<Trajectory> t_full = evaluate_cholera(config, x_full);
            const std::vector<Trajectory> t_red = evaluate_cholera(config, x_red);
            const Eigen::VectorXd m_full = mean_curve(t_full);
            const Eigen::VectorXd m_red = mean_curve(t_red);
            const double peak = m_full.cwiseAbs().maxCoeff();
            const Eigen::VectorXd rel =
                (m_full - m_red).cwiseAbs() / std::max(peak, 1e-300);

            const Eigen::VectorXd& times = t_full.front().times;
            for (Eigen::Index k = 0; k < times.size(); ++k)
                csv << rc.label << ',' << fmt(times[k]) << ',' << fmt(m_full[k])
                    << ',' << fmt(m_red[k]) << ',' << fmt(rel[k]) << '\n';

            nlohmann::json jc;
            jc["label"] = rc.label;
            jc["fix_index"] = rc.fix_index + 1;
            jc["fix_name"] = CholeraParams::names()[rc.fix_index];
            jc["value"] = value;
            jc["mode"] = rc.mode == ReductionMode::replacement ? "replacement"
                                                               : "conditional";
            jc["max_rel_error"] = rel.maxCoeff();
            case_list.push_back(std::move(jc));
        }
    }

    summary["cases"] = std::move(case_list);
    std::ofstream js = open_out(json_path);
    js << summary.dump(2) << '\n';
    return {csv_path, json_path};
}

std::vector<std::string> run_calibrate(const ExperimentConfig& config,
                                       const std::string& out_dir) {
    if (config.model != ModelId::cholera)
        throw std::runtime_error("run_calibrate: requires the cholera model");

    CalibrationOptions opts = config.calibration.options;
    const CholeraParams theta_star = CholeraParams::nominal();
    const Eigen::VectorXd times = observation_times(opts);

    // Noise level: a fraction of the nominal peak unless pinned explicitly.
    double noise_sigma = config.calibration.noise_sigma_override;
    if (noise_sigma < 0.0) {
        const Eigen::VectorXd clean = cholera_observables(theta_star, times, opts);
        noise_sigma = opts.noise_frac_of_peak * clean.cwiseAbs().maxCoeff();
    }

    const Eigen::VectorXd data =
        synth_data(theta_star, times, noise_sigma, config.seed, opts);
    const CholeraParams theta0 = CholeraParams::from_vector(
        theta_star.to_vector() * opts.theta0_scale);

    FitResult fit = gauss_newton_fit(data, times, theta0, opts);
    fit.noise_sigma = noise_sigma;
    fit.seed = config.seed;
    if (!fit.converged)
        throw std::runtime_error(
            "run_calibrate: Gauss-Newton did not converge after " +
            std::to_string(fit.iterations) + " iterations (RSS " +
            std::to_string(fit.rss) + ")");

    const std::string fit_path = out_path(out_dir, config.calibration.fit_file);
    write_fit_json(fit, fit_path, config_hash_hex(config));
    const std::string corr_path =
        out_path(out_dir, config.out_prefix + "_correlation.csv");
    write_correlation_csv(fit, corr_path);
    return {fit_path, corr_path};
}

std::vector<std::string> run_bench(const ExperimentConfig& config,
                                   const std::string& out_dir) {
    const std::string path = out_path(out_dir, config.out_prefix + "_bench.csv");
    std::ofstream out = open_out(path);
    out << stamp_line(config) << '\n';
    out << "n,streaming_seconds,dense_seconds,streaming_value,dense_value,"
           "dense_bytes_equivalent\n";

    for (std::size_t n : config.bench.n_grid) {
        // Scalar benchmark problem: one input block, y = sin(2 pi x) + x.
        Rng rng(derive_seed(config.seed, n));
        Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 1);
        for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, 0) = rng.uniform01();
        Eigen::VectorXd y(x.rows());
        for (Eigen::Index r = 0; r < y.size(); ++r)
            y[r] = std::sin(2.0 * 3.14159265358979323846 * x(r, 0)) + x(r, 0);

        InputEnsemble ensemble = ensemble_from_columns(x, {"x1"});
        ScalarGaussianSource y_source(y, median_bandwidth(y));
        AugmentedProductSource k_source(ensemble.blocks, ensemble.stats,
                                        SubsetSpec({0}));

        double best_stream = 0.0, stream_value = 0.0;
        for (std::size_t rep = 0; rep < config.bench.repeats; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            stream_value = hsic_streaming_value(k_source, y_source);
            const std::chrono::duration<double> dt =
                std::chrono::steady_clock::now() - start;
            if (rep == 0 || dt.count() < best_stream) best_stream = dt.count();
        }

        double best_dense = -1.0, dense_value = 0.0;
        if (n <= config.bench.dense_limit) {
            Eigen::MatrixXd K(x.rows(), x.rows()), L(x.rows(), x.rows());
            std::vector<double> col(n);
            for (std::size_t j = 0; j < n; ++j) {
                k_source.column(j, col);
                for (std::size_t s = 0; s < n; ++s)
                    K(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = col[s];
                y_source.column(j, col);
                for (std::size_t s = 0; s < n; ++s)
                    L(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = col[s];
            }
            for (std::size_t rep = 0; rep < config.bench.repeats; ++rep) {
                const auto start = std::chrono::steady_clock::now();
                dense_value = hsic_dense(K, L);
                const std::chrono::duration<double> dt =
                    std::chrono::steady_clock::now() - start;
                if (rep == 0 || dt.count() < best_dense) best_dense = dt.count();
            }
        }

        out << n << ',' << fmt(best_stream) << ','
            << (best_dense >= 0.0 ? fmt(best_dense) : std::string("")) << ','
            << fmt(stream_value) << ','
            << (best_dense >= 0.0 ? fmt(dense_value) : std::string("")) << ','
            << fmt(static_cast<double>(n) * static_cast<double>(n) * 8.0) << '\n';
    }
    return {path};
}

}  // namespace gsa
