#include "gsa/hsic.hpp"

#include <cmath>
#include <stdexcept>

#include "gsa/numeric.hpp"
#include "gsa/threading.hpp"

namespace gsa {

double hsic_dense(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L) {
    const Eigen::Index n = K.rows();
    if (K.cols() != n || L.rows() != n || L.cols() != n)
        throw std::invalid_argument("hsic_dense: dimension mismatch");
    const double scaleK = std::max(1.0, K.cwiseAbs().maxCoeff());
    const double scaleL = std::max(1.0, L.cwiseAbs().maxCoeff());
    if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scaleK)
        throw std::invalid_argument("hsic_dense: K is not symmetric");
    if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scaleL)
        throw std::invalid_argument("hsic_dense: L is not symmetric");

    const double nn = static_cast<double>(n);
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) -
                        Eigen::MatrixXd::Constant(n, n, 1.0 / nn);
    const Eigen::MatrixXd KH = K * H;
    const Eigen::MatrixXd LH = L * H;
    return (KH * LH).trace() / (nn * nn);
}

double hsic_streaming_value(const GramColumnSource& colK,
                            const GramColumnSource& colL) {
    const std::size_t n = colK.size();
    if (colL.size() != n)
        throw std::invalid_argument("hsic_streaming: source sizes differ");
    if (n < 2) throw std::invalid_argument("hsic_streaming: need n >= 2");

    const bool same = (&colK == &colL);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

    // Per-column scalars; filled independently, reduced in index order.
    std::vector<double> s(n), u(n), v(n);

    threading::parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> a(n), b(same ? 0 : n);
        for (std::size_t i = begin; i < end; ++i) {
            try {
                colK.column(i, a);
                if (!same) colL.column(i, b);
            } catch (const std::exception& e) {
                throw std::runtime_error("hsic_streaming: column source failed at column " +
                                         std::to_string(i) + ": " + e.what());
            }
            const std::vector<double>& bb = same ? a : b;
            KahanAccumulator dot, sum_a, sum_b;
            for (std::size_t t = 0; t < n; ++t) {
                dot.add(a[t] * bb[t]);
                sum_a.add(a[t]);
                if (!same) sum_b.add(bb[t]);
            }
            s[i] = dot.sum;
            u[i] = sum_a.sum * inv_sqrt_n;
            v[i] = same ? u[i] : sum_b.sum * inv_sqrt_n;
        }
    });

    KahanAccumulator S, uv, uz, vz;
    for (std::size_t i = 0; i < n; ++i) {
        S.add(s[i]);
        uv.add(u[i] * v[i]);
        uz.add(u[i]);
        vz.add(v[i]);
    }
    const double u_dot_z = uz.sum * inv_sqrt_n;
    const double v_dot_z = vz.sum * inv_sqrt_n;
    const double nn = static_cast<double>(n);
    return (S.sum - 2.0 * uv.sum + u_dot_z * v_dot_z) / (nn * nn);
}

HsicEstimate hsic_streaming(const GramColumnSource& colK,
                            const GramColumnSource& colL) {
    HsicEstimate est;
    est.n = colK.size();
    est.raw = hsic_streaming_value(colK, colL);
    est.value = est.raw < 0.0 ? 0.0 : est.raw;
    return est;
}

HsicEstimate hsic_subset(const InputEnsemble& inputs,
                         const GramColumnSource& y_source,
                         const SubsetSpec& subset) {
    subset.validate(inputs.block_count());
    HsicEstimate est;
    est.n = inputs.n;
    est.subset = subset;
    for (std::size_t i : subset.indices)
        est.bandwidths.push_back(inputs.blocks[i].bandwidth);
    if (subset.empty()) {
        // K_0 is the all-ones matrix; H annihilates it, so the estimate is
        // exactly zero.
        est.raw = 0.0;
        est.value = 0.0;
        return est;
    }
    AugmentedProductSource k_source(inputs.blocks, inputs.stats, subset);
    est.raw = hsic_streaming_value(k_source, y_source);
    est.value = est.raw < 0.0 ? 0.0 : est.raw;
    return est;
}

namespace {

double full_set_hsic_checked(const InputEnsemble& inputs,
                             const GramColumnSource& y_source,
                             HsicEstimate* full_out) {
    std::vector<std::size_t> all(inputs.block_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    HsicEstimate full = hsic_subset(inputs, y_source, SubsetSpec(std::move(all)));
    if (full.value <= hsic_denominator_guard(inputs.n))
        throw std::runtime_error(
            "total_hsic_index: output independent of all inputs at this sample size "
            "(full-set HSIC below guard)");
    if (full_out) *full_out = full;
    return full.value;
}

}  // namespace

double total_hsic_index(const InputEnsemble& inputs,
                        const GramColumnSource& y_source,
                        const SubsetSpec& subset, double* raw_out) {
    subset.validate(inputs.block_count());
    const double denom = full_set_hsic_checked(inputs, y_source, nullptr);
    const SubsetSpec rest = subset.complement(inputs.block_count());
    const HsicEstimate excluded = hsic_subset(inputs, y_source, rest);
    const double raw = 1.0 - excluded.raw / denom;
    if (raw_out) *raw_out = raw;
    return std::clamp(raw, 0.0, 1.0);
}

double distance_correlation(const InputEnsemble& inputs,
                            const GramColumnSource& y_source,
                            const SubsetSpec& subset) {
    subset.validate(inputs.block_count());
    if (subset.empty())
        throw std::invalid_argument("distance_correlation: empty subset");
    AugmentedProductSource k_source(inputs.blocks, inputs.stats, subset);
    const double cross = hsic_streaming_value(k_source, y_source);
    const double self_x = hsic_streaming_value(k_source, k_source);
    const double self_y = hsic_streaming_value(y_source, y_source);
    const double guard = hsic_denominator_guard(inputs.n);
    if (self_x <= guard || self_y <= guard)
        throw std::runtime_error("distance_correlation: degenerate self-HSIC term");
    return cross / std::sqrt(self_x * self_y);
}

SensitivityReport full_report(const InputEnsemble& inputs,
                              const GramColumnSource& y_source,
                              std::vector<SubsetSpec> subsets,
                              const ReportOptions& opts) {
    if (subsets.empty()) {
        for (std::size_t i = 0; i < inputs.block_count(); ++i)
            subsets.push_back(SubsetSpec({i}));
    }
    for (const SubsetSpec& s : subsets) s.validate(inputs.block_count());
    for (std::size_t a = 0; a < subsets.size(); ++a)
        for (std::size_t b = a + 1; b < subsets.size(); ++b)
            if (subsets[a].indices == subsets[b].indices)
                throw std::invalid_argument(
                    "full_report: duplicate subset " + subsets[a].label());

    SensitivityReport report;
    report.seed = opts.seed;
    report.n = inputs.n;
    report.input_bandwidths = inputs.bandwidths();
    report.output_bandwidth = opts.output_bandwidth;

    const double denom = full_set_hsic_checked(inputs, y_source, &report.full);
    if (opts.with_dcorr)
        report.hsic_yy = hsic_streaming_value(y_source, y_source);

    const std::size_t p = inputs.block_count();
    for (SubsetSpec& subset : subsets) {
        SubsetResult entry;
        entry.hsic = hsic_subset(inputs, y_source, subset);
        const HsicEstimate excluded =
            hsic_subset(inputs, y_source, subset.complement(p));
        entry.total_index_raw = 1.0 - excluded.raw / denom;
        entry.total_index = std::clamp(entry.total_index_raw, 0.0, 1.0);
        if (opts.with_dcorr && !subset.empty()) {
            AugmentedProductSource k_source(inputs.blocks, inputs.stats, subset);
            const double self_x = hsic_streaming_value(k_source, k_source);
            const double guard = hsic_denominator_guard(inputs.n);
            if (self_x <= guard || report.hsic_yy <= guard)
                throw std::runtime_error(
                    "full_report: degenerate self-HSIC term for dcorr");
            entry.dcorr = entry.hsic.raw / std::sqrt(self_x * report.hsic_yy);
        }
        entry.subset = std::move(subset);
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace gsa
