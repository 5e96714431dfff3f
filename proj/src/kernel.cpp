#include "gsa/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gsa/numeric.hpp"
#include "gsa/rng.hpp"
#include "gsa/threading.hpp"

namespace gsa {

void validate_block(const ParameterBlock& block) {
    if (block.n() < 2)
        throw std::invalid_argument("block '" + block.name + "': need n >= 2");
    if (!(block.bandwidth > 0.0))
        throw std::invalid_argument("block '" + block.name +
                                    "': bandwidth must be positive");
    if (!block.samples.allFinite())
        throw std::invalid_argument("block '" + block.name +
                                    "': non-finite sample entries");
}

ParameterBlock make_block(std::string name, Eigen::MatrixXd samples) {
    ParameterBlock block;
    block.name = std::move(name);
    block.samples = std::move(samples);
    if (!block.samples.allFinite())
        throw std::invalid_argument("block '" + block.name +
                                    "': non-finite sample entries");
    block.bandwidth = median_bandwidth(block.samples);
    validate_block(block);
    return block;
}

SubsetSpec::SubsetSpec(std::vector<std::size_t> idx) : indices(std::move(idx)) {
    std::sort(indices.begin(), indices.end());
    if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
        throw std::invalid_argument("SubsetSpec: duplicate indices");
}

bool SubsetSpec::contains(std::size_t i) const {
    return std::binary_search(indices.begin(), indices.end(), i);
}

void SubsetSpec::validate(std::size_t block_count) const {
    for (std::size_t i : indices)
        if (i >= block_count)
            throw std::invalid_argument("SubsetSpec: index out of range");
}

SubsetSpec SubsetSpec::complement(std::size_t block_count) const {
    validate(block_count);
    std::vector<std::size_t> rest;
    rest.reserve(block_count - indices.size());
    for (std::size_t i = 0; i < block_count; ++i)
        if (!contains(i)) rest.push_back(i);
    return SubsetSpec(std::move(rest));
}

std::string SubsetSpec::label() const {
    std::string s;
    for (std::size_t i : indices) {
        if (!s.empty()) s += '+';
        s += std::to_string(i + 1);
    }
    return s.empty() ? "-" : s;
}

double gaussian_eval(std::span<const double> x, std::span<const double> y,
                     double sigma) {
    if (x.size() != y.size())
        throw std::invalid_argument("gaussian_eval: dimension mismatch");
    if (!(sigma > 0.0))
        throw std::invalid_argument("gaussian_eval: sigma must be positive");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
    }
    return std::exp(-d2 / (2.0 * sigma * sigma));
}

double median_of_pairwise(
    const std::function<double(std::size_t, std::size_t)>& dist, std::size_t n) {
    if (n < 2)
        throw std::invalid_argument("median_of_pairwise: need n >= 2");

    std::vector<std::size_t> idx;
    if (n > kMedianSubsampleLimit) {
        // Uniform subsample without replacement (partial Fisher-Yates with a
        // fixed internal seed): the bandwidth stays a pure function of the
        // sample set.
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        Rng rng(0x6D65646961 /* "media" */);
        for (std::size_t i = 0; i < kMedianSubsampleLimit; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
            std::swap(all[i], all[j]);
        }
        all.resize(kMedianSubsampleLimit);
        std::sort(all.begin(), all.end());
        idx = std::move(all);
    } else {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    }

    const std::size_t m = idx.size();
    std::vector<double> d;
    d.reserve(m * (m - 1) / 2);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) d.push_back(dist(idx[a], idx[b]));

    const std::size_t count = d.size();
    const std::size_t mid = count / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid),
                     d.end());
    double median = d[mid];
    if (count % 2 == 0) {
        const double below =
            *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + below);
    }
    if (!(median > 0.0))
        throw std::runtime_error(
            "median_of_pairwise: degenerate sample (median pairwise distance is zero)");
    return median;
}

double median_bandwidth(const Eigen::MatrixXd& samples) {
    const std::size_t n = static_cast<std::size_t>(samples.rows());
    return median_of_pairwise(
        [&samples](std::size_t i, std::size_t j) {
            return (samples.row(static_cast<Eigen::Index>(i)) -
                    samples.row(static_cast<Eigen::Index>(j)))
                .norm();
        },
        n);
}

void squared_distances_to_row(const Eigen::MatrixXd& samples, std::size_t j,
                              std::span<double> out) {
    const std::size_t n = static_cast<std::size_t>(samples.rows());
    const Eigen::Index cols = samples.cols();
    std::fill(out.begin(), out.end(), 0.0);
    for (Eigen::Index c = 0; c < cols; ++c) {
        const double* col = samples.col(c).data();
        const double xj = col[j];
        for (std::size_t s = 0; s < n; ++s) {
            const double d = col[s] - xj;
            out[s] += d * d;
        }
    }
}

namespace {

// Gaussian kernel column of one block: out[s] = k(x_s, x_j).
void block_kernel_column(const ParameterBlock& block, std::size_t j,
                         std::span<double> out) {
    squared_distances_to_row(block.samples, j, out);
    const double scale = -1.0 / (2.0 * block.bandwidth * block.bandwidth);
    for (double& v : out) v = std::exp(v * scale);
}

}  // namespace

CenteringStats centering_stats(const ParameterBlock& block) {
    validate_block(block);
    const std::size_t n = block.n();
    CenteringStats stats;
    stats.row_means.resize(static_cast<Eigen::Index>(n));

    // Row sums are independent, so they parallelize; each row's own sum is a
    // fixed-order compensated reduction, which keeps the result deterministic.
    threading::parallel_chunks(n, [&](std::size_t begin, std::size_t end) {
        std::vector<double> col(n);
        for (std::size_t s = begin; s < end; ++s) {
            block_kernel_column(block, s, col);
            stats.row_means[static_cast<Eigen::Index>(s)] =
                kahan_sum(col) / static_cast<double>(n);
        }
    });

    KahanAccumulator grand;
    for (std::size_t s = 0; s < n; ++s)
        grand.add(stats.row_means[static_cast<Eigen::Index>(s)]);
    stats.grand_mean = grand.sum / static_cast<double>(n);
    return stats;
}

void augmented_subset_column(const std::vector<ParameterBlock>& blocks,
                             const std::vector<CenteringStats>& stats,
                             const SubsetSpec& subset, std::size_t j,
                             std::span<double> out) {
    if (blocks.size() != stats.size())
        throw std::invalid_argument(
            "augmented_subset_column: stats not aligned with blocks");
    subset.validate(blocks.size());
    const std::size_t n = out.size();
    if (j >= n)
        throw std::out_of_range("augmented_subset_column: column index out of range");

    std::fill(out.begin(), out.end(), 1.0);  // empty product
    if (subset.empty()) return;

    std::vector<double> col(n);
    for (std::size_t i : subset.indices) {
        const ParameterBlock& block = blocks[i];
        const CenteringStats& cs = stats[i];
        if (block.n() != n || static_cast<std::size_t>(cs.row_means.size()) != n)
            throw std::invalid_argument(
                "augmented_subset_column: block sample count mismatch");
        block_kernel_column(block, j, col);
        const double rj = cs.row_means[static_cast<Eigen::Index>(j)];
        const double g = cs.grand_mean;
        const double* r = cs.row_means.data();
        for (std::size_t s = 0; s < n; ++s)
            out[s] *= 1.0 + (col[s] - r[s] - rj + g);
    }
}

AugmentedProductSource::AugmentedProductSource(
    const std::vector<ParameterBlock>& blocks,
    const std::vector<CenteringStats>& stats, SubsetSpec subset)
    : blocks_(&blocks), stats_(&stats), subset_(std::move(subset)) {
    if (blocks.empty()) throw std::invalid_argument("AugmentedProductSource: no blocks");
    subset_.validate(blocks.size());
    n_ = blocks.front().n();
}

void AugmentedProductSource::column(std::size_t j, std::span<double> out) const {
    augmented_subset_column(*blocks_, *stats_, subset_, j, out);
}

ScalarGaussianSource::ScalarGaussianSource(Eigen::MatrixXd y_samples, double sigma)
    : y_(std::move(y_samples)), sigma_(sigma) {
    if (!(sigma_ > 0.0))
        throw std::invalid_argument("ScalarGaussianSource: sigma must be positive");
    if (!y_.allFinite())
        throw std::invalid_argument("ScalarGaussianSource: non-finite outputs");
}

void ScalarGaussianSource::column(std::size_t j, std::span<double> out) const {
    const std::size_t n = size();
    if (j >= n) throw std::out_of_range("ScalarGaussianSource: index out of range");
    if (out.size() != n)
        throw std::invalid_argument("ScalarGaussianSource: bad output span");
    squared_distances_to_row(y_, j, out);
    const double scale = -1.0 / (2.0 * sigma_ * sigma_);
    for (double& v : out) v = std::exp(v * scale);
}

TrajectoryGaussianSource::TrajectoryGaussianSource(
    std::vector<Trajectory> trajectories, double sigma, bool cache_distances)
    : trajectories_(std::move(trajectories)), sigma_(sigma) {
    if (trajectories_.size() < 2)
        throw std::invalid_argument("TrajectoryGaussianSource: need n >= 2");
    if (!(sigma_ > 0.0))
        throw std::invalid_argument("TrajectoryGaussianSource: sigma must be positive");
    const std::size_t n = trajectories_.size();
    for (const Trajectory& t : trajectories_) validate_trajectory(t);

    if (cache_distances) {
        distances_.setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        threading::parallel_for(n, [&](std::size_t i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = trajectory_distance(trajectories_[i], trajectories_[j]);
                distances_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
                distances_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
            }
        });
    }
}

void TrajectoryGaussianSource::column(std::size_t j, std::span<double> out) const {
    const std::size_t n = size();
    if (j >= n)
        throw std::out_of_range("TrajectoryGaussianSource: index out of range");
    const double scale = -1.0 / (2.0 * sigma_ * sigma_);
    if (distances_.size() > 0) {
        const double* dj = distances_.col(static_cast<Eigen::Index>(j)).data();
        for (std::size_t s = 0; s < n; ++s) out[s] = std::exp(dj[s] * dj[s] * scale);
    } else {
        for (std::size_t s = 0; s < n; ++s) {
            const double d = trajectory_distance(trajectories_[s], trajectories_[j]);
            out[s] = std::exp(d * d * scale);
        }
    }
}

void DenseSource::column(std::size_t j, std::span<double> out) const {
    if (j >= size()) throw std::out_of_range("DenseSource: index out of range");
    const double* col = m_.col(static_cast<Eigen::Index>(j)).data();
    std::copy(col, col + size(), out.begin());
}

double median_trajectory_bandwidth(const std::vector<Trajectory>& trajectories) {
    return median_of_pairwise(
        [&trajectories](std::size_t i, std::size_t j) {
            return trajectory_distance(trajectories[i], trajectories[j]);
        },
        trajectories.size());
}

std::vector<double> InputEnsemble::bandwidths() const {
    std::vector<double> out;
    out.reserve(blocks.size());
    for (const ParameterBlock& b : blocks) out.push_back(b.bandwidth);
    return out;
}

InputEnsemble make_ensemble(std::vector<ParameterBlock> blocks) {
    if (blocks.empty()) throw std::invalid_argument("make_ensemble: no blocks");
    InputEnsemble ens;
    ens.n = blocks.front().n();
    for (const ParameterBlock& b : blocks) {
        validate_block(b);
        if (b.n() != ens.n)
            throw std::invalid_argument("make_ensemble: inconsistent sample counts");
    }
    ens.blocks = std::move(blocks);
    ens.stats.reserve(ens.blocks.size());
    for (const ParameterBlock& b : ens.blocks) ens.stats.push_back(centering_stats(b));
    return ens;
}

InputEnsemble ensemble_from_columns(const Eigen::MatrixXd& samples,
                                    const std::vector<std::string>& names) {
    if (static_cast<std::size_t>(samples.cols()) != names.size())
        throw std::invalid_argument("ensemble_from_columns: name count mismatch");
    std::vector<ParameterBlock> blocks;
    blocks.reserve(names.size());
    for (std::size_t c = 0; c < names.size(); ++c)
        blocks.push_back(make_block(names[c], samples.col(static_cast<Eigen::Index>(c))));
    return make_ensemble(std::move(blocks));
}

}  // namespace gsa
