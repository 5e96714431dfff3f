#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gsa/ode.hpp"

namespace gsa {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// One input block X_i: n samples of a dim-dimensional quantity plus the
// Gaussian bandwidth used on that block.
struct ParameterBlock {
    std::string name;
    Eigen::MatrixXd samples;  // n x dim
    double bandwidth = 0.0;   // same units as the sample coordinates

    std::size_t n() const { return static_cast<std::size_t>(samples.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(samples.cols()); }
};

// Throws std::invalid_argument if n < 2, the bandwidth is nonpositive, or
// any sample entry is non-finite.
void validate_block(const ParameterBlock& block);

// Builds a block with its bandwidth from the median heuristic.
ParameterBlock make_block(std::string name, Eigen::MatrixXd samples);

// Empirical centering statistics of one block's Gram matrix:
//   row_means[s] = (1/n) sum_t k(x_s, x_t)
//   grand_mean   = (1/n^2) sum_{s,t} k(x_s, x_t)
// The centered entry is reconstructed as
//   Kc[s,t] = K[s,t] - row_means[s] - row_means[t] + grand_mean.
struct CenteringStats {
    Eigen::VectorXd row_means;
    double grand_mean = 0.0;
};

// Index subset A of the input blocks. Indices are 0-based internally,
// sorted and unique; the empty subset is allowed.
struct SubsetSpec {
    std::vector<std::size_t> indices;

    SubsetSpec() = default;
    explicit SubsetSpec(std::vector<std::size_t> idx);

    bool empty() const { return indices.empty(); }
    std::size_t size() const { return indices.size(); }
    bool contains(std::size_t i) const;

    // Throws if any index is >= block_count.
    void validate(std::size_t block_count) const;

    // Blocks not in this subset, out of {0, ..., block_count-1}.
    SubsetSpec complement(std::size_t block_count) const;

    // Label like "1+3" (1-based, matching the report convention).
    std::string label() const;
};

// ---------------------------------------------------------------------------
// Kernel operations
// ---------------------------------------------------------------------------

// Gaussian kernel exp(-||x - y||^2 / (2 sigma^2)).
double gaussian_eval(std::span<const double> x, std::span<const double> y,
                     double sigma);

// Median of all pairwise distances dist(i, j), i < j. For n above
// kMedianSubsampleLimit the median is taken over a uniformly subsampled
// set of that size (fixed internal seed, so the result is a pure function
// of the input). Even pair counts average the two middle values.
// Throws std::runtime_error if every pairwise distance is zero.
inline constexpr std::size_t kMedianSubsampleLimit = 5000;
double median_of_pairwise(
    const std::function<double(std::size_t, std::size_t)>& dist, std::size_t n);

// Median heuristic bandwidth: median of ||x_i - x_j|| over rows of samples.
double median_bandwidth(const Eigen::MatrixXd& samples);

// Single-pass reduction producing the centering statistics of a block.
// Parallelized over rows; each row's sum runs in fixed index order.
CenteringStats centering_stats(const ParameterBlock& block);

// Writes the squared Euclidean distances ||x_s - x_j||^2, s = 0..n-1, of
// row j against all rows into out.
void squared_distances_to_row(const Eigen::MatrixXd& samples, std::size_t j,
                              std::span<double> out);

// Column j of the augmented product-kernel Gram matrix
//   K_A[s,t] = prod_{i in A} (1 + Kc_i[s,t]),
// computed in O(n * |A|) time and O(n) auxiliary space. The empty subset
// yields the all-ones column (empty product).
void augmented_subset_column(const std::vector<ParameterBlock>& blocks,
                             const std::vector<CenteringStats>& stats,
                             const SubsetSpec& subset, std::size_t j,
                             std::span<double> out);

// ---------------------------------------------------------------------------
// Gram column sources
// ---------------------------------------------------------------------------

// Produces one column of an n x n Gram matrix on demand. Implementations
// are immutable after construction; column() may be called concurrently.
class GramColumnSource {
public:
    virtual ~GramColumnSource() = default;
    virtual std::size_t size() const = 0;
    virtual void column(std::size_t j, std::span<double> out) const = 0;
};

// Augmented product kernel over a subset of input blocks.
class AugmentedProductSource final : public GramColumnSource {
public:
    AugmentedProductSource(const std::vector<ParameterBlock>& blocks,
                           const std::vector<CenteringStats>& stats,
                           SubsetSpec subset);

    std::size_t size() const override { return n_; }
    void column(std::size_t j, std::span<double> out) const override;

private:
    const std::vector<ParameterBlock>* blocks_;
    const std::vector<CenteringStats>* stats_;
    SubsetSpec subset_;
    std::size_t n_;
};

// Plain Gaussian kernel on scalar or vector outputs.
class ScalarGaussianSource final : public GramColumnSource {
public:
    ScalarGaussianSource(Eigen::MatrixXd y_samples, double sigma);

    std::size_t size() const override {
        return static_cast<std::size_t>(y_.rows());
    }
    void column(std::size_t j, std::span<double> out) const override;
    double sigma() const { return sigma_; }

private:
    Eigen::MatrixXd y_;  // n x m
    double sigma_;
};

// Gaussian kernel on function-valued outputs with the trajectory L2
// distance. When cache_distances is set (sensible for n <= 4096) the
// pairwise distance matrix is computed once; otherwise each column
// recomputes its distances in O(n * grid) work.
class TrajectoryGaussianSource final : public GramColumnSource {
public:
    TrajectoryGaussianSource(std::vector<Trajectory> trajectories, double sigma,
                             bool cache_distances);

    std::size_t size() const override { return trajectories_.size(); }
    void column(std::size_t j, std::span<double> out) const override;
    double sigma() const { return sigma_; }
    bool cached() const { return distances_.size() > 0; }

private:
    std::vector<Trajectory> trajectories_;
    double sigma_;
    Eigen::MatrixXd distances_;  // empty unless cached
};

// Wraps an explicit matrix; test and bench helper.
class DenseSource final : public GramColumnSource {
public:
    explicit DenseSource(Eigen::MatrixXd m) : m_(std::move(m)) {}

    std::size_t size() const override {
        return static_cast<std::size_t>(m_.rows());
    }
    void column(std::size_t j, std::span<double> out) const override;

private:
    Eigen::MatrixXd m_;
};

// Median of pairwise trajectory L2 distances (shares the subsampling rule
// of median_of_pairwise).
double median_trajectory_bandwidth(const std::vector<Trajectory>& trajectories);

// ---------------------------------------------------------------------------
// Input ensemble
// ---------------------------------------------------------------------------

// Blocks plus their centering statistics, built once and shared by every
// subset evaluated on the same sample set.
struct InputEnsemble {
    std::vector<ParameterBlock> blocks;
    std::vector<CenteringStats> stats;
    std::size_t n = 0;

    std::size_t block_count() const { return blocks.size(); }
    std::vector<double> bandwidths() const;
};

InputEnsemble make_ensemble(std::vector<ParameterBlock> blocks);

// Convenience: one scalar block per column of samples, named names[i].
InputEnsemble ensemble_from_columns(const Eigen::MatrixXd& samples,
                                    const std::vector<std::string>& names);

}  // namespace gsa
