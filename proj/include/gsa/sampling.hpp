#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace gsa {

// Multivariate normal N(mean, cov). cov must be symmetric to 1e-12 and
// PSD up to -1e-10 * ||cov|| (checked at construction through
// make_gaussian_law).
struct GaussianLaw {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

GaussianLaw make_gaussian_law(Eigen::VectorXd mean, Eigen::MatrixXd cov);

// Componentwise-independent uniform law on a box; lower < upper holds
// componentwise.
struct UniformBoxLaw {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
};

UniformBoxLaw make_uniform_box(Eigen::VectorXd lower, Eigen::VectorXd upper);

// n i.i.d. rows from the law. Factorization: Cholesky when the covariance
// is numerically positive definite, otherwise eigendecomposition with
// negative eigenvalues clipped at zero (handles singular covariances such
// as fully correlated portfolios). Throws when an eigenvalue is below
// -1e-8 * ||cov||. Deterministic per seed: one generator stream fills the
// standard-normal matrix row-major.
Eigen::MatrixXd mvn_sample(const GaussianLaw& law, std::size_t n,
                           std::uint64_t seed);

// As mvn_sample, but rows with any nonpositive coordinate are rejected and
// redrawn from the same stream; rejected_out (optional) reports how many
// rows were discarded.
Eigen::MatrixXd mvn_sample_positive(const GaussianLaw& law, std::size_t n,
                                    std::uint64_t seed,
                                    std::size_t* rejected_out = nullptr);

Eigen::MatrixXd uniform_sample(const UniformBoxLaw& law, std::size_t n,
                               std::uint64_t seed);

// Copy of samples with column `index` set to `value` everywhere; all other
// columns are preserved bitwise (marginal-preserving reduction mode).
Eigen::MatrixXd fix_coordinate(const Eigen::MatrixXd& samples, std::size_t index,
                               double value);

// Conditional-Gaussian reduction mode: draws the remaining coordinates
// from the law conditioned on X_index = value and reassembles full rows
// with column `index` equal to `value`.
Eigen::MatrixXd conditional_fixed_sample(const GaussianLaw& law,
                                         std::size_t index, double value,
                                         std::size_t n, std::uint64_t seed);

struct Moments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;   // unbiased (n - 1 divisor)
    Eigen::MatrixXd corr;  // unit diagonal; zero rows/cols where flagged
    std::vector<std::size_t> zero_variance;  // columns with no spread
};

Moments empirical_moments(const Eigen::MatrixXd& samples);

}  // namespace gsa
