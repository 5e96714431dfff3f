#include "gsa/sampling.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "gsa/rng.hpp"

namespace gsa {

namespace {

double matrix_scale(const Eigen::MatrixXd& m) {
    const double s = m.cwiseAbs().maxCoeff();
    return s > 0.0 ? s : 1.0;
}

// Symmetric factor F with F F^T = cov: Cholesky when possible, otherwise
// eigendecomposition with eigenvalues clipped at zero.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
    const double scale = matrix_scale(cov);
    if (cov.isZero(0.0)) return Eigen::MatrixXd::Zero(cov.rows(), cov.cols());

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("mvn_sample: eigendecomposition failed");
    Eigen::VectorXd values = eig.eigenvalues();
    if (values.minCoeff() < -1e-8 * scale)
        throw std::invalid_argument("mvn_sample: covariance is not PSD");
    values = values.cwiseMax(0.0);
    return eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
}

}  // namespace

GaussianLaw make_gaussian_law(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size())
        throw std::invalid_argument("GaussianLaw: dimension mismatch");
    const double scale = matrix_scale(cov);
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("GaussianLaw: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("GaussianLaw: eigendecomposition failed");
    if (!cov.isZero(0.0) && eig.eigenvalues().minCoeff() < -1e-10 * scale)
        throw std::invalid_argument("GaussianLaw: covariance has negative eigenvalue");
    return GaussianLaw{std::move(mean), std::move(cov)};
}

UniformBoxLaw make_uniform_box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
    if (lower.size() != upper.size())
        throw std::invalid_argument("UniformBoxLaw: dimension mismatch");
    for (Eigen::Index i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i]))
            throw std::invalid_argument("UniformBoxLaw: lower must be < upper");
    return UniformBoxLaw{std::move(lower), std::move(upper)};
}

Eigen::MatrixXd mvn_sample(const GaussianLaw& law, std::size_t n,
                           std::uint64_t seed) {
    const Eigen::Index p = law.mean.size();
    const Eigen::MatrixXd factor = covariance_factor(law.cov);

    Rng rng(seed);
    Eigen::MatrixXd z(static_cast<Eigen::Index>(n), p);
    for (Eigen::Index r = 0; r < z.rows(); ++r)
        for (Eigen::Index c = 0; c < p; ++c) z(r, c) = rng.normal();

    Eigen::MatrixXd out = z * factor.transpose();
    out.rowwise() += law.mean.transpose();
    return out;
}

Eigen::MatrixXd mvn_sample_positive(const GaussianLaw& law, std::size_t n,
                                    std::uint64_t seed,
                                    std::size_t* rejected_out) {
    const Eigen::Index p = law.mean.size();
    const Eigen::MatrixXd factor = covariance_factor(law.cov);

    Rng rng(seed);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), p);
    Eigen::VectorXd z(p), row(p);
    std::size_t rejected = 0;
    const std::size_t limit = 1000 * n + 1000;
    std::size_t draws = 0;
    for (std::size_t r = 0; r < n;) {
        if (++draws > limit)
            throw std::runtime_error(
                "mvn_sample_positive: rejection rate too high for this law");
        for (Eigen::Index c = 0; c < p; ++c) z[c] = rng.normal();
        row = law.mean + factor * z;
        if ((row.array() > 0.0).all()) {
            out.row(static_cast<Eigen::Index>(r)) = row.transpose();
            ++r;
        } else {
            ++rejected;
        }
    }
    if (rejected_out) *rejected_out = rejected;
    return out;
}

Eigen::MatrixXd uniform_sample(const UniformBoxLaw& law, std::size_t n,
                               std::uint64_t seed) {
    const Eigen::Index p = law.lower.size();
    Rng rng(seed);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), p);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < p; ++c)
            out(r, c) = rng.uniform(law.lower[c], law.upper[c]);
    return out;
}

Eigen::MatrixXd fix_coordinate(const Eigen::MatrixXd& samples, std::size_t index,
                               double value) {
    if (index >= static_cast<std::size_t>(samples.cols()))
        throw std::out_of_range("fix_coordinate: index out of range");
    Eigen::MatrixXd out = samples;
    out.col(static_cast<Eigen::Index>(index)).setConstant(value);
    return out;
}

Eigen::MatrixXd conditional_fixed_sample(const GaussianLaw& law,
                                         std::size_t index, double value,
                                         std::size_t n, std::uint64_t seed) {
    const std::size_t p = law.dim();
    if (index >= p)
        throw std::out_of_range("conditional_fixed_sample: index out of range");
    const Eigen::Index i = static_cast<Eigen::Index>(index);
    const double var_i = law.cov(i, i);
    if (!(var_i > 0.0))
        throw std::invalid_argument(
            "conditional_fixed_sample: conditioning coordinate has zero variance");

    std::vector<Eigen::Index> rest;
    for (std::size_t k = 0; k < p; ++k)
        if (k != index) rest.push_back(static_cast<Eigen::Index>(k));
    const Eigen::Index q = static_cast<Eigen::Index>(rest.size());

    Eigen::VectorXd mu_rest(q), cross(q);
    Eigen::MatrixXd cov_rest(q, q);
    for (Eigen::Index a = 0; a < q; ++a) {
        mu_rest[a] = law.mean[rest[a]];
        cross[a] = law.cov(rest[a], i);
        for (Eigen::Index b = 0; b < q; ++b) cov_rest(a, b) = law.cov(rest[a], rest[b]);
    }
    // X_rest | X_i = v  ~  N(mu + c (v - mu_i)/var_i, cov - c c^T / var_i).
    const Eigen::VectorXd cond_mean =
        mu_rest + cross * ((value - law.mean[i]) / var_i);
    Eigen::MatrixXd cond_cov = cov_rest - (cross * cross.transpose()) / var_i;
    cond_cov = 0.5 * (cond_cov + cond_cov.transpose());

    const Eigen::MatrixXd reduced =
        mvn_sample(make_gaussian_law(cond_mean, std::move(cond_cov)), n, seed);

    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    out.col(i).setConstant(value);
    for (Eigen::Index a = 0; a < q; ++a) out.col(rest[a]) = reduced.col(a);
    return out;
}

Moments empirical_moments(const Eigen::MatrixXd& samples) {
    const Eigen::Index n = samples.rows();
    const Eigen::Index p = samples.cols();
    if (n < 2) throw std::invalid_argument("empirical_moments: need n >= 2");

    Moments m;
    m.mean = samples.colwise().mean();
    const Eigen::MatrixXd centered = samples.rowwise() - m.mean.transpose();
    m.cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

    m.corr = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd sd(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double var = m.cov(i, i);
        if (var > 0.0) {
            sd[i] = std::sqrt(var);
        } else {
            sd[i] = 0.0;
            m.zero_variance.push_back(static_cast<std::size_t>(i));
        }
    }
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (sd[i] > 0.0 && sd[j] > 0.0)
                m.corr(i, j) = m.cov(i, j) / (sd[i] * sd[j]);
            else
                m.corr(i, j) = 0.0;  // flagged via zero_variance
        }
        if (sd[i] > 0.0) m.corr(i, i) = 1.0;
    }
    return m;
}

}  // namespace gsa
