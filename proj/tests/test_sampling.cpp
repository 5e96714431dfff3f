#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gsa/models.hpp"
#include "gsa/rng.hpp"
#include "gsa/sampling.hpp"

using namespace gsa;

TEST_CASE("mvn_sample: degenerate, identity, and portfolio covariances") {
    // Sigma = 0: every row equals the mean.
    const Eigen::VectorXd mu = (Eigen::VectorXd(3) << 1.0, -2.0, 0.5).finished();
    const GaussianLaw degenerate = make_gaussian_law(mu, Eigen::MatrixXd::Zero(3, 3));
    const Eigen::MatrixXd rows = mvn_sample(degenerate, 7, 1);
    for (Eigen::Index r = 0; r < rows.rows(); ++r)
        CHECK((rows.row(r).transpose() - mu).norm() == 0.0);

    // Identity covariance: sample covariance approaches I.
    const GaussianLaw std3 =
        make_gaussian_law(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3));
    const Eigen::MatrixXd z = mvn_sample(std3, 50000, 2);
    const Moments m = empirical_moments(z);
    CHECK((m.cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);

    // Fully correlated portfolio: the (1,5) sample correlation sits at 0.8.
    const GaussianLaw port =
        make_gaussian_law(Eigen::VectorXd::Zero(5), portfolio_sigma(1.0));
    const Moments pm = empirical_moments(mvn_sample(port, 50000, 3));
    CHECK(pm.corr(0, 4) == doctest::Approx(0.8).epsilon(0.025));

    // A genuinely indefinite matrix is rejected.
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
    bad(0, 1) = bad(1, 0) = 2.0;  // eigenvalues 3 and -1
    CHECK_THROWS_AS((void)make_gaussian_law(Eigen::VectorXd::Zero(2), bad),
                    std::invalid_argument);
}

TEST_CASE("mvn determinism and covariance consistency rate") {
    const GaussianLaw law =
        make_gaussian_law(Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4));
    const Eigen::MatrixXd a = mvn_sample(law, 100, 42);
    const Eigen::MatrixXd b = mvn_sample(law, 100, 42);
    const Eigen::MatrixXd c = mvn_sample(law, 100, 43);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);

    // ||sample_cov - Sigma||_max shrinks roughly like n^{-1/2}: the average
    // error ratio between n = 4000 and n = 1000 stays below 0.75.
    double ratio_acc = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        const Eigen::MatrixXd small = mvn_sample(law, 1000, 100 + s);
        const Eigen::MatrixXd large = mvn_sample(law, 4000, 100 + s);
        const double err_small =
            (empirical_moments(small).cov - law.cov).cwiseAbs().maxCoeff();
        const double err_large =
            (empirical_moments(large).cov - law.cov).cwiseAbs().maxCoeff();
        ratio_acc += err_large / err_small;
    }
    CHECK(ratio_acc / seeds <= 0.75);
}

TEST_CASE("uniform_sample: support, mean, determinism") {
    const UniformBoxLaw law = make_uniform_box(
        (Eigen::VectorXd(2) << 0.0, -1.0).finished(),
        (Eigen::VectorXd(2) << 1.0, 1.0).finished());
    const Eigen::MatrixXd s = uniform_sample(law, 100000, 5);
    for (Eigen::Index c = 0; c < 2; ++c) {
        CHECK(s.col(c).minCoeff() >= law.lower[c]);
        CHECK(s.col(c).maxCoeff() <= law.upper[c]);
    }
    CHECK(s.col(0).mean() == doctest::Approx(0.5).epsilon(0.02));

    const Eigen::MatrixXd again = uniform_sample(law, 64, 9);
    CHECK((uniform_sample(law, 64, 9) - again).cwiseAbs().maxCoeff() == 0.0);
    CHECK((uniform_sample(law, 64, 10) - again).cwiseAbs().maxCoeff() > 0.0);

    CHECK_THROWS_AS((void)make_uniform_box((Eigen::VectorXd(1) << 1.0).finished(),
                                           (Eigen::VectorXd(1) << 1.0).finished()),
                    std::invalid_argument);
}

TEST_CASE("fix_coordinate semantics") {
    Eigen::MatrixXd one_col(3, 1);
    one_col << 1.0, 2.0, 3.0;
    const Eigen::MatrixXd fixed1 = fix_coordinate(one_col, 0, 7.0);
    CHECK((fixed1.col(0).array() == 7.0).all());

    Rng rng(31);
    Eigen::MatrixXd s(40, 3);
    for (Eigen::Index r = 0; r < 40; ++r)
        for (Eigen::Index c = 0; c < 3; ++c) s(r, c) = rng.uniform01();
    const Eigen::MatrixXd once = fix_coordinate(s, 1, 0.25);
    const Eigen::MatrixXd twice = fix_coordinate(once, 1, 0.25);
    CHECK((once - twice).cwiseAbs().maxCoeff() == 0.0);
    // Untouched columns are preserved bitwise.
    CHECK((once.col(0) - s.col(0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((once.col(2) - s.col(2)).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS((void)fix_coordinate(s, 3, 0.0), std::out_of_range);
}

TEST_CASE("fixing X5 at rho=0 keeps 900/916 of the portfolio variance") {
    const GaussianLaw law =
        make_gaussian_law(Eigen::VectorXd::Zero(5), portfolio_sigma(0.0));
    const std::size_t n = 200000;
    const Eigen::MatrixXd full = mvn_sample(law, n, 77);
    const Eigen::MatrixXd reduced = fix_coordinate(full, 4, 0.0);

    auto var_of_y = [&](const Eigen::MatrixXd& x) {
        Eigen::VectorXd y(x.rows());
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const Eigen::VectorXd row = x.row(r);
            y[r] = portfolio(std::span<const double>(row.data(), 5));
        }
        const double mean = y.mean();
        return (y.array() - mean).square().sum() / (static_cast<double>(n) - 1.0);
    };
    const double ratio = var_of_y(reduced) / var_of_y(full);
    CHECK(ratio == doctest::Approx(900.0 / 916.0).epsilon(0.01));
}

TEST_CASE("conditional_fixed_sample matches the conditional-Gaussian law") {
    const GaussianLaw law =
        make_gaussian_law(Eigen::VectorXd::Zero(5), portfolio_sigma(1.0));
    const std::size_t n = 100000;
    const Eigen::MatrixXd s = conditional_fixed_sample(law, 4, 0.0, n, 11);
    CHECK((s.col(4).array() == 0.0).all());

    // Conditioning X5 = 0 shrinks Var(X1) to 1 - 0.8^2 = 0.36 and centers it.
    const Moments m = empirical_moments(s);
    CHECK(m.mean.cwiseAbs().maxCoeff() < 0.02);
    CHECK(m.cov(0, 0) == doctest::Approx(0.36).epsilon(0.05));
    // X4 is independent of X5: variance stays 1.
    CHECK(m.cov(3, 3) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("mvn_sample_positive rejects nonpositive rows deterministically") {
    const Eigen::VectorXd mu = (Eigen::VectorXd(2) << 1.0, 2.0).finished();
    const GaussianLaw law =
        make_gaussian_law(mu, 0.25 * Eigen::MatrixXd::Identity(2, 2));
    std::size_t rejected = 0;
    const Eigen::MatrixXd s = mvn_sample_positive(law, 5000, 13, &rejected);
    CHECK((s.array() > 0.0).all());
    std::size_t rejected2 = 0;
    const Eigen::MatrixXd s2 = mvn_sample_positive(law, 5000, 13, &rejected2);
    CHECK((s - s2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(rejected == rejected2);
    // mu/sigma = 2 on the worst coordinate: rejection should stay rare.
    CHECK(rejected < 1000);
}

TEST_CASE("empirical_moments hand cases") {
    Eigen::MatrixXd identical = Eigen::MatrixXd::Constant(5, 2, 3.0);
    const Moments m0 = empirical_moments(identical);
    CHECK(m0.cov.cwiseAbs().maxCoeff() == 0.0);
    CHECK(m0.zero_variance.size() == 2);
    CHECK(m0.corr(0, 1) == 0.0);

    Eigen::MatrixXd two(2, 1);
    two << -1.0, 1.0;
    const Moments m1 = empirical_moments(two);
    CHECK(m1.mean[0] == 0.0);
    CHECK(m1.cov(0, 0) == doctest::Approx(2.0));  // n-1 convention
    CHECK(m1.corr(0, 0) == 1.0);

    Rng rng(3);
    Eigen::MatrixXd r(50, 3);
    for (Eigen::Index i = 0; i < 50; ++i)
        for (Eigen::Index c = 0; c < 3; ++c) r(i, c) = rng.uniform(-2, 2);
    const Moments mr = empirical_moments(r);
    for (Eigen::Index c = 0; c < 3; ++c) CHECK(mr.corr(c, c) == 1.0);
}
