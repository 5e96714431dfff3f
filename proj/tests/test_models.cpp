#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gsa/models.hpp"
#include "gsa/rng.hpp"
#include "oracles.hpp"

using namespace gsa;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("ishigami point values") {
    const std::array<double, 3> p1{kPi / 2.0, 0.0, 0.0};
    CHECK(ishigami(p1, 5.0, 0.1) == doctest::Approx(1.0).epsilon(1e-14));

    const std::array<double, 3> p2{0.0, kPi / 2.0, 0.0};
    CHECK(ishigami(p2, 5.0, 0.1) == doctest::Approx(5.0).epsilon(1e-14));

    const std::array<double, 3> p3{kPi / 2.0, 0.0, kPi};
    const double pi4 = kPi * kPi * kPi * kPi;
    CHECK(ishigami(p3, 5.0, 0.1) ==
          doctest::Approx(1.0 + 0.1 * pi4).epsilon(1e-14));
    CHECK(ishigami(p3, 5.0, 0.1) == doctest::Approx(10.7409).epsilon(1e-4));
}

TEST_CASE("portfolio values and linearity") {
    const std::array<double, 5> zero{0, 0, 0, 0, 0};
    CHECK(portfolio(zero) == 0.0);
    const std::array<double, 5> e1{1, 0, 0, 0, 0};
    CHECK(portfolio(e1) == 20.0);
    const std::array<double, 5> ones{1, 1, 1, 1, 1};
    CHECK(portfolio(ones) == 62.0);

    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        std::array<double, 5> x{}, y{}, mix{};
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        for (int i = 0; i < 5; ++i) {
            x[i] = rng.uniform(-3, 3);
            y[i] = rng.uniform(-3, 3);
            mix[i] = a * x[i] + b * y[i];
        }
        CHECK(portfolio(mix) ==
              doctest::Approx(a * portfolio(x) + b * portfolio(y)).epsilon(1e-12));
    }
}

TEST_CASE("portfolio_sigma structure and PSD range") {
    const Eigen::MatrixXd at0 = portfolio_sigma(0.0);
    CHECK((at0 - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);

    const Eigen::MatrixXd at1 = portfolio_sigma(1.0);
    CHECK(at1(0, 1) == 0.5);
    CHECK(at1(0, 2) == 0.5);
    CHECK(at1(0, 4) == 0.8);
    CHECK(at1(2, 4) == 0.3);
    CHECK(at1(1, 2) == 0.0);
    CHECK(at1(3, 3) == 1.0);
    CHECK((at1 - at1.transpose()).cwiseAbs().maxCoeff() == 0.0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(at1);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);

    CHECK_THROWS_AS((void)portfolio_sigma(1.5), std::invalid_argument);
    CHECK_THROWS_AS((void)portfolio_sigma(-0.1), std::invalid_argument);
}

TEST_CASE("cholera_rhs at the outbreak point") {
    const CholeraParams p = CholeraParams::nominal();
    const std::array<double, 5> y0{9999.0, 1.0, 0.0, 0.0, 0.0};
    std::array<double, 5> dy{};
    cholera_rhs(0.0, y0, p, kCholeraPopulation, dy);

    CHECK(dy[0] == doctest::Approx(1.0 / 1560.0).epsilon(1e-12));
    CHECK(dy[1] == doctest::Approx(-(7.0 / 5.0 + 1.0 / 1560.0)).epsilon(1e-12));
    CHECK(dy[1] == doctest::Approx(-1.40064).epsilon(1e-5));
    CHECK(dy[2] == doctest::Approx(7.0 / 5.0).epsilon(1e-12));
    CHECK(dy[3] == doctest::Approx(70.0).epsilon(1e-12));
    CHECK(dy[4] == 0.0);
}

TEST_CASE("integrate_rk45: analytic decay and constant field") {
    IntegratorOptions opts;
    opts.output_grid = UniformGrid{0.0, 5.0, 51};
    const Eigen::VectorXd y0 = Eigen::VectorXd::Ones(1);
    const Trajectory decay = integrate_rk45(
        [](double, std::span<const double> y, std::span<double> dy) {
            dy[0] = -y[0];
        },
        y0, 0.0, 5.0, opts);
    CHECK(decay.values(50, 0) == doctest::Approx(std::exp(-5.0)).epsilon(1e-6));

    const Trajectory flat = integrate_rk45(
        [](double, std::span<const double>, std::span<double> dy) { dy[0] = 0.0; },
        (Eigen::VectorXd(1) << 3.25).finished(), 0.0, 5.0, opts);
    for (Eigen::Index k = 0; k < flat.times.size(); ++k)
        CHECK(flat.values(k, 0) == 3.25);
}

TEST_CASE("integrate_rk45 reports stiffness blowups with the failure time") {
    IntegratorOptions opts;
    opts.output_grid = UniformGrid{0.0, 2.0, 11};
    // Finite-time blowup y' = y^2, y(0) = 1 diverges at t = 1.
    CHECK_THROWS_WITH_AS(
        (void)integrate_rk45(
            [](double, std::span<const double> y, std::span<double> dy) {
                dy[0] = y[0] * y[0];
            },
            Eigen::VectorXd::Ones(1), 0.0, 2.0, opts),
        doctest::Contains("step size underflow"), std::runtime_error);
}

TEST_CASE("cholera conservation and RK4 oracle agreement") {
    const CholeraParams p = CholeraParams::nominal();
    const Trajectory full = cholera_run(p, cholera_default_integrator());

    // S + I + R stays at the population size.
    for (Eigen::Index k = 0; k < full.times.size(); ++k) {
        const double total =
            full.values(k, 0) + full.values(k, 1) + full.values(k, 2);
        CHECK(std::abs(total - kCholeraPopulation) <= 1e-4);
    }

    // Fixed-step RK4 at h = 1e-3 over [0, 50].
    IntegratorOptions opts = cholera_default_integrator();
    opts.output_grid = UniformGrid{0.0, 50.0, 101};
    const Trajectory adaptive = cholera_run(p, opts);
    auto rhs = [&p](double t, std::span<const double> y, std::span<double> dy) {
        cholera_rhs(t, y, p, kCholeraPopulation, dy);
    };
    Eigen::VectorXd y0(5);
    y0 << kCholeraPopulation - 1.0, 1.0, 0.0, 0.0, 0.0;
    const Eigen::MatrixXd reference =
        oracles::rk4_fixed(rhs, y0, 0.0, 1e-3, opts.output_grid.times());

    for (Eigen::Index c = 0; c < 5; ++c) {
        const double scale = reference.col(c).cwiseAbs().maxCoeff();
        const double err =
            (adaptive.values.col(c) - reference.col(c)).cwiseAbs().maxCoeff();
        CHECK(err <= 1e-5 * scale);
    }
}

TEST_CASE("trajectory_distance properties") {
    UniformGrid grid{0.0, 4.0, 41};
    Trajectory a, b;
    a.times = b.times = grid.times();
    a.values = Eigen::MatrixXd::Zero(41, 1);
    b.values = Eigen::MatrixXd::Zero(41, 1);
    CHECK(trajectory_distance(a, a) == 0.0);

    // Constant difference c over [0, T]: distance c * sqrt(T).
    b.values.setConstant(1.5);
    CHECK(trajectory_distance(a, b) ==
          doctest::Approx(1.5 * std::sqrt(4.0)).epsilon(1e-12));

    // Refined-quadrature oracle on a smooth random pair.
    Rng rng(7);
    auto smooth = [&](double t, const std::array<double, 4>& c) {
        return c[0] * std::sin(t + c[1]) + c[2] * std::cos(2.0 * t + c[3]);
    };
    std::array<double, 4> c1{}, c2{};
    for (auto& v : c1) v = rng.uniform(-1, 1);
    for (auto& v : c2) v = rng.uniform(-1, 1);

    UniformGrid coarse{0.0, 4.0, 101};
    UniformGrid fine{0.0, 4.0, 1001};
    auto build = [&](const UniformGrid& g, const std::array<double, 4>& c) {
        Trajectory t;
        t.times = g.times();
        t.values.resize(t.times.size(), 1);
        for (Eigen::Index k = 0; k < t.times.size(); ++k)
            t.values(k, 0) = smooth(t.times[k], c);
        return t;
    };
    const double coarse_dist =
        trajectory_distance(build(coarse, c1), build(coarse, c2));
    const double fine_dist = trajectory_distance(build(fine, c1), build(fine, c2));
    CHECK(std::abs(coarse_dist - fine_dist) <= 1e-3 * fine_dist);

    // Triangle inequality on random triples.
    for (int rep = 0; rep < 20; ++rep) {
        std::array<double, 4> ca{}, cb{}, cc{};
        for (auto& v : ca) v = rng.uniform(-1, 1);
        for (auto& v : cb) v = rng.uniform(-1, 1);
        for (auto& v : cc) v = rng.uniform(-1, 1);
        const Trajectory ta = build(coarse, ca), tb = build(coarse, cb),
                         tc = build(coarse, cc);
        CHECK(trajectory_distance(ta, tc) <=
              trajectory_distance(ta, tb) + trajectory_distance(tb, tc) + 1e-10);
    }

    Trajectory mismatched = b;
    mismatched.times = UniformGrid{0.0, 4.0, 21}.times();
    mismatched.values = Eigen::MatrixXd::Zero(21, 1);
    CHECK_THROWS_AS((void)trajectory_distance(a, mismatched), std::invalid_argument);
}

TEST_CASE("ishigami_sobol_analytic closed forms and quadrature cross-check") {
    // X3 enters only through b.
    const IshigamiSobolTotals no_b = ishigami_sobol_analytic(5.0, 0.0);
    CHECK(no_b.st3 == 0.0);

    const IshigamiSobolTotals t = ishigami_sobol_analytic(5.0, 0.1);
    const double pi4 = kPi * kPi * kPi * kPi;
    const double pi8 = pi4 * pi4;
    const double variance = 25.0 / 8.0 + 0.1 * pi4 / 5.0 + 0.01 * pi8 / 18.0 + 0.5;
    CHECK(t.st2 == doctest::Approx(3.125 / variance).epsilon(1e-12));
    CHECK(t.st2 == doctest::Approx(0.288).epsilon(2e-3));
    CHECK(t.st1 > t.st3);
    CHECK(t.st3 > t.st2);

    const auto quad = oracles::ishigami_totals_quadrature(5.0, 0.1, 128);
    CHECK(t.st1 == doctest::Approx(quad[0]).epsilon(1e-5));
    CHECK(t.st2 == doctest::Approx(quad[1]).epsilon(1e-5));
    CHECK(t.st3 == doctest::Approx(quad[2]).epsilon(1e-5));
}

TEST_CASE("trajectory CSV serialization") {
    Trajectory t;
    t.times = UniformGrid{0.0, 1.0, 3}.times();
    t.values.resize(3, 2);
    t.values << 1.0, 4.0, 2.0, 5.0, 3.0, 6.5;
    const std::string path = "trajectory_csv_test.csv";
    write_trajectory_csv(t, path, {"a", "b"});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "time,a,b");
    std::getline(in, line);
    CHECK(line == "0,1,4");
    std::getline(in, line);
    CHECK(line == "0.5,2,5");
    std::getline(in, line);
    CHECK(line == "1,3,6.5");
    in.close();
    std::remove(path.c_str());

    CHECK_THROWS_AS(write_trajectory_csv(t, path, {"only_one"}),
                    std::invalid_argument);
}

TEST_CASE("cholera params validation") {
    CholeraParams p = CholeraParams::nominal();
    CHECK_NOTHROW(p.validate());
    p.xi = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    const Eigen::VectorXd v = CholeraParams::nominal().to_vector();
    CHECK(v[4] == doctest::Approx(1.0 / 1560.0));
    CHECK(CholeraParams::names()[4] == "b");
}
