#include "gsa/sobol.hpp"

#include <stdexcept>

#include "gsa/numeric.hpp"
#include "gsa/rng.hpp"
#include "gsa/threading.hpp"

namespace gsa {

SobolTotals jansen_total(const ScalarModelFn& model, const UniformBoxLaw& law,
                         std::size_t n, std::uint64_t seed) {
    if (n < 100) throw std::invalid_argument("jansen_total: need n >= 100");
    const std::size_t p = law.dim();

    const Eigen::MatrixXd a = uniform_sample(law, n, derive_seed(seed, 1));
    const Eigen::MatrixXd b = uniform_sample(law, n, derive_seed(seed, 2));

    Eigen::VectorXd fa(static_cast<Eigen::Index>(n)), fb(static_cast<Eigen::Index>(n));
    threading::parallel_for(n, [&](std::size_t j) {
        const Eigen::Index r = static_cast<Eigen::Index>(j);
        const Eigen::VectorXd row_a = a.row(r);
        const Eigen::VectorXd row_b = b.row(r);
        fa[r] = model(std::span<const double>(row_a.data(), p));
        fb[r] = model(std::span<const double>(row_b.data(), p));
    });

    // Unbiased variance over the pooled 2n evaluations, fixed-order sums.
    KahanAccumulator mean_acc;
    for (Eigen::Index j = 0; j < fa.size(); ++j) mean_acc.add(fa[j]);
    for (Eigen::Index j = 0; j < fb.size(); ++j) mean_acc.add(fb[j]);
    const double mean = mean_acc.sum / static_cast<double>(2 * n);
    KahanAccumulator var_acc;
    for (Eigen::Index j = 0; j < fa.size(); ++j)
        var_acc.add((fa[j] - mean) * (fa[j] - mean));
    for (Eigen::Index j = 0; j < fb.size(); ++j)
        var_acc.add((fb[j] - mean) * (fb[j] - mean));
    const double variance = var_acc.sum / static_cast<double>(2 * n - 1);
    if (!(variance > 0.0))
        throw std::runtime_error("jansen_total: zero output variance");

    SobolTotals totals;
    totals.n = n;
    totals.variance_hat = variance;
    totals.total.resize(p);

    for (std::size_t i = 0; i < p; ++i) {
        Eigen::MatrixXd mixed = a;
        mixed.col(static_cast<Eigen::Index>(i)) = b.col(static_cast<Eigen::Index>(i));
        Eigen::VectorXd fm(static_cast<Eigen::Index>(n));
        threading::parallel_for(n, [&](std::size_t j) {
            const Eigen::Index r = static_cast<Eigen::Index>(j);
            const Eigen::VectorXd row = mixed.row(r);
            fm[r] = model(std::span<const double>(row.data(), p));
        });
        KahanAccumulator acc;
        for (Eigen::Index j = 0; j < fm.size(); ++j) {
            const double d = fa[j] - fm[j];
            acc.add(d * d);
        }
        totals.total[i] = acc.sum / (2.0 * static_cast<double>(n) * variance);
    }
    return totals;
}

}  // namespace gsa
