#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "gsa/kernel.hpp"

namespace gsa {

// One empirical HSIC value, (1/n^2) tr(K H L H) with H = I - zz^T,
// z = 1/sqrt(n) * 1.
struct HsicEstimate {
    double raw = 0.0;    // as computed; may be a hair negative from roundoff
    double value = 0.0;  // max(raw, 0)
    std::size_t n = 0;
    SubsetSpec subset;   // input subset this estimate refers to, if any
    std::vector<double> bandwidths;
};

// Guard below which the full-set HSIC is considered numerically zero:
// the scale of the estimator for identity-like Grams.
inline double hsic_denominator_guard(std::size_t n) {
    const double nn = static_cast<double>(n);
    return 1e-12 * (nn - 1.0) / (nn * nn);
}

// Dense oracle: forms H K H and H L H explicitly. O(n^2) storage, O(n^3)
// work; exists to cross-check the streaming path. Inputs must be symmetric
// to 1e-10 and of equal size.
double hsic_dense(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L);

// Single-pass column-streaming estimator:
//   S   = sum_i <K^(i), L^(i)>
//   u_i = <K^(i), z>,  v_i = <L^(i), z>
//   result = (S - 2<u,v> + <u,z><v,z>) / n^2
// Peak auxiliary storage is O(n) per worker (two column buffers plus the
// u, v, s accumulator vectors); no n x n matrix is ever formed. All
// reductions are fixed-order compensated sums, so the value does not
// depend on the worker count. Column-source failures are rethrown with
// the failing column index attached.
double hsic_streaming_value(const GramColumnSource& colK,
                            const GramColumnSource& colL);

HsicEstimate hsic_streaming(const GramColumnSource& colK,
                            const GramColumnSource& colL);

// ---------------------------------------------------------------------------
// Sensitivity indices
// ---------------------------------------------------------------------------

struct SubsetResult {
    SubsetSpec subset;
    HsicEstimate hsic;            // HSIC(X_A, Y)
    double total_index = 0.0;     // clamped to [0, 1]
    double total_index_raw = 0.0; // before clamping, for invariant checks
    double dcorr = 0.0;           // 0 when not requested
};

struct SensitivityReport {
    std::vector<SubsetResult> entries;
    HsicEstimate full;        // HSIC(X, Y) over all blocks
    double hsic_yy = 0.0;     // HSIC(Y, Y), when dcorr was computed
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::vector<double> input_bandwidths;
    double output_bandwidth = 0.0;
};

// HSIC(X_A, Y) with the augmented product kernel on subset A. The empty
// subset gives exactly 0 (its Gram is the all-ones matrix, annihilated
// by H).
HsicEstimate hsic_subset(const InputEnsemble& inputs,
                         const GramColumnSource& y_source,
                         const SubsetSpec& subset);

// Total HSIC index 1 - HSIC(X_~A, Y) / HSIC(X, Y), clamped to [0, 1];
// raw_out receives the unclamped value when non-null. Throws when the
// full-set HSIC falls below the denominator guard.
double total_hsic_index(const InputEnsemble& inputs,
                        const GramColumnSource& y_source,
                        const SubsetSpec& subset, double* raw_out = nullptr);

// Distance correlation index HSIC(X_A,Y) / sqrt(HSIC(X_A,X_A) HSIC(Y,Y)).
double distance_correlation(const InputEnsemble& inputs,
                            const GramColumnSource& y_source,
                            const SubsetSpec& subset);

struct ReportOptions {
    bool with_dcorr = true;
    std::uint64_t seed = 0;
    double output_bandwidth = 0.0;  // metadata only
};

// All requested subsets against one output source. Centering statistics
// are computed once per block (inside the ensemble) and shared. Subsets
// default to all singletons when the list is empty.
SensitivityReport full_report(const InputEnsemble& inputs,
                              const GramColumnSource& y_source,
                              std::vector<SubsetSpec> subsets,
                              const ReportOptions& opts);

}  // namespace gsa
