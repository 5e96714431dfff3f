#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gsa/sampling.hpp"

namespace gsa {

struct SobolTotals {
    std::vector<double> total;  // one total-effect estimate per input
    std::size_t n = 0;          // base sample count
    double variance_hat = 0.0;
};

using ScalarModelFn = std::function<double(std::span<const double>)>;

// Jansen pick-and-freeze total-effect estimator for independent inputs:
//   S_Ti = (1/(2n)) sum_j (f(A_j) - f(AB_i_j))^2 / V
// where A, B are two base matrices from the product law and AB_i is A with
// column i swapped from B. V is the unbiased variance of f over the pooled
// A and B evaluations. Total model cost n (p + 2). Throws when the output
// variance vanishes.
SobolTotals jansen_total(const ScalarModelFn& model, const UniformBoxLaw& law,
                         std::size_t n, std::uint64_t seed);

}  // namespace gsa
