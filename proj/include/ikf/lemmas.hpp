#pragma once

// Numerical checks of the two-step results for the interleaved recursion:
//  * the estimate after steps 1-2 equals a closed form (an algebraic
//    identity, checked to 1e-10), and
//  * averaged over many draws, that estimate is approximately the blended
//    weight vector when both populations have equal isotropic feature
//    covariance (a first-order statement, checked by a standard-error bound).

#include <cstdint>
#include <string>
#include <vector>

#include "ikf/lls_kernel.hpp"

namespace ikf {

struct ClosedFormCheckResult {
    std::size_t instances = 0;        // trials x alphas x orders
    double max_discrepancy = 0.0;     // inf-norm, relative to max(1, |closed form|)
    double tolerance = 1e-10;
    bool passed() const { return instances > 0 && max_discrepancy <= tolerance; }
};

/// Random instances with q in [1, 8] and n in [q + 2, 50]; for every alpha
/// and both orders compares step 2 of run_interleaved with psi2_closed_form.
ClosedFormCheckResult check_two_step_closed_form(std::uint64_t seed, std::size_t trials,
                                                 const std::vector<double>& alphas = {0.1, 0.25, 0.5, 0.9});

enum class CheckStatus { Pass, Fail, SkippedPrecondition };

std::string check_status_name(CheckStatus s);

struct UnbiasednessConfig {
    double alpha = 0.25;
    Eigen::Index n = 100;
    Eigen::Index q = 6;
    std::size_t iterations = 5000;
    double noise_sd = 1.0;
    double feature_sd = 1.0;
    std::uint64_t master_seed = 42;
    /// Optional per-column feature sds; the check requires every column of
    /// both populations to share one sd.
    std::vector<double> bird_column_sd;
    std::vector<double> fish_column_sd;
    double se_multiplier = 4.0;
};

struct UnbiasednessResult {
    CheckStatus status = CheckStatus::Fail;
    std::string note;
    Vector mean_psi2;
    Vector standard_error;
    Vector penguin_weights;
    Vector bird_weights;
    Vector fish_weights;
    double max_deviation = 0.0;  // |mean(psi2) - r_p|_inf
    double bound = 0.0;          // se_multiplier * max standard error
};

/// Mean-zero features, weights from the params stream of `master_seed`; each
/// iteration draws one bird and one fish block and records the step-2
/// estimate of the interleaved run.
UnbiasednessResult check_two_step_unbiasedness(const UnbiasednessConfig& config, unsigned threads = 0);

}  // namespace ikf
