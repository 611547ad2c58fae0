#pragma once

// Interleaved block recursion: two populations ("bird" and "fish") are
// centred, weighted by alpha and 1 - alpha, and fed to the recursion in
// alternating order.

#include <cstddef>
#include <span>
#include <vector>

#include "ikf/lls_kernel.hpp"

namespace ikf {

/// Mixing coefficient tying the blended population to its two parents.
class MixtureSpec {
public:
    /// Throws DomainError unless 0 <= alpha <= 1.
    explicit MixtureSpec(double alpha);

    double alpha() const noexcept { return alpha_; }
    double bird_weight() const noexcept { return alpha_; }
    double fish_weight() const noexcept { return 1.0 - alpha_; }

    /// alpha of exactly 0 or 1 zeroes one population out.
    bool degenerate() const noexcept { return alpha_ == 0.0 || alpha_ == 1.0; }

private:
    double alpha_;
};

enum class InterleaveOrder { BirdFirst, FishFirst };

enum class Population { Bird, Fish };

struct ScheduleEntry {
    Population population;
    std::size_t block_index;  // 1-based

    bool operator==(const ScheduleEntry&) const = default;
};

/// Per-block centring: subtracts each block's own column means from the
/// targets and every feature column.
DataBlock center_block(const DataBlock& block);
std::vector<DataBlock> center_blocks(std::span<const DataBlock> blocks);

/// Multiplies every entry by sqrt(weight), so the Gram matrix and the
/// cross-moment scale by exactly `weight`. Throws DomainError if weight is
/// outside [0, 1].
DataBlock scale_block(const DataBlock& block, double weight);

/// (bird,1),(fish,1),(bird,2),... for BirdFirst; tags swapped for FishFirst.
/// Throws InvalidSchedule unless m is even and >= 2.
std::vector<ScheduleEntry> interleave_schedule(std::size_t m, InterleaveOrder order);

struct InterleaveOptions {
    InterleaveOrder order = InterleaveOrder::BirdFirst;
    /// Skip the centring pass when the caller has already centred the data.
    bool already_centered = false;
};

/// Preprocessed (centred, then weighted) blocks in schedule order; this is
/// exactly the sequence run_interleaved hands to the recursion.
std::vector<DataBlock> interleaved_sequence(std::span<const DataBlock> birds,
                                            std::span<const DataBlock> fish, const MixtureSpec& mix,
                                            const InterleaveOptions& options = {});

/// Full interleaved run over k bird and k fish blocks (2k steps). Throws
/// SingularUpdate if the leading weighted block has a singular Gram matrix,
/// e.g. alpha = 0 with BirdFirst.
std::vector<FilterState> run_interleaved(std::span<const DataBlock> birds,
                                         std::span<const DataBlock> fish, const MixtureSpec& mix,
                                         const Vector& psi0, const InterleaveOptions& options = {});

/// Estimate after the first bird step and the first fish step, in closed form:
///   (a U^t U + (1-a) V^t V)^{-1} (a U^t b + (1-a) V^t f).
/// Inputs must already be centred. Throws SingularSystem.
Vector psi2_closed_form(const Matrix& u1, const Vector& b1, const Matrix& v1, const Vector& f1,
                        const MixtureSpec& mix);

/// Grid search for alpha over {0, 1/(g-1), ..., 1}: each candidate runs the
/// interleaved recursion and is scored by mean squared prediction error on the
/// centred validation blocks. Candidates whose run is singular are skipped;
/// ties go to the smaller alpha. Throws EstimationFailed if all fail.
struct AlphaEstimate {
    double alpha;
    double score;
    std::vector<double> grid;
    std::vector<double> scores;  // NaN for failed candidates
};

AlphaEstimate estimate_alpha(std::span<const DataBlock> birds, std::span<const DataBlock> fish,
                             std::span<const DataBlock> validation, std::size_t grid_size);

/// Sum of squared prediction errors over `blocks` divided by the total row
/// count. Throws EmptyInput for an empty set.
double mean_squared_prediction_error(std::span<const DataBlock> blocks, const Vector& psi);

}  // namespace ikf
