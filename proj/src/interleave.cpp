#include "ikf/interleave.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ikf/errors.hpp"

namespace ikf {

MixtureSpec::MixtureSpec(double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw DomainError("mixing coefficient must lie in [0, 1], got " + std::to_string(alpha));
    }
}

DataBlock center_block(const DataBlock& block) {
    block.validate();
    DataBlock out;
    out.targets = block.targets.array() - block.targets.mean();
    out.features = block.features.rowwise() - block.features.colwise().mean();
    return out;
}

std::vector<DataBlock> center_blocks(std::span<const DataBlock> blocks) {
    std::vector<DataBlock> out;
    out.reserve(blocks.size());
    for (const DataBlock& b : blocks) out.push_back(center_block(b));
    return out;
}

DataBlock scale_block(const DataBlock& block, double weight) {
    if (!(weight >= 0.0 && weight <= 1.0)) {
        throw DomainError("block weight must lie in [0, 1], got " + std::to_string(weight));
    }
    const double s = std::sqrt(weight);
    return DataBlock{block.targets * s, block.features * s};
}

std::vector<ScheduleEntry> interleave_schedule(std::size_t m, InterleaveOrder order) {
    if (m < 2 || m % 2 != 0) {
        throw InvalidSchedule("interleaved schedule needs an even number of steps >= 2, got " +
                              std::to_string(m));
    }
    const Population lead = order == InterleaveOrder::BirdFirst ? Population::Bird : Population::Fish;
    const Population other = lead == Population::Bird ? Population::Fish : Population::Bird;
    std::vector<ScheduleEntry> schedule;
    schedule.reserve(m);
    for (std::size_t i = 1; i <= m / 2; ++i) {
        schedule.push_back({lead, i});
        schedule.push_back({other, i});
    }
    return schedule;
}

std::vector<DataBlock> interleaved_sequence(std::span<const DataBlock> birds,
                                            std::span<const DataBlock> fish, const MixtureSpec& mix,
                                            const InterleaveOptions& options) {
    if (birds.empty() || fish.empty()) throw EmptyInput("interleaving needs bird and fish blocks");
    if (birds.size() != fish.size()) {
        throw DimensionMismatch("bird and fish block counts differ: " + std::to_string(birds.size()) +
                                " vs " + std::to_string(fish.size()));
    }

    std::vector<DataBlock> sequence;
    sequence.reserve(2 * birds.size());
    for (const ScheduleEntry& entry : interleave_schedule(2 * birds.size(), options.order)) {
        const bool is_bird = entry.population == Population::Bird;
        const DataBlock& raw = (is_bird ? birds : fish)[entry.block_index - 1];
        const DataBlock centred = options.already_centered ? raw : center_block(raw);
        sequence.push_back(scale_block(centred, is_bird ? mix.bird_weight() : mix.fish_weight()));
    }
    return sequence;
}

std::vector<FilterState> run_interleaved(std::span<const DataBlock> birds,
                                         std::span<const DataBlock> fish, const MixtureSpec& mix,
                                         const Vector& psi0, const InterleaveOptions& options) {
    const std::vector<DataBlock> sequence = interleaved_sequence(birds, fish, mix, options);
    return run_blocks(psi0, sequence);
}

Vector psi2_closed_form(const Matrix& u1, const Vector& b1, const Matrix& v1, const Vector& f1,
                        const MixtureSpec& mix) {
    if (u1.cols() != v1.cols() || u1.rows() != b1.size() || v1.rows() != f1.size()) {
        throw DimensionMismatch("psi2_closed_form: inconsistent block shapes");
    }
    const double a = mix.alpha();
    const Matrix combined = a * gram_matrix(u1) + (1.0 - a) * gram_matrix(v1);
    const Vector moment = a * (u1.transpose() * b1) + (1.0 - a) * (v1.transpose() * f1);
    return solve_normal_equations(combined, moment);
}

double mean_squared_prediction_error(std::span<const DataBlock> blocks, const Vector& psi) {
    if (blocks.empty()) throw EmptyInput("prediction error needs at least one block");
    double sse = 0.0;
    Eigen::Index rows = 0;
    for (const DataBlock& block : blocks) {
        if (block.cols() != psi.size()) {
            throw DimensionMismatch("block column count vs parameter length");
        }
        sse += (block.targets - block.features * psi).squaredNorm();
        rows += block.rows();
    }
    if (rows == 0) throw EmptyInput("prediction error needs at least one row");
    return sse / static_cast<double>(rows);
}

AlphaEstimate estimate_alpha(std::span<const DataBlock> birds, std::span<const DataBlock> fish,
                             std::span<const DataBlock> validation, std::size_t grid_size) {
    if (grid_size < 2) throw DomainError("grid size must be at least 2");
    if (validation.empty()) throw EmptyInput("estimate_alpha: no validation blocks");
    if (birds.empty()) throw EmptyInput("estimate_alpha: no training blocks");

    const std::vector<DataBlock> centred_birds = center_blocks(birds);
    const std::vector<DataBlock> centred_fish = center_blocks(fish);
    const std::vector<DataBlock> centred_validation = center_blocks(validation);
    const Vector psi0 = Vector::Zero(birds.front().cols());

    AlphaEstimate result{std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::infinity(), {}, {}};
    result.grid.reserve(grid_size);
    result.scores.reserve(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double alpha = i + 1 == grid_size ? 1.0 : static_cast<double>(i) / static_cast<double>(grid_size - 1);
        result.grid.push_back(alpha);
        // The final estimate does not depend on which population leads, so
        // lead with the one that carries weight.
        InterleaveOptions options;
        options.already_centered = true;
        options.order = alpha == 0.0 ? InterleaveOrder::FishFirst : InterleaveOrder::BirdFirst;
        double score = std::numeric_limits<double>::quiet_NaN();
        try {
            const auto trajectory =
                run_interleaved(centred_birds, centred_fish, MixtureSpec(alpha), psi0, options);
            score = mean_squared_prediction_error(centred_validation, trajectory.back().psi);
        } catch (const SingularUpdate&) {
        }
        result.scores.push_back(score);
        if (!std::isnan(score) && score < result.score) {
            result.score = score;
            result.alpha = alpha;
        }
    }
    if (std::isnan(result.alpha)) throw EstimationFailed("every alpha candidate produced a singular run");
    return result;
}

}  // namespace ikf
