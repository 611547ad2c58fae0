#pragma once

// Seeded generation of the bird / fish / penguin datasets.
//
// Every block is drawn from its own std::mt19937_64 engine whose seed is a
// SplitMix64 hash of (master seed, stream, iteration, block index). Datasets
// are therefore independent of generation order and thread count.

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ikf/interleave.hpp"
#include "ikf/lls_kernel.hpp"

namespace ikf {

/// Independent random streams. Values are part of the reproducibility
/// contract; never renumber.
enum class Stream : std::uint64_t {
    Params = 1,
    Bird = 2,
    Fish = 3,
    Penguin = 4,
    BirdTest = 5,
    FishTest = 6,
    PenguinTest = 7,
};

struct SeedPlan {
    std::uint64_t master_seed = 42;

    /// Pure function of (master_seed, stream, iteration, block).
    std::uint64_t derive(Stream stream, std::uint64_t iteration, std::uint64_t block = 0) const noexcept;
    std::mt19937_64 engine(Stream stream, std::uint64_t iteration, std::uint64_t block = 0) const;
};

/// SplitMix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Ground truth for one population: rows ~ N(mean * 1, sd^2 I),
/// targets = features * weights + N(0, noise_sd^2).
struct PopulationSpec {
    Vector weights;
    double feature_mean = 0.0;
    double feature_sd = 1.0;
    double noise_sd = 1.0;
    /// Optional per-column standard deviations; overrides feature_sd when
    /// non-empty (used to break the equal-variance condition on purpose).
    std::vector<double> column_sd;

    /// Throws DomainError / DimensionMismatch on invalid fields.
    void validate() const;
    double sd_of_column(Eigen::Index j) const { return column_sd.empty() ? feature_sd : column_sd[static_cast<std::size_t>(j)]; }
};

enum class PenguinMode { ConvexCombination, DistributionMixture };

struct PenguinRule {
    PenguinMode mode = PenguinMode::ConvexCombination;
    MixtureSpec mix{0.25};
};

/// Weights ~ iid U(-5, 5); one feature mean per population ~ U(-10, 10).
/// feature_sd and noise_sd are left at their defaults.
std::pair<PopulationSpec, PopulationSpec> gen_population_params(Eigen::Index q, const SeedPlan& seed);

std::vector<DataBlock> gen_blocks(const PopulationSpec& spec, Eigen::Index n, Eigen::Index q,
                                  std::size_t m_blocks, const SeedPlan& seed, Stream stream,
                                  std::uint64_t iteration);

struct PenguinData {
    std::vector<DataBlock> blocks;
    Vector weights;  // alpha r_b + (1 - alpha) r_f
};

/// Builds blended blocks from corresponding bird/fish blocks. ConvexCombination
/// averages features entrywise; DistributionMixture copies each row from the
/// bird block with probability alpha, else from the fish block. Targets get
/// fresh N(0, noise_sd^2) noise drawn from `stream`.
PenguinData gen_penguin(std::span<const DataBlock> birds, std::span<const DataBlock> fish,
                        const PopulationSpec& bird_spec, const PopulationSpec& fish_spec,
                        const PenguinRule& rule, double noise_sd, const SeedPlan& seed,
                        Stream stream, std::uint64_t iteration);

/// Everything one Monte Carlo iteration needs.
struct IterationData {
    std::vector<DataBlock> birds;
    std::vector<DataBlock> fish;
    std::vector<DataBlock> penguin_train;
    std::vector<DataBlock> penguin_test;
    Vector penguin_weights;
};

struct GenerationPlan {
    Eigen::Index n = 100;
    Eigen::Index q = 6;
    std::size_t m = 6;
    PenguinRule rule{};
    double penguin_noise_sd = 1.0;
    /// When false, the penguin training blocks double as the test set.
    bool held_out_test = true;
};

IterationData gen_iteration(const PopulationSpec& bird, const PopulationSpec& fish,
                            const GenerationPlan& plan, const SeedPlan& seed, std::uint64_t iteration);

}  // namespace ikf
