#include "ikf/synthdata.hpp"

#include <cmath>
#include <string>

#include "ikf/errors.hpp"

namespace ikf {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t SeedPlan::derive(Stream stream, std::uint64_t iteration, std::uint64_t block) const noexcept {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ iteration);
    return splitmix64(h ^ block);
}

std::mt19937_64 SeedPlan::engine(Stream stream, std::uint64_t iteration, std::uint64_t block) const {
    return std::mt19937_64(derive(stream, iteration, block));
}

void PopulationSpec::validate() const {
    if (weights.size() < 1) throw DimensionMismatch("population weights are empty");
    if (!weights.allFinite()) throw DomainError("population weights must be finite");
    if (!(feature_sd > 0.0)) throw DomainError("feature_sd must be positive");
    if (!(noise_sd >= 0.0)) throw DomainError("noise_sd must be non-negative");
    if (!std::isfinite(feature_mean)) throw DomainError("feature_mean must be finite");
    if (!column_sd.empty()) {
        if (static_cast<Eigen::Index>(column_sd.size()) != weights.size()) {
            throw DimensionMismatch("column_sd length must equal the number of weights");
        }
        for (double sd : column_sd) {
            if (!(sd > 0.0)) throw DomainError("column standard deviations must be positive");
        }
    }
}

std::pair<PopulationSpec, PopulationSpec> gen_population_params(Eigen::Index q, const SeedPlan& seed) {
    if (q < 1) throw DimensionMismatch("dimension q must be at least 1");
    std::mt19937_64 rng = seed.engine(Stream::Params, 0);
    std::uniform_real_distribution<double> weight_dist(-5.0, 5.0);
    std::uniform_real_distribution<double> mean_dist(-10.0, 10.0);

    PopulationSpec bird;
    PopulationSpec fish;
    bird.weights.resize(q);
    fish.weights.resize(q);
    for (Eigen::Index j = 0; j < q; ++j) bird.weights(j) = weight_dist(rng);
    for (Eigen::Index j = 0; j < q; ++j) fish.weights(j) = weight_dist(rng);
    bird.feature_mean = mean_dist(rng);
    fish.feature_mean = mean_dist(rng);
    return {bird, fish};
}

std::vector<DataBlock> gen_blocks(const PopulationSpec& spec, Eigen::Index n, Eigen::Index q,
                                  std::size_t m_blocks, const SeedPlan& seed, Stream stream,
                                  std::uint64_t iteration) {
    if (n < 1 || q < 1 || m_blocks < 1) throw DimensionMismatch("n, q and block count must be >= 1");
    spec.validate();
    if (spec.weights.size() != q) throw DimensionMismatch("population weights length differs from q");

    std::vector<DataBlock> blocks;
    blocks.reserve(m_blocks);
    for (std::size_t b = 0; b < m_blocks; ++b) {
        // Fresh distribution per block: normal_distribution caches a spare draw.
        std::mt19937_64 rng = seed.engine(stream, iteration, b);
        std::normal_distribution<double> standard_normal(0.0, 1.0);
        DataBlock block{Vector(n), Matrix(n, q)};
        // Row-major draw order keeps a row's values contiguous in the stream.
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < q; ++j) {
                block.features(i, j) = spec.feature_mean + spec.sd_of_column(j) * standard_normal(rng);
            }
        }
        block.targets = block.features * spec.weights;
        if (spec.noise_sd > 0.0) {
            for (Eigen::Index i = 0; i < n; ++i) block.targets(i) += spec.noise_sd * standard_normal(rng);
        }
        blocks.push_back(std::move(block));
    }
    return blocks;
}

PenguinData gen_penguin(std::span<const DataBlock> birds, std::span<const DataBlock> fish,
                        const PopulationSpec& bird_spec, const PopulationSpec& fish_spec,
                        const PenguinRule& rule, double noise_sd, const SeedPlan& seed,
                        Stream stream, std::uint64_t iteration) {
    if (birds.size() != fish.size()) throw DimensionMismatch("bird and fish block counts differ");
    if (bird_spec.weights.size() != fish_spec.weights.size()) {
        throw DimensionMismatch("bird and fish weight lengths differ");
    }
    if (!(noise_sd >= 0.0)) throw DomainError("noise_sd must be non-negative");

    const double a = rule.mix.alpha();
    PenguinData out;
    out.weights = a * bird_spec.weights + (1.0 - a) * fish_spec.weights;
    out.blocks.reserve(birds.size());

    for (std::size_t b = 0; b < birds.size(); ++b) {
        const Matrix& u = birds[b].features;
        const Matrix& v = fish[b].features;
        if (u.rows() != v.rows() || u.cols() != v.cols()) {
            throw DimensionMismatch("bird block " + std::to_string(b + 1) +
                                    " and fish block differ in shape");
        }
        if (u.cols() != out.weights.size()) throw DimensionMismatch("block width differs from q");

        std::mt19937_64 rng = seed.engine(stream, iteration, b);
        std::normal_distribution<double> standard_normal(0.0, 1.0);
        std::bernoulli_distribution from_bird(a);
        DataBlock block;
        if (rule.mode == PenguinMode::ConvexCombination) {
            block.features = a * u + (1.0 - a) * v;
        } else {
            block.features.resize(u.rows(), u.cols());
            for (Eigen::Index i = 0; i < u.rows(); ++i) {
                block.features.row(i) = from_bird(rng) ? u.row(i) : v.row(i);
            }
        }
        block.targets = block.features * out.weights;
        if (noise_sd > 0.0) {
            for (Eigen::Index i = 0; i < block.targets.size(); ++i) {
                block.targets(i) += noise_sd * standard_normal(rng);
            }
        }
        out.blocks.push_back(std::move(block));
    }
    return out;
}

IterationData gen_iteration(const PopulationSpec& bird, const PopulationSpec& fish,
                            const GenerationPlan& plan, const SeedPlan& seed, std::uint64_t iteration) {
    IterationData data;
    data.birds = gen_blocks(bird, plan.n, plan.q, plan.m, seed, Stream::Bird, iteration);
    data.fish = gen_blocks(fish, plan.n, plan.q, plan.m, seed, Stream::Fish, iteration);
    PenguinData train = gen_penguin(data.birds, data.fish, bird, fish, plan.rule, plan.penguin_noise_sd,
                                    seed, Stream::Penguin, iteration);
    data.penguin_train = std::move(train.blocks);
    data.penguin_weights = std::move(train.weights);

    if (plan.held_out_test) {
        const auto test_birds = gen_blocks(bird, plan.n, plan.q, plan.m, seed, Stream::BirdTest, iteration);
        const auto test_fish = gen_blocks(fish, plan.n, plan.q, plan.m, seed, Stream::FishTest, iteration);
        data.penguin_test = gen_penguin(test_birds, test_fish, bird, fish, plan.rule,
                                        plan.penguin_noise_sd, seed, Stream::PenguinTest, iteration)
                                .blocks;
    } else {
        data.penguin_test = data.penguin_train;
    }
    return data;
}

}  // namespace ikf
