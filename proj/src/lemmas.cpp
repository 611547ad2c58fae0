#include "ikf/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ikf/errors.hpp"
#include "ikf/interleave.hpp"
#include "ikf/synthdata.hpp"
#include "parallel.hpp"

namespace ikf {

std::string check_status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "PASS";
        case CheckStatus::Fail: return "FAIL";
        case CheckStatus::SkippedPrecondition: return "SKIPPED-precondition";
    }
    return "UNKNOWN";
}

ClosedFormCheckResult check_two_step_closed_form(std::uint64_t seed, std::size_t trials,
                                                 const std::vector<double>& alphas) {
    if (trials < 1) throw DomainError("trials must be at least 1");
    ClosedFormCheckResult result;
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(t)));
        std::uniform_int_distribution<Eigen::Index> q_dist(1, 8);
        const Eigen::Index q = q_dist(rng);
        const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(q + 2, 50)(rng);
        std::normal_distribution<double> z(0.0, 1.0);
        std::uniform_real_distribution<double> w(-5.0, 5.0);
        auto draw_block = [&](double shift) {
            DataBlock b{Vector(n), Matrix(n, q)};
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < q; ++j) b.features(i, j) = shift + z(rng);
            Vector r(q);
            for (Eigen::Index j = 0; j < q; ++j) r(j) = w(rng);
            b.targets = b.features * r;
            for (Eigen::Index i = 0; i < n; ++i) b.targets(i) += z(rng);
            return b;
        };
        const DataBlock bird = draw_block(w(rng));
        const DataBlock fish = draw_block(w(rng));
        const DataBlock u = center_block(bird);
        const DataBlock v = center_block(fish);
        Vector psi0(q);
        for (Eigen::Index j = 0; j < q; ++j) psi0(j) = w(rng);

        for (double alpha : alphas) {
            const MixtureSpec mix(alpha);
            const Vector closed = psi2_closed_form(u.features, u.targets, v.features, v.targets, mix);
            const double scale = std::max(1.0, closed.lpNorm<Eigen::Infinity>());
            for (InterleaveOrder order : {InterleaveOrder::BirdFirst, InterleaveOrder::FishFirst}) {
                InterleaveOptions options;
                options.order = order;
                const auto trajectory = run_interleaved(std::span(&bird, 1), std::span(&fish, 1), mix, psi0, options);
                const double d = (trajectory[1].psi - closed).lpNorm<Eigen::Infinity>() / scale;
                result.max_discrepancy = std::max(result.max_discrepancy, d);
                ++result.instances;
            }
        }
    }
    return result;
}

UnbiasednessResult check_two_step_unbiasedness(const UnbiasednessConfig& config, unsigned threads) {
    if (config.iterations < 2) throw DomainError("unbiasedness check needs at least 2 iterations");
    const MixtureSpec mix(config.alpha);

    auto [bird, fish] = gen_population_params(config.q, SeedPlan{config.master_seed});
    for (PopulationSpec* p : {&bird, &fish}) {
        p->feature_mean = 0.0;
        p->feature_sd = config.feature_sd;
        p->noise_sd = config.noise_sd;
    }
    bird.column_sd = config.bird_column_sd;
    fish.column_sd = config.fish_column_sd;
    bird.validate();
    fish.validate();

    UnbiasednessResult result;
    result.bird_weights = bird.weights;
    result.fish_weights = fish.weights;
    result.penguin_weights = mix.alpha() * bird.weights + (1.0 - mix.alpha()) * fish.weights;

    const double reference_sd = bird.sd_of_column(0);
    for (Eigen::Index j = 0; j < config.q; ++j) {
        if (bird.sd_of_column(j) != reference_sd || fish.sd_of_column(j) != reference_sd) {
            result.status = CheckStatus::SkippedPrecondition;
            result.note = "feature covariance is not a common multiple of the identity";
            return result;
        }
    }

    const SeedPlan seed{config.master_seed};
    const std::size_t q = static_cast<std::size_t>(config.q);
    std::vector<double> psi2(config.iterations * q);
    detail::parallel_for(config.iterations, threads, [&](std::size_t it) {
        const auto birds = gen_blocks(bird, config.n, config.q, 1, seed, Stream::Bird, it);
        const auto fishes = gen_blocks(fish, config.n, config.q, 1, seed, Stream::Fish, it);
        const auto trajectory = run_interleaved(birds, fishes, mix, Vector::Zero(config.q));
        for (std::size_t j = 0; j < q; ++j) psi2[it * q + j] = trajectory[1].psi(static_cast<Eigen::Index>(j));
    });

    result.mean_psi2 = Vector::Zero(config.q);
    result.standard_error = Vector::Zero(config.q);
    const double n_it = static_cast<double>(config.iterations);
    for (std::size_t j = 0; j < q; ++j) {
        double sum = 0.0;
        for (std::size_t it = 0; it < config.iterations; ++it) sum += psi2[it * q + j];
        const double mean = sum / n_it;
        double ss = 0.0;
        for (std::size_t it = 0; it < config.iterations; ++it) {
            const double d = psi2[it * q + j] - mean;
            ss += d * d;
        }
        result.mean_psi2(static_cast<Eigen::Index>(j)) = mean;
        result.standard_error(static_cast<Eigen::Index>(j)) = std::sqrt(ss / (n_it - 1.0) / n_it);
    }
    result.max_deviation = (result.mean_psi2 - result.penguin_weights).lpNorm<Eigen::Infinity>();
    result.bound = config.se_multiplier * result.standard_error.maxCoeff();
    result.status = result.max_deviation <= result.bound ? CheckStatus::Pass : CheckStatus::Fail;
    return result;
}

}  // namespace ikf
