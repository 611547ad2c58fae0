#include "ikf/experiment.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ikf/dataset_io.hpp"
#include "ikf/errors.hpp"
#include "ikf/interleave.hpp"
#include "parallel.hpp"

namespace ikf {

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::BirdsOnly: return "birds_only";
        case Scenario::FishOnly: return "fish_only";
        case Scenario::PenguinOnly: return "penguin_only";
        case Scenario::InterleavedBirdFirst: return "interleaved_bird_first";
        case Scenario::InterleavedFishFirst: return "interleaved_fish_first";
    }
    return "unknown";
}

Scenario parse_scenario(const std::string& name) {
    for (Scenario s : kAllScenarios) {
        if (scenario_name(s) == name) return s;
    }
    throw DomainError("unknown scenario '" + name + "'");
}

void ExperimentConfig::validate() const {
    MixtureSpec{alpha};
    if (n < 1) throw DomainError("n must be at least 1");
    if (q < 1) throw DomainError("q must be at least 1");
    if (m < 2 || m % 2 != 0) throw InvalidSchedule("m must be even and at least 2, got " + std::to_string(m));
    if (iterations < 1) throw DomainError("iterations must be at least 1");
    if (!(noise_sd >= 0.0)) throw DomainError("noise_sd must be non-negative");
    if (!(feature_sd > 0.0)) throw DomainError("feature_sd must be positive");
    if (scenarios.empty()) throw DomainError("at least one scenario is required");
    if (std::set<Scenario>(scenarios.begin(), scenarios.end()).size() != scenarios.size()) {
        throw DomainError("duplicate scenario in config");
    }
}

GenerationPlan ExperimentConfig::generation_plan() const {
    GenerationPlan plan;
    plan.n = n;
    plan.q = q;
    plan.m = m;
    plan.rule = PenguinRule{penguin_mode, MixtureSpec(alpha)};
    plan.penguin_noise_sd = noise_sd;
    plan.held_out_test = held_out_test;
    return plan;
}

std::pair<PopulationSpec, PopulationSpec> experiment_populations(const ExperimentConfig& config) {
    auto [bird, fish] = gen_population_params(config.q, SeedPlan{config.master_seed});
    for (PopulationSpec* p : {&bird, &fish}) {
        p->feature_sd = config.feature_sd;
        p->noise_sd = config.noise_sd;
    }
    return {bird, fish};
}

namespace {

std::vector<Vector> estimates(const std::vector<FilterState>& trajectory) {
    std::vector<Vector> out;
    out.reserve(trajectory.size());
    for (const FilterState& s : trajectory) out.push_back(s.psi);
    return out;
}

}  // namespace

std::vector<Vector> run_scenario(Scenario scenario, const IterationData& data, const ExperimentConfig& config) {
    const Vector psi0 = Vector::Zero(config.q);
    const std::size_t k = config.m / 2;
    auto single = [&](const std::vector<DataBlock>& blocks) {
        if (blocks.size() < config.m) throw DimensionMismatch("iteration data has fewer than m blocks");
        const auto centred = center_blocks(std::span(blocks).first(config.m));
        return estimates(run_blocks(psi0, centred));
    };
    auto interleaved = [&](InterleaveOrder order) {
        if (data.birds.size() < k || data.fish.size() < k) {
            throw DimensionMismatch("iteration data has fewer than m/2 bird or fish blocks");
        }
        InterleaveOptions options;
        options.order = order;
        return estimates(run_interleaved(std::span(data.birds).first(k), std::span(data.fish).first(k),
                                         MixtureSpec(config.alpha), psi0, options));
    };
    switch (scenario) {
        case Scenario::BirdsOnly: return single(data.birds);
        case Scenario::FishOnly: return single(data.fish);
        case Scenario::PenguinOnly: return single(data.penguin_train);
        case Scenario::InterleavedBirdFirst: return interleaved(InterleaveOrder::BirdFirst);
        case Scenario::InterleavedFishFirst: return interleaved(InterleaveOrder::FishFirst);
    }
    throw DomainError("unknown scenario");
}

double bias_metric(const Vector& psi, const Vector& penguin_weights) {
    if (psi.size() != penguin_weights.size() || psi.size() == 0) {
        throw DimensionMismatch("bias_metric: estimate and truth lengths differ");
    }
    return (psi - penguin_weights).mean();
}

double mse_metric(const Vector& psi, std::span<const DataBlock> penguin_test) {
    return mean_squared_prediction_error(penguin_test, psi);
}

MeanSe mean_and_se(std::span<const double> values) {
    if (values.empty()) throw EmptyInput("mean_and_se: no values");
    double sum = 0.0;
    for (double v : values) sum += v;
    const double n = static_cast<double>(values.size());
    const double mean = sum / n;
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

MonteCarloResult run_monte_carlo(const ExperimentConfig& config, unsigned threads) {
    config.validate();
    const auto [bird, fish] = experiment_populations(config);
    const GenerationPlan plan = config.generation_plan();
    const SeedPlan seed{config.master_seed};
    const std::size_t n_scen = config.scenarios.size();
    const std::size_t m = config.m;
    const std::size_t width = n_scen * m;

    // Per-iteration rows, written by index so the reduction below is
    // independent of scheduling.
    std::vector<double> bias(config.iterations * width);
    std::vector<double> mse(config.iterations * width);
    std::vector<char> failed(config.iterations, 0);

    detail::parallel_for(config.iterations, threads, [&](std::size_t it) {
        const IterationData data = gen_iteration(bird, fish, plan, seed, it);
        const std::vector<DataBlock> test = center_blocks(data.penguin_test);
        try {
            for (std::size_t s = 0; s < n_scen; ++s) {
                const auto psis = run_scenario(config.scenarios[s], data, config);
                for (std::size_t step = 0; step < m; ++step) {
                    bias[it * width + s * m + step] = bias_metric(psis[step], data.penguin_weights);
                    mse[it * width + s * m + step] = mse_metric(psis[step], test);
                }
            }
        } catch (const SingularUpdate&) {
            failed[it] = 1;
        }
    });

    MonteCarloResult result;
    result.bird = bird;
    result.fish = fish;
    result.penguin_weights = config.alpha * bird.weights + (1.0 - config.alpha) * fish.weights;
    result.iterations_run = config.iterations;
    for (char f : failed) result.n_failed += f ? 1 : 0;
    if (result.n_failed * 100 > config.iterations) {
        throw DataQualityError(std::to_string(result.n_failed) + " of " + std::to_string(config.iterations) +
                               " iterations failed (limit 1%)");
    }

    std::vector<double> bias_col;
    std::vector<double> mse_col;
    bias_col.reserve(config.iterations);
    mse_col.reserve(config.iterations);
    for (std::size_t s = 0; s < n_scen; ++s) {
        for (std::size_t step = 0; step < m; ++step) {
            bias_col.clear();
            mse_col.clear();
            for (std::size_t it = 0; it < config.iterations; ++it) {
                if (failed[it]) continue;
                bias_col.push_back(bias[it * width + s * m + step]);
                mse_col.push_back(mse[it * width + s * m + step]);
            }
            const MeanSe b = mean_and_se(bias_col);
            const MeanSe e = mean_and_se(mse_col);
            result.metrics.push_back({config.scenarios[s], step + 1, b.mean, e.mean, b.se, e.se});
        }
    }
    return result;
}

void write_results_csv(std::ostream& out, const MonteCarloResult& result) {
    out << "scenario,step,mean_bias,se_bias,mean_mse,se_mse,n_failed\n";
    for (const StepMetrics& row : result.metrics) {
        out << scenario_name(row.scenario) << ',' << row.step << ',' << format_double(row.mean_bias) << ','
            << format_double(row.se_bias) << ',' << format_double(row.mean_mse) << ','
            << format_double(row.se_mse) << ',' << result.n_failed << '\n';
    }
}

std::vector<StepMetrics> read_results_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "scenario,step,mean_bias,se_bias,mean_mse,se_mse,n_failed") {
        throw DomainError("results CSV: unexpected header");
    }
    std::vector<StepMetrics> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 7) throw DomainError("results CSV: expected 7 fields in '" + line + "'");
        try {
            rows.push_back({parse_scenario(fields[0]), std::stoul(fields[1]), std::stod(fields[2]),
                            std::stod(fields[4]), std::stod(fields[3]), std::stod(fields[5])});
        } catch (const std::logic_error&) {
            throw DomainError("results CSV: malformed number in '" + line + "'");
        }
    }
    return rows;
}

}  // namespace ikf
