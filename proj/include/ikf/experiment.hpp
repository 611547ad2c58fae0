#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ikf/synthdata.hpp"

namespace ikf {

/// Training regimes compared in the bias/MSE experiment. Enum order is the
/// row order of the results CSV.
enum class Scenario {
    BirdsOnly,
    FishOnly,
    PenguinOnly,
    InterleavedBirdFirst,
    InterleavedFishFirst,
};

inline constexpr std::array<Scenario, 5> kAllScenarios{
    Scenario::BirdsOnly, Scenario::FishOnly, Scenario::PenguinOnly,
    Scenario::InterleavedBirdFirst, Scenario::InterleavedFishFirst};

std::string scenario_name(Scenario s);
/// Throws DomainError for unknown names.
Scenario parse_scenario(const std::string& name);

struct ExperimentConfig {
    double alpha = 0.25;
    Eigen::Index n = 100;
    Eigen::Index q = 6;
    std::size_t m = 6;
    std::size_t iterations = 5000;
    double noise_sd = 1.0;
    double feature_sd = 1.0;
    std::uint64_t master_seed = 42;
    PenguinMode penguin_mode = PenguinMode::ConvexCombination;
    std::vector<Scenario> scenarios{kAllScenarios.begin(), kAllScenarios.end()};
    bool held_out_test = true;

    /// Throws DomainError / InvalidSchedule for out-of-range fields.
    void validate() const;
    GenerationPlan generation_plan() const;
};

struct StepMetrics {
    Scenario scenario;
    std::size_t step;  // 1-based
    double mean_bias;
    double mean_mse;
    double se_bias;
    double se_mse;
};

struct MonteCarloResult {
    std::vector<StepMetrics> metrics;  // scenario order of the config, then step
    std::size_t iterations_run = 0;
    std::size_t n_failed = 0;
    PopulationSpec bird;
    PopulationSpec fish;
    Vector penguin_weights;
};

/// Population parameters for a config: drawn once from the params stream,
/// then given the config's feature_sd and noise_sd.
std::pair<PopulationSpec, PopulationSpec> experiment_populations(const ExperimentConfig& config);

/// Per-step estimates (m of them) for one scenario on one iteration's data.
/// Single-population scenarios run the plain recursion on centred blocks;
/// interleaved ones use the first m/2 bird and fish blocks.
std::vector<Vector> run_scenario(Scenario scenario, const IterationData& data, const ExperimentConfig& config);

/// Signed mean over coordinates of (psi - r_p).
double bias_metric(const Vector& psi, const Vector& penguin_weights);

/// Mean squared prediction error over all rows of the (centred) test blocks.
double mse_metric(const Vector& psi, std::span<const DataBlock> penguin_test);

/// Runs every iteration (in parallel when threads != 1; 0 = hardware
/// concurrency) and aggregates mean and standard error per (scenario, step).
/// Iterations where any scenario hits a singular update are excluded and
/// counted; more than 1% failures throws DataQualityError.
MonteCarloResult run_monte_carlo(const ExperimentConfig& config, unsigned threads = 0);

/// Header `scenario,step,mean_bias,se_bias,mean_mse,se_mse,n_failed`.
void write_results_csv(std::ostream& out, const MonteCarloResult& result);

/// Parses what write_results_csv wrote. Throws DomainError.
std::vector<StepMetrics> read_results_csv(std::istream& in);

/// Mean and standard error (sample sd / sqrt(N); 0 when N == 1).
struct MeanSe {
    double mean;
    double se;
};
MeanSe mean_and_se(std::span<const double> values);

}  // namespace ikf
