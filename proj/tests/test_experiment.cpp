#include <doctest.h>

#include <sstream>

#include "ikf/errors.hpp"
#include "ikf/experiment.hpp"
#include "ikf/interleave.hpp"
#include "test_support.hpp"

using namespace ikf;
using ikf::testing::relative_error;
using ikf::testing::stacked_qr_solution;

namespace {

// Centring written out independently of center_block.
std::vector<DataBlock> centred_copy(const std::vector<DataBlock>& blocks, std::size_t count) {
    std::vector<DataBlock> out;
    for (std::size_t i = 0; i < count; ++i) {
        DataBlock b = blocks[i];
        b.targets.array() -= b.targets.mean();
        b.features.rowwise() -= b.features.colwise().mean();
        out.push_back(b);
    }
    return out;
}

ExperimentConfig small_config(std::size_t iterations) {
    ExperimentConfig c;
    c.iterations = iterations;
    return c;
}

}  // namespace

TEST_CASE("scenario names round-trip") {
    for (Scenario s : kAllScenarios) CHECK(parse_scenario(scenario_name(s)) == s);
    CHECK(scenario_name(Scenario::InterleavedBirdFirst) == "interleaved_bird_first");
    CHECK_THROWS_AS(parse_scenario("penguins"), DomainError);
}

TEST_CASE("ExperimentConfig validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.m = 5;
    CHECK_THROWS_AS(c.validate(), InvalidSchedule);
    c = ExperimentConfig{};
    c.alpha = 1.5;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = ExperimentConfig{};
    c.iterations = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = ExperimentConfig{};
    c.scenarios = {Scenario::BirdsOnly, Scenario::BirdsOnly};
    CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("bias_metric examples") {
    CHECK(bias_metric(Vector::Constant(3, 1.5), Vector::Constant(3, 1.5)) == 0.0);
    CHECK(bias_metric((Vector(2) << 1.0, -1.0).finished(), Vector::Zero(2)) == 0.0);
    CHECK(bias_metric((Vector(3) << 3.0, 5.0, 7.0).finished(), Vector::Constant(3, 1.0)) == doctest::Approx(4.0));
    CHECK_THROWS_AS(bias_metric(Vector::Zero(2), Vector::Zero(3)), DimensionMismatch);
}

TEST_CASE("mse_metric examples") {
    const std::vector<DataBlock> one{{Vector::Constant(1, 2.0), Matrix::Constant(1, 1, 1.0)}};
    CHECK(mse_metric(Vector::Zero(1), one) == 4.0);
    CHECK(mse_metric(Vector::Constant(1, 2.0), one) == 0.0);
    CHECK_THROWS_AS(mse_metric(Vector::Zero(1), std::vector<DataBlock>{}), EmptyInput);
}

TEST_CASE("mean_and_se") {
    const std::vector<double> single{3.5};
    CHECK(mean_and_se(single).mean == 3.5);
    CHECK(mean_and_se(single).se == 0.0);
    const std::vector<double> three{1.0, 2.0, 3.0};
    CHECK(mean_and_se(three).mean == doctest::Approx(2.0));
    CHECK(mean_and_se(three).se == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK_THROWS_AS(mean_and_se(std::vector<double>{}), EmptyInput);
}

TEST_CASE("run_scenario against direct computations") {
    ExperimentConfig config;
    const auto [bird, fish] = experiment_populations(config);
    const auto data = gen_iteration(bird, fish, config.generation_plan(), SeedPlan{config.master_seed}, 0);

    SUBCASE("single-population scenarios are batch fits on growing prefixes") {
        const std::pair<Scenario, const std::vector<DataBlock>*> cases[] = {
            {Scenario::BirdsOnly, &data.birds},
            {Scenario::FishOnly, &data.fish},
            {Scenario::PenguinOnly, &data.penguin_train}};
        for (const auto& [scenario, blocks] : cases) {
            const auto psis = run_scenario(scenario, data, config);
            REQUIRE(psis.size() == config.m);
            for (std::size_t step = 1; step <= config.m; ++step) {
                CHECK(relative_error(psis[step - 1], stacked_qr_solution(centred_copy(*blocks, step))) < 1e-8);
            }
        }
    }
    SUBCASE("interleaved orders agree from step 2 on even steps") {
        const auto a = run_scenario(Scenario::InterleavedBirdFirst, data, config);
        const auto b = run_scenario(Scenario::InterleavedFishFirst, data, config);
        REQUIRE(a.size() == config.m);
        for (std::size_t step = 2; step <= config.m; step += 2) {
            CHECK(relative_error(a[step - 1], b[step - 1]) < 1e-10);
        }
        // Step 1 sees only one population.
        CHECK(relative_error(a[0], b[0]) > 1e-3);
    }
}

TEST_CASE("zero noise: penguin-only estimates equal r_p at every step") {
    ExperimentConfig config;
    config.noise_sd = 0.0;
    const auto [bird, fish] = experiment_populations(config);
    const auto data = gen_iteration(bird, fish, config.generation_plan(), SeedPlan{config.master_seed}, 4);
    for (const Vector& psi : run_scenario(Scenario::PenguinOnly, data, config)) {
        CHECK(relative_error(psi, data.penguin_weights) < 1e-8);
    }

    config.iterations = 20;
    config.scenarios = {Scenario::PenguinOnly};
    const auto result = run_monte_carlo(config, 1);
    for (const auto& row : result.metrics) {
        CHECK(std::abs(row.mean_bias) < 1e-8);
        CHECK(row.mean_mse < 1e-12);
    }
}

TEST_CASE("run_monte_carlo with one iteration matches a hand computation") {
    ExperimentConfig config = small_config(1);
    const auto result = run_monte_carlo(config, 1);
    REQUIRE(result.metrics.size() == 30);
    CHECK(result.n_failed == 0);
    CHECK(result.iterations_run == 1);

    const auto [bird, fish] = experiment_populations(config);
    const auto data = gen_iteration(bird, fish, config.generation_plan(), SeedPlan{config.master_seed}, 0);
    const auto test = centred_copy(data.penguin_test, config.m);
    std::size_t row = 0;
    for (Scenario s : kAllScenarios) {
        const auto psis = run_scenario(s, data, config);
        for (std::size_t step = 0; step < config.m; ++step, ++row) {
            const StepMetrics& got = result.metrics[row];
            CHECK(got.scenario == s);
            CHECK(got.step == step + 1);
            CHECK(got.se_bias == 0.0);
            CHECK(got.se_mse == 0.0);
            CHECK(got.mean_bias == doctest::Approx((psis[step] - data.penguin_weights).mean()).epsilon(1e-12));
            double sq = 0.0;
            Eigen::Index rows = 0;
            for (const auto& b : test) {
                sq += (b.targets - b.features * psis[step]).squaredNorm();
                rows += b.rows();
            }
            CHECK(got.mean_mse == doctest::Approx(sq / static_cast<double>(rows)).epsilon(1e-12));
        }
    }
}

TEST_CASE("run_monte_carlo is independent of the thread count") {
    ExperimentConfig config = small_config(40);
    const auto one = run_monte_carlo(config, 1);
    const auto three = run_monte_carlo(config, 3);
    REQUIRE(one.metrics.size() == three.metrics.size());
    for (std::size_t i = 0; i < one.metrics.size(); ++i) {
        CHECK(one.metrics[i].mean_bias == three.metrics[i].mean_bias);
        CHECK(one.metrics[i].mean_mse == three.metrics[i].mean_mse);
        CHECK(one.metrics[i].se_bias == three.metrics[i].se_bias);
        CHECK(one.metrics[i].se_mse == three.metrics[i].se_mse);
    }
}

TEST_CASE("standard errors shrink like one over root N") {
    ExperimentConfig config;
    config.scenarios = {Scenario::PenguinOnly, Scenario::InterleavedBirdFirst};
    config.iterations = 500;
    const auto small = run_monte_carlo(config, 0);
    config.iterations = 5000;
    const auto large = run_monte_carlo(config, 0);
    const double expected = std::sqrt(10.0);
    for (std::size_t i = 0; i < small.metrics.size(); ++i) {
        const double ratio_bias = small.metrics[i].se_bias / large.metrics[i].se_bias;
        const double ratio_mse = small.metrics[i].se_mse / large.metrics[i].se_mse;
        CHECK(ratio_bias >= expected / 2.0);
        CHECK(ratio_bias <= expected * 2.0);
        CHECK(ratio_mse >= expected / 2.0);
        CHECK(ratio_mse <= expected * 2.0);
    }
}

TEST_CASE("results CSV round trip") {
    const auto result = run_monte_carlo(small_config(5), 1);
    std::stringstream buffer;
    write_results_csv(buffer, result);
    std::string header;
    std::getline(std::stringstream(buffer.str()), header);
    CHECK(header == "scenario,step,mean_bias,se_bias,mean_mse,se_mse,n_failed");

    const auto rows = read_results_csv(buffer);
    REQUIRE(rows.size() == 30);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].scenario == result.metrics[i].scenario);
        CHECK(rows[i].step == result.metrics[i].step);
        CHECK(rows[i].mean_bias == result.metrics[i].mean_bias);
        CHECK(rows[i].se_bias == result.metrics[i].se_bias);
        CHECK(rows[i].mean_mse == result.metrics[i].mean_mse);
        CHECK(rows[i].se_mse == result.metrics[i].se_mse);
    }

    std::stringstream bad("scenario,step\n");
    CHECK_THROWS_AS(read_results_csv(bad), DomainError);
    std::stringstream garbled("scenario,step,mean_bias,se_bias,mean_mse,se_mse,n_failed\nbirds_only,x,1,1,1,1,0\n");
    CHECK_THROWS_AS(read_results_csv(garbled), DomainError);
}

TEST_CASE("too many singular iterations abort the run") {
    ExperimentConfig config = small_config(10);
    config.n = 4;  // fewer rows than q = 6: the first update is always singular
    CHECK_THROWS_AS(run_monte_carlo(config, 1), DataQualityError);
}
