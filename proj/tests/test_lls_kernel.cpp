#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "ikf/errors.hpp"
#include "ikf/lls_kernel.hpp"
#include "test_support.hpp"

using namespace ikf;
using ikf::testing::random_block;
using ikf::testing::random_instance;
using ikf::testing::relative_error;
using ikf::testing::stacked_qr_solution;

namespace {

DataBlock scalar_block(double y, double x) { return DataBlock{Vector::Constant(1, y), Matrix::Constant(1, 1, x)}; }

}  // namespace

TEST_CASE("init_state zeroes H and keeps psi0") {
    auto s = init_state(2, Vector::Zero(2));
    CHECK(s.gram == Matrix::Zero(2, 2));
    CHECK(s.psi == Vector::Zero(2));
    CHECK(s.steps_taken == 0);

    s = init_state(1, Vector::Constant(1, 5.0));
    CHECK(s.gram(0, 0) == 0.0);
    CHECK(s.psi(0) == 5.0);

    s = init_state(6);
    CHECK(s.gram.rows() == 6);
    CHECK(s.gram.isZero(0.0));
    CHECK(s.psi.isZero(0.0));

    CHECK_THROWS_AS(init_state(3, Vector::Zero(2)), DimensionMismatch);
    CHECK_THROWS_AS(init_state(0), DimensionMismatch);
}

TEST_CASE("kf_step scalar examples") {
    SUBCASE("arbitrary psi0 cancels on the first step") {
        const auto s = kf_step(init_state(1, Vector::Constant(1, 5.0)), scalar_block(2.0, 1.0));
        CHECK(s.gram(0, 0) == 1.0);
        CHECK(s.psi(0) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(s.steps_taken == 1);
    }
    SUBCASE("running mean") {
        FilterState s{Matrix::Constant(1, 1, 1.0), Vector::Constant(1, 1.0), 1};
        s = kf_step(s, scalar_block(3.0, 1.0));
        CHECK(s.gram(0, 0) == 2.0);
        CHECK(s.psi(0) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(s.steps_taken == 2);
    }
}

TEST_CASE("kf_step errors") {
    std::mt19937_64 rng(3);
    SUBCASE("rank-deficient first block names step 1") {
        const DataBlock short_block = random_block(rng, 2, 4);
        try {
            kf_step(init_state(4), short_block);
            FAIL("expected SingularUpdate");
        } catch (const SingularUpdate& e) {
            CHECK(e.step() == 1);
        }
    }
    SUBCASE("zero block on an empty state") {
        const DataBlock zero{Vector::Zero(5), Matrix::Zero(5, 2)};
        CHECK_THROWS_AS(kf_step(init_state(2), zero), SingularUpdate);
    }
    SUBCASE("duplicated column") {
        DataBlock b = random_block(rng, 10, 3);
        b.features.col(2) = b.features.col(0);
        CHECK_THROWS_AS(kf_step(init_state(3), b), SingularUpdate);
    }
    SUBCASE("column count mismatch") {
        CHECK_THROWS_AS(kf_step(init_state(3), random_block(rng, 10, 2)), DimensionMismatch);
    }
    SUBCASE("target length mismatch") {
        DataBlock b = random_block(rng, 10, 2);
        b.targets.resize(9);
        CHECK_THROWS_AS(kf_step(init_state(2), b), DimensionMismatch);
    }
    SUBCASE("non-finite entries") {
        DataBlock b = random_block(rng, 10, 2);
        b.features(3, 1) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(kf_step(init_state(2), b), DomainError);
    }
}

TEST_CASE("run_blocks basics") {
    const std::vector<DataBlock> blocks{scalar_block(1.0, 1.0), scalar_block(3.0, 1.0)};
    const auto traj = run_blocks(Vector::Zero(1), blocks);
    REQUIRE(traj.size() == 2);
    CHECK(traj[0].psi(0) == doctest::Approx(1.0));
    CHECK(traj[1].psi(0) == doctest::Approx(2.0));
    CHECK(batch_lls(blocks)(0) == doctest::Approx(2.0));

    CHECK_THROWS_AS(run_blocks(Vector::Zero(1), std::vector<DataBlock>{}), EmptyInput);

    SUBCASE("width mismatch at a later step") {
        std::mt19937_64 rng(9);
        std::vector<DataBlock> bad{random_block(rng, 10, 2), random_block(rng, 10, 2), random_block(rng, 10, 3)};
        CHECK_THROWS_AS(run_blocks(Vector::Zero(2), bad), DimensionMismatch);
    }
}

TEST_CASE("noiseless data is recovered exactly") {
    std::mt19937_64 rng(11);
    const Vector truth = (Vector(6) << 1.5, -2.0, 0.25, 4.0, -3.5, 0.0).finished();
    std::vector<DataBlock> blocks;
    for (int i = 0; i < 6; ++i) {
        DataBlock b = random_block(rng, 100, 6, -2.0);
        b.targets = b.features * truth;
        blocks.push_back(b);
    }
    const auto traj = run_blocks(Vector::Zero(6), blocks);
    CHECK(relative_error(traj.back().psi, truth) < 1e-8);
    CHECK(relative_error(batch_lls(blocks), truth) < 1e-8);
    CHECK(cost(blocks, truth) == doctest::Approx(0.0));
}

TEST_CASE("batch_lls examples and errors") {
    std::mt19937_64 rng(5);
    SUBCASE("identity design returns the targets") {
        DataBlock b{Vector(4), Matrix::Identity(4, 4)};
        b.targets << 3.0, -1.0, 0.5, 7.0;
        const std::vector<DataBlock> blocks{b};
        CHECK(relative_error(batch_lls(blocks), b.targets) < 1e-15);
    }
    SUBCASE("random q=4 m=3 matches the recursion") {
        std::vector<DataBlock> blocks;
        for (int i = 0; i < 3; ++i) blocks.push_back(random_block(rng, 12, 4, 1.0));
        const Vector batch = batch_lls(blocks);
        CHECK(relative_error(run_blocks(Vector::Zero(4), blocks).back().psi, batch) < 1e-8);
        CHECK(relative_error(batch, stacked_qr_solution(blocks)) < 1e-8);
    }
    SUBCASE("singular normal matrix") {
        DataBlock b = random_block(rng, 10, 3);
        b.features.col(1).setZero();
        CHECK_THROWS_AS(batch_lls(std::vector<DataBlock>{b}), SingularSystem);
    }
    CHECK_THROWS_AS(batch_lls(std::vector<DataBlock>{}), EmptyInput);
}

TEST_CASE("cost examples") {
    CHECK(cost(std::vector<DataBlock>{scalar_block(2.0, 1.0)}, Vector::Zero(1)) == 4.0);
    std::mt19937_64 rng(17);
    std::vector<DataBlock> blocks;
    for (int i = 0; i < 4; ++i) blocks.push_back(random_block(rng, 15, 3));
    CHECK_THROWS_AS(cost(blocks, Vector::Zero(2)), DimensionMismatch);

    SUBCASE("batch solution minimises the cost against random points") {
        const Vector best = batch_lls(blocks);
        const double c_best = cost(blocks, best);
        std::normal_distribution<double> z(0.0, 1.0);
        for (int t = 0; t < 100; ++t) {
            Vector r = best;
            const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-4, 1)(rng));
            for (Eigen::Index j = 0; j < r.size(); ++j) r(j) += scale * z(rng);
            CHECK(c_best <= cost(blocks, r));
        }
    }
}

TEST_CASE("property: recursion equals batch and the stacked QR oracle") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = random_instance(rng);
        const Vector batch = batch_lls(inst.blocks);
        const Vector recursive = run_blocks(Vector::Zero(inst.q), inst.blocks).back().psi;
        CHECK(relative_error(recursive, batch) < 1e-8);
        CHECK(relative_error(batch, stacked_qr_solution(inst.blocks)) < 1e-8);
    }
}

TEST_CASE("property: trajectories do not depend on psi0") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> z(0.0, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto inst = random_instance(rng);
        Vector a(inst.q), b(inst.q);
        for (Eigen::Index j = 0; j < inst.q; ++j) a(j) = z(rng), b(j) = z(rng);
        const auto ta = run_blocks(a, inst.blocks);
        const auto tb = run_blocks(b, inst.blocks);
        for (std::size_t i = 0; i < ta.size(); ++i) {
            CHECK(relative_error(ta[i].psi, tb[i].psi) < 1e-10);
            CHECK(ta[i].gram == tb[i].gram);
        }
    }
}

TEST_CASE("property: H is symmetric and grows monotonically") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto inst = random_instance(rng);
        const auto traj = run_blocks(Vector::Zero(inst.q), inst.blocks);
        Matrix previous = Matrix::Zero(inst.q, inst.q);
        for (const auto& s : traj) {
            const double scale = std::max(1.0, s.gram.cwiseAbs().maxCoeff());
            CHECK((s.gram - s.gram.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
            CHECK(s.psi.allFinite());
            const Eigen::SelfAdjointEigenSolver<Matrix> eig(s.gram - previous);
            CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * scale);
            previous = s.gram;
        }
        const Eigen::SelfAdjointEigenSolver<Matrix> final_eig(traj.front().gram);
        CHECK(final_eig.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("property: block order does not change the final estimate") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        auto inst = random_instance(rng, 6, 8, 40);
        const Vector reference = run_blocks(Vector::Zero(inst.q), inst.blocks).back().psi;
        // Keep a full-rank block first so every prefix stays positive definite.
        std::shuffle(inst.blocks.begin() + 1, inst.blocks.end(), rng);
        std::reverse(inst.blocks.begin() + 1, inst.blocks.end());
        CHECK(relative_error(run_blocks(Vector::Zero(inst.q), inst.blocks).back().psi, reference) < 1e-8);
    }
}

TEST_CASE("property: finite-difference gradient vanishes at the batch solution") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        const auto inst = random_instance(rng);
        const Vector r = batch_lls(inst.blocks);
        const double c = cost(inst.blocks, r);
        const double h = 1e-5;
        double worst = 0.0;
        for (Eigen::Index j = 0; j < inst.q; ++j) {
            Vector plus = r, minus = r;
            plus(j) += h;
            minus(j) -= h;
            worst = std::max(worst, std::abs((cost(inst.blocks, plus) - cost(inst.blocks, minus)) / (2 * h)));
        }
        CHECK(worst <= 1e-4 * (1.0 + std::abs(c)));
    }
}
