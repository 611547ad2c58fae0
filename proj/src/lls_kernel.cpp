#include "ikf/lls_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ikf/errors.hpp"

namespace ikf {

namespace {

void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
    if (got != want) {
        throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(want) +
                                ", got " + std::to_string(got));
    }
}

}  // namespace

void DataBlock::validate() const {
    if (features.rows() < 1 || features.cols() < 1) {
        throw DimensionMismatch("data block must have at least one row and one column");
    }
    require_dim(targets.size(), features.rows(), "target length vs feature rows");
    if (!targets.allFinite() || !features.allFinite()) {
        throw DomainError("data block contains non-finite entries");
    }
}

FilterState init_state(Eigen::Index q, const Vector& psi0) {
    if (q < 1) throw DimensionMismatch("dimension q must be at least 1");
    require_dim(psi0.size(), q, "initial estimate length");
    if (!psi0.allFinite()) throw DomainError("initial estimate contains non-finite entries");
    return FilterState{Matrix::Zero(q, q), psi0, 0};
}

FilterState init_state(Eigen::Index q) { return init_state(q, Vector::Zero(std::max<Eigen::Index>(q, 0))); }

Matrix gram_matrix(const Matrix& features) {
    Matrix g = features.transpose() * features;
    return 0.5 * (g + g.transpose());
}

namespace detail {

bool cholesky_solve(const Matrix& spd, const Vector& rhs, Vector& out) {
    const Eigen::Index q = spd.rows();
    Matrix lower = Matrix::Zero(q, q);
    double max_pivot = 0.0;
    double min_pivot = 0.0;
    for (Eigen::Index j = 0; j < q; ++j) {
        double pivot = spd(j, j);
        for (Eigen::Index k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
        if (!(pivot > 0.0)) return false;
        max_pivot = j == 0 ? pivot : std::max(max_pivot, pivot);
        min_pivot = j == 0 ? pivot : std::min(min_pivot, pivot);
        const double diag = std::sqrt(pivot);
        lower(j, j) = diag;
        for (Eigen::Index i = j + 1; i < q; ++i) {
            double s = spd(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / diag;
        }
    }
    if (min_pivot <= kPivotRatioThreshold * max_pivot) return false;

    out = lower.triangularView<Eigen::Lower>().solve(rhs);
    lower.transpose().triangularView<Eigen::Upper>().solveInPlace(out);
    return true;
}

}  // namespace detail

FilterState kf_step(const FilterState& state, const DataBlock& block) {
    block.validate();
    require_dim(block.cols(), state.dim(), "block column count vs state dimension");

    const std::size_t step = state.steps_taken + 1;
    FilterState next;
    next.gram = state.gram + gram_matrix(block.features);
    next.steps_taken = step;

    const Vector residual = block.targets - block.features * state.psi;
    const Vector rhs = block.features.transpose() * residual;
    Vector delta;
    if (!detail::cholesky_solve(next.gram, rhs, delta)) {
        throw SingularUpdate(step, "accumulated Gram matrix is not positive definite");
    }
    next.psi = state.psi + delta;
    return next;
}

std::vector<FilterState> run_blocks(const Vector& psi0, std::span<const DataBlock> blocks) {
    if (blocks.empty()) throw EmptyInput("run_blocks: no data blocks");
    std::vector<FilterState> trajectory;
    trajectory.reserve(blocks.size());
    FilterState state = init_state(blocks.front().cols(), psi0);
    for (const DataBlock& block : blocks) {
        state = kf_step(state, block);
        trajectory.push_back(state);
    }
    return trajectory;
}

Vector solve_normal_equations(const Matrix& gram, const Vector& rhs) {
    require_dim(rhs.size(), gram.rows(), "normal equations right-hand side");
    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success) throw SingularSystem("LDL^t factorization failed");
    const Vector d = ldlt.vectorD();
    const double max_pivot = d.maxCoeff();
    const double min_pivot = d.minCoeff();
    if (!(max_pivot > 0.0) || min_pivot <= kPivotRatioThreshold * max_pivot) {
        throw SingularSystem("normal matrix is singular or indefinite (pivot ratio " +
                             std::to_string(max_pivot > 0.0 ? min_pivot / max_pivot : 0.0) + ")");
    }
    return ldlt.solve(rhs);
}

Vector batch_lls(std::span<const DataBlock> blocks) {
    if (blocks.empty()) throw EmptyInput("batch_lls: no data blocks");
    const Eigen::Index q = blocks.front().cols();
    Matrix normal = Matrix::Zero(q, q);
    Vector rhs = Vector::Zero(q);
    for (const DataBlock& block : blocks) {
        block.validate();
        require_dim(block.cols(), q, "block column count");
        normal.noalias() += block.features.transpose() * block.features;
        rhs.noalias() += block.features.transpose() * block.targets;
    }
    return solve_normal_equations(normal, rhs);
}

double cost(std::span<const DataBlock> blocks, const Vector& r) {
    double total = 0.0;
    for (const DataBlock& block : blocks) {
        require_dim(block.targets.size(), block.rows(), "target length vs feature rows");
        require_dim(block.cols(), r.size(), "block column count vs parameter length");
        total += (block.targets - block.features * r).squaredNorm();
    }
    return total;
}

}  // namespace ikf
