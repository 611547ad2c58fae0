#pragma once

// Block-recursive least squares (the Kalman filter specialised to a constant
// state) and a batch normal-equations oracle for it.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ikf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One (targets, features) pair: an n-vector and an n x q matrix.
struct DataBlock {
    Vector targets;
    Matrix features;

    Eigen::Index rows() const noexcept { return features.rows(); }
    Eigen::Index cols() const noexcept { return features.cols(); }

    /// Throws DimensionMismatch / DomainError if the block is malformed
    /// (row count mismatch, empty, or non-finite entries).
    void validate() const;
};

/// State of the recursion after `steps_taken` blocks.
struct FilterState {
    Matrix gram;  // accumulated sum of X^t X
    Vector psi;   // current estimate
    std::size_t steps_taken = 0;

    Eigen::Index dim() const noexcept { return psi.size(); }
};

/// Pivot ratio below which a symmetric positive-definite solve is rejected.
inline constexpr double kPivotRatioThreshold = 1e-12;

FilterState init_state(Eigen::Index q, const Vector& psi0);
FilterState init_state(Eigen::Index q);  // psi0 = 0

/// One recursion step:
///   H' = H + X^t X,  psi' = psi + H'^{-1} X^t (y - X psi).
/// The solve uses a Cholesky factorization of H'; an explicit inverse is never
/// formed. Throws SingularUpdate naming the (1-based) step if H' is not
/// numerically positive definite.
FilterState kf_step(const FilterState& state, const DataBlock& block);

/// Runs kf_step over `blocks` in order. Element i of the result is the state
/// after blocks[0..i].
std::vector<FilterState> run_blocks(const Vector& psi0, std::span<const DataBlock> blocks);

/// Minimiser of cost(blocks, r), from the stacked normal equations
/// (sum X^t X) r = sum X^t y. Uses a pivoted LDL^t factorization, a code path
/// separate from kf_step. Throws SingularSystem.
Vector batch_lls(std::span<const DataBlock> blocks);

/// Sum over blocks of ||y - X r||^2.
double cost(std::span<const DataBlock> blocks, const Vector& r);

/// Solves G x = rhs for symmetric G with the LDL^t route used by batch_lls.
/// Throws SingularSystem when the pivot ratio test fails.
Vector solve_normal_equations(const Matrix& gram, const Vector& rhs);

/// X^t X, symmetrised.
Matrix gram_matrix(const Matrix& features);

namespace detail {

/// Unpivoted Cholesky solve with the pivot-ratio singularity test.
/// Returns false (leaving `out` untouched) if the matrix is rejected.
bool cholesky_solve(const Matrix& spd, const Vector& rhs, Vector& out);

}  // namespace detail

}  // namespace ikf
