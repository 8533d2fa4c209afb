#pragma once

#include <string>
#include <vector>

#include "bpme/graph.hpp"
#include "bpme/matrix.hpp"
#include "bpme/model.hpp"

namespace bpme {

namespace detail {

// f(M) = sum_n P_n M^n over the finite offspring support, accumulating the
// powers of M iteratively (the P_n multiply from the left).
inline Matrix apply_genfun(const std::vector<Matrix>& step, const Matrix& M) {
    const Eigen::Index n = M.rows();
    Matrix result = step[0];
    Matrix power = Matrix::Identity(n, n);
    for (std::size_t k = 1; k < step.size(); ++k) {
        power = power * M;
        result += step[k] * power;
    }
    return result;
}

inline Matrix clamp01(Matrix m, double* max_clamp = nullptr) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double clamped = std::min(1.0, std::max(0.0, m(i, j)));
            if (max_clamp) *max_clamp = std::max(*max_clamp, std::abs(clamped - m(i, j)));
            m(i, j) = clamped;
        }
    return m;
}

}  // namespace detail

/// Evaluates the matrix generating function f(M) = sum_n P_n M^n.
/// Substochastic input gives substochastic output; stochastic stays stochastic.
inline SubstochasticMatrix apply_f(const BpmeModel& m, const SubstochasticMatrix& M) {
    if (M.size() != m.size())
        throw DimensionMismatchError("matrix dimension " + std::to_string(M.size()) +
                                     " does not match chain size " + std::to_string(m.size()));
    return SubstochasticMatrix(detail::clamp01(detail::apply_genfun(m.step_matrices, M.entries())));
}

/// Result of iterating f to its least fixed point above the zero matrix.
struct ExtinctionResult {
    SubstochasticMatrix E;
    long long iterations = 0;
    double residual = 0.0;  // sup norm of f(E) - E
    bool converged = false;
    double max_clamp = 0.0;  // largest rounding clamp applied during iteration
};

inline constexpr double kDefaultFixedPointTol = 1e-12;
inline constexpr long long kDefaultFixedPointMaxIter = 1'000'000;

/// Extinction matrix: E(i,j) is the probability that the process started with
/// one individual in state i halts in state j. Computed as the limit of
/// f^n(O); iterates are checked to be entrywise nondecreasing. Non-convergence
/// within max_iter is reported honestly, never extrapolated.
inline ExtinctionResult extinction_matrix(const BpmeModel& m,
                                          double tol = kDefaultFixedPointTol,
                                          long long max_iter = kDefaultFixedPointMaxIter) {
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    const int n = m.size();
    Matrix M = Matrix::Zero(n, n);
    double max_clamp = 0.0;
    long long it = 0;
    bool converged = false;
    while (it < max_iter) {
        ++it;
        Matrix next = detail::clamp01(detail::apply_genfun(m.step_matrices, M), &max_clamp);
        if (!entrywise_leq(M, next))
            throw NumericError("fixed-point iterates failed to be nondecreasing at iteration " +
                               std::to_string(it));
        const double step = sup_distance(next, M);
        M = std::move(next);
        if (step < tol) {
            converged = true;
            break;
        }
    }
    ExtinctionResult res{SubstochasticMatrix(M), it, 0.0, converged, max_clamp};
    res.residual = sup_distance(detail::apply_genfun(m.step_matrices, M), M);
    return res;
}

/// E^n: extinction probabilities from initial population n. n = 0 is the identity.
inline SubstochasticMatrix extinction_power(const ExtinctionResult& res, int n) {
    if (n < 0) throw ValidationError("power must be nonnegative");
    Matrix out = Matrix::Identity(res.E.size(), res.E.size());
    for (int k = 0; k < n; ++k) out = detail::clamp01(out * res.E.entries());
    return SubstochasticMatrix(out);
}

/// Survival probability from total state n.i: one minus row i of E^n.
inline double survival_probability(const ExtinctionResult& res, int n, int i) {
    if (!res.converged)
        throw NotConvergedError("extinction iteration did not converge; residual " +
                                std::to_string(res.residual));
    if (i < 0 || i >= res.E.size()) throw ValidationError("state index out of range");
    const double dead = extinction_power(res, n).row_sum(i);
    return std::min(1.0, std::max(0.0, 1.0 - dead));
}

/// Fixed-point iteration from an arbitrary substochastic starting matrix.
/// No monotonicity is assumed or checked; convergence is reported, never
/// asserted (starting points outside [O, E] are an open question).
struct FixedPointResult {
    SubstochasticMatrix limit;
    bool converged = false;
    double residual = 0.0;
    long long iterations = 0;
};

inline FixedPointResult iterate_from(const BpmeModel& m, const SubstochasticMatrix& M0,
                                     double tol = kDefaultFixedPointTol,
                                     long long max_iter = kDefaultFixedPointMaxIter) {
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    if (M0.size() != m.size())
        throw DimensionMismatchError("starting matrix dimension does not match chain size");
    Matrix M = M0.entries();
    long long it = 0;
    bool converged = false;
    while (it < max_iter) {
        ++it;
        Matrix next = detail::clamp01(detail::apply_genfun(m.step_matrices, M));
        const double step = sup_distance(next, M);
        M = std::move(next);
        if (step < tol) {
            converged = true;
            break;
        }
    }
    FixedPointResult res{SubstochasticMatrix(M), converged, 0.0, it};
    res.residual = sup_distance(detail::apply_genfun(m.step_matrices, M), M);
    return res;
}

/// Left Perron-Frobenius eigenvector of a nonnegative irreducible matrix,
/// normalized to sum 1. Power iteration runs on the shifted matrix E + I so
/// periodic matrices converge; the eigenpair is unchanged by the shift.
struct PerronVector {
    RowVector v;
    double lambda = 0.0;
    double residual = 0.0;
    long long iterations = 0;
};

inline PerronVector perron_left_vector(const SubstochasticMatrix& E,
                                       double tol = 1e-12,
                                       long long max_iter = kDefaultFixedPointMaxIter) {
    const Eigen::Index n = E.size();
    const Matrix& A = E.entries();
    if (A.maxCoeff() <= 0.0) throw ZeroMatrixError("matrix is zero; no Perron direction");
    if (!strong_connectivity_defect(A).empty())
        throw ReducibleError("matrix is reducible; left Perron vector is not well defined");

    PerronVector out;
    RowVector v = RowVector::Constant(n, 1.0 / static_cast<double>(n));
    for (long long it = 1; it <= max_iter; ++it) {
        const RowVector u = v * A;
        const double lambda = u.sum();  // since v sums to 1
        const double residual = (u - lambda * v).cwiseAbs().maxCoeff();
        out = PerronVector{v, lambda, residual, it};
        if (residual <= tol) break;
        RowVector w = u + v;  // one step of v(E + I)
        v = w / w.sum();
    }
    return out;
}

/// Numerical exploration of the long-run environment distribution on
/// survival: compares f^n(I) against E + (1 - rowsum(E)) v. Reports the gap
/// per generation; makes no pass/fail claim (the limit is conjectural).
struct ConjectureReport {
    SubstochasticMatrix extinction;
    RowVector perron;
    double perron_lambda = 0.0;
    Matrix conjectured_limit;
    std::vector<double> gap_by_generation;  // gap_by_generation[k] = sup |f^{k+1}(I) - limit|
};

inline ConjectureReport generation_environment_conjecture(
    const BpmeModel& m, int n_max, double tol = kDefaultFixedPointTol,
    long long max_iter = kDefaultFixedPointMaxIter) {
    if (n_max < 1) throw ValidationError("n_max must be >= 1");
    const ExtinctionResult ext = extinction_matrix(m, tol, max_iter);
    if (!ext.converged)
        throw NotConvergedError("extinction iteration did not converge; residual " +
                                std::to_string(ext.residual));
    const PerronVector pv = perron_left_vector(ext.E);

    Matrix limit = ext.E.entries();
    for (Eigen::Index i = 0; i < limit.rows(); ++i) {
        const double deficit = 1.0 - ext.E.row_sum(i);
        limit.row(i) += deficit * pv.v;
    }

    ConjectureReport report{ext.E, pv.v, pv.lambda, limit, {}};
    report.gap_by_generation.reserve(static_cast<std::size_t>(n_max));
    Matrix M = Matrix::Identity(m.size(), m.size());
    for (int k = 1; k <= n_max; ++k) {
        M = detail::clamp01(detail::apply_genfun(m.step_matrices, M));
        report.gap_by_generation.push_back(sup_distance(M, limit));
    }
    return report;
}

}  // namespace bpme
