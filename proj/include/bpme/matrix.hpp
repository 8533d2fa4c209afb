#pragma once

#include <Eigen/Dense>
#include <string>

#include "bpme/errors.hpp"

namespace bpme {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Tolerance for identities that hold exactly in real arithmetic.
inline constexpr double kEntryTol = 1e-12;
/// Tolerance for quantities that pass through a linear solve.
inline constexpr double kSolveTol = 1e-10;

inline double sup_distance(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

/// a <= b entrywise, up to tol.
inline bool entrywise_leq(const Matrix& a, const Matrix& b, double tol = kEntryTol) {
    return ((a - b).array() <= tol).all();
}

/// Nonnegative square matrix with row sums <= 1. Entries are clamped into
/// [0,1] on construction; violations beyond kEntryTol are rejected.
class SubstochasticMatrix {
  public:
    explicit SubstochasticMatrix(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols())
            throw DimensionMismatchError("substochastic matrix must be square");
        for (Eigen::Index i = 0; i < m_.rows(); ++i) {
            for (Eigen::Index j = 0; j < m_.cols(); ++j) {
                const double e = m_(i, j);
                if (e < -kEntryTol || e > 1.0 + kEntryTol)
                    throw NotSubstochasticError(
                        static_cast<int>(i),
                        "entry (" + std::to_string(i) + "," + std::to_string(j) + ") = " +
                            std::to_string(e) + " outside [0,1]");
                m_(i, j) = std::min(1.0, std::max(0.0, e));
            }
            const double rs = m_.row(i).sum();
            if (rs > 1.0 + kEntryTol)
                throw NotSubstochasticError(static_cast<int>(i),
                                            "row " + std::to_string(i) + " sums to " +
                                                std::to_string(rs) + " > 1");
        }
    }

    static SubstochasticMatrix zero(Eigen::Index n) {
        return SubstochasticMatrix(Matrix::Zero(n, n));
    }
    static SubstochasticMatrix identity(Eigen::Index n) {
        return SubstochasticMatrix(Matrix::Identity(n, n));
    }

    const Matrix& entries() const { return m_; }
    Eigen::Index size() const { return m_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
    double row_sum(Eigen::Index i) const { return m_.row(i).sum(); }
    double max_row_sum() const { return m_.rowwise().sum().maxCoeff(); }
    bool stochastic(double tol = kEntryTol) const {
        return (m_.rowwise().sum().array() - 1.0).abs().maxCoeff() <= tol;
    }

  private:
    Matrix m_;
};

}  // namespace bpme
