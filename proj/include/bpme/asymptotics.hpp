#pragma once

#include <string>
#include <vector>

#include "bpme/matrix.hpp"
#include "bpme/model.hpp"

namespace bpme {

/// Fertility vector phi: the unique solution of (I-P)phi = mu_vec - mu*1
/// with <pi, phi> = 0. Coordinate phi(i) is the long-term excess fertility
/// of starting environment i.
inline Vector phi_vector(const BpmeModel& m) {
    const int n = m.size();
    Vector mu_vec(n);
    for (int i = 0; i < n; ++i) mu_vec(i) = m.offspring[i].mean;

    // The system is rank-deficient with left null vector pi; replace one
    // redundant equation by the centering constraint.
    Matrix A = Matrix::Identity(n, n) - m.chain.P;
    Vector b = mu_vec - Vector::Constant(n, m.mu);
    A.row(0) = m.chain.pi;
    b(0) = 0.0;
    const Vector phi = A.partialPivLu().solve(b);

    const double eq_residual =
        ((Matrix::Identity(n, n) - m.chain.P) * phi - (mu_vec - Vector::Constant(n, m.mu)))
            .cwiseAbs()
            .maxCoeff();
    const double centering = std::abs(m.chain.pi.dot(phi.transpose()));
    if (!(eq_residual <= kSolveTol) || !(centering <= kSolveTol))
        throw SingularBeyondExpectedError("fertility solve failed: equation residual " +
                                          std::to_string(eq_residual) + ", centering " +
                                          std::to_string(centering));
    return phi;
}

/// The CLT variance sigma^2_M and its three ingredients.
struct VarianceReport {
    double sigma2 = 0.0;    // sum_i pi_i sigma_i^2
    double tau2 = 0.0;      // sum_i pi_i (mu - mu_i)^2
    double cross = 0.0;     // 2 <pi, mu phi>
    double sigma2_m = 0.0;  // sigma2 - tau2 + cross
};

inline VarianceReport sigma_m_squared(const BpmeModel& m) {
    const Vector phi = phi_vector(m);
    VarianceReport r;
    for (int i = 0; i < m.size(); ++i) {
        const double pi_i = m.chain.pi(i);
        const double mu_i = m.offspring[i].mean;
        r.sigma2 += pi_i * m.offspring[i].variance;
        r.tau2 += pi_i * (m.mu - mu_i) * (m.mu - mu_i);
        r.cross += 2.0 * pi_i * mu_i * phi(i);
    }
    r.sigma2_m = r.sigma2 - r.tau2 + r.cross;
    return r;
}

/// Exact expected-population curve E[Y_t] for the Z-valued process started
/// at 0.i, computed by iterated vector-matrix products. When the chain is
/// aperiodic, values[t] - (mu-1)t converges to (P phi)(i), the mean fertility
/// of the state where the first reproduction happens (the first offspring
/// count is drawn only after the environment has moved). For periodic chains
/// the curve is still exact but no limit claim is made.
struct PopulationCurve {
    std::vector<double> values;  // values[t] = E[Y_t], t = 0..T
    bool aperiodic = true;
};

inline PopulationCurve expected_population_curve(const BpmeModel& m, int i, long long T) {
    if (i < 0 || i >= m.size()) throw ValidationError("state index out of range");
    if (T < 0) throw ValidationError("horizon must be nonnegative");
    const int n = m.size();
    Vector drift(n);
    for (int j = 0; j < n; ++j) drift(j) = m.offspring[j].mean - 1.0;

    PopulationCurve curve;
    curve.aperiodic = (m.chain.period == 1);
    curve.values.reserve(static_cast<std::size_t>(T) + 1);
    curve.values.push_back(0.0);
    RowVector dist = RowVector::Zero(n);
    dist(i) = 1.0;
    double total = 0.0;
    for (long long t = 1; t <= T; ++t) {
        dist = dist * m.chain.P;
        total += dist.dot(drift);
        curve.values.push_back(total);
    }
    return curve;
}

/// Mean net population change per excursion from state i: (mu-1)/pi_i.
inline double excursion_mean(const BpmeModel& m, int i) {
    if (i < 0 || i >= m.size()) throw ValidationError("state index out of range");
    return (m.mu - 1.0) / m.chain.pi(i);
}

}  // namespace bpme
