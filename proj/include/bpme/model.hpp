#pragma once

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bpme/errors.hpp"
#include "bpme/graph.hpp"
#include "bpme/matrix.hpp"

namespace bpme {

/// Finite-support offspring distribution on the nonnegative integers.
/// Counts are distinct and sorted; probabilities are positive and sum to 1.
struct OffspringDist {
    std::vector<int> counts;
    std::vector<double> probs;
    std::vector<double> cdf;  // inclusive prefix sums, last entry pinned to 1
    double mean = 0.0;
    double variance = 0.0;
    int max_count = 0;

    bool deterministic() const { return counts.size() == 1; }

    /// Inverse-CDF draw from a uniform u in [0,1).
    int sample(double u) const {
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        return counts[static_cast<std::size_t>(it - cdf.begin())];
    }

    /// Probability of exactly n offspring (0 if n is outside the support).
    double prob_of(int n) const {
        auto it = std::lower_bound(counts.begin(), counts.end(), n);
        if (it == counts.end() || *it != n) return 0.0;
        return probs[static_cast<std::size_t>(it - counts.begin())];
    }
};

/// Builds an OffspringDist from raw (count, weight) pairs. Weights are
/// normalized to sum 1; duplicate counts are merged; zero-weight counts are
/// dropped. Mean and variance are the exact moments of the resulting pmf.
inline OffspringDist offspring_from_pmf(const std::vector<std::pair<int, double>>& weighted) {
    std::map<int, double> acc;
    double total = 0.0;
    for (const auto& [count, weight] : weighted) {
        if (count < 0)
            throw EmptyOrNegativeError("offspring count " + std::to_string(count) +
                                       " is negative");
        if (weight < 0.0)
            throw EmptyOrNegativeError("weight " + std::to_string(weight) + " for count " +
                                       std::to_string(count) + " is negative");
        acc[count] += weight;
        total += weight;
    }
    if (total <= 0.0) throw EmptyOrNegativeError("offspring pmf has no positive weight");

    OffspringDist d;
    double cum = 0.0;
    for (const auto& [count, weight] : acc) {
        if (weight == 0.0) continue;
        const double p = weight / total;
        d.counts.push_back(count);
        d.probs.push_back(p);
        cum += p;
        d.cdf.push_back(cum);
        d.mean += p * count;
    }
    d.cdf.back() = 1.0;
    d.max_count = d.counts.back();
    for (std::size_t k = 0; k < d.counts.size(); ++k) {
        const double dev = d.counts[k] - d.mean;
        d.variance += d.probs[k] * dev * dev;
    }
    return d;
}

/// Finite irreducible environment chain with its stationary distribution.
struct EnvChain {
    std::vector<std::string> states;
    Matrix P;
    RowVector pi;
    int period = 1;
    Matrix row_cdf;  // per-row inclusive prefix sums of P, last column pinned to 1

    int size() const { return static_cast<int>(P.rows()); }

    /// Inverse-CDF draw of the next state from row `state`.
    int sample_next(int state, double u) const {
        const int n = size();
        for (int j = 0; j < n - 1; ++j)
            if (u < row_cdf(state, j)) return j;
        return n - 1;
    }
};

/// Validates a transition matrix and assembles the chain: stationarity by a
/// direct linear solve (periodic chains must work, so no power iteration) and
/// period by gcd of BFS level differences.
inline EnvChain validate_chain(const Matrix& P, std::vector<std::string> labels) {
    if (P.rows() != P.cols()) throw DimensionMismatchError("transition matrix must be square");
    const int n = static_cast<int>(P.rows());
    if (n < 1) throw DimensionMismatchError("transition matrix must have at least one state");
    if (static_cast<int>(labels.size()) != n)
        throw DimensionMismatchError("got " + std::to_string(labels.size()) + " labels for " +
                                     std::to_string(n) + " states");

    EnvChain chain;
    chain.states = std::move(labels);
    chain.P = P;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double e = chain.P(i, j);
            if (e < -kEntryTol || e > 1.0 + kEntryTol)
                throw NotStochasticError(i, "row " + std::to_string(i) + " (" + chain.states[i] +
                                                "): entry " + std::to_string(e) +
                                                " outside [0,1]");
            chain.P(i, j) = std::min(1.0, std::max(0.0, e));
        }
        const double rs = chain.P.row(i).sum();
        if (std::abs(rs - 1.0) > kEntryTol)
            throw NotStochasticError(i, "row " + std::to_string(i) + " (" + chain.states[i] +
                                            ") sums to " + std::to_string(rs) + ", expected 1");
    }

    const auto defect = strong_connectivity_defect(chain.P);
    if (!defect.empty()) {
        std::string msg = "chain is not irreducible; states cut off from " + chain.states[0] + ":";
        for (int v : defect) msg += " " + chain.states[v];
        throw NotIrreducibleError(defect, msg);
    }

    // pi solves pi(I-P)=0 with sum(pi)=1: replace one redundant equation of
    // the transposed system with the normalization row.
    Matrix A = (Matrix::Identity(n, n) - chain.P).transpose();
    A.row(0).setOnes();
    Vector b = Vector::Zero(n);
    b(0) = 1.0;
    Vector x = A.partialPivLu().solve(b);
    x /= x.sum();
    chain.pi = x.transpose();

    const double stat_residual = (chain.pi * chain.P - chain.pi).cwiseAbs().maxCoeff();
    if (!(stat_residual <= kSolveTol) || !(chain.pi.minCoeff() > 0.0))
        throw SingularBeyondExpectedError(
            "stationary solve failed: residual " + std::to_string(stat_residual) +
            ", min coefficient " + std::to_string(chain.pi.minCoeff()));

    chain.period = digraph_period(chain.P);

    chain.row_cdf = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double cum = 0.0;
        for (int j = 0; j < n; ++j) {
            cum += chain.P(i, j);
            chain.row_cdf(i, j) = cum;
        }
        chain.row_cdf(i, n - 1) = 1.0;
    }
    return chain;
}

/// Population + environment state. Population is nonnegative for the
/// branching process proper and unrestricted for the Z-valued coupling.
struct TotalState {
    long long population = 0;
    int state = 0;
};

/// Environment chain plus one offspring distribution per state.
struct BpmeModel {
    EnvChain chain;
    std::vector<OffspringDist> offspring;
    double mu = 0.0;      // stationary mean offspring per reproduction event
    int max_support = 0;  // largest offspring count with positive probability

    int size() const { return chain.size(); }

    // step_matrices[n](i,j) = P(i,j) * prob of n offspring in state j
    std::vector<Matrix> step_matrices;
};

inline BpmeModel build_model(EnvChain chain, std::vector<OffspringDist> offspring) {
    const int n = chain.size();
    if (static_cast<int>(offspring.size()) != n)
        throw DimensionMismatchError("got " + std::to_string(offspring.size()) +
                                     " offspring distributions for " + std::to_string(n) +
                                     " states");
    BpmeModel m;
    m.chain = std::move(chain);
    m.offspring = std::move(offspring);
    for (int i = 0; i < n; ++i) {
        m.mu += m.chain.pi(i) * m.offspring[i].mean;
        m.max_support = std::max(m.max_support, m.offspring[i].max_count);
    }
    m.step_matrices.reserve(m.max_support + 1);
    for (int k = 0; k <= m.max_support; ++k) {
        Matrix Pk(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Pk(i, j) = m.chain.P(i, j) * m.offspring[j].prob_of(k);
        m.step_matrices.push_back(std::move(Pk));
    }
    return m;
}

/// One-step transition matrix restricted to "n offspring produced".
/// n beyond the support gives the zero matrix.
inline SubstochasticMatrix step_matrix(const BpmeModel& m, int n) {
    if (n < 0) throw ValidationError("offspring count must be nonnegative");
    if (n > m.max_support) return SubstochasticMatrix::zero(m.size());
    return SubstochasticMatrix(m.step_matrices[static_cast<std::size_t>(n)]);
}

enum class CriticalityClass { Subcritical, Critical, Supercritical };

enum class Ternary { no, yes, unknown };

struct Criticality {
    CriticalityClass cls;
    // Whether Var(Delta_1) > 0; relevant to extinction when critical.
    Ternary delta_variance_positive = Ternary::unknown;
};

inline int default_depth_cap(const BpmeModel& m) { return 3 * m.size() * (m.max_support + 1); }

namespace detail {

// Level-by-level BFS over excursions from `start` with a fixed offspring
// count per state, deduplicating on (state, net gain). Reports the set of
// net gains of completed excursions, stopping once `distinct_cap` values or
// `depth_cap` levels are seen.
inline std::set<long long> excursion_net_gains(const BpmeModel& m, int start,
                                               const std::vector<int>& xi, int depth_cap,
                                               std::size_t distinct_cap) {
    const int n = m.size();
    std::set<long long> gains;
    std::set<std::pair<int, long long>> level{{start, 0}};
    for (int depth = 1; depth <= depth_cap && !level.empty(); ++depth) {
        std::set<std::pair<int, long long>> next;
        for (const auto& [s, net] : level) {
            for (int t = 0; t < n; ++t) {
                if (m.chain.P(s, t) <= 0.0) continue;
                const long long net2 = net + xi[t] - 1;
                if (t == start) {
                    gains.insert(net2);
                    if (gains.size() >= distinct_cap) return gains;
                } else {
                    next.insert({t, net2});
                }
            }
        }
        level = std::move(next);
    }
    return gains;
}

}  // namespace detail

/// Criticality of the model: mu below / at / above 1 (tolerance 1e-12).
/// For critical models the Var(Delta_1) flag is decided structurally where
/// that is sound: any nondeterministic offspring distribution forces positive
/// variance (every state is visited by some excursion); with all-deterministic
/// offspring, enumerated excursion gains decide it up to the depth cap.
inline Criticality classify(const BpmeModel& m, int depth_cap = -1) {
    Criticality c;
    if (m.mu < 1.0 - kEntryTol)
        c.cls = CriticalityClass::Subcritical;
    else if (m.mu > 1.0 + kEntryTol)
        c.cls = CriticalityClass::Supercritical;
    else
        c.cls = CriticalityClass::Critical;
    if (c.cls != CriticalityClass::Critical) return c;

    bool all_deterministic = true;
    for (const auto& d : m.offspring)
        if (!d.deterministic()) all_deterministic = false;
    if (!all_deterministic) {
        c.delta_variance_positive = Ternary::yes;
        return c;
    }
    if (depth_cap < 1) depth_cap = default_depth_cap(m);
    std::vector<int> xi(m.offspring.size());
    for (std::size_t j = 0; j < xi.size(); ++j) xi[j] = m.offspring[j].counts[0];
    const auto gains = detail::excursion_net_gains(m, 0, xi, depth_cap, 2);
    if (gains.size() >= 2)
        c.delta_variance_positive = Ternary::yes;
    else if (gains.size() == 1)
        c.delta_variance_positive = Ternary::no;
    return c;
}

struct ViabilityStep {
    int state;      // state entered at this step
    int offspring;  // offspring count drawn in that state
};

/// Witness that total state (population).(start_state) can return to its
/// starting environment with a strictly larger population while staying >= 1.
struct ViabilityCertificate {
    int start_state = 0;
    long long population = 1;
    std::vector<ViabilityStep> excursion;
};

/// Bounded search for a viability certificate: BFS over excursions from state
/// i tracking (state, net gain, minimum running net). Only the largest
/// positive-probability offspring count per state is explored; that choice
/// dominates every other draw in both the final net gain and the running
/// minimum, so feasibility and the returned population are unaffected.
/// An empty result is NOT a proof of non-viability.
inline std::optional<ViabilityCertificate> viability_certificate(const BpmeModel& m, int i,
                                                                 int depth_cap = -1) {
    const int n = m.size();
    if (i < 0 || i >= n) throw ValidationError("start state index out of range");
    if (depth_cap < 1) {
        if (depth_cap != -1) throw ValidationError("depth cap must be >= 1");
        depth_cap = default_depth_cap(m);
    }
    std::vector<int> xi(m.offspring.size());
    for (std::size_t j = 0; j < xi.size(); ++j) xi[j] = m.offspring[j].max_count;

    using Key = std::pair<int, long long>;  // (state, net gain)
    struct Node {
        long long min_net;
        Key parent;
    };
    std::vector<std::map<Key, Node>> levels(1);
    levels[0][{i, 0}] = Node{LLONG_MAX, {-1, 0}};

    for (int depth = 1; depth <= depth_cap; ++depth) {
        std::map<Key, Node> next;
        bool found = false;
        long long best_min_net = LLONG_MIN;
        Key best_parent{-1, 0};
        for (const auto& [key, node] : levels[depth - 1]) {
            const auto [s, net] = key;
            for (int t = 0; t < n; ++t) {
                if (m.chain.P(s, t) <= 0.0) continue;
                const long long net2 = net + xi[t] - 1;
                const long long min2 = std::min(node.min_net, net2);
                if (t == i) {
                    if (net2 >= 1 && min2 > best_min_net) {
                        found = true;
                        best_min_net = min2;
                        best_parent = key;
                    }
                } else {
                    auto [it, inserted] = next.insert({Key{t, net2}, Node{min2, key}});
                    if (!inserted && min2 > it->second.min_net) it->second = Node{min2, key};
                }
            }
        }
        if (found) {
            ViabilityCertificate cert;
            cert.start_state = i;
            cert.population = std::max<long long>(1, 1 - best_min_net);
            std::vector<int> path_states{i};  // reversed: return step first
            Key cur = best_parent;
            for (int d = depth - 1; d >= 1; --d) {
                path_states.push_back(cur.first);
                cur = levels[d].at(cur).parent;
            }
            for (auto it = path_states.rbegin(); it != path_states.rend(); ++it)
                cert.excursion.push_back({*it, xi[*it]});
            return cert;
        }
        if (next.empty()) break;
        levels.push_back(std::move(next));
    }
    return std::nullopt;
}

}  // namespace bpme
