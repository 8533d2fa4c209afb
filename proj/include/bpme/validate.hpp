#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bpme/asymptotics.hpp"
#include "bpme/genfun.hpp"
#include "bpme/model.hpp"
#include "bpme/simulate.hpp"

namespace bpme {

/// Documented allowance for the bias of the alive-at-t_max survival proxy.
inline constexpr double kSurvivalBiasAllowance = 0.005;

/// One statistic checked against a theoretical target. Reproducible
/// bit-for-bit from (model, operation, parameters, seed).
struct CheckReport {
    std::string name;
    double statistic = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    long long n_samples = 0;
    bool passed = false;
    std::uint64_t seed = 0;
    std::string notes;
};

namespace detail {

inline CheckReport make_report(std::string name, double statistic, double target,
                               double tolerance, long long n_samples, std::uint64_t seed,
                               std::string notes = {}) {
    CheckReport r{std::move(name), statistic, target, tolerance, n_samples,
                  std::abs(statistic - target) <= tolerance, seed, std::move(notes)};
    return r;
}

// Index-order reductions: results do not depend on the worker count used to
// produce the samples.
inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_variance_of(const std::vector<double>& xs) {
    const double mu = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return s / static_cast<double>(xs.size() - 1);
}

}  // namespace detail

/// Law of large numbers: mean of Y_t/t over N Z-valued runs against mu-1,
/// with a 4-standard-error tolerance. When the initial population admits it,
/// the surviving-at-t Bpme variant is checked against the same target.
inline std::vector<CheckReport> lln_check(const BpmeModel& m, const TotalState& init,
                                          long long t, long long N, std::uint64_t seed,
                                          int workers = 0) {
    if (t < 1) throw ValidationError("t must be >= 1");
    if (N < 2) throw ValidationError("N must be >= 2");
    std::vector<CheckReport> reports;
    const double target = m.mu - 1.0;

    const auto z = monte_carlo(m, init, ProcessMode::ZValued, t, N,
                               splitmix64_at(seed, 1), workers);
    std::vector<double> ratios;
    ratios.reserve(static_cast<std::size_t>(N));
    for (long long y : z.endpoint_populations)
        ratios.push_back(static_cast<double>(y) / static_cast<double>(t));
    const double sd = std::sqrt(detail::sample_variance_of(ratios));
    reports.push_back(detail::make_report("lln.z_mean", detail::mean_of(ratios), target,
                                          4.0 * sd / std::sqrt(static_cast<double>(N)), N, seed,
                                          "t=" + std::to_string(t)));

    if (init.population >= 1) {
        const auto b = monte_carlo(m, init, ProcessMode::Bpme, t, N,
                                   splitmix64_at(seed, 2), workers);
        std::vector<double> survivor_ratios;
        for (long long x : b.endpoint_populations)
            if (x >= 1) survivor_ratios.push_back(static_cast<double>(x) / static_cast<double>(t));
        if (survivor_ratios.size() >= 2) {
            const double ssd = std::sqrt(detail::sample_variance_of(survivor_ratios));
            reports.push_back(detail::make_report(
                "lln.bpme_survivor_mean", detail::mean_of(survivor_ratios), target,
                4.0 * ssd / std::sqrt(static_cast<double>(survivor_ratios.size())),
                static_cast<long long>(survivor_ratios.size()), seed,
                "t=" + std::to_string(t) + ", survivors of " + std::to_string(N)));
        } else {
            reports.back().notes += "; <2 Bpme survivors at t, survivor variant skipped";
        }
    }
    return reports;
}

/// Central limit theorem for Z_k = (Y_t - (mu-1)t)/sqrt(t): first-moment and
/// second-moment checks, plus the survivor-conditioned variance from Bpme
/// runs (the probe for independence between the limit and survival).
inline std::vector<CheckReport> clt_check(const BpmeModel& m, const TotalState& init,
                                          long long t, long long N, std::uint64_t seed,
                                          int workers = 0) {
    if (t < 1) throw ValidationError("t must be >= 1");
    if (N < 2) throw ValidationError("N must be >= 2");
    const VarianceReport vr = sigma_m_squared(m);
    if (vr.sigma2_m <= kEntryTol)
        throw DegenerateVarianceError("sigma^2_M = " + std::to_string(vr.sigma2_m) +
                                      " is not positive; CLT does not apply");
    const double drift = (m.mu - 1.0) * static_cast<double>(t);
    const double scale = std::sqrt(static_cast<double>(t));
    const double var_tol =
        4.0 * vr.sigma2_m * std::sqrt(2.0 / static_cast<double>(N - 1));

    std::vector<CheckReport> reports;
    const auto z = monte_carlo(m, init, ProcessMode::ZValued, t, N,
                               splitmix64_at(seed, 3), workers);
    std::vector<double> zs;
    zs.reserve(static_cast<std::size_t>(N));
    for (long long y : z.endpoint_populations)
        zs.push_back((static_cast<double>(y) - drift) / scale);
    reports.push_back(detail::make_report(
        "clt.mean", detail::mean_of(zs), 0.0,
        4.0 * std::sqrt(vr.sigma2_m) / std::sqrt(static_cast<double>(N)), N, seed,
        "t=" + std::to_string(t)));
    reports.push_back(detail::make_report("clt.variance", detail::sample_variance_of(zs),
                                          vr.sigma2_m, var_tol, N, seed,
                                          "t=" + std::to_string(t)));

    if (init.population >= 1) {
        const auto b = monte_carlo(m, init, ProcessMode::Bpme, t, N,
                                   splitmix64_at(seed, 4), workers);
        std::vector<double> survivor_zs;
        for (long long x : b.endpoint_populations)
            if (x >= 1) survivor_zs.push_back((static_cast<double>(x) - drift) / scale);
        if (survivor_zs.size() >= 2) {
            reports.push_back(detail::make_report(
                "clt.survivor_variance", detail::sample_variance_of(survivor_zs), vr.sigma2_m,
                var_tol, static_cast<long long>(survivor_zs.size()), seed,
                "t=" + std::to_string(t) + ", survivors of " + std::to_string(N)));
        } else {
            reports.back().notes += "; <2 Bpme survivors at t, survivor probe skipped";
        }
    }
    return reports;
}

/// Monte Carlo alive-at-t_max fraction from n.i against the analytic survival
/// probability 1 - rowsum_i(E^n). Tolerance is 4 binomial standard errors
/// plus the documented proxy-bias allowance.
inline CheckReport survival_mc_vs_analytic(const BpmeModel& m, int n, int i, long long t_max,
                                           long long N, std::uint64_t seed, int workers = 0) {
    if (n < 1) throw ValidationError("initial population must be >= 1");
    const ExtinctionResult ext = extinction_matrix(m);
    const double p = survival_probability(ext, n, i);
    const auto mc = monte_carlo(m, TotalState{n, i}, ProcessMode::Bpme, t_max, N,
                                splitmix64_at(seed, 5), workers);
    const double fraction =
        static_cast<double>(mc.survivors_at_cap) / static_cast<double>(N);
    const double tol =
        4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(N)) + kSurvivalBiasAllowance;
    return detail::make_report("survival.mc_vs_analytic", fraction, p, tol, N, seed,
                               "t_max=" + std::to_string(t_max) + ", init=" + std::to_string(n) +
                                   "." + m.chain.states[static_cast<std::size_t>(i)]);
}

/// Excursion-mean check plus the empirical Var(Delta) side output.
struct DeltaMeanCheck {
    CheckReport report;
    double delta_variance = 0.0;
    long long excursions_used = 0;
};

/// Empirical mean of the net population change per excursion from state i,
/// collected from one long Z-valued run, against (mu-1)/pi_i.
inline DeltaMeanCheck delta_mean_check(const BpmeModel& m, int i, long long n_excursions,
                                       std::uint64_t seed) {
    if (i < 0 || i >= m.size()) throw ValidationError("state index out of range");
    if (n_excursions < 1) throw ValidationError("need at least one excursion");
    const double target = excursion_mean(m, i);

    // Expected steps per excursion is 1/pi_i; the cap only guards the loop.
    const long long step_cap =
        1000 + static_cast<long long>(50.0 * static_cast<double>(n_excursions) / m.chain.pi(i));
    Xoshiro256PlusPlus rng(splitmix64_at(seed, 6));
    std::vector<double> deltas;
    deltas.reserve(static_cast<std::size_t>(n_excursions));
    TotalState cur{0, i};
    long long anchor_y = 0;
    for (long long t = 1; t <= step_cap && static_cast<long long>(deltas.size()) < n_excursions;
         ++t) {
        cur = step(m, cur, ProcessMode::ZValued, rng).next;
        if (cur.state == i) {
            deltas.push_back(static_cast<double>(cur.population - anchor_y));
            anchor_y = cur.population;
        }
    }

    DeltaMeanCheck out;
    out.excursions_used = static_cast<long long>(deltas.size());
    const double mean = detail::mean_of(deltas);
    const double var = deltas.size() >= 2 ? detail::sample_variance_of(deltas) : 0.0;
    out.delta_variance = var;
    out.report = detail::make_report(
        "excursion.delta_mean", mean, target,
        4.0 * std::sqrt(var) / std::sqrt(static_cast<double>(deltas.size())),
        out.excursions_used, seed,
        "empirical Var(Delta)=" + std::to_string(var) + ", anchor=" +
            m.chain.states[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace bpme
