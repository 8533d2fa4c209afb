#include <catch2/catch_amalgamated.hpp>

#include "bpme/bpme.hpp"
#include "support/generators.hpp"

using namespace bpme;
using bpme_test::alternating_uniform_model;
using bpme_test::constant_model;
using bpme_test::gw_model;
using Catch::Approx;

TEST_CASE("phi_vector: alternating model") {
    const auto phi = phi_vector(alternating_uniform_model());
    REQUIRE(phi(0) == Approx(0.625).margin(1e-10));
    REQUIRE(phi(1) == Approx(-0.625).margin(1e-10));
}

TEST_CASE("phi_vector: vanishes when all states reproduce alike") {
    Xoshiro256PlusPlus g(201);
    const auto d = offspring_from_pmf({{0, 0.3}, {1, 0.2}, {3, 0.5}});
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + static_cast<int>(g.next() % 5);
        std::vector<std::string> labels;
        for (int i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
        const auto m = build_model(validate_chain(bpme_test::random_chain_matrix(g, n), labels),
                                   std::vector<OffspringDist>(static_cast<std::size_t>(n), d));
        REQUIRE(phi_vector(m).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("phi_vector: defining equations hold on random models") {
    Xoshiro256PlusPlus g(202);
    for (int rep = 0; rep < 100; ++rep) {
        const auto m = bpme_test::random_model(g, 8, 6);
        const auto phi = phi_vector(m);
        Vector mu_vec(m.size());
        for (int i = 0; i < m.size(); ++i) mu_vec(i) = m.offspring[i].mean;
        const Vector lhs = (Matrix::Identity(m.size(), m.size()) - m.chain.P) * phi;
        const Vector rhs = mu_vec - Vector::Constant(m.size(), m.mu);
        REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
        REQUIRE(std::abs(m.chain.pi.dot(phi.transpose())) <= 1e-10);
    }
}

TEST_CASE("phi_vector: equivariant under state permutation") {
    Xoshiro256PlusPlus g(203);
    for (int rep = 0; rep < 20; ++rep) {
        const auto m = bpme_test::random_model(g, 5, 5);
        const int n = m.size();
        const auto phi = phi_vector(m);
        Matrix P(n, n);
        std::vector<OffspringDist> off(static_cast<std::size_t>(n));
        std::vector<std::string> labels(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            labels[static_cast<std::size_t>((i + 1) % n)] =
                m.chain.states[static_cast<std::size_t>(i)];
            off[static_cast<std::size_t>((i + 1) % n)] = m.offspring[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) P((i + 1) % n, (j + 1) % n) = m.chain.P(i, j);
        }
        const auto rotated = build_model(validate_chain(P, labels), off);
        const auto phi2 = phi_vector(rotated);
        for (int i = 0; i < n; ++i) REQUIRE(phi2((i + 1) % n) == Approx(phi(i)).margin(1e-9));
    }
}

TEST_CASE("sigma_m_squared: alternating model, all four ingredients") {
    const auto vr = sigma_m_squared(alternating_uniform_model());
    REQUIRE(vr.sigma2 == Approx(35.0 / 24.0).margin(1e-12));
    REQUIRE(vr.tau2 == Approx(25.0 / 16.0).margin(1e-12));
    REQUIRE(vr.cross == Approx(25.0 / 16.0).margin(1e-12));
    REQUIRE(vr.sigma2_m == Approx(35.0 / 24.0).margin(1e-12));
    REQUIRE(vr.sigma2_m == Approx(vr.sigma2 - vr.tau2 + vr.cross).margin(1e-12));
}

TEST_CASE("sigma_m_squared: single state reduces to the offspring variance") {
    const auto vr = sigma_m_squared(gw_model(0.25));
    REQUIRE(vr.tau2 == Approx(0.0).margin(1e-12));
    REQUIRE(vr.cross == Approx(0.0).margin(1e-12));
    REQUIRE(vr.sigma2_m == Approx(0.75).margin(1e-12));

    REQUIRE(sigma_m_squared(constant_model(1)).sigma2_m == Approx(0.0).margin(1e-12));
}

TEST_CASE("sigma_m_squared: nonnegative on random models") {
    Xoshiro256PlusPlus g(204);
    for (int rep = 0; rep < 150; ++rep) {
        const auto vr = sigma_m_squared(bpme_test::random_model(g, 8, 6));
        REQUIRE(vr.sigma2_m >= -1e-12);
    }
}

TEST_CASE("sigma_m_squared: tau^2 <= cross for deterministic offspring") {
    Xoshiro256PlusPlus g(205);
    for (int rep = 0; rep < 150; ++rep) {
        const auto m = bpme_test::random_deterministic_model(g, 8, 5);
        const auto vr = sigma_m_squared(m);
        REQUIRE(vr.sigma2 == 0.0);
        REQUIRE(vr.tau2 <= vr.cross + 1e-12);
    }
}

TEST_CASE("expected_population_curve: exact drift lines") {
    const auto zero = expected_population_curve(alternating_uniform_model(), 0, 0);
    REQUIRE(zero.values.size() == 1);
    REQUIRE(zero.values[0] == 0.0);

    const auto m = gw_model(0.25);  // mean 1.5
    const auto curve = expected_population_curve(m, 0, 50);
    for (long long t = 0; t <= 50; ++t)
        REQUIRE(curve.values[static_cast<std::size_t>(t)] ==
                Approx(0.5 * static_cast<double>(t)).margin(1e-12));
    REQUIRE(curve.aperiodic);
}

TEST_CASE("expected_population_curve: aperiodic excess converges to P*phi") {
    // The first offspring draw happens after the environment has moved, so
    // the long-run excess over the drift line is (P phi)(i), not phi(i).

    // lazy mix of the alternating chain with I/2: same pi, same mu, aperiodic
    Matrix P(2, 2);
    P << 0.5, 0.5, 0.5, 0.5;
    std::vector<std::pair<int, double>> uniform;
    for (int k = 0; k <= 5; ++k) uniform.push_back({k, 1.0});
    const auto lazy = build_model(validate_chain(P, {"a", "b"}),
                                  {offspring_from_pmf(uniform), offspring_from_pmf({{0, 1.0}})});
    REQUIRE(lazy.mu == Approx(1.25).margin(1e-12));
    const auto phi = phi_vector(lazy);
    const Vector limit = lazy.chain.P * phi;
    for (int i = 0; i < 2; ++i) {
        const auto curve = expected_population_curve(lazy, i, 200);
        REQUIRE(curve.aperiodic);
        const double excess = curve.values[200] - (lazy.mu - 1.0) * 200.0;
        REQUIRE(excess == Approx(limit(i)).margin(1e-8));
    }

    // a lopsided aperiodic chain where (P phi)(i) differs per state
    Matrix Q(2, 2);
    Q << 0.6, 0.4, 0.3, 0.7;
    const auto m = build_model(validate_chain(Q, {"a", "b"}),
                               {offspring_from_pmf({{0, 0.2}, {3, 0.8}}),
                                offspring_from_pmf({{0, 0.7}, {1, 0.3}})});
    const auto phi2 = phi_vector(m);
    const Vector limit2 = m.chain.P * phi2;
    REQUIRE(std::abs(limit2(0) - limit2(1)) > 1e-3);
    for (int i = 0; i < 2; ++i) {
        const auto curve = expected_population_curve(m, i, 200);
        const double excess = curve.values[200] - (m.mu - 1.0) * 200.0;
        REQUIRE(excess == Approx(limit2(i)).margin(1e-8));
    }
}

TEST_CASE("expected_population_curve: periodic chains are flagged") {
    const auto curve = expected_population_curve(alternating_uniform_model(), 0, 10);
    REQUIRE(!curve.aperiodic);
    // exact values still hold: from a the first step hits b (drift -1), then a
    REQUIRE(curve.values[1] == Approx(-1.0).margin(1e-12));
    REQUIRE(curve.values[2] == Approx(0.5).margin(1e-12));
}

TEST_CASE("excursion_mean: closed form") {
    const auto m = alternating_uniform_model();
    REQUIRE(excursion_mean(m, 0) == Approx(0.5).margin(1e-12));
    REQUIRE(excursion_mean(m, 1) == Approx(0.5).margin(1e-12));

    REQUIRE(excursion_mean(constant_model(1), 0) == Approx(0.0).margin(1e-12));
    REQUIRE(excursion_mean(gw_model(0.25), 0) == Approx(0.5).margin(1e-12));
}
