#include "doctest.h"

#include <cmath>
#include <vector>

#include "abcmc/csv.hpp"
#include "abcmc/errors.hpp"
#include "abcmc/estimators.hpp"
#include "abcmc/geometric.hpp"
#include "abcmc/kernels.hpp"
#include "abcmc/proposals.hpp"

using namespace abcmc;

TEST_CASE("batch means on iid uniforms") {
    RngStream r(1);
    std::vector<double> u(1'000'000);
    for (auto& v : u) v = r.uniform();
    const auto bm = batch_means_variance(std::span<const double>(u));
    CHECK(bm.asym_var == doctest::Approx(1.0 / 12).epsilon(0.2));
    CHECK(bm.mean == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(bm.std_error == doctest::Approx(std::sqrt(bm.asym_var / 1e6)));

    const std::vector<double> flat(1000, 3.0);
    const auto c = batch_means_variance(std::span<const double>(flat));
    CHECK(c.asym_var == 0.0);
    CHECK(c.mean == 3.0);
}

TEST_CASE("simulated MH chain against the exact chain") {
    const GeometricExampleSpec spec{0.5, 0.5, 20};
    auto model = std::make_shared<GeometricModel>(spec.a, spec.b, spec.D);
    MetropolisHastingsKernel k(model, std::make_shared<NeighbourWalk>());
    RngStream r(2);
    const std::size_t m = 1'000'000;
    const auto run = run_chain(k, PlainState{ParamPoint::integer(1)}, m, r);
    REQUIRE(run.trace.size() == m);
    const auto exact = build_geometric_chain(spec, {KernelKind::MH, 0});

    std::vector<double> freq(spec.D, 0.0);
    for (const auto& s : run.trace.states) freq[s.as_integer() - 1] += 1.0 / m;
    for (int i = 0; i < 4; ++i) CHECK(freq[i] == doctest::Approx(exact.pi(i)).epsilon(0.05));

    const auto phi1 = [](const ParamPoint& p) { return static_cast<double>(p.as_integer()); };
    const auto bm = batch_means_variance(run.trace, phi1);
    double mean = 0;
    for (int i = 0; i < spec.D; ++i) mean += exact.pi(i) * (i + 1);
    CHECK(std::abs(bm.mean - mean) < 3 * bm.std_error);
    CHECK(std::abs(ergodic_average(run.trace, phi1) - mean) < 3 * bm.std_error * std::sqrt(10.0 / 9));

    const auto tf = test_functions(spec);
    const double sigma2 = asymptotic_variance_fundamental(exact, tf.phi1);
    // under the exact value the batch estimate is sigma^2 chi-square(B - 1) / (B - 1)
    const double se = sigma2 * std::sqrt(2.0 / (kDefaultBatches - 1));
    CHECK(std::abs(bm.asym_var - sigma2) < 3 * se);
}

TEST_CASE("cost summary") {
    ChainTrace t;
    for (int i = 0; i < 10; ++i) {
        t.states.push_back(ParamPoint::integer(1));
        t.accepted.push_back(0);
        t.sims_used.push_back(0);
        t.rounds.push_back(0);
    }
    const auto c = cost_summary(t, 3.0);
    CHECK(c.n_hat == 0.0);
    CHECK(c.acceptance_rate == 0.0);
    REQUIRE(c.bound_holds.has_value());
    CHECK(*c.bound_holds);
    CHECK_FALSE(cost_summary(t).bound_holds.has_value());
}

TEST_CASE("rejection sampler with a sure hit keeps every proposal") {
    LambdaModel m({.dimension = Dimension::integers(),
                   .prior_density = [](const ParamPoint&) { return 1.0; },
                   .simulate = [](const ParamPoint&, RngStream&) { return PseudoData{1.0}; },
                   .hit = [](const PseudoData&) { return true; },
                   .prior_sample = [](RngStream& r) { return ParamPoint::integer(1 + (r.next_u64() % 5)); }});
    RngStream r(3);
    const auto res = rejection_sample(m, 100, r);
    CHECK(res.samples.size() == 100);
    CHECK(res.proposals_used == 100);
    CHECK(res.H_hat == 1.0);
    CHECK(res.H_hat_se == 0.0);
}

TEST_CASE("rejection sampler on the geometric example") {
    GeometricModel m(0.5, 0.5);
    RngStream r(4);
    const std::size_t accepts = 10'000;
    const auto res = rejection_sample(m, accepts, r);
    // H = (1 - a) b / (1 - ab) = 1/3
    CHECK(std::abs(res.H_hat - 1.0 / 3) < 3 * res.H_hat_se);
    const double per = static_cast<double>(res.proposals_used) / accepts;
    CHECK(per == doctest::Approx(3.0).epsilon(0.05));

    // posterior is geometric with ratio ab = 1/4
    std::array<double, 4> obs{}, expect{};
    for (const auto& s : res.samples) obs[std::min<std::int64_t>(s.as_integer(), 4) - 1] += 1;
    expect = {0.75, 0.1875, 0.046875, 0.015625};
    double chi2 = 0;
    for (int i = 0; i < 4; ++i) {
        const double e = expect[i] * accepts;
        chi2 += (obs[i] - e) * (obs[i] - e) / e;
    }
    CHECK(chi2 < 16.266);  // upper 0.001 point of chi-square with 3 df
}

TEST_CASE("rejection cap keeps the partial draw") {
    GeometricModel m(0.5, 0.01);
    RngStream r(5);
    try {
        rejection_sample(m, 1000, r, 500);
        FAIL("expected CapExhausted");
    } catch (const CapExhausted& e) {
        CHECK(e.partial().proposals_used == 500);
        CHECK(e.partial().samples.size() < 1000);
    }
}

TEST_CASE("trace csv") {
    ChainTrace t;
    t.states = {ParamPoint::real({1.5, 2.0}), ParamPoint::real({1.5, 2.25})};
    t.accepted = {0, 1};
    t.sims_used = {4, 2};
    t.rounds = {2, 1};
    const auto rows = parse_csv(trace_csv(t));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"iteration", "theta1", "theta2", "accepted", "sims_used"});
    CHECK(rows[2] == std::vector<std::string>{"2", "1.5", "2.25", "1", "2"});
}
