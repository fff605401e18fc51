#include "doctest.h"

#include <cmath>

#include "abcmc/csv.hpp"
#include "abcmc/errors.hpp"
#include "abcmc/lotka_volterra.hpp"

using namespace abcmc;

namespace {

LVPath path_of(std::array<std::int64_t, kLVObservations> x1) {
    LVPath p;
    p.x1 = x1;
    return p;
}

}  // namespace

TEST_CASE("all-zero rates give a constant path that misses") {
    LVExperimentConfig cfg;
    RngStream r(1);
    const auto p = gillespie_simulate({0, 0, 0}, cfg, r);
    CHECK(p.event_count == 0);
    CHECK_FALSE(p.truncated);
    for (auto v : p.x1) CHECK(v == 50);
    CHECK_FALSE(lv_hit(p, cfg.eps));
    // 50 is within a factor e of 88 but not of 274
    CHECK(std::abs(std::log(50.0) - std::log(88.0)) < 1.0);
    CHECK(std::abs(std::log(50.0) - std::log(274.0)) > 1.0);
}

TEST_CASE("predator death alone leaves prey untouched") {
    LVExperimentConfig cfg;
    RngStream r(2);
    std::vector<LVEvent> ev;
    const auto p = gillespie_simulate({0, 0, 0.7}, cfg, r, &ev);
    for (auto v : p.x1) CHECK(v == 50);
    CHECK(p.event_count == ev.size());
    for (const auto& e : ev) CHECK(e.reaction == 3);
}

TEST_CASE("events conserve the stoichiometry") {
    LVExperimentConfig cfg;
    RngStream r(3);
    std::vector<LVEvent> ev;
    gillespie_simulate({1, 0.005, 0.6}, cfg, r, &ev);
    REQUIRE(ev.size() >= 1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        const auto& e = ev[i];
        const std::int64_t d1 = e.after[0] - e.before[0], d2 = e.after[1] - e.before[1];
        switch (e.reaction) {
            case 1: CHECK((d1 == 1 && d2 == 0)); break;
            case 2: CHECK((d1 == -1 && d2 == 1)); break;
            case 3: CHECK((d1 == 0 && d2 == -1)); break;
            default: FAIL("unknown reaction");
        }
        if (i > 0) CHECK(e.before == ev[i - 1].after);
        CHECK(e.after[0] >= 0);
        CHECK(e.after[1] >= 0);
    }
}

TEST_CASE("extinct prey stays extinct") {
    LVExperimentConfig cfg;
    cfg.x0 = {0, 100};
    RngStream r(4);
    const auto p = gillespie_simulate({1, 0.005, 0.6}, cfg, r);
    for (auto v : p.x1) CHECK(v == 0);
    CHECK_FALSE(lv_hit(p, cfg.eps));
}

TEST_CASE("event cap truncates and misses") {
    LVExperimentConfig cfg;
    cfg.event_cap = 100'000;
    RngStream r(5);
    // pure prey growth at rate 2 from 50 overflows the cap well before t = 10
    const auto p = gillespie_simulate({2, 0, 0}, cfg, r);
    CHECK(p.truncated);
    CHECK(p.event_count == cfg.event_cap);
    CHECK_FALSE(lv_hit(p, cfg.eps));
}

TEST_CASE("exact simulator agrees with fine tau-leaping") {
    LVExperimentConfig cfg;
    const LVParams th{1, 0.005, 0.6};
    RngStream rg(6), rt(7);
    const int n = 2000;
    double sg = 0, sg2 = 0, st = 0, st2 = 0;
    for (int i = 0; i < n; ++i) {
        const double g = static_cast<double>(gillespie_simulate(th, cfg, rg).x1[0]);
        const double t = static_cast<double>(tau_leap_simulate(th, cfg, rt, 0.005).x1[0]);
        sg += g;
        sg2 += g * g;
        st += t;
        st2 += t * t;
    }
    const double mg = sg / n, mt = st / n;
    const double se = std::sqrt((sg2 / n - mg * mg) / n + (st2 / n - mt * mt) / n);
    CHECK(std::abs(mg - mt) < 4 * se);
}

TEST_CASE("hit predicate") {
    CHECK(lv_hit(path_of(kLVData), 1.0));
    CHECK(lv_hit(path_of(kLVData), 1e-12));
    auto x = kLVData;
    x[4] = static_cast<std::int64_t>(std::floor(114 * std::exp(0.99)));
    CHECK(lv_hit(path_of(x), 1.0));
    x[4] = static_cast<std::int64_t>(std::ceil(114 * std::exp(1.01)));
    CHECK_FALSE(lv_hit(path_of(x), 1.0));
    // two-sided: too small misses as well
    x = kLVData;
    x[9] = 30;
    CHECK_FALSE(lv_hit(path_of(x), 1.0));
    x[9] = 0;
    CHECK_FALSE(lv_hit(path_of(x), 100.0));
}

TEST_CASE("priors") {
    LVExperimentConfig cfg;
    LotkaVolterraModel m1(cfg);
    CHECK(m1.prior_density(ParamPoint::real({0, 0, 0})) == doctest::Approx(100.0));
    CHECK(m1.prior_density(ParamPoint::real({1, -0.001, 1})) == 0.0);
    CHECK(m1.prior_density(ParamPoint::real({1, 0.01, 1})) == doctest::Approx(100 * std::exp(-3.0)));
    cfg.prior = LVPrior::Prior2;
    LotkaVolterraModel m2(cfg);
    CHECK(m2.prior_density(ParamPoint::real({0, 0, 0})) == doctest::Approx(0.01));
    CHECK_THROWS_AS(m2.prior_density(ParamPoint::real({1, 1})), DimensionMismatch);

    for (const auto* m : {&m1, &m2}) {
        const auto rates = lv_prior_rates(m->config().prior);
        RngStream r(8);
        const int n = 100000;
        std::array<double, 3> s{}, s2{};
        for (int i = 0; i < n; ++i) {
            const auto p = m->prior_sample(r);
            for (int k = 0; k < 3; ++k) {
                CHECK(p.coord(k) >= 0);
                s[k] += p.coord(k);
                s2[k] += p.coord(k) * p.coord(k);
            }
        }
        for (int k = 0; k < 3; ++k) {
            const double mean = s[k] / n;
            const double se = std::sqrt((s2[k] / n - mean * mean) / n);
            CHECK(std::abs(mean - 1.0 / rates[k]) < 3 * se);
        }
    }
}

TEST_CASE("hits are not rare at the default start") {
    LVExperimentConfig cfg;
    LotkaVolterraModel m(cfg);
    RngStream r(9);
    int hits = 0;
    for (int i = 0; i < 1000; ++i) hits += m.simulate_hit(cfg.theta0.to_point(), r);
    CHECK(hits > 1);
}

TEST_CASE("early exit reports the same flag as the full path") {
    LVExperimentConfig cfg;
    LotkaVolterraModel m(cfg);
    for (const LVParams th : {LVParams{1, 0.005, 0.6}, LVParams{0.8, 0.004, 0.9}, LVParams{2, 0.02, 0.1}}) {
        for (std::uint64_t s = 0; s < 200; ++s) {
            RngStream a(s), b(s);
            const bool full = lv_hit(gillespie_simulate(th, cfg, a), cfg.eps);
            CHECK(gillespie_simulate_hit(th, cfg, b) == full);
        }
    }
    RngStream a(3), b(3);
    const auto x = m.simulate(cfg.theta0.to_point(), a);
    REQUIRE(x.size() == kLVObservations + 1);
    CHECK(m.hit(x) == m.simulate_hit(cfg.theta0.to_point(), b));
}

TEST_CASE("zero step sizes keep the chain in place") {
    LVExperimentConfig cfg;
    cfg.step_sd = {0, 0, 0};
    RngStream r(10);
    const auto res = lv_experiment(cfg, {LVKernelKind::OneHit, 0}, 50, r);
    for (const auto& s : res.trace.states) CHECK(s == cfg.theta0.to_point());
    const auto rows = parse_csv(res.csv);
    REQUIRE(rows.size() == 51);
    CHECK(rows[0][0] == "iteration");
}

TEST_CASE("kernel labels") {
    CHECK(parse_lv_kernel("PM1(15)").n == 15);
    CHECK(parse_lv_kernel("PM2(1)").kind == LVKernelKind::PM2);
    CHECK(parse_lv_kernel("OneHit").kind == LVKernelKind::OneHit);
    CHECK(LVKernelChoice{LVKernelKind::PM1, 1}.label() == "PM1(1)");
    CHECK_THROWS_AS(parse_lv_kernel("PM1(0)"), DomainError);
    CHECK_THROWS_AS(parse_lv_kernel("MH"), DomainError);
}

TEST_CASE("config validation") {
    LVExperimentConfig cfg;
    cfg.eps = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.step_sd[1] = -1;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.event_cap = 10;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}
