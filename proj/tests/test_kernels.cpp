#include "doctest.h"

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <memory>

#include "abcmc/errors.hpp"
#include "abcmc/estimators.hpp"
#include "abcmc/gaussian_smoothed.hpp"
#include "abcmc/geometric.hpp"
#include "abcmc/kernels.hpp"
#include "abcmc/proposals.hpp"

using namespace abcmc;

namespace {

// 2 <-> 3 and nothing else.
class Toggle23 final : public Proposal {
public:
    ParamPoint sample(const ParamPoint& from, RngStream&) const override {
        return ParamPoint::integer(from.as_integer() == 2 ? 3 : 2);
    }
    double density(const ParamPoint& from, const ParamPoint& to) const override {
        return from.as_integer() + to.as_integer() == 5 ? 1.0 : 0.0;
    }
    bool symmetric() const override { return true; }
};

std::shared_ptr<const GenerativeModel> geometric(double a, double b, std::optional<int> D = std::nullopt) {
    return std::make_shared<GeometricModel>(a, b, D);
}

}  // namespace

TEST_CASE("proposal outside the prior support is rejected without simulation") {
    auto m = geometric(0.5, 0.5, 3);
    NeighbourWalk nw;
    RngStream r(1);
    int zero_cost = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto out = onehit_step(PlainState{ParamPoint::integer(1)}, *m, nw, r);
        if (theta_of(out.new_state).as_integer() == 1 && out.sims_used == 0) ++zero_cost;
        REQUIRE(theta_of(out.new_state).as_integer() >= 1);
    }
    CHECK(zero_cost > 900);  // about half propose 0

    const auto pm = initialize_pseudo_marginal(ParamPoint::integer(3), *m, 4, r);
    CHECK(pm.cached_hits >= 1);
    for (int i = 0; i < 200; ++i) {
        const auto out = pm1_step(pm, *m, nw, 4, r);
        if (!out.accepted && theta_of(out.new_state).as_integer() == 3) {
            CHECK((out.sims_used == 0 || out.sims_used == 4));
        }
    }
}

TEST_CASE("one-hit acceptance and race length match the closed forms") {
    auto m = geometric(0.5, 0.5);
    Toggle23 q;
    RngStream r(2024);
    const int n = 100000;
    int acc = 0;
    double rounds = 0, passed = 0;
    for (int i = 0; i < n; ++i) {
        const auto out = onehit_step(PlainState{ParamPoint::integer(2)}, *m, q, r);
        acc += out.accepted;
        REQUIRE(out.sims_used == 2 * out.rounds);
        if (out.rounds > 0) {
            rounds += static_cast<double>(out.rounds);
            ++passed;
        }
    }
    const double alpha = 0.5 * 0.125 / 0.34375;
    CHECK(std::abs(acc / double(n) - alpha) < 3 * std::sqrt(alpha * (1 - alpha) / n));
    // rounds | passing step 2 ~ Geometric(0.34375)
    const double p = 0.34375;
    const double mean = 1 / p, sd = std::sqrt((1 - p) / (p * p));
    CHECK(std::abs(rounds / passed - mean) < 3 * sd / std::sqrt(passed));
    CHECK(std::abs(passed / n - 0.5) < 3 * std::sqrt(0.25 / n));
}

TEST_CASE("MH and PM2 single-step acceptance") {
    auto m = geometric(0.5, 0.5);
    Toggle23 q;
    RngStream r(99);
    const int n = 100000;
    int mh = 0, pm = 0;
    for (int i = 0; i < n; ++i) {
        mh += mh_step(PlainState{ParamPoint::integer(2)}, *m, q, r).accepted;
        const auto out = pm2_step(PlainState{ParamPoint::integer(2)}, *m, q, 2, r);
        pm += out.accepted;
        REQUIRE((out.sims_used == 3 || out.sims_used == 0));
    }
    CHECK(std::abs(mh / double(n) - 0.25) < 3 * std::sqrt(0.25 * 0.75 / n));
    const double a2 = 7.0 / 64;
    CHECK(std::abs(pm / double(n) - a2) < 3 * std::sqrt(a2 * (1 - a2) / n));
}

TEST_CASE("mh_step needs exact h") {
    LambdaModel::Parts parts;
    parts.prior_density = [](const ParamPoint&) { return 1.0; };
    parts.simulate = [](const ParamPoint&, RngStream&) { return PseudoData{0.0}; };
    parts.hit = [](const PseudoData&) { return false; };
    auto m = std::make_shared<LambdaModel>(parts);
    auto q = std::make_shared<NeighbourWalk>();
    CHECK_THROWS_AS(MetropolisHastingsKernel(m, q), MissingExactH);

    // h = 0 everywhere: the race never ends
    OneHitKernel k(m, q, 50);
    RngStream r(1);
    try {
        run_chain(k, PlainState{ParamPoint::integer(5)}, 10, r);
        FAIL("expected RaceCapExceeded");
    } catch (const RaceCapExceeded& e) {
        REQUIRE(e.iteration().has_value());
        CHECK(*e.iteration() == 1);
    }
    CHECK_THROWS_AS(initialize_pseudo_marginal(ParamPoint::integer(1), *m, 3, r, 100), InitializationFailed);
    CHECK_THROWS_AS(pm1_step(PseudoMarginalState{ParamPoint::integer(1), {{0.0}}, 0}, *m, *q, 1, r),
                    DegenerateState);
}

TEST_CASE("one-step flows match the exact chain from stationary starts") {
    const GeometricExampleSpec spec{0.5, 0.5, 5};
    auto m = geometric(spec.a, spec.b, spec.D);
    NeighbourWalk nw;
    const Eigen::VectorXd pi = geometric_stationary(spec);
    std::discrete_distribution<int> start(pi.data(), pi.data() + pi.size());

    for (const auto& choice : {KernelChoice{KernelKind::MH, 0}, KernelChoice{KernelKind::OneHit, 0},
                               KernelChoice{KernelKind::PM2, 2}}) {
        CAPTURE(choice.label());
        const FiniteChain exact = build_geometric_chain(spec, choice);
        RngStream r(7 + static_cast<int>(choice.kind));
        const int n = 1000000;
        Eigen::MatrixXd count = Eigen::MatrixXd::Zero(5, 5);
        for (int i = 0; i < n; ++i) {
            const int s = start(r.engine());
            const PlainState st{ParamPoint::integer(s + 1)};
            StepOutcome out;
            switch (choice.kind) {
                case KernelKind::MH: out = mh_step(st, *m, nw, r); break;
                case KernelKind::OneHit: out = onehit_step(st, *m, nw, r); break;
                case KernelKind::PM2: out = pm2_step(st, *m, nw, choice.n, r); break;
            }
            count(s, theta_of(out.new_state).as_integer() - 1) += 1;
        }
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                const double p = pi(i) * exact.P(i, j);
                CHECK(std::abs(count(i, j) / n - p) <= 4 * std::sqrt(p * (1 - p) / n) + 1e-12);
                if (j > i) {
                    const double both = count(i, j) + count(j, i);
                    CHECK(std::abs(count(i, j) - count(j, i)) <= 4 * std::sqrt(both) + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("pseudo-marginal chain on the full space targets pi") {
    const GeometricExampleSpec spec{0.5, 0.5, 5};
    auto m = geometric(spec.a, spec.b, spec.D);
    auto q = std::make_shared<NeighbourWalk>();
    PseudoMarginalKernel k(m, q, 3);
    RngStream r(5);
    auto init = initialize_pseudo_marginal(ParamPoint::integer(1), *m, 3, r);
    const auto run = run_chain(k, init, 400000, r);
    auto phi = [](const ParamPoint& p) { return static_cast<double>(p.as_integer()); };
    const auto bm = batch_means_variance(run.trace, phi);
    const Eigen::VectorXd pi = geometric_stationary(spec);
    double exact = 0;
    for (int i = 0; i < 5; ++i) exact += (i + 1) * pi(i);
    CHECK(std::abs(bm.mean - exact) < 4 * bm.std_error);
}

TEST_CASE("eps-augmented acceptance by hand") {
    GaussianSmoothedModel::Params params;
    params.sigma = 1.0;
    params.y = 0.0;
    GaussianSmoothedModel m(params);
    GaussianRandomWalk q({0.5});
    LogScaleEpsWalk g(0.3);
    const EpsAugmentedState from{ParamPoint::real({0.0}), 1.0, {0.5}};
    const EpsAugmentedState to{ParamPoint::real({0.5}), 2.0, {-0.2}};
    CHECK(alpha_eps_augmented(m, q, g, from, to) == doctest::Approx(0.35401131265018404).epsilon(1e-12));
    CHECK(alpha_eps_augmented(m, q, g, from, from) == doctest::Approx(1.0));
    const EpsAugmentedState far{ParamPoint::real({0.5}), 1e-3, {1e3}};
    CHECK(alpha_eps_augmented(m, q, g, from, far) == 0.0);

    RngStream r(1);
    const EpsAugmentedState dead{ParamPoint::real({0.0}), 1e-3, {1e3}};
    CHECK_THROWS_AS(p4_step(dead, m, q, g, r), DomainError);
    for (int i = 0; i < 100; ++i) {
        const auto out = p4_step(from, m, q, g, r);
        REQUIRE(out.sims_used <= 1);
        REQUIRE(std::get<EpsAugmentedState>(out.new_state).eps > 0.0);
    }
}

TEST_CASE("eps-augmented chain leaves its target invariant") {
    // theta marginal of the augmented target at fixed eps prior is checked through E[theta^2] by quadrature.
    GaussianSmoothedModel::Params params;
    params.sigma = 1.0;
    params.y = 1.0;
    auto m = std::make_shared<GaussianSmoothedModel>(params);
    auto q = std::make_shared<GaussianRandomWalk>(std::vector<double>{0.8});
    auto g = std::make_shared<LogScaleEpsWalk>(0.5);
    EpsAugmentedKernel k(m, q, g);
    RngStream r(17);
    const auto run = run_chain(k, EpsAugmentedState{ParamPoint::real({1.0}), 1.0, {1.0}}, 400000, r);
    auto phi = [](const ParamPoint& p) { return p.coord(0); };
    const auto bm = batch_means_variance(run.trace, phi);

    // posterior mean of theta: int int theta p(t) l2 e^{-e} N(y; t, 1 + e) dt de / normaliser
    double num = 0, den = 0;
    const double dt = 0.01, de = 0.005;
    for (double t = -15; t <= 15; t += dt) {
        for (double e = de / 2; e <= 25; e += de) {
            const double w = 0.5 * std::exp(-std::abs(t)) * std::exp(-e) * normal_pdf(1.0, t, 1.0 + e);
            num += t * w;
            den += w;
        }
    }
    CHECK(std::abs(bm.mean - num / den) < 4 * bm.std_error);
}

TEST_CASE("mixtures") {
    auto m = geometric(0.5, 0.5, 6);
    auto q = std::make_shared<NeighbourWalk>();
    auto mh = std::make_shared<MetropolisHastingsKernel>(m, q);
    auto oh = std::make_shared<OneHitKernel>(m, q);
    CHECK_THROWS_AS(MixtureKernel({{0.5, mh}, {0.6, oh}}), WeightSumError);
    CHECK_THROWS_AS(MixtureKernel({{-0.1, mh}, {1.1, oh}}), WeightSumError);

    MixtureKernel single({{1.0, mh}});
    MixtureKernel twin({{0.3, mh}, {0.7, mh}});
    RngStream r(3);
    const int n = 200000;
    int a1 = 0, a2 = 0, a3 = 0;
    const KernelState s = PlainState{ParamPoint::integer(2)};
    for (int i = 0; i < n; ++i) {
        a1 += mh->step(s, r).accepted;
        a2 += single.step(s, r).accepted;
        a3 += twin.step(s, r).accepted;
    }
    const double p = a1 / double(n);
    const double se = std::sqrt(2 * p * (1 - p) / n);
    CHECK(std::abs(a2 / double(n) - p) < 4 * se);
    CHECK(std::abs(a3 / double(n) - p) < 4 * se);
}

TEST_CASE("kernels reject states of the wrong variant") {
    auto m = geometric(0.5, 0.5);
    auto q = std::make_shared<NeighbourWalk>();
    OneHitKernel k(m, q);
    RngStream r(0);
    CHECK_THROWS_AS(k.step(PseudoMarginalState{ParamPoint::integer(1), {}, 0}, r), DomainError);
}
