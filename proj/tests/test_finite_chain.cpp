#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>

#include "abcmc/errors.hpp"
#include "abcmc/finite_chain.hpp"
#include "abcmc/geometric.hpp"

using namespace abcmc;

namespace {

std::vector<ParamPoint> int_states(int n) {
    std::vector<ParamPoint> s;
    for (int i = 1; i <= n; ++i) s.push_back(ParamPoint::integer(i));
    return s;
}

FiniteChain d3_mh() { return build_geometric_chain({0.5, 0.5, 3}, {KernelKind::MH, 0}); }

}  // namespace

TEST_CASE("hand-computed three-state MH chain") {
    const auto c = d3_mh();
    Eigen::Matrix3d expect;
    expect << 0.875, 0.125, 0.0, 0.5, 0.375, 0.125, 0.0, 0.5, 0.5;
    CHECK((c.P - expect).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(c.pi(0) == doctest::Approx(16.0 / 21));
    CHECK(c.pi(1) == doctest::Approx(4.0 / 21));
    CHECK(c.pi(2) == doctest::Approx(1.0 / 21));
    const auto s = spectral_summary(c);
    REQUIRE(s.eigenvalues.size() == 3);
    CHECK(s.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.eigenvalues[1] == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(s.eigenvalues[2] == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(s.gap_vb == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(s.gap_ge == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("stationary vector routes agree") {
    const auto c = d3_mh();
    const auto from_recursion = finite_chain_from_matrix(c.states, c.P);
    CHECK((from_recursion.pi - c.pi).cwiseAbs().maxCoeff() < 1e-14);

    // not birth-death: forces the linear solve
    Eigen::Matrix3d p;
    p << 0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5;
    const auto solved = finite_chain_from_matrix(int_states(3), p);
    for (int i = 0; i < 3; ++i) CHECK(solved.pi(i) == doctest::Approx(1.0 / 3));
}

TEST_CASE("invalid chains are refused") {
    Eigen::Matrix3d cyc;
    cyc << 0.1, 0.8, 0.1, 0.1, 0.1, 0.8, 0.8, 0.1, 0.1;
    CHECK_THROWS_AS(finite_chain_from_matrix(int_states(3), cyc), NotReversible);

    Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
    CHECK_THROWS_AS(finite_chain_from_matrix(int_states(2), id), NotStationary);

    Eigen::Matrix2d bad;
    bad << 0.5, 0.6, 0.5, 0.5;
    CHECK_THROWS(finite_chain_from_matrix(int_states(2), bad));

    // acceptance zero everywhere: needs a stationary hint
    Eigen::MatrixXd q = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3);
    auto zero = [](std::size_t, std::size_t) { return 0.0; };
    CHECK_THROWS_AS(build_finite_kernel(int_states(3), q, zero), NotStationary);
    const auto stuck = build_finite_kernel(int_states(3), q, zero, Eigen::Vector3d(0.2, 0.3, 0.5));
    CHECK(stuck.P.isIdentity());
}

TEST_CASE("iid and permutation chains") {
    Eigen::Vector3d pi(0.2, 0.3, 0.5);
    Eigen::MatrixXd iid = Eigen::VectorXd::Ones(3) * pi.transpose();
    const auto c = finite_chain_from_matrix(int_states(3), iid);
    const auto s = spectral_summary(c);
    CHECK(s.gap_vb == doctest::Approx(1.0));
    CHECK(s.gap_ge == doctest::Approx(1.0));
    const std::vector<double> f{1.0, 4.0, -2.0};
    double m = 0, v = 0;
    for (int i = 0; i < 3; ++i) m += pi(i) * f[i];
    for (int i = 0; i < 3; ++i) v += pi(i) * (f[i] - m) * (f[i] - m);
    CHECK(asymptotic_variance_fundamental(c, f) == doctest::Approx(v).epsilon(1e-12));
    CHECK(asymptotic_variance_spectral(c, f) == doctest::Approx(v).epsilon(1e-10));

    Eigen::Matrix2d flip;
    flip << 0, 1, 1, 0;
    const auto perm = finite_chain_from_matrix(int_states(2), flip);
    const auto ps = spectral_summary(perm);
    CHECK(ps.gap_vb == 2.0);
    CHECK(ps.gap_ge == 0.0);
    CHECK(conductance_exact(perm).kappa == doctest::Approx(1.0));
}

TEST_CASE("exact asymptotic variances against high-precision references") {
    struct Case {
        KernelChoice k;
        double a, b;
        int D;
        double phi1, phi2, phi3_4;
    };
    const Case cases[] = {
        {{KernelKind::MH, 0}, 0.5, 0.5, 10, 3.5011819246962841, 159.91118930372544, 0.11345014743958989},
        {{KernelKind::OneHit, 0}, 0.5, 0.5, 10, 4.9142725014020014, 238.63624850457438, 0.16907770015530861},
        {{KernelKind::PM2, 1}, 0.5, 0.5, 10, 29.515497093814659, 12582.317296084696, 1.3363204681024582},
        {{KernelKind::PM2, 1}, 0.5, 0.1, 10, 24.117087754684169, 21753528351.185854, 1.0457592803838477},
        {{KernelKind::PM2, 100}, 0.5, 0.5, 10, 3.5558449363342827, 246.06835533228117, 0.11495473143737248},
        {{KernelKind::OneHit, 0}, 0.5, 0.9, 20, 35.012753064421277, 519.83792988200131, 1.4710185547682292},
        {{KernelKind::MH, 0}, 0.5, 0.5, 20, 3.5061728010648634, 331.877139893594, 0.11352539045923793},
        {{KernelKind::OneHit, 0}, 0.9, 0.5, 20, 39.133131954449493, 504.5488998698038, 1.6775817420026917},
    };
    for (const auto& cs : cases) {
        CAPTURE(cs.k.label());
        CAPTURE(cs.k.n);
        CAPTURE(cs.b);
        CAPTURE(cs.D);
        const GeometricExampleSpec spec{cs.a, cs.b, cs.D};
        const auto chain = build_geometric_chain(spec, cs.k);
        const auto tf = test_functions(spec);
        const auto phi3 = tf.phi3(4);
        CHECK(asymptotic_variance_birth_death(chain, tf.phi1) == doctest::Approx(cs.phi1).epsilon(1e-10));
        CHECK(asymptotic_variance_birth_death(chain, tf.phi2) == doctest::Approx(cs.phi2).epsilon(1e-10));
        CHECK(asymptotic_variance_birth_death(chain, phi3) == doctest::Approx(cs.phi3_4).epsilon(1e-10));
        CHECK(asymptotic_variance_fundamental(chain, tf.phi1) == doctest::Approx(cs.phi1).epsilon(1e-6));
        CHECK(asymptotic_variance(chain, tf.phi2) == doctest::Approx(cs.phi2).epsilon(1e-10));
    }
}

TEST_CASE("spectral gaps against high-precision references") {
    // gap_vb at a = 1/2, D = 5, 10, ..., 50
    struct Series {
        KernelChoice k;
        double b;
        std::vector<double> gaps;
    };
    const std::vector<Series> series{
        {{KernelKind::PM2, 1}, 0.1, {4.972275035e-5, 4.9722378e-10, 4.9722378e-15, 4.9722378e-20, 4.9722378e-25,
                                     4.9722378e-30, 4.9722378e-35, 4.9722378e-40, 4.9722378e-45, 4.9722378e-50}},
        {{KernelKind::PM2, 100}, 0.1, {0.004946269051, 4.972237539e-8, 4.9722378e-13, 4.9722378e-18, 4.9722378e-23,
                                       4.9722378e-28, 4.9722378e-33, 4.9722378e-38, 4.9722378e-43, 4.9722378e-48}},
        {{KernelKind::PM2, 1}, 0.5, {0.02490037002, 0.0007644090911, 2.388726075e-5, 7.464768823e-7,
                                     2.332740257e-8, 7.289813304e-10, 2.278066657e-11, 7.118958304e-13,
                                     2.22467447e-14, 6.952107719e-16}},
        {{KernelKind::PM2, 100}, 0.5, {0.22009124, 0.06485945152, 0.002377511065, 7.463674222e-5, 2.332729568e-6,
                                       7.28981226e-8, 2.278066647e-9, 7.118958303e-11, 2.22467447e-12,
                                       6.952107719e-14}},
        {{KernelKind::OneHit, 0}, 0.1, {0.3133176701, 0.2840127245, 0.2784570564, 0.2765054902, 0.2756013427,
                                        0.2751100744, 0.2748138451, 0.27462159, 0.2744897905, 0.274395523}},
        {{KernelKind::MH, 0}, 0.1, {0.3440983006, 0.3123372979, 0.3062795473, 0.304146173, 0.3031564086,
                                    0.3026181437, 0.3022933775, 0.3020825074, 0.3019378972, 0.3018344392}},
    };
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.gaps.size(); ++k) {
            const int D = 5 * static_cast<int>(k + 1);
            CAPTURE(s.k.label());
            CAPTURE(s.k.n);
            CAPTURE(s.b);
            CAPTURE(D);
            const auto chain = build_geometric_chain({0.5, s.b, D}, s.k);
            const double gap = spectral_summary(chain).gap_vb;
            CHECK(gap == doctest::Approx(s.gaps[k]).epsilon(1e-7));
            CHECK(birth_death_gap(chain) == doctest::Approx(s.gaps[k]).epsilon(1e-7));
        }
    }
}

TEST_CASE("smallest eigenvalue against high-precision references") {
    const auto c1 = build_geometric_chain({0.5, 0.1, 50}, {KernelKind::PM2, 1});
    CHECK(1.0 + spectral_summary(c1).eigenvalues.back() == doctest::Approx(1.947236901).epsilon(1e-8));
    const auto c2 = build_geometric_chain({0.5, 0.5, 50}, {KernelKind::PM2, 100});
    CHECK(1.0 + spectral_summary(c2).eigenvalues.back() == doctest::Approx(0.9445716115).epsilon(1e-8));
    const auto c3 = build_geometric_chain({0.5, 0.1, 50}, {KernelKind::MH, 0});
    CHECK(1.0 + spectral_summary(c3).eigenvalues.back() == doctest::Approx(1.251834439).epsilon(1e-8));
}

TEST_CASE("variance routes agree on well-conditioned chains") {
    for (double b : {0.1, 0.5, 0.9}) {
        for (int D : {5, 10, 20}) {
            const GeometricExampleSpec spec{0.5, b, D};
            const auto tf = test_functions(spec);
            for (const auto& k : {KernelChoice{KernelKind::MH, 0}, KernelChoice{KernelKind::OneHit, 0}}) {
                const auto c = build_geometric_chain(spec, k);
                const double f = asymptotic_variance_fundamental(c, tf.phi1);
                CHECK(asymptotic_variance_spectral(c, tf.phi1) == doctest::Approx(f).epsilon(1e-8));
                CHECK(asymptotic_variance_birth_death(c, tf.phi1) == doctest::Approx(f).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("total variation curve and spectral sandwich") {
    const auto c = d3_mh();
    const auto tv = tv_curve(c, 2, 5);
    // direct powers
    Eigen::RowVector3d row(0, 0, 1);
    for (std::size_t m = 0; m < 5; ++m) {
        row = row * c.P;
        const double d = 0.5 * (row.transpose() - c.pi).cwiseAbs().sum();
        CHECK(tv[m] == doctest::Approx(d).epsilon(1e-12));
    }
    const auto worst = tv_curve_worst(c, 60);
    for (std::size_t m = 1; m <= 60; ++m) {
        const auto b = tv_bounds_mt(c, m);
        CHECK(worst[m - 1] <= b.upper * (1 + 1e-9) + 1e-300);
        CHECK(worst[m - 1] >= b.lower * (1 - 1e-9));
    }
    CHECK_THROWS_AS(tv_curve(c, 3, 5), DomainError);
}

TEST_CASE("total variation far below double rounding") {
    Eigen::Matrix2d p;
    p << 0.6, 0.4, 0.3, 0.7;
    const auto c = finite_chain_from_matrix(int_states(2), p);
    // from state 0: P^m(0, 1) - pi_1 = -pi_1 l^m with l = 0.3, pi_1 = 4/7
    const auto tv = tv_curve(c, 0, 100);
    for (std::size_t m : {1u, 10u, 50u, 100u}) {
        CHECK(tv[m - 1] == doctest::Approx(4.0 / 7 * std::pow(0.3, double(m))).epsilon(1e-12));
    }
}

TEST_CASE("exhaustive conductance and Cheeger") {
    Eigen::Matrix2d p;
    p << 0.7, 0.3, 0.3, 0.7;
    const auto two = finite_chain_from_matrix(int_states(2), p);
    const auto k2 = conductance_exact(two);
    CHECK(k2.kappa == doctest::Approx(0.3));
    CHECK(k2.argmin_set.size() == 1);

    for (int D : {4, 8, 12}) {
        for (const auto& k : {KernelChoice{KernelKind::MH, 0}, KernelChoice{KernelKind::OneHit, 0},
                              KernelChoice{KernelKind::PM2, 3}}) {
            const auto c = build_geometric_chain({0.5, 0.5, D}, k);
            const double kappa = conductance_exact(c).kappa;
            const double gap = spectral_summary(c).gap_vb;
            CHECK(kappa * kappa / 2 <= gap * (1 + 1e-9));
            CHECK(gap <= 2 * kappa * (1 + 1e-9));
        }
    }
    const auto big = build_geometric_chain({0.5, 0.5, 21}, {KernelKind::MH, 0});
    CHECK_THROWS_AS(conductance_exact(big), TooManyStates);
}

TEST_CASE("mixture matrices") {
    const GeometricExampleSpec spec{0.5, 0.5, 6};
    const auto mh = build_geometric_chain(spec, {KernelKind::MH, 0});
    const auto oh = build_geometric_chain(spec, {KernelKind::OneHit, 0});
    const auto mix = mixture_matrix({mh, oh}, {0.25, 0.75});
    CHECK((mix.P - (0.25 * mh.P + 0.75 * oh.P)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(mixture_matrix({mh, oh}, {0.5, 0.6}), WeightSumError);
    const auto other = build_geometric_chain({0.5, 0.5, 5}, {KernelKind::MH, 0});
    CHECK_THROWS_AS(mixture_matrix({mh, other}, {0.5, 0.5}), StateMismatch);
}

TEST_CASE("chain CSV round trip") {
    const auto c = build_geometric_chain({0.5, 0.3, 7}, {KernelKind::OneHit, 0});
    const auto path = (std::filesystem::temp_directory_path() / "abcmc_chain_roundtrip.csv").string();
    write_chain_csv(c, path);
    const auto back = read_chain_csv(path);
    CHECK(back.states == c.states);
    CHECK((back.P - c.P).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.pi - c.pi).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("variance routes on chains with gaps far below rounding") {
    struct Case {
        double b;
        int D;
        double phi1, phi3_4;
    };
    // 150-digit references
    for (const Case& c : {Case{0.1, 30, 25.207747942661312, 1.0548737569327494},
                          Case{0.5, 50, 31.555555555509849, 1.3557128906249823}}) {
        const GeometricExampleSpec spec{0.5, c.b, c.D};
        const auto chain = build_geometric_chain(spec, {KernelKind::PM2, 1});
        CHECK(birth_death_gap(chain) < 1e-15);
        const auto tf = test_functions(spec);
        const FundamentalVariance fundamental(chain);
        const SpectralVariance spectral(chain);
        CHECK(fundamental.digits() > 16);
        CHECK(spectral.digits() > 16);
        for (const auto& [phi, want] : {std::pair{tf.phi1, c.phi1}, std::pair{tf.phi3(4), c.phi3_4}}) {
            CHECK(fundamental(phi) == doctest::Approx(want).epsilon(1e-10));
            CHECK(spectral(phi) == doctest::Approx(want).epsilon(1e-10));
            CHECK(asymptotic_variance_birth_death(chain, phi) == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("well-conditioned chains stay in double precision") {
    const auto chain = build_geometric_chain({0.5, 0.5, 10}, {KernelKind::MH, 0});
    CHECK(FundamentalVariance(chain).digits() == 16);
    CHECK(SpectralVariance(chain).digits() == 16);
}
