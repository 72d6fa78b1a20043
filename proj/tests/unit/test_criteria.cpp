#include <doctest.h>

#include <cmath>

#include "cfhyp/criteria.hpp"
#include "cfhyp/error.hpp"
#include "helpers.hpp"
#include "instances.hpp"

using namespace cfh;

TEST_CASE("classical tests") {
    auto v = classical_tests(NumericCF::constant(0.0, -1.0, 2.5, 50), 50);
    REQUIRE(v.size() == 3);
    CHECK(v[1].test == ClassicalTest::pringsheim);
    CHECK(v[1].holdsUpToHorizon);
    CHECK(v[2].holdsUpToHorizon);
    CHECK_FALSE(v[0].holdsUpToHorizon);
    CHECK(*v[0].witness == 1);

    auto ss = classical_tests(NumericCF::constant(0.0, 1.0, 1.0, 100), 100)[0];
    CHECK(ss.holdsUpToHorizon);
    CHECK(*ss.partialSum == doctest::Approx(100.0));
    CHECK_FALSE(ss.witness);
    auto ss2 = classical_tests(NumericCF::constant(0.0, 1.0, 1.0, 100), 50)[0];
    CHECK(*ss2.partialSum == doctest::Approx(50.0));

    auto p = classical_tests(NumericCF::constant(0.0, -1.0, 1.5, 20), 20)[1];
    CHECK_FALSE(p.holdsUpToHorizon);
    CHECK(*p.witness == 1);

    // boundary value counts as passing
    CHECK(classical_tests(NumericCF::constant(0.0, -1.0, 2.0, 20), 20)[1].holdsUpToHorizon);
    CHECK_THROWS_AS(classical_tests(NumericCF::constant(0.0, -1.0, 2.0, 20), 0), Error);

    // a failure found at some horizon stays a failure at larger horizons
    std::vector<double> b(40, 3.0);
    b[17] = 1.2;
    auto cf = NumericCF::minus_one(0.0, b);
    for (std::size_t h = 18; h <= 40; ++h) {
        auto r = classical_tests(cf, h)[1];
        REQUIRE_FALSE(r.holdsUpToHorizon);
        REQUIRE(*r.witness == 18);
    }
}

TEST_CASE("check_h1") {
    auto c = check_h1(std::vector<double>(20, 2.0));
    CHECK(c.valid);
    CHECK(c.hStarSq == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(c.Lambda0 == doctest::Approx(2.0 + std::sqrt(5.0)).epsilon(1e-14));
    CHECK(c.worpitskyTrigger);
    CHECK(c.alternationTrigger);

    auto z = check_h1(std::vector<double>{1, 3, 0, 0, 2, 2});
    CHECK_FALSE(z.valid);
    CHECK(z.hStarSq == 0.0);
    CHECK(z.argmin == 2);
    CHECK(z.Lambda0 == 1.0);
    CHECK_FALSE(z.alternationTrigger);

    auto a = check_h1(std::vector<double>{1, 3, 0.5, 2.5, -1, 2});
    CHECK(a.alternationTrigger);
    CHECK_FALSE(a.worpitskyTrigger);
    CHECK(a.valid);
}

TEST_CASE("check_h2 constants") {
    auto ok = h2_constants_ok(3.0, 1.5, 2.0, 1e-9);
    CHECK(ok[0]);
    CHECK(ok[1]);
    CHECK(chat(3.0, 1.5) == doctest::Approx(1.34164).epsilon(1e-5));
    CHECK_FALSE(h2_constants_ok(3.0, 1.0, 2.0, 1e-9)[0]);    // C below 3/sqrt(8)
    CHECK_FALSE(h2_constants_ok(3.0, 1.42, 2.0, 1e-9)[1]);   // C below 10/7
    CHECK_FALSE(h2_constants_ok(3.0, 1.5, 1.1, 1e-9)[0]);    // delta below 9/8

    std::vector<RZStep> chain(10, RZStep{0.2, 4.0});
    chain[6].Phi = M_PI_2;
    auto h = check_h2(chain, 3.0, 1.5, 2.0);
    CHECK_FALSE(h.holds);
    CHECK_FALSE(h.conditionsOk[2]);
    CHECK(*h.witness == 7);
}

TEST_CASE("check_h2 constant b = 5") {
    std::vector<double> b(402, 5.0);
    auto pairs = pair_svds(b);
    auto chain = build_rz_chain(pairs);
    auto h1 = check_h1(pairs);
    auto h = check_h2_auto(chain, h1.Lambda0);
    CHECK(h.holds);
    CHECK(h.autoSelected);
    CHECK(h.ChatLambda > 1.0);
    CHECK(h.horizon == 200);
    CHECK(h.crossCheckOk);
    CHECK(h.worstLogSlack >= -1e-8);
}

TEST_CASE("check_h2 bound on random engineered chains") {
    auto& g = testutil::rng(404);
    for (int i = 0; i < 100; ++i) {
        auto chain = inst::random_h2_chain(g, 200, 3.0, 1.5, 2.0);
        auto h = check_h2(chain, 3.0, 1.5, 2.0);
        REQUIRE(h.holds);
        REQUIRE(h.boundRate > 1.0);
        auto logs = chain_log_norms(chain);
        for (std::size_t n = 1; n <= logs.size(); ++n)
            REQUIRE(logs[n - 1] >= std::log(3.0) + double(n - 1) * std::log(h.ChatLambda) - 1e-8);
    }
}

TEST_CASE("Pringsheim sequences pass H1 and auto H2") {
    auto& g = testutil::rng(77);
    int passed = 0;
    for (int i = 0; i < 100; ++i) {
        auto b = inst::random_pringsheim(g, 200);
        auto pairs = pair_svds(b);
        auto h1 = check_h1(b);
        REQUIRE(h1.valid);
        REQUIRE(h1.worpitskyTrigger);
        auto h2 = check_h2_auto(build_rz_chain(pairs), h1.Lambda0);
        if (h2.holds) ++passed;
        REQUIRE(h2.crossCheckOk);
    }
    CHECK(passed == 100);
}

TEST_CASE("grouped chain: singleton grouping inherits the bound") {
    auto& g = testutil::rng(5);
    auto chain = inst::random_h2_chain(g, 120, 3.0, 1.5, 2.0);
    ContractionSpec xi;
    for (std::size_t n = 1; n <= chain.size(); ++n) xi.xi.push_back(n);
    auto grouped = group(chain, xi);
    auto sub = check_h2(grouped.dSteps, 3.0, 1.5, 2.0);
    REQUIRE(sub.holds);
    auto v = lemma4_check(chain, grouped, 9.0, 1, sub);
    CHECK(v.holds);
    CHECK(v.k0 >= 1);
    CHECK(v.CLambda > 1.0);
    CHECK(v.crossCheckOk);
}

TEST_CASE("grouped chain: pair grouping of a step-wise violating chain") {
    auto chain = inst::pair_violation_chain(150, 50.0, 5.0, 1.0);
    // the plain chain violates the angle condition at every odd step
    auto plain = check_h2_auto(chain, 5.0);
    CHECK_FALSE(plain.holds);

    ContractionSpec xi;
    for (std::size_t n = 2; n <= chain.size(); n += 2) xi.xi.push_back(n);
    auto grouped = group(chain, xi);
    double lmin = 1e300;
    for (auto& d : grouped.dSteps) lmin = std::min(lmin, d.lambda);
    CHECK(lmin == doctest::Approx(10.0).epsilon(1e-9));
    auto sub = check_h2_auto(grouped.dSteps, lmin);
    REQUIRE(sub.holds);
    auto v = lemma4_check(chain, grouped, 50.0, 2, sub);
    CHECK(v.holds);
    CHECK(v.crossCheckOk);
    CHECK(v.measuredLogRate > 0.9);
    CHECK(v.measuredLogRate <= 0.5 * std::log(10.0) + 1e-9);
    CHECK(v.measuredLogRate >= v.certifiedLogRate);

    auto small = lemma4_check(chain, grouped, 50.0, 1, sub);
    CHECK_FALSE(small.holds);
    CHECK_FALSE(small.gapsOk);
    CHECK(*small.gapWitness == 1);
}

TEST_CASE("two-step window") {
    // lambda2 -> 1: kappa = rho = 1 and the bound is C/Lambda0
    double kappa = 0, rho = 0;
    const double b = lemma5_u_bound(std::log(40.0), 0.0, 8.0, 2.0, &kappa, &rho);
    CHECK(kappa == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rho == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(b == doctest::Approx(2.0 / 8.0).epsilon(1e-12));
    // and numerically continuous in lambda2
    CHECK(lemma5_u_bound(std::log(40.0), 1e-7, 8.0, 2.0) == doctest::Approx(0.25).epsilon(1e-5));

    // u = 0: |tan psi| >= Lambda0/C
    auto w = lemma5_window(30.0, 10.0, 8.0, 2.0);
    CHECK(std::abs(w.u) < 1e-12);
    CHECK(w.uInside);
    CHECK(std::abs(1.0 / w.cotPsi) >= 8.0 / 2.0);
    CHECK(in_interval(0.0, w.cotPhi2Interval));

    // u far above the bound
    auto far = lemma5_window(30.0, 10.0, 8.0, 2.0, 0.3);
    CHECK_FALSE(far.uInside);

    CHECK_THROWS_AS(lemma5_window(10.0, 30.0, 8.0, 2.0), Error);
    CHECK_THROWS_AS(lemma5_window(30.0, 10.0, 8.0, 9.0), Error);
    CHECK_THROWS_AS(lemma5_window(30.0, 5.0, 8.0, 2.0), Error);
}

TEST_CASE("two-step window guarantee on random windows") {
    auto& g = testutil::rng(55);
    int tested = 0;
    for (int i = 0; i < 1000; ++i) {
        const double L = testutil::uniform(g, 2.0, 10.0);
        const double C = testutil::uniform(g, 1.05, 0.9 * L);
        const double l2 = L * testutil::uniform(g, 1.0, 4.0);
        const double l1 = l2 * testutil::uniform(g, 1.01, 20.0);
        const double bound = lemma5_u_bound(std::log(l1), std::log(l2), L, C);
        const double u = bound * testutil::uniform(g, -1.0, 1.0);
        const double phi1 = std::atan2(1.0, u / (l2 * l2));
        auto w = lemma5_window(l1, l2, L, C, phi1);
        REQUIRE(w.uInside);
        const auto iv = w.cotPhi2Interval;
        double c2;
        if (iv[0] <= iv[1]) {
            c2 = testutil::uniform(g, iv[0], iv[1]);
        } else {
            // wraps through infinity: sample from one of the two rays
            c2 = testutil::uniform(g, 0.0, 1.0) < 0.5 ? iv[0] + testutil::uniform(g, 0.0, 50.0)
                                                      : iv[1] - testutil::uniform(g, 0.0, 50.0);
        }
        const double phi2 = std::atan2(1.0, c2);
        const double psi = merge(l1, l2, phi1).psi;
        const double s = std::sin(phi2 + psi);
        REQUIRE(L * std::abs(std::cos(phi2 + psi) / s) >= C * (1.0 - 1e-9));
        ++tested;
    }
    CHECK(tested == 1000);
}

namespace {
Theorem3Params t3params() {
    Theorem3Params p;
    p.Lambda0Min = 20.0;
    p.Lambda0Max = 20.0;
    p.Clambda = 5.0;
    p.delta = 2.0;
    p.Glambda = 2.0;
    p.N0 = 1;
    return p;
}
}  // namespace

TEST_CASE("violation-pair certificate: degenerate case") {
    auto& g = testutil::rng(9);
    auto chain = inst::random_h2_chain(g, 100, 3.0, 1.5, 2.0);
    Theorem3Params p;
    p.Lambda0Min = 3.0;
    p.Clambda = 1.5;
    p.delta = 2.0;
    p.Glambda = 1.2;
    auto t = theorem3_certify(chain, {}, p);
    CHECK(t.degenerate);
    REQUIRE(t.h2);
    CHECK(t.overall == t.h2->holds);
    CHECK(t.overall);
    auto t2 = theorem3_certify(chain, {}, p, {}, true);
    CHECK(t2.degenerate);
}

TEST_CASE("violation-pair certificate: constructed instance") {
    auto v = inst::violation_chain(20.0, 6, std::vector<std::size_t>(12, 1));
    auto p = t3params();
    auto t = theorem3_certify(v.chain, v.m, p);
    CHECK(t.constantsOk);
    CHECK(t.offViolationOk);
    CHECK(t.sequencesOk);
    REQUIRE(t.perK.size() == 12);
    for (std::size_t k = 0; k < t.perK.size(); ++k)
        for (int c = 0; c < 7; ++c) { INFO("k=" << k + 1 << " cond=" << c + 1); CHECK(t.perK[k][c]); }
    CHECK(t.overall);
    CHECK(t.crossCheckOk);
    // condition 7 read with tan rejects the same instance
    CHECK_FALSE(t.overallPrinted);
    for (const auto& b : t.blocks) {
        CHECK(b.cond7Cot);
        CHECK_FALSE(b.cond7Printed);
    }
    for (std::size_t k = 0; k < t.jSeq.size(); ++k) {
        CHECK(t.nSeq[k] == v.m[2 * k]);
        CHECK(t.jSeq[k] == v.m[2 * k + 1]);
        CHECK(t.lSeq[k] > t.nSeq[k]);
        CHECK(t.lSeq[k] < t.jSeq[k]);
    }
    // growth against log Chat / N0
    CHECK(t.measuredLogRate >= std::log(t.ChatLambda) / double(t.N0) - 1e-3);

    // the violations are found from the chain alone
    auto a = theorem3_certify(v.chain, {}, p, {}, true);
    CHECK(a.mSeq == v.m);
    CHECK(a.overall);
}

TEST_CASE("violation-pair certificate: condition 4 failure") {
    std::vector<std::size_t> plus(8, 1);
    plus[4] = 2;
    auto v = inst::violation_chain(20.0, 6, plus);
    auto t = theorem3_certify(v.chain, v.m, t3params());
    CHECK_FALSE(t.overall);
    REQUIRE(t.perK.size() == 8);
    CHECK_FALSE(t.perK[4][3]);
    CHECK(t.perK[3][3]);
    REQUIRE(t.failingK);
    CHECK(*t.failingK == 5);
}

TEST_CASE("violation-pair certificate: malformed sequences") {
    auto v = inst::violation_chain(20.0, 6, std::vector<std::size_t>(3, 1));
    auto m = v.m;
    std::swap(m[0], m[1]);
    CHECK_THROWS_AS(theorem3_certify(v.chain, m, t3params()), Error);
    auto m2 = v.m;
    m2[1] = m2[0] + 1;  // m_2 - m_1 = 1
    CHECK_THROWS_AS(theorem3_certify(v.chain, m2, t3params()), Error);
    auto p = t3params();
    p.lSeq = {v.m[1]};  // l_1 = j_1
    CHECK_THROWS_AS(theorem3_certify(v.chain, v.m, p), Error);
}

TEST_CASE("scaled-family certificate: empty tSeq") {
    std::vector<double> bHat(400, 1.0);
    auto r = corollary2_certify(bHat, {}, 10.0);
    CHECK(r.holds);
    CHECK(r.h1Ok);
    CHECK(r.h2OffOk);
    CHECK(r.constantsOk);
    CHECK(r.crossCheckOk);
    CHECK(r.Lambda0Min == doctest::Approx(10.0));
    // too small a gain breaks the constants
    CHECK_FALSE(corollary2_certify(bHat, {}, 2.0).holds);
}

TEST_CASE("scaled-family certificate: spacing and pattern errors") {
    std::vector<double> bHat(60, 1.0);
    bHat[9] = 0.1 / 10.0;
    bHat[11] = 0.1 / 10.0;
    auto r = corollary2_certify(bHat, {10, 12}, 10.0);
    CHECK_FALSE(r.conditions[0]);
    REQUIRE(r.failingCondition);
    CHECK(*r.failingCondition == 1);
    CHECK(*r.witness == 10);

    std::vector<double> bad(60, 1.0);
    bad[20] = 0.0;  // zero off tSeq
    CHECK_THROWS_AS(corollary2_certify(bad, {}, 10.0), Error);
    Corollary2Options o;
    o.C2 = 0.5;
    CHECK_THROWS_AS(corollary2_certify(std::vector<double>(60, 1.0), {}, 10.0, o), Error);
}

TEST_CASE("scaled-family certificate: constructed instance") {
    const double g = 50.0, c1 = 0.06;
    auto s = inst::scaled_instance(g, c1, 10);
    auto r = corollary2_certify(s.bHat, s.t, g);
    CHECK(r.C1 == doctest::Approx(c1));
    CHECK(r.C2 == doctest::Approx(1.0));
    for (int c = 0; c < 7; ++c) { INFO("cond=" << c + 1); CHECK(r.conditions[c]); }
    CHECK(r.h1Ok);
    CHECK(r.h2OffOk);
    CHECK(r.constantsOk);
    CHECK(r.holds);
    CHECK(r.crossCheckOk);
    // tuned entries sit inside half of the allowed window
    const double win = 1.0 / (4.0 * c1 * c1 * g * g);
    for (auto t : s.t) {
        const double prev = g * s.bHat[t - 2];
        CHECK(std::abs(g * s.bHat[t - 1] - prev / (1 + prev * prev)) < win);
    }

    Corollary2Options o;
    o.gGrid = {10, 20, 30, 40, 50, 60, 80};
    o.generator = [&](double gg) { return inst::scaled_instance(gg, c1, 10).bHat; };
    auto sweep = corollary2_certify(s.bHat, s.t, g, o);
    REQUIRE(sweep.g0);
    CHECK(*sweep.g0 == doctest::Approx(50.0));
    CHECK(sweep.testedG.size() == 7);
}

TEST_CASE("scaled-family certificate: with uniform magnitudes cannot meet items 2 and 6 together") {
    // with C1 = C2 the root of cot Phi^- sits about 1/g from b*, outside 1/(2 C1^2 g^2)
    for (double g : {10.0, 30.0, 100.0}) {
        auto s = inst::scaled_instance(g, 1.0, 4);
        auto r = corollary2_certify(s.bHat, s.t, g);
        CHECK_FALSE(r.holds);
        CHECK_FALSE(r.conditions[1]);
    }
}
