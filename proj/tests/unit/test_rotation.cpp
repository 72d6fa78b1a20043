#include <doctest.h>

#include <cmath>

#include "cfhyp/error.hpp"
#include "cfhyp/oracle.hpp"
#include "cfhyp/rotation.hpp"
#include "helpers.hpp"
#include "instances.hpp"

using namespace cfh;

namespace {

double golden() { return 0.5 * (std::sqrt(5.0) - 1.0); }

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Schema;  // sentinel: nothing thrown
}

double angle_gap(double a, double b) {
    const double d = std::remainder(a - b, M_PI);
    return std::abs(d);
}

}  // namespace

TEST_CASE("periodic functions") {
    auto f = PeriodicFn::trig(0.5, {1.0, -0.3}, {0.2});
    CHECK(std::abs(f(0.0) - f(1.0)) < 1e-12);
    for (double x : {0.1, 0.37, 0.9}) {
        const double h = 1e-6;
        CHECK(f.deriv(x) == doctest::Approx((f(x + h) - f(x - h)) / (2 * h)).epsilon(1e-7));
    }
    CHECK(f.deriv_bound() == doctest::Approx(2 * M_PI * (1.0 + 0.2) + 4 * M_PI * 0.3));

    std::vector<double> v(256);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(2 * M_PI * double(i) / 256.0);
    auto s = PeriodicFn::samples(v);
    CHECK(std::abs(s(0.0) - s(1.0)) < 1e-12);
    CHECK(s(3.0 / 256.0) == doctest::Approx(v[3]));
    for (double x : {0.013, 0.4, 0.77}) {
        CHECK(std::abs(s(x) - std::sin(2 * M_PI * x)) < 1e-5);
        CHECK(std::abs(s.deriv(x) - 2 * M_PI * std::cos(2 * M_PI * x)) < 1e-2);
    }
    CHECK(s.deriv_bound() >= 2 * M_PI);
    CHECK(kind_of([] { PeriodicFn::samples({1, 2, 3}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("rotation map") {
    CHECK(rotate(0.3, 0.25, 2) == doctest::Approx(0.8));
    CHECK(rotate(0.3, 0.25, 0) == 0.3);
    auto& g = testutil::rng(11);
    for (int i = 0; i < 100; ++i) {
        const double x = testutil::uniform(g, 0, 1), w = testutil::uniform(g, 0, 1);
        const auto a = static_cast<long long>(testutil::uniform(g, -50, 50));
        const auto b = static_cast<long long>(testutil::uniform(g, -50, 50));
        CHECK(circle_dist(rotate(rotate(x, w, a), w, b), rotate(x, w, a + b)) < 1e-12);
        const double r = rotate(x, w, a);
        CHECK(r >= 0.0);
        CHECK(r < 1.0);
    }
    CHECK(circle_diff(0.95, 0.05) == doctest::Approx(-0.1));
    CHECK(circle_diff(0.05, 0.95) == doctest::Approx(0.1));
    CHECK(circle_diff(0.75, 0.25) == 0.5);
}

TEST_CASE("generator validation") {
    FunctionalGenerator gen{PeriodicFn::trig(0, {}, {1.0}), golden(), 1.0};
    CHECK_NOTHROW(validate(gen));
    gen.omega = 1.5;
    CHECK(kind_of([&] { validate(gen); }) == ErrorKind::InvalidArgument);
    gen.omega = 0.375;  // 8 omega = 3
    CHECK(kind_of([&] { validate(gen); }) == ErrorKind::InvalidArgument);
    gen.omega = golden();
    gen.g = 0.5;
    CHECK(kind_of([&] { validate(gen); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("sampled fractions") {
    FunctionalGenerator one{PeriodicFn::trig(1.0, {}, {}), golden(), 2.5};
    auto cf = sample_chain(one, 0.3, 10);
    for (double b : cf.b) CHECK(b == 2.5);
    CHECK(cf.b0 == 2.5);
    CHECK(cf.is_minus_one_form());

    FunctionalGenerator c{PeriodicFn::trig(0.0, {1.0}, {}), 0.25, 1.0};
    auto cc = sample_chain(c, 0.0, 5);
    CHECK(cc.b[0] == doctest::Approx(1.0));
    CHECK(std::abs(cc.b[1]) < 1e-12);
    CHECK(cc.b[2] == doctest::Approx(-1.0));
    CHECK(std::abs(cc.b[3]) < 1e-12);
    CHECK(cc.b[4] == doctest::Approx(1.0));
    CHECK(sample_chain(c, 0.1, 1).b.size() == 1);

    // the functional steps reproduce the chain built from the sampled fraction
    FunctionalGenerator gen{PeriodicFn::trig(0.2, {0.5}, {1.0}), golden(), 7.0};
    for (double x : {0.0, 0.31, 0.77}) {
        const auto fc = functional_chain(gen, x, 20);
        const auto rc = build_rz_chain(pair_svds(sample_chain(gen, x, 42)));
        for (std::size_t n = 0; n < 20; ++n) {
            CHECK(fc[n].lambda == doctest::Approx(rc[n].lambda).epsilon(1e-9));
            CHECK(angle_gap(fc[n].Phi, rc[n].Phi) < 1e-9);
        }
    }
}

TEST_CASE("zero set") {
    auto gen = inst::sine_instance();
    const auto cs = find_zero_set(gen);
    REQUIRE(cs.points.size() == 2);
    CHECK(std::abs(cs.points[0] - 0.1180339887) < 1e-10);
    CHECK(std::abs(cs.points[1] - 0.6180339887) < 1e-10);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(std::abs(std::abs(cs.derivs[i]) - 2 * M_PI) < 1e-9);
        CHECK(std::abs(gen.b(cs.points[i] - gen.omega)) < 1e-11);
    }
    CHECK(cs.derivs[0] * cs.derivs[1] < 0);

    FunctionalGenerator pos{PeriodicFn::trig(2.0, {1.0}, {}), golden(), 1.0};
    CHECK(find_zero_set(pos).points.empty());

    // sin^2 = (1 - cos 4 pi x) / 2
    FunctionalGenerator sq{PeriodicFn::trig(0.5, {0.0, -0.5}, {}), golden(), 1.0};
    CHECK(kind_of([&] { find_zero_set(sq); }) == ErrorKind::Transversality);
    CHECK(kind_of([&] { find_zero_set(gen, 128); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("functional H1 scopes") {
    FunctionalGenerator five{PeriodicFn::trig(5.0, {1.0}, {}), golden(), 1.0};
    auto c = check_h1_functional(five, H1Scope::circleGrid);
    CHECK(c.valid);
    CHECK(c.Lambda0 > 4.0);
    CHECK(c.lipschitzMargin > 0.0);
    // the certified value sits below every sampled value
    auto& g = testutil::rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double x = testutil::uniform(g, 0, 1);
        const double b1 = five.b(x), b2 = five.b(x - five.omega);
        CHECK(c.hStarSq <= (b1 - b2) * (b1 - b2) + b1 * b1 * b2 * b2);
    }

    auto gen = inst::sine_instance();
    const auto cs = find_zero_set(gen);
    auto sc = check_h1_functional(gen, H1Scope::scaledCircle);
    auto dc = check_h1_functional(gen, H1Scope::differenceOnly, 1u << 14, 0.05, &cs);
    CHECK(sc.valid);
    CHECK(dc.valid);
    CHECK(dc.hStarSq <= sc.hStarSq * 1e6);

    // zeros exactly omega apart: b(x) and b(x - omega) vanish together
    const double w = golden(), m = 0.4;
    FunctionalGenerator bad{PeriodicFn::trig(-std::cos(M_PI * w), {std::cos(2 * M_PI * m)}, {std::sin(2 * M_PI * m)}),
                            w, 10.0};
    CHECK_FALSE(check_h1_functional(bad, H1Scope::scaledCircle).valid);
    CHECK(kind_of([&] { check_h1_functional(gen, H1Scope::differenceOnly); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("collision graph, sine instance") {
    auto gen = inst::sine_instance();
    const auto cs = find_zero_set(gen);
    const auto gr = collision_graph(cs, gen.omega, 0.05);
    // point 1 is 0.6180340
    CHECK(gr.Tdelta[1] == 2);
    CHECK(gr.Rdelta[1] == 0);
    CHECK(gr.Tdelta[0] == 2);
    CHECK(gr.Rdelta[0] == 1);
    CHECK_FALSE(gr.primary[0]);
    CHECK_FALSE(gr.primary[1]);
    CHECK(gr.hitDistance[1] == doctest::Approx(0.0278640).epsilon(1e-5));
    CHECK(circle_dist(rotate(cs.points[1], 2 * gen.omega, 2), 0.1458980) < 1e-6);
    REQUIRE(gr.classes.size() == 1);
    CHECK(gr.periods[0] == 2);

    auto bf = oracle::brute_force_collisions(cs.points, gen.omega, 0.05, 10000);
    CHECK(bf.Tdelta == gr.Tdelta);
    CHECK(bf.Rdelta == gr.Rdelta);
    CHECK(bf.classes == gr.classes);

    CHECK(kind_of([&] { collision_graph(cs, gen.omega, 1e-6, 1000); }) == ErrorKind::HorizonExceeded);
    CHECK(kind_of([&] { oracle::brute_force_collisions(cs.points, gen.omega, 1e-6, 1000); }) ==
          ErrorKind::HorizonExceeded);
    CHECK(kind_of([&] { collision_graph(cs, gen.omega, 0.3); }) == ErrorKind::DeltaTooLarge);
    CHECK(kind_of([&] { oracle::brute_force_collisions(cs.points, gen.omega, 0.3, 1000); }) ==
          ErrorKind::DeltaTooLarge);

    const double d = default_delta(cs, gen.omega);
    CHECK(d <= 0.05);
    CHECK_NOTHROW(collision_graph(cs, gen.omega, d));
}

TEST_CASE("collision graph against the naive scan") {
    auto& g = testutil::rng(2024);
    int admissible = 0, nonCyclic = 0, tries = 0;
    while (admissible < 100 && tries < 5000) {
        ++tries;
        const auto c = inst::random_collision_config(g);
        CriticalSet cs;
        cs.points = c.points;
        cs.derivs.assign(c.points.size(), 1.0);
        ErrorKind mainKind = ErrorKind::Schema, refKind = ErrorKind::Schema;
        CollisionGraph a, b;
        try {
            a = collision_graph(cs, c.omega, c.delta, 10000);
        } catch (const Error& e) {
            mainKind = e.kind();
        }
        try {
            b = oracle::brute_force_collisions(c.points, c.omega, c.delta, 10000);
        } catch (const Error& e) {
            refKind = e.kind();
        }
        CHECK(mainKind == refKind);
        if (mainKind == ErrorKind::NonCyclicCollision) ++nonCyclic;
        if (mainKind != ErrorKind::Schema) continue;
        ++admissible;
        CHECK(a.Tdelta == b.Tdelta);
        CHECK(a.Rdelta == b.Rdelta);
        CHECK(a.classes == b.classes);
        CHECK(a.periods == b.periods);
        // classes partition the points
        std::size_t total = 0;
        for (auto& cls : a.classes) total += cls.size();
        CHECK(total == c.points.size());
        if (c.points.size() == 1) CHECK(a.primary[0]);
    }
    CHECK(admissible == 100);
    CHECK(nonCyclic > 0);
}

TEST_CASE("refined critical points on the sine instance") {
    auto gen = inst::sine_instance(100.0);
    const auto cs = find_zero_set(gen);
    const auto gr = collision_graph(cs, gen.omega, 0.05);
    const auto a = refine_critical_points(gen, cs, gr);
    REQUIRE(a.classes.size() == 1);
    for (const auto& p : a.classes[0]) {
        CHECK(p.deviation < 3e-4);
        CHECK(circle_dist(p.xStar, p.prediction) < 3e-4);
        CHECK(p.deviationDoubled >= 0.0);
    }
    // antisymmetry of sin about its zeros pins x* to the prediction
    CHECK(a.classes[0][0].deviation < 1e-12);

    const auto gr2 = collision_graph(cs, gen.omega, 0.02);
    const auto a2 = refine_critical_points(gen, cs, gr2, false);
    for (const auto& p : a2.classes[0]) {
        CHECK(p.rMin <= 2 * M_PI);
        CHECK(p.rMax >= 2 * M_PI);
        CHECK(p.rMin >= 0.8 * 2 * M_PI);
        CHECK(p.rMax <= 1.2 * 2 * M_PI);
    }
    const auto s = sensitivity(a2);
    CHECK(std::abs(s.rMax / (2 * M_PI) - 1.0) < 0.2);

    // collision times (2, 2) cannot meet the period condition
    const auto h = h4_check(a);
    CHECK(h[0].evenPeriod);
    CHECK(h[0].cond1);
    CHECK_FALSE(h[0].holds);
    CHECK_FALSE(h[0].branch1a);
    CHECK_FALSE(h[0].branch2a);
}

TEST_CASE("refinement deviation scales like g^-2 on asymmetric data") {
    struct Case {
        double c0, c2, omega;
    };
    for (Case c : {Case{0.2, -0.25, 0.2360679775}, Case{0.1, 0.3, 0.7320508076}}) {
        FunctionalGenerator gen{PeriodicFn::trig(c.c0, {0.0, c.c2}, {1.0}), c.omega, 100.0};
        const auto cs = find_zero_set(gen);
        const auto gr = collision_graph(cs, gen.omega, default_delta(cs, gen.omega));
        double prev = 0.0;
        for (double g : {100.0, 200.0, 400.0}) {
            gen.g = g;
            const double dev = refine_critical_points(gen, cs, gr, false).classes[0][0].deviation;
            if (prev > 0.0) {
                CHECK(prev / dev > 3.5);
                CHECK(prev / dev < 4.5);
            }
            prev = dev;
        }
    }
}

TEST_CASE("symmetric instance has vanishing offsets") {
    FunctionalGenerator gen{PeriodicFn::trig(0, {}, {1.0}), 0.25 + 1e-7 * std::sqrt(2.0), 100.0};
    const auto cs = find_zero_set(gen);
    const auto gr = collision_graph(cs, gen.omega, 0.01);
    CHECK(gr.Tdelta[0] == 1);
    CHECK(gr.Tdelta[1] == 1);
    const auto a = refine_critical_points(gen, cs, gr, false);
    // x* lands on the back-rotated zero, the offset is only the rotation mismatch 2 omega - 1/2
    for (const auto& p : a.classes[0]) CHECK(p.deviation < 1e-10);
    CHECK(std::abs(std::abs(a.offsets[0][0]) - (2 * gen.omega - 0.5)) < 1e-12);
}

TEST_CASE("constructed H4 instance") {
    const auto h = inst::h4_instance(100.0);
    const auto cs = find_zero_set(h.gen);
    const auto gr = collision_graph(cs, h.gen.omega, h.delta);
    REQUIRE(gr.classes.size() == 1);
    const auto& cls = gr.classes[0];
    CHECK(gr.Tdelta[cls[0]] == 4);
    CHECK(gr.Tdelta[cls[1]] == 2);
    CHECK(second_family_clear(cs, gr, h.gen.omega));
    const auto a = refine_critical_points(h.gen, cs, gr);
    for (const auto& p : a.classes[0]) CHECK(p.deviation / p.deviationDoubled == doctest::Approx(4.0).epsilon(0.1));

    auto v = h4_check(a);
    REQUIRE(v.size() == 1);
    CHECK(v[0].holds);
    CHECK(v[0].branch == 21);
    CHECK(v[0].margins1[0] > 0.0);
    CHECK(v[0].bounds1[0] < 1e-9);

    // T = (3, 2): the period condition fails in both branches
    auto a3 = a;
    a3.classes[0][0].T = 3;
    auto v3 = h4_check(a3);
    CHECK_FALSE(v3[0].branch1a);
    CHECK_FALSE(v3[0].branch2a);
    CHECK_FALSE(v3[0].holds);
    // same-sign derivatives
    auto as = a;
    as.classes[0][1].derivative = std::abs(as.classes[0][1].derivative) * (as.classes[0][0].derivative > 0 ? 1 : -1);
    auto vs = h4_check(as);
    CHECK_FALSE(vs[0].cond1);
    CHECK_FALSE(vs[0].holds);

    const auto l7 = lemma7_check(a, h.gen, 0, 1);
    CHECK(l7.holds);
    CHECK(l7.sampled);
    CHECK(l7.measuredC2 > 0.0);
    CHECK(l7.doublePeriod);
    auto ae = a;
    ae.classes[0][0].T = 2;
    CHECK_FALSE(lemma7_check(ae, h.gen, 0, 1, 0).longerFirst);
    auto ao = a;
    ao.offsets[0][0] = 1e-6;
    const auto lo = lemma7_check(ao, h.gen, 0, 1, 0);
    CHECK_FALSE(lo.offsetOk);
    CHECK(lo.margin < 0.0);
    CHECK_FALSE(lo.holds);

    const auto s = sensitivity(a);
    CHECK(s.tauMax == 4.0);
    auto a2 = a;
    a2.g *= 2.0;
    CHECK(s.DeltaMin / sensitivity(a2).DeltaMin >= std::pow(2.0, 2.0 * s.tauMax / 3.0) * (1 - 1e-12));
}

TEST_CASE("certification pipeline") {
    FunctionalGenerator five{PeriodicFn::trig(5.0, {1.0}, {}), golden(), 1.0};
    auto r = theorem4_certify(five);
    CHECK(r.degenerate);
    CHECK(r.pass);
    CHECK(r.crossCheckOk);
    REQUIRE(r.h2Grid);
    CHECK(r.h2Grid->holds);

    const auto h = inst::h4_instance(100.0);
    auto rh = theorem4_certify(h.gen, h.delta);
    CHECK(rh.pass);
    CHECK(rh.crossCheckOk);
    CHECK(rh.minGrowthRate > 0.0);
    auto off = h.gen;
    off.g = 90.0;
    auto rf = theorem4_certify(off, h.delta);
    CHECK_FALSE(rf.pass);
    CHECK(rf.failingStage == "h4");

    for (double g : {50.0, 100.0, 200.0, 400.0, 500.0}) {
        auto rs = theorem4_certify(inst::sine_instance(g), 0.05);
        CHECK_FALSE(rs.pass);
        CHECK(rs.failingStage == "h4");
        CHECK(rs.error.empty());
    }

    FunctionalGenerator sq{PeriodicFn::trig(0.5, {0.0, -0.5}, {}), golden(), 10.0};
    auto rq = theorem4_certify(sq);
    CHECK_FALSE(rq.pass);
    CHECK(rq.failingStage == "find_zero_set");
    CHECK_FALSE(rq.error.empty());
}

TEST_CASE("trajectory properties") {
    auto gen = inst::sine_instance(100.0);
    const auto cs = find_zero_set(gen);
    auto& g = testutil::rng(3);
    for (int i = 0; i < 50; ++i) CHECK(monotone_exits(cs, gen.omega, testutil::uniform(g, 0, 1), 2000, 0.05));

    const auto gc = good_region_check(gen, cs, 0.05);
    CHECK(gc.tested > 500);
    CHECK(gc.lambdaMisses == 0);
    // the cotangent bound is met up to a modest factor, see notes
    CHECK(gc.worstCotRatio > 0.5);
}
