#include <doctest.h>

#include <cmath>

#include "cfhyp/error.hpp"
#include "cfhyp/oracle.hpp"
#include "helpers.hpp"

using namespace cfh;
using oracle::Verdict;

namespace {

FunctionalGenerator constant_gen(double c) { return {PeriodicFn::trig(c, {}, {}), 0.5 * (std::sqrt(5.0) - 1.0), 1.0}; }

}  // namespace

TEST_CASE("direct limits") {
    auto m = oracle::direct_limit(NumericCF::constant(2.5, -1.0, 2.5, 200), 200);
    CHECK(m.verdict == Verdict::converging);
    CHECK(m.lastValue == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m.cauchyTail <= 1e-9);

    CHECK(oracle::direct_limit(NumericCF::constant(0.0, -1.0, 1.5, 400), 400).verdict == Verdict::oscillating);

    // parabolic b = 2: differences decay like 1/n^2, too slow for a short run
    auto shortRun = oracle::direct_limit(NumericCF::constant(0.0, -1.0, 2.0, 200), 200);
    CHECK(shortRun.verdict == Verdict::inconclusive);
    auto longRun = oracle::direct_limit(NumericCF::constant(0.0, -1.0, 2.0, 100000), 100000);
    CHECK(longRun.verdict == Verdict::converging);
    CHECK(longRun.lastValue == doctest::Approx(-1.0).epsilon(1e-4));

    CHECK_THROWS_AS(oracle::direct_limit(NumericCF::constant(0.0, -1.0, 2.5, 10), 10), Error);
    CHECK_THROWS_AS(oracle::direct_limit(NumericCF::constant(0.0, -1.0, 2.5, 20), 40), Error);

    CHECK(oracle::chordal(INFINITY, INFINITY) == 0.0);
    CHECK(oracle::chordal(0.0, INFINITY) == 1.0);
    CHECK(oracle::chordal(1.0, -1.0) == doctest::Approx(1.0));
}

TEST_CASE("empirical growth rates") {
    CHECK(oracle::lyapunov_estimate(NumericCF::constant(0.0, -1.0, 2.5, 2000), 2000) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-3));
    CHECK(oracle::lyapunov_estimate(NumericCF::constant(0.0, -1.0, 3.0, 2000), 2000) ==
          doctest::Approx(std::log((3.0 + std::sqrt(5.0)) / 2.0)).epsilon(1e-3));
    CHECK(std::abs(oracle::lyapunov_estimate(NumericCF::constant(0.0, -1.0, 1.0, 2000), 2000)) < 1e-2);

    // a chain of pure rotations does not grow
    std::vector<RZStep> rot(500);
    for (std::size_t i = 0; i < rot.size(); ++i) rot[i] = {0.1 * double(i), 1.0};
    CHECK(std::abs(oracle::lyapunov_estimate(rot, 500)) < 1e-12);
    CHECK_THROWS_AS(oracle::lyapunov_estimate(rot, 50), Error);

    auto grid = oracle::lyapunov_functional(constant_gen(2.5), 400, 8);
    CHECK(grid.min == doctest::Approx(std::log(2.0)).epsilon(1e-2));
    CHECK(grid.values.size() == 8);
}

TEST_CASE("stable and unstable lines") {
    auto be = oracle::bundle_estimate(constant_gen(2.5), 0.3, 200);
    CHECK(oracle::line_angle(be.unstableDir, {2.0, 1.0}) < 1e-10);
    CHECK(oracle::line_angle(be.stableDir, {1.0, 2.0}) < 1e-10);
    CHECK(be.limit == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(be.lyapunov == doctest::Approx(std::log(2.0)).epsilon(1e-2));

    auto& g = testutil::rng(77);
    for (int i = 0; i < 20; ++i) {
        double c = testutil::uniform(g, 2.1, 8.0);
        if (testutil::uniform(g, 0, 1) < 0.5) c = -c;
        auto gen = constant_gen(c);
        const auto b = oracle::bundle_estimate(gen, 0.0, 200);
        const auto d = oracle::direct_limit(sample_chain(gen, 0.0, 400), 400);
        REQUIRE(d.verdict == Verdict::converging);
        CHECK(b.limit == doctest::Approx(d.lastValue).epsilon(1e-8));
    }

    CHECK_THROWS_AS(oracle::bundle_estimate(constant_gen(1.0), 0.0, 200), Error);

    // the unstable line at x - omega is the image of the one at x
    FunctionalGenerator five{PeriodicFn::trig(5.0, {1.0}, {}), 0.5 * (std::sqrt(5.0) - 1.0), 1.0};
    for (double x : {0.0, 0.2, 0.65}) {
        const auto here = oracle::bundle_estimate(five, x, 300);
        const auto next = oracle::bundle_estimate(five, rotate(x, five.omega, 1), 300);
        const Vec2 pushed = transfer_matrix(five.g * five.b(x)) * here.unstableDir;
        CHECK(oracle::line_angle(pushed, next.unstableDir) < 1e-6);
    }
    for (int i = 0; i < 32; ++i) {
        const double x = double(i) / 32.0;
        const auto b = oracle::bundle_estimate(five, x, 300);
        const auto d = oracle::direct_limit(sample_chain(five, x, 400), 400);
        REQUIRE(d.verdict == Verdict::converging);
        CHECK(b.limit == doctest::Approx(d.lastValue).epsilon(1e-8));
    }
}
