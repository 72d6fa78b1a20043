#pragma once

// Brute-force references: direct convergent limits, empirical growth rates,
// the stable/unstable splitting and a naive collision scan.

#include <cstddef>
#include <vector>

#include "cfhyp/cocycle.hpp"
#include "cfhyp/contfrac.hpp"
#include "cfhyp/rotation.hpp"

namespace cfh::oracle {

enum class Verdict { converging, oscillating, divergingToInfinity, inconclusive };
const char* to_string(Verdict v);

struct ConvergenceMeasurement {
    std::size_t horizon = 0;
    double lastValue = 0.0;  // +inf when infinite
    bool lastInfinite = false;
    double cauchyTail = 0.0;  // max |f_{n+1} - f_n| over the last quarter (chordal if any is infinite)
    Verdict verdict = Verdict::inconclusive;
    double tolerance = 1e-9;
};

ConvergenceMeasurement direct_limit(const NumericCF& cf, std::size_t horizon, double tolerance = 1e-9);

// chordal distance on the extended line, inf allowed
double chordal(double a, double b);

// (1/n) log ||M_n||, n >= 100
double lyapunov_estimate(const std::vector<RZStep>& chain, std::size_t n);
double lyapunov_estimate(const NumericCF& cf, std::size_t n);

struct GridLyapunov {
    double min = 0.0, mean = 0.0, max = 0.0;
    std::vector<double> xs, values;
};

// per continued-fraction step, over x = i / gridSize
GridLyapunov lyapunov_functional(const FunctionalGenerator& gen, std::size_t n, std::size_t gridSize);

struct BundleEstimate {
    Vec2 unstableDir, stableDir;
    double c1 = 0.0, c2 = 0.0;
    double b0 = 0.0;
    double ratio = 0.0;      // c2 / c1, inf when c1 vanishes
    double limit = 0.0;      // b0 + c2 / c1
    bool limitInfinite = false;
    double lyapunov = 0.0;
};

// splitting at base point x of the chain b_j = g b(x - (j-1) omega), j in Z;
// NoSplitting when the forward rate is <= 1e-3 or the total growth is below e^3
BundleEstimate bundle_estimate(const FunctionalGenerator& gen, double x, std::size_t n);

// angle between two lines through the origin, in [0, pi/2]
double line_angle(const Vec2& a, const Vec2& b);

CollisionGraph brute_force_collisions(const std::vector<double>& points, double omega, double delta,
                                      std::size_t horizon);

}  // namespace cfh::oracle
