#pragma once

// Functional continued fractions driven by a circle rotation: periodic
// generators, the critical set, collision graph under x -> x - 2*omega,
// refined critical points, the H4 test and the full certification pipeline.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cfhyp/cocycle.hpp"
#include "cfhyp/contfrac.hpp"
#include "cfhyp/criteria.hpp"

namespace cfh {

class PeriodicFn {
public:
    // c0 + sum_k cosC[k-1] cos(2 pi k x) + sinC[k-1] sin(2 pi k x)
    static PeriodicFn trig(double c0, std::vector<double> cosC, std::vector<double> sinC);
    // values at x = i/N, Catmull-Rom interpolation between them
    static PeriodicFn samples(std::vector<double> values);

    double operator()(double x) const;
    double deriv(double x) const;
    // upper bound for sup |b'|: exact coefficient sum for trig, sampled otherwise
    double deriv_bound() const;
    double sup_abs() const;  // sampled on 2^14 points

    bool is_trig() const { return trig_; }
    double constant() const { return c0_; }
    const std::vector<double>& cos_coeffs() const { return cos_; }
    const std::vector<double>& sin_coeffs() const { return sin_; }
    const std::vector<double>& sample_values() const { return vals_; }

private:
    bool trig_ = true;
    double c0_ = 0.0;
    std::vector<double> cos_, sin_, vals_;
};

struct FunctionalGenerator {
    PeriodicFn b = PeriodicFn::trig(0.0, {}, {});
    double omega = 0.5;
    double g = 1.0;
};

// Throws InvalidArgument unless omega in (0,1), g >= 1 and no |{k omega}| < 1e-9, k <= horizon.
void validate(const FunctionalGenerator& gen, std::size_t horizon = 10000);

// x - k*varpi mod 1, in [0, 1)
double rotate(double x, double varpi, long long k);
double circle_dist(double x, double y);
// x - y wrapped to (-1/2, 1/2]
double circle_diff(double x, double y);

// b_0 = g b(x + omega), b_j = g b(x - (j-1) omega), j = 1..n
NumericCF sample_chain(const FunctionalGenerator& gen, double x, std::size_t n);

// A(g b(x - omega)) A(g b(x)): the pair starting at base point x
StepSVD2 functional_pair(const FunctionalGenerator& gen, double x);
// B(x) = R(Phi(x)) Z(lambda(x)), Phi(x) = chi_pair(x - 2 omega) + phi_pair(x)
RZStep functional_step(const FunctionalGenerator& gen, double x);
// B(x), B(x - 2 omega), ... (n steps)
std::vector<RZStep> functional_chain(const FunctionalGenerator& gen, double x, std::size_t n);
// B(s^T x) ... B(s^1 x), s = rotation by 2 omega
RzrDecomposition orbit_block(const FunctionalGenerator& gen, double x, std::size_t T);

struct CriticalSet {
    std::vector<double> points;  // zeros of b(. - omega), sorted
    std::vector<double> derivs;  // b'(point - omega)
    double delta = 0.0;
};

CriticalSet find_zero_set(const FunctionalGenerator& gen, std::size_t gridSize = 4096,
                          double derivTolerance = 1e-6);

// H1 lower bound on the pair quantity (b1 - b2)^2 + b1^2 b2^2 with b_j = g b(.),
// scaledCircle over the whole circle, differenceOnly as g^2 (b(x) - b(x - omega))^2
// over U_delta(critical set), circleGrid is scaledCircle at the given g.
H1Certificate check_h1_functional(const FunctionalGenerator& gen, H1Scope scope,
                                  std::size_t gridSize = 1u << 14, double delta = 0.0,
                                  const CriticalSet* cs = nullptr);

struct CollisionGraph {
    std::vector<std::size_t> Tdelta;
    std::vector<std::size_t> Rdelta;
    std::vector<double> hitDistance;
    std::vector<bool> primary;
    std::vector<std::vector<std::size_t>> classes;  // each in R order, starting at the largest T
    std::vector<std::size_t> periods;
    double delta = 0.0;
    std::size_t horizon = 0;
};

// hit at step k means circle_dist(rotate(x_p, 2 omega, k), x_q) <= delta
CollisionGraph collision_graph(const CriticalSet& cs, double omega, double delta,
                               std::size_t horizon = 10000);
// classes from successor data; throws NonCyclicCollision when R is not a permutation
void build_classes(CollisionGraph& graph);
// 0.25 * min distance among the points and their orbits up to the first return, capped
double default_delta(const CriticalSet& cs, double omega, double cap = 0.05, std::size_t horizon = 10000);

struct RefinedPoint {
    std::size_t point = 0;  // index into the critical set
    std::size_t T = 0;
    double x0 = 0.0;
    double xStar = 0.0;
    double prediction = 0.0;  // s^{-T} of the next point
    double deviation = 0.0;   // dist(s^T xStar, next point)
    double derivative = 0.0;  // b'(x0 - omega)
    double rMin = 0.0, rMax = 0.0;
    double deviationDoubled = -1.0;  // same at 2g, < 0 when not computed
};

struct ClassAnalysis {
    double g = 1.0;
    double delta = 0.0;
    double C2 = 0.0;
    std::vector<std::vector<RefinedPoint>> classes;  // k = 1..S_i
    std::vector<std::vector<double>> offsets;       // Delta_{i,k} in (-1/2, 1/2]
};

ClassAnalysis refine_critical_points(const FunctionalGenerator& gen, const CriticalSet& cs,
                                     const CollisionGraph& graph, bool compareDoubled = true);

struct H4Verdict {
    std::size_t cls = 0;
    bool evenPeriod = false;
    bool cond1 = false;
    std::size_t cond1Witness = 0;
    bool branch1a = false, branch1b = false;  // 2.1
    bool branch2a = false, branch2b = false;  // 2.2
    std::vector<double> bounds1, margins1;    // bound - |Delta| per k (2.1)
    std::vector<double> bounds2, margins2;
    int branch = 0;  // 21, 22 or 0
    bool holds = false;
};

std::vector<H4Verdict> h4_check(const ClassAnalysis& analysis);

struct Lemma7Verdict {
    std::size_t cls = 0, k = 0;  // k is 1-based
    bool longerFirst = false;
    bool alternating = false;
    bool offsetOk = false;
    double offset = 0.0, bound = 0.0, margin = 0.0;
    bool doublePeriod = false;
    bool sampled = false;
    std::size_t samples = 0;
    double measuredC2 = 0.0;      // min lambda2 |cot Phi2| / g over the overlap
    double cotLowerBound = 0.0;   // leading-order lower bound for |cot Phi2|
    double minAbsCot = 0.0;
    bool holds = false;
};

Lemma7Verdict lemma7_check(const ClassAnalysis& analysis, const FunctionalGenerator& gen,
                           std::size_t cls, std::size_t k, std::size_t samples = 64);

struct SensitivityReport {
    double tauMax = 0.0;
    double rMax = 0.0;
    double DeltaMin = 0.0;
    double logDeltaMin = 0.0;
    double gWindow = 0.0;
};

SensitivityReport sensitivity(const ClassAnalysis& analysis);

// True when no orbit piece used by the refinement (x_p up to two collision times)
// sweeps a delta-neighborhood of a critical point shifted by +omega, where the paired
// cocycle has its second critical family.
bool second_family_clear(const CriticalSet& cs, const CollisionGraph& graph, double omega);

struct GridH2 {
    double Lambda0 = 0.0;
    double minAbsCot = 0.0;
    std::size_t gridSize = 0;
    bool holds = false;
    double Clambda = 0.0, delta = 0.0;
    double certifiedLogRate = 0.0;
};

// lambda and |cot Phi| of the functional step on a grid, constants picked as for chains
GridH2 check_h2_functional(const FunctionalGenerator& gen, std::size_t gridSize = 1u << 14,
                           const CheckOptions& opt = {});

struct Theorem4Report {
    bool pass = false;
    std::string failingStage;
    std::string error;
    bool degenerate = false;
    CriticalSet critical;
    std::optional<H1Certificate> h1Circle, h1Difference;
    std::optional<GridH2> h2Grid;
    std::optional<CollisionGraph> graph;
    std::optional<ClassAnalysis> analysis;
    std::vector<H4Verdict> h4;
    std::vector<Lemma7Verdict> lemma7;
    std::optional<SensitivityReport> sens;
    // cross-validation, filled on PASS
    bool crossChecked = false;
    double supChordalTail = 0.0;
    double minGrowthRate = 0.0;
    bool crossCheckOk = false;
    bool secondFamilyClear = true;  // critical points + omega avoid the class orbits
};

Theorem4Report theorem4_certify(const FunctionalGenerator& gen, double delta = 0.0,
                                std::size_t horizon = 10000);

// Orbit x, x - omega, ... for n steps: once it leaves U_{delta/2}(points) it does not
// enter U_{delta/2} of the same point again before leaving U_delta. Returns false on violation.
bool monotone_exits(const CriticalSet& cs, double omega, double x, std::size_t n, double delta);

struct GoodRegionCheck {
    std::size_t tested = 0;
    std::size_t lambdaMisses = 0;
    std::size_t cotMisses = 0;
    double worstLambdaRatio = 0.0;  // min lambda / (C1 delta g / 2)^2
    double worstCotRatio = 0.0;     // min |cot Phi| / (C1 delta g / 2)
    double C1 = 0.0;
};

// samples x with x, x - omega, x - 2 omega, x - 3 omega outside U_{delta/2}
GoodRegionCheck good_region_check(const FunctionalGenerator& gen, const CriticalSet& cs, double delta,
                                  std::size_t samples = 2048);

}  // namespace cfh
