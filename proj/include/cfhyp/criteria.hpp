#pragma once

// Convergence certificates: classical pointwise tests, the pair-stretch
// condition (H1), the angle condition (H2) with its growth bound, grouped
// chains, the two-step window, isolated violation pairs and the scaled family.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfhyp/cocycle.hpp"
#include "cfhyp/contfrac.hpp"

namespace cfh {

struct CheckOptions {
    double margin = 1e-9;       // strict inequalities: lhs > rhs + margin
    double hTolerance = 1e-12;  // hStarSq must exceed this
    double logSlack = 1e-8;     // slack for measured-vs-certified log norms
    double rateSlack = 1e-3;    // slack for measured-vs-certified growth rates
};

// ---------------------------------------------------------------- classical

enum class ClassicalTest { seidelStern, pringsheim, worpitsky };
const char* to_string(ClassicalTest t);

struct ClassicalVerdict {
    ClassicalTest test = ClassicalTest::pringsheim;
    bool holdsUpToHorizon = false;
    std::size_t horizon = 0;
    std::optional<std::size_t> witness;
    std::optional<double> partialSum;  // seidelStern only
    std::string note;
};

std::vector<ClassicalVerdict> classical_tests(const NumericCF& cf, std::size_t horizon);

// ---------------------------------------------------------------------- H1

enum class H1Scope { sequence, circleGrid, scaledCircle, differenceOnly };
const char* to_string(H1Scope s);

struct H1Certificate {
    double hStarSq = 0.0;
    double Lambda0 = 1.0;
    H1Scope scope = H1Scope::sequence;
    std::size_t gridSize = 0;
    double lipschitzMargin = 0.0;
    bool valid = false;
    std::size_t argmin = 0;  // pair index (1-based) or grid index
    bool worpitskyTrigger = false;
    bool alternationTrigger = false;  // |b_j| < 2 implies |b_{j+1}| >= 2
    double tolerance = 0.0;
};

double lambda_from_hsq(double hSq);

H1Certificate check_h1(const std::vector<StepSVD2>& pairs, const CheckOptions& opt = {});
// Same, plus the sufficient triggers that need the raw b sequence.
H1Certificate check_h1(const std::vector<double>& b, const CheckOptions& opt = {});

// ---------------------------------------------------------------------- H2

struct H2Certificate {
    double Lambda0 = 0.0, Clambda = 0.0, delta = 0.0;
    double ChatLambda = 0.0;
    std::array<bool, 3> conditionsOk{false, false, false};
    double boundConstant = 0.0;  // Lambda0
    double boundRate = 0.0;      // ChatLambda
    std::optional<std::size_t> witness;  // first chain index (1-based) failing c3
    std::size_t horizon = 0;
    bool holds = false;
    bool autoSelected = false;
    bool crossCheckOk = false;
    double worstLogSlack = 0.0;  // min over n of measured - certified log bound
    double certifiedLogRate = 0.0;
};

double chat(double Lambda0, double C);
// c1 and c2 only
std::array<bool, 2> h2_constants_ok(double Lambda0, double C, double delta, double margin);

H2Certificate check_h2(const std::vector<RZStep>& chain, double Lambda0, double Clambda, double delta,
                       const CheckOptions& opt = {});
// Scans delta on a log grid over (L^2/(L^2-1), 10 L^2/(L^2-1)] with C at its lower bound + margin.
// First (C, delta) on the auto-selection grid with L * minAbsCot >= delta * C.
std::optional<std::array<double, 2>> select_h2_constants(double L, double minAbsCot, const CheckOptions& opt = {});
H2Certificate check_h2_auto(const std::vector<RZStep>& chain, double Lambda0, const CheckOptions& opt = {});

// ------------------------------------------------------------------ grouping

struct Lemma4Verdict {
    double CB = 0.0;
    std::size_t N0 = 0;
    bool normsBounded = false;
    std::optional<std::size_t> normWitness;
    bool gapsOk = false;
    std::optional<std::size_t> gapWitness;
    double Lambda0 = 0.0;  // min stretch of the original chain
    double ChatXi = 0.0;
    bool rateOk = false;
    std::size_t k0 = 0;
    double CLambda = 0.0;
    bool subCertificateOk = false;
    bool holds = false;
    bool crossCheckOk = false;
    double measuredLogRate = 0.0;
    double certifiedLogRate = 0.0;
};

Lemma4Verdict lemma4_check(const std::vector<RZStep>& chain, const GroupedCocycle& grouped, double CB,
                           std::size_t N0, const H2Certificate& subCert, const CheckOptions& opt = {});

struct Lemma5Window {
    double lambda1 = 1.0, lambda2 = 1.0, Lambda0 = 1.0, Clambda = 1.0;
    double u = 0.0, kappa = 1.0, rho = 1.0;
    double uBound = 0.0;
    double cotPsi = 0.0;
    std::array<double, 2> cotPhi2Interval{0.0, 0.0};
    bool uInside = false;
};

// phi1 defaults to pi/2 (u = 0).
Lemma5Window lemma5_window(double lambda1, double lambda2, double Lambda0, double Clambda, double phi1 = M_PI_2);
// Log-stretch variant for block products.
Lemma5Window lemma5_window_log(double logLambda1, double logLambda2, double Lambda0, double Clambda, double phi1);
double lemma5_u_bound(double logLambda1, double logLambda2, double Lambda0, double Clambda, double* kappa = nullptr,
                      double* rho = nullptr);
std::array<double, 2> lemma5_interval(double cotPsi, double Lambda0, double Clambda);
bool in_interval(double v, const std::array<double, 2>& iv);

// ----------------------------------------------------------- violation pairs

struct Theorem3Params {
    double Lambda0Min = 0.0;  // 0: min stretch of the chain
    double Lambda0Max = 0.0;  // 0: max stretch of the chain
    double Clambda = 0.0;
    double delta = 0.0;
    double Glambda = 0.0;
    std::size_t N0 = 0;  // 0: max of n_{k+1} - j_k
    std::size_t K0 = 0;
    std::vector<std::size_t> lSeq;  // empty: l_k = n_k + 1
};

// One k-block: indices and the split products 0, -, +.
struct Theorem3Block {
    std::size_t n = 0, l = 0, j = 0, nNext = 0;
    double logLambda0 = 0.0, logLambdaMinus = 0.0, logLambdaPlus = 0.0;
    double Phi0 = 0.0, PhiMinus = 0.0, PhiPlus = 0.0;
    double Psi = 0.0;
    double u = 0.0, kappa = 1.0, rho = 1.0, uBound = 0.0;
    std::array<double, 2> interval{0.0, 0.0};
    std::array<bool, 7> conditions{};
    bool cond7Printed = false;  // tan(Phi+) in the interval
    bool cond7Cot = false;      // cot(Phi+) in the interval
};

struct Theorem3Certificate {
    double Lambda0Min = 0.0, Lambda0Max = 0.0, Clambda = 0.0, Glambda = 0.0, delta = 0.0;
    double ChatLambda = 0.0, GhatLambda = 0.0;
    std::size_t N0 = 0, K0 = 0;
    std::vector<std::size_t> mSeq, nSeq, lSeq, jSeq;
    std::vector<std::array<bool, 7>> perK;
    std::vector<Theorem3Block> blocks;
    bool constantsOk = false;     // c1, c2 for (Lambda0Min, C, delta) and 1 < G < Lambda0Min
    bool offViolationOk = false;  // H2 away from mSeq, lambda_n >= Lambda0Min
    std::optional<std::size_t> offViolationWitness;
    bool sequencesOk = false;  // m_{2k} - m_{2k-1} > 1 and l_k strictly inside
    std::optional<std::size_t> failingK;
    std::optional<int> failingCondition;
    bool degenerate = false;  // empty mSeq: plain H2 certificate
    std::optional<H2Certificate> h2;
    bool overall = false;
    bool overallPrinted = false;  // condition 7 as printed
    double certifiedLogRate = 0.0;
    double measuredLogRate = 0.0;
    bool crossCheckOk = false;
};

// mSeq empty and autodetect set: violations of Lambda0Min|cot Phi_n| >= delta*C are used.
Theorem3Certificate theorem3_certify(const std::vector<RZStep>& chain, std::vector<std::size_t> mSeq,
                                     const Theorem3Params& params, const CheckOptions& opt = {},
                                     bool autodetect = false);

// indices n (1-based) with Lambda0|cot Phi_n| < delta*C
std::vector<std::size_t> h2_violations(const std::vector<RZStep>& chain, double Lambda0, double C, double delta);

// ---------------------------------------------------------- scaled family

struct Corollary2Options {
    double C1 = 0.0;  // 0: min |bHat_j| off tSeq
    double C2 = 0.0;  // 0: max |bHat_j| off tSeq
    double alpha = 0.5;
    std::size_t N0 = 0;
    std::size_t K0 = 0;
    std::vector<std::size_t> lSeq;
    std::vector<double> gGrid;
    // bHat as a function of g, for the g0 search
    std::function<std::vector<double>(double)> generator;
};

struct Corollary2Params {
    double g = 1.0, C1 = 0.0, C2 = 0.0, alpha = 0.5;
    std::vector<std::size_t> tSeq, mSeq;
    std::size_t K0 = 0, N0 = 0;
    std::array<bool, 7> conditions{};
    std::optional<int> failingCondition;
    std::optional<std::size_t> witness;  // index t (items 1-3) or k (items 4-7)
    bool h1Ok = false;
    bool h2OffOk = false;
    bool constantsOk = false;  // c1, c2 for (C1 g, C1 g / 2, 2)
    double Lambda0Min = 0.0, Clambda = 0.0, delta = 2.0;
    bool holds = false;
    std::optional<double> g0;
    std::vector<double> testedG;
    std::vector<bool> testedPass;
    double certifiedLogRate = 0.0;
    double measuredLogRate = 0.0;
    bool crossCheckOk = false;
};

// b_j = g*bHat_j for all j (1-based).
Corollary2Params corollary2_certify(const std::vector<double>& bHat, const std::vector<std::size_t>& tSeq, double g,
                                    const Corollary2Options& params = {}, const CheckOptions& opt = {});

}  // namespace cfh
