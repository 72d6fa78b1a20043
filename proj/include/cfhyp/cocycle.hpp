#pragma once

// Decomposition calculus for transfer-matrix cocycles: single and paired
// steps in rotation-stretch-rotation form, RZ chains B_n = R(Phi_n) Z(lambda_n),
// the two-stretch merge, running accumulation and index grouping.

#include <cstddef>
#include <vector>

#include "cfhyp/contfrac.hpp"
#include "cfhyp/linalg2.hpp"

namespace cfh {

struct StepSVD1 {
    double mu = 1.0;
    double theta = 0.0;
    int sign = 1;
    bool degenerate = false;  // b == 0, theta jumps here
};

// sign * R(theta) Z(mu) R(theta) = [[b, -1], [1, 0]]
StepSVD1 svd_single(double b);

struct StepSVD2 {
    double lambda = 1.0;
    double phi = 0.0;
    double chi = 0.0;
    double hSq = 0.0;
    int epsOdd = 1;
    int epsEven = 1;
    int sign = 1;
    bool lowH = false;
};

// sign * R(phi) Z(lambda) R(chi) = A(bEven) A(bOdd)
StepSVD2 svd_pair(double bOdd, double bEven, double lowHTolerance = 1e-12);

// Pair SVDs of (b_1, b_2), (b_3, b_4), ... of a minus-one form fraction.
std::vector<StepSVD2> pair_svds(const NumericCF& cf);
std::vector<StepSVD2> pair_svds(const std::vector<double>& b);

struct RZStep {
    double Phi = 0.0;
    double lambda = 1.0;
};

inline Mat2 rz_matrix(const RZStep& s) { return rot(s.Phi) * stretch(s.lambda); }

// Phi_n = chi_{n+1} + phi_n, length one less than the input.
std::vector<RZStep> build_rz_chain(const std::vector<StepSVD2>& pairs);

// B_n ... B_1 over the first n steps (all steps when n == 0 is not requested).
LogScaledMat2 chain_product(const std::vector<RZStep>& chain, std::size_t n);
// log ||B_k ... B_1|| for k = 1..chain.size()
std::vector<double> chain_log_norms(const std::vector<RZStep>& chain);
// Decomposition of B_last ... B_first (1-based, inclusive); lambda via logLambda.
RzrDecomposition block_rzr(const std::vector<RZStep>& chain, std::size_t first, std::size_t last);

struct MergeResult {
    double mu = 1.0;
    double psi = 0.0;
    double chi = 0.0;
    double m = 2.0;
    double beta = 1.0;
    double z = 0.0;  // z(lambda1, lambda2, phi), the argument of T for chi
    int sign = 1;
    double logMu = 0.0;
    bool fallback = false;  // near-singular z, values from svd_generic
};

// Z(lambda2) R(phi) Z(lambda1) = sign * R(psi) Z(mu) R(chi)
MergeResult merge(double lambda1, double lambda2, double phi);
// Same with stretches given as logs; usable when the stretches overflow.
MergeResult merge_log(double logLambda1, double logLambda2, double phi);

// Closed-form building blocks, exposed for symmetry checks.
double merge_S(double lambda1, double lambda2, double phi);
double merge_T(double lambda1, double lambda2, double phi);
double merge_z(double lambda1, double lambda2, double phi);
double merge_m(double lambda1, double lambda2, double phi);

struct AccumState {
    double mu = 1.0;     // clamped to the double range
    double logMu = 0.0;
    double psi = 0.0;
    double chi = 0.0;
    int sign = 1;
    bool fallback = false;
};

// M_n = B_n ... B_1 = sign_n R(Phi_n + psi_n) Z(mu_n) R(chi_n)
std::vector<AccumState> accumulate(const std::vector<RZStep>& chain);

struct GroupedCocycle {
    std::vector<std::size_t> xi;
    std::vector<RzrDecomposition> groups;
    std::vector<RZStep> dSteps;
    std::vector<double> PhiXi;
};

GroupedCocycle group(const std::vector<RZStep>& chain, const ContractionSpec& xi);

}  // namespace cfh
