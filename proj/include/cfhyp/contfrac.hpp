#pragma once

// Continued fractions f_n = b0 + a1/(b1 + a2/(b2 + ...)), their convergents,
// equivalence transforms and contractions.

#include <cstddef>
#include <vector>

#include "cfhyp/linalg2.hpp"

namespace cfh {

struct NumericCF {
    double b0 = 0.0;
    std::vector<double> a;  // a[j-1] = a_j
    std::vector<double> b;  // b[j-1] = b_j

    std::size_t horizon() const { return b.size(); }
    double a_at(std::size_t j) const { return a.at(j - 1); }
    double b_at(std::size_t j) const { return b.at(j - 1); }
    bool is_minus_one_form() const;

    static NumericCF constant(double b0, double a, double b, std::size_t n);
    static NumericCF minus_one(double b0, std::vector<double> b);
    // element j uses pattern[(j-1) mod size]
    static NumericCF periodic(double b0, const std::vector<double>& aPattern,
                              const std::vector<double>& bPattern, std::size_t n);
};

// Transfer matrix [[b, a], [1, 0]].
inline Mat2 transfer_matrix(double b, double a = -1.0) { return {b, a, 1.0, 0.0}; }

enum class ValueKind { finite, infinite };

// (p, pPrev, q, qPrev) are stored divided by exp(logScale).
struct ConvergentState {
    double p = 0.0, pPrev = 1.0, q = 1.0, qPrev = 0.0;
    std::size_t n = 0;
    ValueKind valueKind = ValueKind::finite;
    double logScale = 0.0;

    double value() const;  // +inf when infinite
    // p*qPrev - pPrev*q on the true (unscaled) values, as log|.| and sign
    double wronskian_log() const;
    int wronskian_sign() const;
};

std::vector<ConvergentState> convergents(const NumericCF& cf, std::size_t n);

// f_k for k = 0..n from the first row of the log-scaled product A_k...A_1.
std::vector<double> convergents_via_cocycle(const NumericCF& cf, std::size_t n);

struct EquivalenceFactors {
    std::vector<double> r;  // r[0] = 1
};

struct MinusOneForm {
    NumericCF cf;
    EquivalenceFactors factors;
};

MinusOneForm to_minus_one_form(const NumericCF& cf);

struct ContractionSpec {
    std::vector<std::size_t> xi;  // n_1 < n_2 < ...
};

void validate(const ContractionSpec& spec, std::size_t horizon);

NumericCF contract(const NumericCF& cf, const ContractionSpec& spec);

// Chordal distance on the extended real line; +-inf is the point at infinity.
double chordal_distance(double x, double y);

// Relative comparison helper used across tests and checks.
inline bool close_rel(double x, double y, double tol) {
    return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace cfh
