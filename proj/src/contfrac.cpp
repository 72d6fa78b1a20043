#include "cfhyp/contfrac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cfhyp/error.hpp"

namespace cfh {

bool NumericCF::is_minus_one_form() const {
    return std::all_of(a.begin(), a.end(), [](double v) { return v == -1.0; });
}

NumericCF NumericCF::constant(double b0, double a, double b, std::size_t n) {
    return {b0, std::vector<double>(n, a), std::vector<double>(n, b)};
}

NumericCF NumericCF::minus_one(double b0, std::vector<double> b) {
    NumericCF cf{b0, std::vector<double>(b.size(), -1.0), std::move(b)};
    return cf;
}

NumericCF NumericCF::periodic(double b0, const std::vector<double>& aPattern,
                              const std::vector<double>& bPattern, std::size_t n) {
    if (aPattern.empty() || bPattern.empty())
        throw Error(ErrorKind::InvalidArgument, "periodic: empty pattern");
    NumericCF cf{b0, {}, {}};
    cf.a.reserve(n);
    cf.b.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        cf.a.push_back(aPattern[j % aPattern.size()]);
        cf.b.push_back(bPattern[j % bPattern.size()]);
    }
    return cf;
}

double ConvergentState::value() const {
    if (valueKind == ValueKind::infinite) return std::numeric_limits<double>::infinity();
    return p / q;
}

double ConvergentState::wronskian_log() const {
    return std::log(std::abs(p * qPrev - pPrev * q)) + 2.0 * logScale;
}

int ConvergentState::wronskian_sign() const { return (p * qPrev - pPrev * q) < 0.0 ? -1 : 1; }

namespace {

constexpr double kInfTol = 1e-13;

void classify(ConvergentState& s) {
    const double unitOne = std::exp(-s.logScale);
    s.valueKind = std::abs(s.q) <= kInfTol * std::max(std::abs(s.p), unitOne) ? ValueKind::infinite
                                                                               : ValueKind::finite;
}

void rescale(ConvergentState& s) {
    const double big = std::max({std::abs(s.p), std::abs(s.pPrev), std::abs(s.q), std::abs(s.qPrev)});
    if (big > 1e100 || (big < 1e-100 && big > 0.0)) {
        const double lf = std::log(big);
        const double f = 1.0 / big;
        s.p *= f;
        s.pPrev *= f;
        s.q *= f;
        s.qPrev *= f;
        s.logScale += lf;
    }
}

void require_horizon(const NumericCF& cf, std::size_t n) {
    if (n > cf.horizon()) throw Error(ErrorKind::InvalidArgument, "requested index beyond horizon");
    if (cf.a.size() != cf.b.size()) throw Error(ErrorKind::InvalidCF, "a and b differ in length");
}

}  // namespace

std::vector<ConvergentState> convergents(const NumericCF& cf, std::size_t n) {
    require_horizon(cf, n);
    std::vector<ConvergentState> out;
    out.reserve(n + 1);
    ConvergentState s;
    s.p = cf.b0;
    classify(s);
    out.push_back(s);
    for (std::size_t k = 1; k <= n; ++k) {
        const double a = cf.a[k - 1], b = cf.b[k - 1];
        ConvergentState t;
        t.n = k;
        t.logScale = s.logScale;
        t.p = b * s.p + a * s.pPrev;
        t.q = b * s.q + a * s.qPrev;
        t.pPrev = s.p;
        t.qPrev = s.q;
        rescale(t);
        classify(t);
        out.push_back(t);
        s = t;
    }
    return out;
}

std::vector<double> convergents_via_cocycle(const NumericCF& cf, std::size_t n) {
    require_horizon(cf, n);
    std::vector<double> out;
    out.reserve(n + 1);
    out.push_back(cf.b0);
    auto acc = LogScaledMat2::identity();
    for (std::size_t k = 1; k <= n; ++k) {
        acc = mul_scaled(acc, transfer_matrix(cf.b[k - 1], cf.a[k - 1]));
        const double den = acc.unit.m11, num = acc.unit.m12;
        if (std::abs(den) < 1e-300 && std::abs(num) < 1e-300)
            throw Error(ErrorKind::DegenerateState, "numerator and denominator vanish together");
        if (std::abs(den) <= kInfTol * std::abs(num))
            out.push_back(std::numeric_limits<double>::infinity());
        else
            out.push_back(cf.b0 + num / den);
    }
    return out;
}

MinusOneForm to_minus_one_form(const NumericCF& cf) {
    const std::size_t n = cf.horizon();
    for (std::size_t j = 0; j < n; ++j)
        if (cf.a[j] == 0.0) throw Error(ErrorKind::InvalidCF, "a_" + std::to_string(j + 1) + " = 0");

    // Closed products, kept as log|.| and sign:
    //   r_{2n}   =  prod_{s=1..n} a_{2s-1} / prod_{s=1..n} a_{2s}
    //   r_{2n+1} = -prod_{s=1..n} a_{2s}   / prod_{s=0..n} a_{2s+1}
    double logOdd = 0.0, logEven = 0.0;  // running prod over odd / even indices
    int sgnOdd = 1, sgnEven = 1;
    MinusOneForm res;
    res.factors.r.assign(n + 1, 1.0);
    res.cf.b0 = cf.b0;
    res.cf.a.assign(n, -1.0);
    res.cf.b.resize(n);
    for (std::size_t j = 1; j <= n; ++j) {
        const double aj = cf.a[j - 1];
        if (j % 2 == 1) {
            logOdd += std::log(std::abs(aj));
            sgnOdd *= aj < 0 ? -1 : 1;
        } else {
            logEven += std::log(std::abs(aj));
            sgnEven *= aj < 0 ? -1 : 1;
        }
        double logR;
        int sgnR;
        if (j % 2 == 0) {
            logR = logOdd - logEven;
            sgnR = sgnOdd * sgnEven;
        } else {
            logR = logEven - logOdd;
            sgnR = -sgnOdd * sgnEven;
        }
        const double bj = cf.b[j - 1];
        res.factors.r[j] = sgnR * std::exp(logR);
        res.cf.b[j - 1] = bj == 0.0 ? 0.0 : sgnR * (bj < 0 ? -1 : 1) * std::exp(logR + std::log(std::abs(bj)));
    }
    return res;
}

void validate(const ContractionSpec& spec, std::size_t horizon) {
    std::size_t prev = 0;
    for (std::size_t v : spec.xi) {
        if (v <= prev) throw Error(ErrorKind::InvalidArgument, "xi must be strictly increasing and start >= 1");
        prev = v;
    }
    if (prev > horizon) throw Error(ErrorKind::InvalidArgument, "xi exceeds the horizon");
}

NumericCF contract(const NumericCF& cf, const ContractionSpec& spec) {
    validate(spec, cf.horizon());
    NumericCF out{cf.b0, {}, {}};
    Mat2 prevGroup = Mat2::identity();
    std::size_t start = 1;
    for (std::size_t k = 0; k < spec.xi.size(); ++k) {
        auto acc = LogScaledMat2{{1, 0, 0, 1}, 0.0};
        for (std::size_t j = start; j <= spec.xi[k]; ++j)
            acc = mul_scaled(acc, transfer_matrix(cf.b[j - 1], cf.a[j - 1]));
        const Mat2 g = acc.value();
        start = spec.xi[k] + 1;
        double bHat, aHat;
        if (k == 0) {
            bHat = g.m11;
            aHat = g.m12;
        } else {
            // first row of the new product expressed in the two previous first rows
            const Mat2& h = prevGroup;
            if (h.m12 == 0.0)
                throw Error(ErrorKind::DegenerateState, "contract: group " + std::to_string(k) + " has zero (1,2) entry");
            bHat = g.m11 + g.m12 * h.m22 / h.m12;
            aHat = -g.m12 * h.det() / h.m12;
        }
        out.b.push_back(bHat);
        out.a.push_back(aHat);
        prevGroup = g;
    }
    return out;
}

double chordal_distance(double x, double y) {
    const bool xi = std::isinf(x), yi = std::isinf(y);
    if (xi && yi) return 0.0;
    if (xi) return 1.0 / std::sqrt(1.0 + y * y);
    if (yi) return 1.0 / std::sqrt(1.0 + x * x);
    return std::abs(x - y) / (std::sqrt(1.0 + x * x) * std::sqrt(1.0 + y * y));
}

}  // namespace cfh
