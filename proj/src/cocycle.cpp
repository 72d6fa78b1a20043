#include "cfhyp/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cfhyp/error.hpp"

namespace cfh {

namespace {

int sgn(double v) { return v < 0.0 ? -1 : 1; }

double clamp_exp(double logv) {
    return logv < 709.0 ? std::exp(logv) : std::numeric_limits<double>::max();
}

// atan(eps*sqrt(1+z^2) - z) without cancellation; z may be infinite.
double angle_from_z(double z, int eps) {
    const double a = std::hypot(1.0, z) + std::abs(z);
    if (eps * z >= 0.0) return std::atan(eps / a);
    return eps * (M_PI_2 - std::atan(1.0 / a));
}

// log|z(lambda1, lambda2, phi)| and its sign, for phi not a multiple of pi/2.
struct LogZ {
    double logAbs;
    int sign;
    bool zero;
};

LogZ log_z(double l1, double l2, double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    const double e1 = std::exp(-4.0 * l1), e2 = std::exp(-4.0 * l2);
    // (1 - e1 e2) cot + (e2 - e1) tan, multiplied through by sin*cos
    const double br = (1.0 - e1 * e2) * c * c + (e2 - e1) * s * s;
    const double sc = s * c;
    if (br == 0.0) return {0.0, 1, true};
    const double logAbs = 2.0 * l1 - M_LN2 - std::log(-std::expm1(-4.0 * l2)) + std::log(std::abs(br)) -
                          std::log(std::abs(sc));
    return {logAbs, sgn(br) * sgn(sc), false};
}

double z_value(const LogZ& z) {
    if (z.zero) return 0.0;
    return z.sign * (z.logAbs < 709.0 ? std::exp(z.logAbs) : std::numeric_limits<double>::infinity());
}

}  // namespace

StepSVD1 svd_single(double b) {
    StepSVD1 r;
    const double root = std::hypot(b, 2.0);
    r.mu = 0.5 * (root + std::abs(b));
    if (b == 0.0) {
        r.degenerate = true;
        r.sign = 1;
        r.theta = -M_PI_4;
        return r;
    }
    r.sign = sgn(b);
    // |tan theta| = 2/(root + |b|), written without the cancelling difference
    r.theta = std::atan(-r.sign * 2.0 / (root + std::abs(b)));
    return r;
}

StepSVD2 svd_pair(double b1, double b2, double lowHTolerance) {
    StepSVD2 r;
    r.hSq = (b1 - b2) * (b1 - b2) + b1 * b1 * b2 * b2;
    const double h = std::sqrt(r.hSq);
    r.lambda = 0.5 * (std::sqrt(4.0 + r.hSq) + h);
    r.lowH = r.hSq < lowHTolerance;
    const double b2Star = b1 / (1.0 + b1 * b1);
    const double b1Star = b2 / (1.0 + b2 * b2);
    r.epsOdd = sgn(b2 - b2Star);
    r.epsEven = sgn(b1 - b1Star);
    const Mat2 target = transfer_matrix(b2) * transfer_matrix(b1);
    if (r.hSq == 0.0) {
        // b1 = b2 = 0: A(0)^2 = -I
        r.phi = r.chi = 0.0;
        r.sign = -1;
        return r;
    }
    // b^2 + 1 - lambda^-2 = h/lambda + b^2
    const double hl = h / r.lambda;
    const double cotPhi = (b1 * b1 + 1.0) / (hl + b1 * b1) * (b2 - b2Star);
    const double cotChi = (b2 * b2 + 1.0) / (hl + b2 * b2) * (b1 - b1Star);
    r.phi = std::atan2(1.0, -cotPhi);
    r.chi = std::atan2(1.0, -cotChi);
    wrap_half_turn(r.phi);
    wrap_half_turn(r.chi);
    const Mat2 m = rot(r.phi) * stretch(r.lambda) * rot(r.chi);
    const double dot = m.m11 * target.m11 + m.m12 * target.m12 + m.m21 * target.m21 + m.m22 * target.m22;
    r.sign = sgn(dot);
    return r;
}

std::vector<StepSVD2> pair_svds(const std::vector<double>& b) {
    std::vector<StepSVD2> out;
    out.reserve(b.size() / 2);
    for (std::size_t i = 0; i + 1 < b.size(); i += 2) out.push_back(svd_pair(b[i], b[i + 1]));
    return out;
}

std::vector<StepSVD2> pair_svds(const NumericCF& cf) {
    if (!cf.is_minus_one_form()) throw Error(ErrorKind::InvalidCF, "pair_svds: fraction is not in minus-one form");
    return pair_svds(cf.b);
}

std::vector<RZStep> build_rz_chain(const std::vector<StepSVD2>& pairs) {
    if (pairs.size() < 2) throw Error(ErrorKind::InvalidArgument, "build_rz_chain: need at least 2 pair steps");
    std::vector<RZStep> chain;
    chain.reserve(pairs.size() - 1);
    for (std::size_t n = 0; n + 1 < pairs.size(); ++n) chain.push_back({pairs[n + 1].chi + pairs[n].phi, pairs[n].lambda});
    return chain;
}

LogScaledMat2 chain_product(const std::vector<RZStep>& chain, std::size_t n) {
    if (n > chain.size()) throw Error(ErrorKind::InvalidArgument, "chain_product: n beyond chain length");
    auto acc = LogScaledMat2::identity();
    for (std::size_t k = 0; k < n; ++k) acc = mul_scaled(acc, rz_matrix(chain[k]));
    return acc;
}

std::vector<double> chain_log_norms(const std::vector<RZStep>& chain) {
    std::vector<double> out;
    out.reserve(chain.size());
    auto acc = LogScaledMat2::identity();
    for (const auto& s : chain) {
        acc = mul_scaled(acc, rz_matrix(s));
        out.push_back(acc.log_norm());
    }
    return out;
}

RzrDecomposition block_rzr(const std::vector<RZStep>& chain, std::size_t first, std::size_t last) {
    if (first < 1 || last > chain.size() || first > last)
        throw Error(ErrorKind::InvalidArgument, "block_rzr: bad index range");
    LogScaledMat2 acc;
    for (std::size_t n = first; n <= last; ++n) acc = mul_scaled(acc, rz_matrix(chain[n - 1]));
    return svd_scaled(acc, KnownDet{0.0, 1});
}

double merge_m(double l1, double l2, double phi) {
    const double beta = (1.0 / (l1 * l1) + 1.0 / (l2 * l2)) / (1.0 + 1.0 / (l1 * l1 * l2 * l2));
    const double c = std::cos(phi), s = std::sin(phi);
    return (l1 * l2 + 1.0 / (l1 * l2)) * std::sqrt(c * c + beta * beta * s * s);
}

double merge_S(double l1, double l2, double phi) { return merge(l1, l2, phi).mu; }

double merge_z(double l1, double l2, double phi) { return z_value(log_z(std::log(l1), std::log(l2), phi)); }

double merge_T(double l1, double l2, double phi) {
    const int eps = std::sin(2.0 * phi) < 0.0 ? -1 : 1;
    const double z = merge_z(l1, l2, phi);
    return eps * std::hypot(1.0, z) - z;
}

MergeResult merge(double lambda1, double lambda2, double phi) {
    if (!(lambda1 >= 1.0) || !(lambda2 >= 1.0) || !std::isfinite(phi))
        throw Error(ErrorKind::InvalidArgument, "merge: need lambda1, lambda2 >= 1 and finite phi");
    return merge_log(std::log(lambda1), std::log(lambda2), phi);
}

MergeResult merge_log(double l1, double l2, double phi) {
    if (!(l1 >= 0.0) || !(l2 >= 0.0) || !std::isfinite(phi))
        throw Error(ErrorKind::InvalidArgument, "merge: need lambda1, lambda2 >= 1 and finite phi");
    MergeResult r;
    const int k = wrap_half_turn(phi);
    r.sign = (k % 2 == 0) ? 1 : -1;
    const double c = std::cos(phi), s = std::sin(phi);
    const double logL = l1 + l2;
    const double iL2 = std::exp(-2.0 * logL);
    const double i1 = std::exp(-2.0 * l1), i2 = std::exp(-2.0 * l2);

    r.beta = (i1 + i2) / (1.0 + iL2);
    // m = L * mp,  sqrt(m^2 - 4) = L * dp
    const double mp = std::hypot((1.0 + iL2) * c, (i1 + i2) * s);
    const double dp = std::hypot((1.0 - iL2) * c, (i1 - i2) * s);
    r.m = clamp_exp(logL + std::log(mp));
    r.logMu = logL + std::log(0.5 * (mp + dp));
    r.mu = clamp_exp(r.logMu);

    if (phi == 0.0) {
        r.psi = r.chi = 0.0;
        r.z = std::numeric_limits<double>::infinity();
        return r;
    }
    if (l2 == 0.0) {
        // Z(1) R(phi) Z(lambda1) = R(phi) Z(lambda1)
        r.psi = phi;
        r.chi = 0.0;
        r.z = std::numeric_limits<double>::infinity();
        return r;
    }
    if (l1 == 0.0) {
        r.psi = 0.0;
        r.chi = phi;
        r.z = z_value(log_z(l1, l2, phi));
        return r;
    }
    const int eps = std::sin(2.0 * phi) < 0.0 ? -1 : 1;
    const LogZ zc = log_z(l1, l2, phi), zp = log_z(l2, l1, phi);
    r.z = z_value(zc);
    r.chi = angle_from_z(z_value(zc), eps);
    r.psi = angle_from_z(z_value(zp), eps);
    const int kk = wrap_half_turn(r.chi) + wrap_half_turn(r.psi);
    if (kk % 2 != 0) r.sign = -r.sign;

    // z is singular as either stretch tends to 1; use the generic SVD there
    constexpr double kNearOne = 1e-7;
    if ((l1 < kNearOne || l2 < kNearOne) && logL < 300.0) {
        const Mat2 p = stretch(std::exp(l2)) * rot(phi) * stretch(std::exp(l1));
        const auto d = svd_generic(p);
        r.psi = d.phi;
        r.chi = d.chi;
        r.sign *= d.sign;
        r.mu = d.lambda;
        r.logMu = d.logLambda;
        r.fallback = true;
    }
    return r;
}

std::vector<AccumState> accumulate(const std::vector<RZStep>& chain) {
    if (chain.empty()) throw Error(ErrorKind::InvalidArgument, "accumulate: empty chain");
    std::vector<AccumState> out;
    out.reserve(chain.size());
    AccumState st;
    st.logMu = std::log(chain[0].lambda);
    st.mu = chain[0].lambda;
    out.push_back(st);
    for (std::size_t n = 1; n < chain.size(); ++n) {
        const auto& prev = out.back();
        const auto mr = merge_log(prev.logMu, std::log(chain[n].lambda), chain[n - 1].Phi + prev.psi);
        AccumState next;
        next.logMu = mr.logMu;
        next.mu = mr.mu;
        next.psi = mr.psi;
        next.chi = mr.chi + prev.chi;
        next.sign = prev.sign * mr.sign;
        next.fallback = prev.fallback || mr.fallback;
        out.push_back(next);
    }
    return out;
}

GroupedCocycle group(const std::vector<RZStep>& chain, const ContractionSpec& xi) {
    validate(xi, chain.size());
    GroupedCocycle g;
    g.xi = xi.xi;
    std::size_t start = 0;
    for (std::size_t end : xi.xi) {
        auto acc = LogScaledMat2::identity();
        for (std::size_t n = start; n < end; ++n) acc = mul_scaled(acc, rz_matrix(chain[n]));
        g.groups.push_back(svd_scaled(acc, KnownDet{0.0, 1}));
        start = end;
    }
    for (std::size_t k = 0; k + 1 < g.groups.size(); ++k) {
        const double Phi = g.groups[k + 1].chi + g.groups[k].phi;
        g.PhiXi.push_back(Phi);
        g.dSteps.push_back({Phi, g.groups[k].lambda});
    }
    return g;
}

}  // namespace cfh
