#include "cfhyp/linalg2.hpp"

#include <algorithm>
#include <limits>

#include "cfhyp/error.hpp"

namespace cfh {

Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
}

Mat2 operator*(double s, const Mat2& a) { return {s * a.m11, s * a.m12, s * a.m21, s * a.m22}; }

Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
}

Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
}

Vec2 operator*(const Mat2& a, const Vec2& v) {
    return {a.m11 * v.x + a.m12 * v.y, a.m21 * v.x + a.m22 * v.y};
}

namespace {

struct Blinn {
    double q, r, a1, a2;
};

Blinn blinn(const Mat2& m) {
    const double e = 0.5 * (m.m11 + m.m22);
    const double f = 0.5 * (m.m11 - m.m22);
    const double g = 0.5 * (m.m21 + m.m12);
    const double h = 0.5 * (m.m21 - m.m12);
    return {std::hypot(e, h), std::hypot(f, g), std::atan2(g, f), std::atan2(h, e)};
}

}  // namespace

std::array<double, 2> singular_values(const Mat2& m) {
    const Blinn b = blinn(m);
    const double s1 = b.q + b.r;
    // s2 from the determinant avoids the cancellation in q - r
    const double s2 = s1 > 0.0 ? std::abs(m.det()) / s1 : 0.0;
    return {s1, s2};
}

double op_norm(const Mat2& m) { return singular_values(m)[0]; }

Mat2 rot(double phi) {
    if (!std::isfinite(phi)) throw Error(ErrorKind::InvalidArgument, "rot: angle must be finite");
    const double c = std::cos(phi), s = std::sin(phi);
    return {c, s, -s, c};
}

Mat2 stretch(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error(ErrorKind::InvalidArgument, "stretch: lambda must be positive and finite");
    return {lambda, 0.0, 0.0, 1.0 / lambda};
}

int wrap_half_turn(double& angle) {
    const double k = std::ceil(angle / M_PI - 0.5);
    angle -= k * M_PI;
    if (angle <= -M_PI_2) {
        angle += M_PI;
        return static_cast<int>(k) - 1;
    }
    if (angle > M_PI_2) {
        angle -= M_PI;
        return static_cast<int>(k) + 1;
    }
    return static_cast<int>(k);
}

Mat2 RzrDecomposition::reconstruct() const {
    Mat2 z = {lambda, 0.0, 0.0, 1.0 / lambda};
    if (reflected) z.m22 = -z.m22;
    return (sign * scale) * (rot(phi) * z * rot(chi));
}

namespace {

// Shared angle/sign bookkeeping. `logS1` and `logS2` are logs of the singular
// values, `neg` tells whether the determinant is negative.
RzrDecomposition assemble(const Blinn& b, double logS1, double logS2, bool neg) {
    RzrDecomposition d;
    // Blinn: M = Rot(a) diag(s1, +-s2) Rot(c) with Rot counterclockwise; R(t) = Rot(-t)
    d.phi = -0.5 * (b.a2 + b.a1);
    d.chi = -0.5 * (b.a2 - b.a1);
    d.reflected = neg;
    int k = wrap_half_turn(d.phi) + wrap_half_turn(d.chi);
    d.sign = (k % 2 == 0) ? 1 : -1;
    d.logLambda = 0.5 * (logS1 - logS2);
    d.lambda = d.logLambda < 709.0 ? std::exp(d.logLambda) : std::numeric_limits<double>::max();
    const double logScale = 0.5 * (logS1 + logS2);
    d.scale = std::exp(std::clamp(logScale, -745.0, 709.0));
    return d;
}

}  // namespace

RzrDecomposition svd_generic(const Mat2& m) {
    if (!m.finite()) throw Error(ErrorKind::InvalidArgument, "svd_generic: non-finite entries");
    const double f2 = m.frobenius();
    const double det = m.det();
    if (!(std::abs(det) > 1e-14 * f2 * f2))
        throw Error(ErrorKind::DegenerateMatrix, "svd_generic: matrix is rank deficient");
    const Blinn b = blinn(m);
    const double s1 = b.q + b.r;
    const double s2 = std::abs(det) / s1;
    return assemble(b, std::log(s1), std::log(s2), det < 0.0);
}

LogScaledMat2 LogScaledMat2::from(const Mat2& m) { return mul_scaled(LogScaledMat2{{1, 0, 0, 1}, 0.0}, m); }

Mat2 LogScaledMat2::value() const { return std::exp(logScale) * unit; }

double LogScaledMat2::log_norm() const { return logScale + std::log(op_norm(unit)); }

double LogScaledMat2::log_abs_det() const { return 2.0 * logScale + std::log(std::abs(unit.det())); }

int LogScaledMat2::det_sign() const { return unit.det() < 0.0 ? -1 : 1; }

namespace {

LogScaledMat2 renormalize(const Mat2& prod, double logScale) {
    const double f = prod.frobenius();
    if (!(f > 0.0) || !std::isfinite(f))
        throw Error(ErrorKind::DegenerateMatrix, "mul_scaled: product vanished or overflowed");
    return {(1.0 / f) * prod, logScale + std::log(f)};
}

}  // namespace

LogScaledMat2 mul_scaled(const LogScaledMat2& acc, const Mat2& m) {
    if (!m.finite()) throw Error(ErrorKind::InvalidArgument, "mul_scaled: non-finite factor");
    return renormalize(m * acc.unit, acc.logScale);
}

LogScaledMat2 mul_scaled(const LogScaledMat2& acc2, const LogScaledMat2& acc1) {
    return renormalize(acc2.unit * acc1.unit, acc2.logScale + acc1.logScale);
}

RzrDecomposition svd_scaled(const LogScaledMat2& m, std::optional<KnownDet> known) {
    const Blinn b = blinn(m.unit);
    const double s1 = b.q + b.r;
    const double logS1 = m.logScale + std::log(s1);
    if (known) return assemble(b, logS1, known->logAbs - logS1, known->sign < 0);
    const double det = m.unit.det();
    if (!(std::abs(det) > 0.0)) throw Error(ErrorKind::DegenerateMatrix, "svd_scaled: singular product");
    const double logS2 = m.logScale + std::log(std::abs(det) / s1);
    return assemble(b, logS1, logS2, det < 0.0);
}

}  // namespace cfh
