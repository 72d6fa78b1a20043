#pragma once

// 2x2 real linear algebra with closed-form SVD in the rotation-stretch-rotation
// shape sign * R(phi) Z(lambda) R(chi), where
//   R(phi) = [[cos, sin], [-sin, cos]],  Z(lambda) = diag(lambda, 1/lambda).

#include <array>
#include <cmath>
#include <optional>

namespace cfh {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct Mat2 {
    double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;

    static Mat2 identity() { return {}; }
    static Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }

    double det() const { return m11 * m22 - m12 * m21; }
    double trace() const { return m11 + m22; }
    double frobenius() const { return std::hypot(std::hypot(m11, m12), std::hypot(m21, m22)); }
    bool finite() const {
        return std::isfinite(m11) && std::isfinite(m12) && std::isfinite(m21) && std::isfinite(m22);
    }
    Mat2 transpose() const { return {m11, m21, m12, m22}; }
    // inverse up to the factor det
    Mat2 adjugate() const { return {m22, -m12, -m21, m11}; }
};

Mat2 operator*(const Mat2& a, const Mat2& b);
Mat2 operator*(double s, const Mat2& a);
Mat2 operator+(const Mat2& a, const Mat2& b);
Mat2 operator-(const Mat2& a, const Mat2& b);
Vec2 operator*(const Mat2& a, const Vec2& v);

// Largest singular value, closed form.
double op_norm(const Mat2& m);
// Both singular values, s1 >= s2 >= 0.
std::array<double, 2> singular_values(const Mat2& m);

Mat2 rot(double phi);
Mat2 stretch(double lambda);

// Wrap an angle into (-pi/2, pi/2]; returns the number of half turns removed
// so callers can track the sign (-1)^k picked up by R.
int wrap_half_turn(double& angle);

struct RzrDecomposition {
    double phi = 0.0;
    double lambda = 1.0;
    double chi = 0.0;
    int sign = 1;
    // scale * sign * R(phi) Z(lambda) [F] R(chi), scale = sqrt|det|
    double scale = 1.0;
    // true when det < 0; F = diag(1, -1) sits between Z and R(chi)
    bool reflected = false;
    // log(lambda), kept separately so huge products stay representable
    double logLambda = 0.0;

    Mat2 reconstruct() const;
};

RzrDecomposition svd_generic(const Mat2& m);

// Product held as exp(logScale) * unit, ||unit||_F = 1.
struct LogScaledMat2 {
    Mat2 unit = {M_SQRT1_2, 0.0, 0.0, M_SQRT1_2};
    double logScale = 0.5 * M_LN2;

    static LogScaledMat2 identity() { return {}; }
    static LogScaledMat2 from(const Mat2& m);

    Mat2 value() const;
    double log_norm() const;     // log of the operator norm
    double log_abs_det() const;  // log |det|
    int det_sign() const;
};

// Returns the state representing m * acc (m applied after everything already in acc).
LogScaledMat2 mul_scaled(const LogScaledMat2& acc, const Mat2& m);
// acc2 * acc1
LogScaledMat2 mul_scaled(const LogScaledMat2& acc2, const LogScaledMat2& acc1);

// SVD of a product known to have |det| = exp(2*logScale)*|det(unit)|; lambda is
// reported through logLambda and clamped in `lambda` to the double range.
// Pass the exact determinant when it is known (products of SL(2) factors):
// det(unit) loses all relative precision once the product is strongly stretched.
struct KnownDet {
    double logAbs = 0.0;
    int sign = 1;
};
RzrDecomposition svd_scaled(const LogScaledMat2& m, std::optional<KnownDet> det = std::nullopt);

}  // namespace cfh
