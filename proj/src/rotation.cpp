#include "cfhyp/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cfhyp/error.hpp"
#include "cfhyp/oracle.hpp"

namespace cfh {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr std::size_t kSupGrid = 1u << 14;

double wrap01(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;
    return r;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

double abs_cot(double a) { return std::abs(std::cos(a) / std::sin(a)); }
double cot(double a) { return std::cos(a) / std::sin(a); }

}  // namespace

// ---------------------------------------------------------------- PeriodicFn

PeriodicFn PeriodicFn::trig(double c0, std::vector<double> cosC, std::vector<double> sinC) {
    PeriodicFn f;
    f.trig_ = true;
    f.c0_ = c0;
    f.cos_ = std::move(cosC);
    f.sin_ = std::move(sinC);
    return f;
}

PeriodicFn PeriodicFn::samples(std::vector<double> values) {
    if (values.size() < 4) throw Error(ErrorKind::InvalidArgument, "PeriodicFn: need at least 4 samples");
    for (double v : values)
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "PeriodicFn: non-finite sample");
    PeriodicFn f;
    f.trig_ = false;
    f.vals_ = std::move(values);
    return f;
}

double PeriodicFn::operator()(double x) const {
    if (trig_) {
        double s = c0_;
        for (std::size_t k = 0; k < cos_.size(); ++k) s += cos_[k] * std::cos(kTwoPi * double(k + 1) * x);
        for (std::size_t k = 0; k < sin_.size(); ++k) s += sin_[k] * std::sin(kTwoPi * double(k + 1) * x);
        return s;
    }
    const std::size_t n = vals_.size();
    const double t = wrap01(x) * double(n);
    const auto i = static_cast<std::size_t>(std::floor(t)) % n;
    const double u = t - std::floor(t);
    const double p0 = vals_[(i + n - 1) % n], p1 = vals_[i], p2 = vals_[(i + 1) % n], p3 = vals_[(i + 2) % n];
    return 0.5 * (2.0 * p1 + (p2 - p0) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
}

double PeriodicFn::deriv(double x) const {
    if (trig_) {
        double s = 0.0;
        for (std::size_t k = 0; k < cos_.size(); ++k) {
            const double w = kTwoPi * double(k + 1);
            s -= cos_[k] * w * std::sin(w * x);
        }
        for (std::size_t k = 0; k < sin_.size(); ++k) {
            const double w = kTwoPi * double(k + 1);
            s += sin_[k] * w * std::cos(w * x);
        }
        return s;
    }
    const std::size_t n = vals_.size();
    const double t = wrap01(x) * double(n);
    const auto i = static_cast<std::size_t>(std::floor(t)) % n;
    const double u = t - std::floor(t);
    const double p0 = vals_[(i + n - 1) % n], p1 = vals_[i], p2 = vals_[(i + 1) % n], p3 = vals_[(i + 2) % n];
    const double du = 0.5 * ((p2 - p0) + 2.0 * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u +
                             3.0 * (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u);
    return du * double(n);
}

double PeriodicFn::deriv_bound() const {
    if (trig_) {
        double s = 0.0;
        for (std::size_t k = 0; k < cos_.size(); ++k) s += std::abs(cos_[k]) * kTwoPi * double(k + 1);
        for (std::size_t k = 0; k < sin_.size(); ++k) s += std::abs(sin_[k]) * kTwoPi * double(k + 1);
        return s;
    }
    // the interpolant is a cubic per cell; a dense sample plus 10% covers the cell maxima
    double m = 0.0;
    for (std::size_t i = 0; i < kSupGrid; ++i) m = std::max(m, std::abs(deriv(double(i) / kSupGrid)));
    return 1.1 * m;
}

double PeriodicFn::sup_abs() const {
    double m = 0.0;
    for (std::size_t i = 0; i < kSupGrid; ++i) m = std::max(m, std::abs((*this)(double(i) / kSupGrid)));
    return m;
}

// ---------------------------------------------------------------- basics

void validate(const FunctionalGenerator& gen, std::size_t horizon) {
    if (!(gen.omega > 0.0 && gen.omega < 1.0))
        throw Error(ErrorKind::InvalidArgument, "omega must lie in (0,1), got " + fmt(gen.omega));
    if (!(gen.g >= 1.0) || !std::isfinite(gen.g))
        throw Error(ErrorKind::InvalidArgument, "g must be >= 1, got " + fmt(gen.g));
    for (std::size_t k = 1; k <= horizon; ++k) {
        const double t = double(k) * gen.omega;
        if (std::abs(t - std::round(t)) < 1e-9)
            throw Error(ErrorKind::InvalidArgument,
                        "omega " + fmt(gen.omega) + " returns within 1e-9 after " + std::to_string(k) + " steps");
    }
}

double rotate(double x, double varpi, long long k) { return wrap01(x - std::fmod(double(k) * varpi, 1.0)); }

double circle_diff(double x, double y) {
    double d = x - y;
    d -= std::floor(d + 0.5);
    if (d <= -0.5) d += 1.0;
    return d;
}

double circle_dist(double x, double y) { return std::abs(circle_diff(x, y)); }

NumericCF sample_chain(const FunctionalGenerator& gen, double x, std::size_t n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "sample_chain: n must be >= 1");
    std::vector<double> b(n);
    for (std::size_t j = 1; j <= n; ++j) b[j - 1] = gen.g * gen.b(x - double(j - 1) * gen.omega);
    return NumericCF::minus_one(gen.g * gen.b(x + gen.omega), std::move(b));
}

StepSVD2 functional_pair(const FunctionalGenerator& gen, double x) {
    return svd_pair(gen.g * gen.b(x), gen.g * gen.b(x - gen.omega));
}

RZStep functional_step(const FunctionalGenerator& gen, double x) {
    const StepSVD2 here = functional_pair(gen, x);
    const StepSVD2 next = functional_pair(gen, rotate(x, 2.0 * gen.omega, 1));
    return {next.chi + here.phi, here.lambda};
}

std::vector<RZStep> functional_chain(const FunctionalGenerator& gen, double x, std::size_t n) {
    std::vector<RZStep> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) out.push_back(functional_step(gen, rotate(x, 2.0 * gen.omega, (long long)j)));
    return out;
}

RzrDecomposition orbit_block(const FunctionalGenerator& gen, double x, std::size_t T) {
    LogScaledMat2 acc;
    for (std::size_t j = 1; j <= T; ++j)
        acc = mul_scaled(acc, rz_matrix(functional_step(gen, rotate(x, 2.0 * gen.omega, (long long)j))));
    return svd_scaled(acc, KnownDet{0.0, 1});
}

// ---------------------------------------------------------------- zero set

CriticalSet find_zero_set(const FunctionalGenerator& gen, std::size_t gridSize, double derivTolerance) {
    if (gridSize < 256) throw Error(ErrorKind::InvalidArgument, "find_zero_set: gridSize must be >= 256");
    const std::size_t N = gridSize;
    auto f = [&](double y) { return gen.b(y - gen.omega); };
    std::vector<double> v(N);
    for (std::size_t i = 0; i < N; ++i) v[i] = f(double(i) / N);
    const double scale = std::max(1.0, gen.b.sup_abs());

    std::vector<double> roots;
    std::vector<bool> nearRoot(N, false);
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t j = (i + 1) % N;
        double lo = double(i) / N, hi = double(i + 1) / N;
        if (v[i] == 0.0) {
            roots.push_back(lo);
            nearRoot[i] = nearRoot[j] = nearRoot[(i + N - 1) % N] = true;
            continue;
        }
        if (v[j] == 0.0 || (v[i] > 0.0) == (v[j] > 0.0)) continue;
        nearRoot[i] = nearRoot[j] = true;
        double flo = v[i];
        for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if (fm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((fm > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        double x = 0.5 * (lo + hi);
        const double d = gen.b.deriv(x - gen.omega);
        if (d != 0.0) {
            const double x1 = x - f(x) / d;
            if (x1 >= lo - 1e-12 && x1 <= hi + 1e-12) x = x1;
        }
        roots.push_back(wrap01(x));
    }

    // tangential zeros give no sign change: look at local minima of |b|
    for (std::size_t i = 0; i < N; ++i) {
        if (nearRoot[i]) continue;
        const double a = std::abs(v[(i + N - 1) % N]), m = std::abs(v[i]), c = std::abs(v[(i + 1) % N]);
        if (!(m <= a && m <= c)) continue;
        double lo = double(i) / N - 1.0 / N, hi = double(i) / N + 1.0 / N;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 100; ++it) {
            const double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
            if (std::abs(f(x1)) < std::abs(f(x2))) hi = x2;
            else lo = x1;
        }
        const double xm = 0.5 * (lo + hi);
        if (std::abs(f(xm)) <= 1e-10 * scale)
            throw Error(ErrorKind::Transversality, "tangential zero of b(x - omega) near x = " + fmt(wrap01(xm)));
    }

    std::sort(roots.begin(), roots.end());
    CriticalSet cs;
    for (double r : roots) {
        const double d = gen.b.deriv(r - gen.omega);
        if (std::abs(d) < derivTolerance)
            throw Error(ErrorKind::Transversality, "b' = " + fmt(d) + " at critical point x = " + fmt(r));
        cs.points.push_back(r);
        cs.derivs.push_back(d);
    }
    const std::size_t n = cs.points.size();
    for (std::size_t i = 0; n > 1 && i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        if (circle_dist(cs.points[i], cs.points[j]) < 4.0 / double(N))
            throw Error(ErrorKind::Transversality,
                        "critical points " + fmt(cs.points[i]) + " and " + fmt(cs.points[j]) + " closer than 4/grid");
    }
    return cs;
}

// ---------------------------------------------------------------- H1

H1Certificate check_h1_functional(const FunctionalGenerator& gen, H1Scope scope, std::size_t gridSize,
                                  double delta, const CriticalSet* cs) {
    if (gridSize < 2) throw Error(ErrorKind::InvalidArgument, "check_h1_functional: gridSize too small");
    H1Certificate c;
    c.scope = scope;
    c.gridSize = gridSize;
    c.tolerance = 1e-12;
    c.hStarSq = std::numeric_limits<double>::infinity();
    const double D = gen.b.deriv_bound();
    const double g = gen.g;
    auto cell_bound = [&](double x, double e, bool diffOnly) {
        const double b1 = gen.b(x), b2 = gen.b(x - gen.omega);
        const double d = std::max(0.0, std::abs(b1 - b2) - 2.0 * e);
        double h = g * g * d * d;
        if (!diffOnly) {
            const double p = std::max(0.0, std::abs(b1) - e) * std::max(0.0, std::abs(b2) - e);
            h += g * g * g * g * p * p;
        }
        return h;
    };

    if (scope == H1Scope::differenceOnly) {
        if (!cs || !(delta > 0.0))
            throw Error(ErrorKind::InvalidArgument, "differenceOnly scope needs a critical set and delta > 0");
        const double dx = 2.0 * delta / double(gridSize);
        const double e = D * dx / 2.0;
        c.lipschitzMargin = e;
        std::size_t idx = 0;
        for (double p : cs->points) {
            for (std::size_t i = 0; i <= gridSize; ++i, ++idx) {
                const double h = cell_bound(p - delta + double(i) * dx, e, true);
                if (h < c.hStarSq) {
                    c.hStarSq = h;
                    c.argmin = idx;
                }
            }
        }
        if (cs->points.empty()) c.hStarSq = 0.0;
    } else {
        const double dx = 1.0 / double(gridSize);
        const double e = D * dx / 2.0;
        c.lipschitzMargin = e;
        for (std::size_t i = 0; i < gridSize; ++i) {
            const double h = cell_bound(double(i) * dx, e, false);
            if (h < c.hStarSq) {
                c.hStarSq = h;
                c.argmin = i;
            }
        }
    }
    c.valid = c.hStarSq > c.tolerance;
    c.Lambda0 = lambda_from_hsq(c.hStarSq);
    return c;
}

// ---------------------------------------------------------------- collisions

namespace {

struct SortedPoints {
    std::vector<double> xs;
    std::vector<std::size_t> idx;
};

SortedPoints sort_points(const std::vector<double>& pts) {
    SortedPoints s;
    s.idx.resize(pts.size());
    std::iota(s.idx.begin(), s.idx.end(), std::size_t{0});
    std::sort(s.idx.begin(), s.idx.end(), [&](std::size_t a, std::size_t b) { return pts[a] < pts[b]; });
    for (std::size_t i : s.idx) s.xs.push_back(pts[i]);
    return s;
}

// all original indices q with circle_dist(y, x_q) <= delta, nearest distance in *nearest
std::vector<std::size_t> within(const SortedPoints& s, double y, double delta, double* nearest) {
    const std::size_t n = s.xs.size();
    std::vector<std::size_t> out;
    const std::size_t start = std::size_t(std::lower_bound(s.xs.begin(), s.xs.end(), y) - s.xs.begin()) % n;
    double best = std::numeric_limits<double>::infinity();
    // forward, then backward, both circular; stop at the first point beyond delta
    std::vector<bool> seen(n, false);
    for (std::size_t step = 0; step < n; ++step) {
        const std::size_t i = (start + step) % n;
        const double d = circle_dist(y, s.xs[i]);
        best = std::min(best, d);
        if (d > delta) break;
        if (!seen[i]) out.push_back(s.idx[i]);
        seen[i] = true;
    }
    for (std::size_t step = 1; step <= n; ++step) {
        const std::size_t i = (start + n - step) % n;
        const double d = circle_dist(y, s.xs[i]);
        best = std::min(best, d);
        if (d > delta) break;
        if (!seen[i]) out.push_back(s.idx[i]);
        seen[i] = true;
    }
    if (nearest) *nearest = best;
    return out;
}

void check_delta_against_gaps(const std::vector<double>& pts, double delta) {
    if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (2.0 * delta >= circle_dist(pts[i], pts[j]))
                throw Error(ErrorKind::DeltaTooLarge, "delta " + fmt(delta) + " overlaps the neighborhoods of points " +
                                                          std::to_string(i) + " and " + std::to_string(j));
}

}  // namespace

void build_classes(CollisionGraph& graph) {
    const std::size_t n = graph.Rdelta.size();
    std::vector<std::size_t> indeg(n, 0);
    for (std::size_t r : graph.Rdelta) ++indeg[r];
    for (std::size_t q = 0; q < n; ++q)
        if (indeg[q] != 1)
            throw Error(ErrorKind::NonCyclicCollision,
                        "point " + std::to_string(q) + " is hit by " + std::to_string(indeg[q]) + " points");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return graph.Tdelta[a] > graph.Tdelta[b]; });
    std::vector<bool> used(n, false);
    graph.classes.clear();
    graph.periods.clear();
    for (std::size_t start : order) {
        if (used[start]) continue;
        std::vector<std::size_t> cls;
        std::size_t p = start;
        do {
            used[p] = true;
            cls.push_back(p);
            p = graph.Rdelta[p];
        } while (p != start);
        graph.periods.push_back(cls.size());
        graph.classes.push_back(std::move(cls));
    }
}

CollisionGraph collision_graph(const CriticalSet& cs, double omega, double delta, std::size_t horizon) {
    CollisionGraph gr;
    gr.delta = delta;
    gr.horizon = horizon;
    const std::size_t n = cs.points.size();
    check_delta_against_gaps(cs.points, delta);
    if (n == 0) return gr;
    const SortedPoints sp = sort_points(cs.points);
    gr.Tdelta.assign(n, 0);
    gr.Rdelta.assign(n, 0);
    gr.hitDistance.assign(n, 0.0);
    gr.primary.assign(n, false);
    for (std::size_t p = 0; p < n; ++p) {
        double closest = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t k = 1; k <= horizon; ++k) {
            const double y = rotate(cs.points[p], 2.0 * omega, (long long)k);
            double near = 0.0;
            const auto hits = within(sp, y, delta, &near);
            closest = std::min(closest, near);
            if (hits.size() > 1)
                throw Error(ErrorKind::DeltaTooLarge,
                            "point " + std::to_string(p) + " reaches two neighborhoods at step " + std::to_string(k));
            if (hits.size() == 1) {
                gr.Tdelta[p] = k;
                gr.Rdelta[p] = hits[0];
                gr.hitDistance[p] = circle_dist(y, cs.points[hits[0]]);
                gr.primary[p] = hits[0] == p;
                found = true;
                break;
            }
        }
        if (!found)
            throw Error(ErrorKind::HorizonExceeded, "point " + std::to_string(p) + " made no collision within " +
                                                        std::to_string(horizon) + " steps; closest approach " +
                                                        fmt(closest));
    }
    build_classes(gr);
    return gr;
}

double default_delta(const CriticalSet& cs, double omega, double cap, std::size_t horizon) {
    double gap = 1.0;
    for (std::size_t i = 0; i < cs.points.size(); ++i)
        for (std::size_t j = i + 1; j < cs.points.size(); ++j) gap = std::min(gap, circle_dist(cs.points[i], cs.points[j]));
    double delta = std::min(cap, 0.25 * gap);
    for (int attempt = 0; attempt < 30; ++attempt) {
        try {
            (void)collision_graph(cs, omega, delta, horizon);
            return delta;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DeltaTooLarge && e.kind() != ErrorKind::NonCyclicCollision) throw;
            delta *= 0.5;
        }
    }
    throw Error(ErrorKind::DeltaTooLarge, "no admissible delta found");
}

// ---------------------------------------------------------------- refinement

namespace {

struct ClassCtx {
    const FunctionalGenerator& gen;
    const CriticalSet& cs;
    const CollisionGraph& graph;
    const std::vector<std::size_t>& cls;

    std::size_t at(std::size_t k) const { return cls[k % cls.size()]; }
    std::size_t T(std::size_t k) const { return graph.Tdelta[at(k)]; }
    double step() const { return 2.0 * gen.omega; }

    // Phi_{i,k}(x) for 0-based k
    double Phi(std::size_t k, double x) const {
        const RzrDecomposition d = orbit_block(gen, x, T(k));
        const RzrDecomposition e = orbit_block(gen, rotate(x, step(), (long long)T(k)), T(k + 1));
        return d.phi + e.chi;
    }
};

struct RootResult {
    double x = 0.0;
    std::size_t count = 0;
};

// roots of cot Phi_k on U_delta(x_k), unwrapped coordinates
RootResult solve_lemma6(const ClassCtx& c, std::size_t k, double delta) {
    const double x0 = c.cs.points[c.at(k)];
    const double r = std::abs(c.cs.derivs[c.at((k + 1))]);
    const std::size_t N = std::max<std::size_t>(400, std::size_t(std::ceil(2.0 * delta * c.gen.g * r * 8.0)));
    const double lo = x0 - delta, hi = x0 + delta;
    auto F = [&](double x) { return cot(c.Phi(k, x)); };
    RootResult res;
    double prevX = lo, prevF = F(lo);
    double bLo = 0.0, bHi = 0.0, fLo = 0.0;
    for (std::size_t i = 1; i <= N; ++i) {
        const double x = lo + (hi - lo) * double(i) / double(N);
        const double fx = F(x);
        const bool change = (prevF < 0.0) != (fx < 0.0) || fx == 0.0;
        if (change && std::abs(prevF) < 1.0 && std::abs(fx) < 1.0) {
            ++res.count;
            bLo = prevX;
            bHi = x;
            fLo = prevF;
        }
        prevX = x;
        prevF = fx;
    }
    if (res.count != 1) return res;
    for (int it = 0; it < 200 && bHi - bLo > 1e-13; ++it) {
        const double mid = 0.5 * (bLo + bHi);
        const double fm = F(mid);
        if (fm == 0.0) {
            bLo = bHi = mid;
            break;
        }
        if ((fm < 0.0) == (fLo < 0.0)) {
            bLo = mid;
            fLo = fm;
        } else {
            bHi = mid;
        }
    }
    double xm = 0.5 * (bLo + bHi);
    const double h = 1e-7;
    const double slope = (F(xm + h) - F(xm - h)) / (2.0 * h);
    if (slope != 0.0 && std::isfinite(slope)) {
        const double x1 = xm - F(xm) / slope;
        if (std::abs(x1 - xm) <= 1e-12) xm = x1;
    }
    res.x = xm;
    return res;
}

}  // namespace

ClassAnalysis refine_critical_points(const FunctionalGenerator& gen, const CriticalSet& cs,
                                     const CollisionGraph& graph, bool compareDoubled) {
    ClassAnalysis a;
    a.g = gen.g;
    a.delta = graph.delta;
    a.C2 = gen.b.sup_abs();
    FunctionalGenerator gen2 = gen;
    gen2.g = 2.0 * gen.g;
    for (std::size_t ci = 0; ci < graph.classes.size(); ++ci) {
        const auto& cls = graph.classes[ci];
        const ClassCtx ctx{gen, cs, graph, cls};
        const ClassCtx ctx2{gen2, cs, graph, cls};
        std::vector<RefinedPoint> refined;
        for (std::size_t k = 0; k < cls.size(); ++k) {
            RefinedPoint rp;
            rp.point = ctx.at(k);
            rp.T = ctx.T(k);
            rp.x0 = cs.points[rp.point];
            rp.derivative = cs.derivs[rp.point];
            const RootResult root = solve_lemma6(ctx, k, graph.delta);
            if (root.count != 1)
                throw Error(ErrorKind::Lemma6Precondition,
                            "cot Phi has " + std::to_string(root.count) + " sign changes near point " +
                                std::to_string(rp.point) + " (class " + std::to_string(ci + 1) + ")");
            rp.xStar = wrap01(root.x);
            const double next = cs.points[ctx.at(k + 1)];
            rp.prediction = rotate(next, 2.0 * gen.omega, -(long long)rp.T);
            rp.deviation = circle_dist(rotate(rp.xStar, 2.0 * gen.omega, (long long)rp.T), next);

            rp.rMin = std::numeric_limits<double>::infinity();
            rp.rMax = 0.0;
            for (int j = 1; j <= 32; ++j) {
                const double t = 0.5 * graph.delta * double(j) / 32.0;
                for (double s : {-1.0, 1.0}) {
                    const double x = root.x + s * t;
                    if (circle_dist(x, rp.x0) > graph.delta) continue;
                    const double r = abs_cot(ctx.Phi(k, x)) / (gen.g * t);
                    rp.rMin = std::min(rp.rMin, r);
                    rp.rMax = std::max(rp.rMax, r);
                }
            }
            if (compareDoubled) {
                try {
                    const RootResult r2 = solve_lemma6(ctx2, k, graph.delta);
                    if (r2.count == 1)
                        rp.deviationDoubled = circle_dist(rotate(wrap01(r2.x), 2.0 * gen.omega, (long long)rp.T), next);
                } catch (const Error&) {
                }
            }
            refined.push_back(rp);
        }
        std::vector<double> offsets;
        for (std::size_t k = 0; k < refined.size(); ++k) {
            const auto& cur = refined[k];
            const auto& nxt = refined[(k + 1) % refined.size()];
            offsets.push_back(circle_diff(rotate(cur.xStar, 2.0 * gen.omega, (long long)cur.T), nxt.xStar));
        }
        a.classes.push_back(std::move(refined));
        a.offsets.push_back(std::move(offsets));
    }
    return a;
}

// ------------------------------------------------- H4 and the double-period check

namespace {

double log_offset_bound(const ClassAnalysis& a, const RefinedPoint& p, const RefinedPoint& q) {
    return -0.5 * (std::log(p.rMax) + std::log(q.rMax)) - std::log(a.g) -
           (2.0 * double(q.T) - 1.0) * std::log(a.C2 * a.g);
}

}  // namespace

std::vector<H4Verdict> h4_check(const ClassAnalysis& analysis) {
    std::vector<H4Verdict> out;
    for (std::size_t ci = 0; ci < analysis.classes.size(); ++ci) {
        const auto& pts = analysis.classes[ci];
        const auto& off = analysis.offsets[ci];
        const std::size_t S = pts.size();
        H4Verdict v;
        v.cls = ci;
        v.evenPeriod = S % 2 == 0;
        v.cond1 = true;
        for (std::size_t k = 0; k < S; ++k) {
            if (!(pts[k].derivative * pts[(k + 1) % S].derivative < 0.0)) {
                v.cond1 = false;
                v.cond1Witness = k + 1;
                break;
            }
        }
        if (v.evenPeriod) {
            auto branch = [&](std::size_t shift, bool& aOk, bool& bOk, std::vector<double>& bounds,
                              std::vector<double>& margins) {
                aOk = bOk = true;
                for (std::size_t k = 0; k < S / 2; ++k) {
                    const std::size_t i = (2 * k + shift) % S, j = (2 * k + shift + 1) % S;
                    if (pts[i].T < 2 * pts[j].T) aOk = false;
                    const double bound = std::exp(log_offset_bound(analysis, pts[i], pts[j]));
                    bounds.push_back(bound);
                    margins.push_back(bound - std::abs(off[i]));
                    if (!(std::abs(off[i]) <= bound)) bOk = false;
                }
            };
            branch(0, v.branch1a, v.branch1b, v.bounds1, v.margins1);
            branch(1, v.branch2a, v.branch2b, v.bounds2, v.margins2);
        }
        if (v.evenPeriod && v.cond1) {
            if (v.branch1a && v.branch1b) v.branch = 21;
            else if (v.branch2a && v.branch2b) v.branch = 22;
        }
        v.holds = v.branch != 0;
        out.push_back(std::move(v));
    }
    return out;
}

Lemma7Verdict lemma7_check(const ClassAnalysis& analysis, const FunctionalGenerator& gen, std::size_t cls,
                           std::size_t k, std::size_t samples) {
    if (cls >= analysis.classes.size()) throw Error(ErrorKind::InvalidArgument, "lemma7_check: no such class");
    const auto& pts = analysis.classes[cls];
    const std::size_t S = pts.size();
    if (k < 1 || k > S) throw Error(ErrorKind::InvalidArgument, "lemma7_check: k out of range");
    const std::size_t a = k - 1, b = k % S;
    Lemma7Verdict v;
    v.cls = cls;
    v.k = k;
    v.longerFirst = pts[a].T > pts[b].T;
    v.alternating = pts[a].derivative * pts[b].derivative < 0.0;
    v.offset = analysis.offsets[cls][a];
    v.bound = std::exp(log_offset_bound(analysis, pts[a], pts[b]));
    v.margin = v.bound - std::abs(v.offset);
    v.offsetOk = std::abs(v.offset) <= v.bound;
    v.doublePeriod = pts[a].T >= 2 * pts[b].T;
    v.cotLowerBound = std::exp(0.5 * (std::log(pts[b].rMax) - std::log(pts[a].rMax)) -
                               (2.0 * double(pts[b].T) - 1.0) * std::log(analysis.C2 * analysis.g));
    v.holds = v.longerFirst && v.alternating && v.offsetOk;
    if (!v.holds || !v.doublePeriod || samples == 0) return v;

    const double s2 = 2.0 * gen.omega;
    auto T = [&](std::size_t i) { return pts[i % S].T; };
    auto Phi = [&](std::size_t i, double x, RzrDecomposition* self) {
        const RzrDecomposition d = orbit_block(gen, x, T(i));
        const RzrDecomposition e = orbit_block(gen, rotate(x, s2, (long long)T(i)), T(i + 1));
        if (self) *self = d;
        return d.phi + e.chi;
    };
    // overlap of U_delta(x_a) and s^{-T_a} U_delta(x_b), parametrized by x = x_a + t
    const double delta = analysis.delta;
    const double c = circle_diff(rotate(pts[a].x0, s2, (long long)pts[a].T), pts[b].x0);
    const double tLo = std::max(-delta, -delta - c), tHi = std::min(delta, delta - c);
    std::vector<double> xs;
    for (std::size_t j = 0; j < samples; ++j) xs.push_back(pts[a].x0 + tLo + (tHi - tLo) * (double(j) + 0.5) / double(samples));
    const double tStar = circle_diff(pts[a].xStar, pts[a].x0);
    for (double f : {0.0, 1e-6, -1e-6, 1e-4, -1e-4})
        if (tStar + f * delta > tLo && tStar + f * delta < tHi) xs.push_back(pts[a].x0 + tStar + f * delta);

    double minLog = std::numeric_limits<double>::infinity();
    double minCot = std::numeric_limits<double>::infinity();
    for (double x : xs) {
        RzrDecomposition Da, Db, Dc;
        const double PhiA = Phi(a, x, &Da);
        const double y = rotate(x, s2, (long long)T(a));
        const double PhiB = Phi(a + 1, y, &Db);
        const MergeResult m = merge_log(Da.logLambda, Db.logLambda, PhiA);
        const double z = rotate(y, s2, (long long)T(a + 1));
        const double PhiC = Phi(a + 2, z, &Dc);
        const RzrDecomposition Dd = orbit_block(gen, rotate(z, s2, (long long)T(a + 2)), T(a + 3));
        const MergeResult mNext = merge_log(Dc.logLambda, Dd.logLambda, PhiC);
        const double Phi2 = PhiB + m.psi + mNext.chi;
        const double ac = abs_cot(Phi2);
        minCot = std::min(minCot, ac);
        minLog = std::min(minLog, m.logMu + std::log(ac) - std::log(gen.g));
    }
    v.sampled = true;
    v.samples = xs.size();
    v.minAbsCot = minCot;
    v.measuredC2 = std::exp(std::min(minLog, 700.0));
    v.holds = v.holds && v.measuredC2 > 0.0 && std::isfinite(minLog);
    return v;
}

SensitivityReport sensitivity(const ClassAnalysis& analysis) {
    SensitivityReport s;
    for (const auto& cls : analysis.classes) {
        double tau = 0.0;
        for (std::size_t k = 0; k + 1 < cls.size(); ++k) tau += double(cls[k].T);
        s.tauMax = std::max(s.tauMax, tau);
        for (const auto& p : cls) s.rMax = std::max(s.rMax, p.rMax);
    }
    const double g = analysis.g;
    s.logDeltaMin = -2.0 * std::log(s.rMax) - std::log(g) - (2.0 * s.tauMax / 3.0 - 1.0) * std::log(analysis.C2 * g);
    s.DeltaMin = std::exp(s.logDeltaMin);
    s.gWindow = std::pow(g, 3.0 - 2.0 * s.tauMax / 3.0);
    return s;
}

GridH2 check_h2_functional(const FunctionalGenerator& gen, std::size_t gridSize, const CheckOptions& opt) {
    GridH2 r;
    r.gridSize = gridSize;
    r.Lambda0 = std::numeric_limits<double>::infinity();
    r.minAbsCot = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gridSize; ++i) {
        const RZStep s = functional_step(gen, double(i) / double(gridSize));
        r.Lambda0 = std::min(r.Lambda0, s.lambda);
        r.minAbsCot = std::min(r.minAbsCot, abs_cot(s.Phi));
    }
    if (auto c = select_h2_constants(r.Lambda0, r.minAbsCot, opt)) {
        r.holds = true;
        r.Clambda = (*c)[0];
        r.delta = (*c)[1];
        r.certifiedLogRate = std::log(chat(r.Lambda0, r.Clambda));
    }
    return r;
}

// ---------------------------------------------------------------- pipeline

namespace {

void cross_validate(const FunctionalGenerator& gen, Theorem4Report& rep) {
    constexpr std::size_t kGrid = 256, kLong = 200, kShort = 150;
    double sup = 0.0;
    for (std::size_t i = 0; i < kGrid; ++i) {
        const NumericCF cf = sample_chain(gen, double(i) / kGrid, kLong);
        const auto conv = convergents(cf, kLong);
        sup = std::max(sup, oracle::chordal(conv[kLong].value(), conv[kShort].value()));
    }
    rep.supChordalTail = sup;
    rep.minGrowthRate = oracle::lyapunov_functional(gen, 400, 64).min;
    rep.crossChecked = true;
    rep.crossCheckOk = sup <= 1e-8 && rep.minGrowthRate > 0.0;
    if (rep.h2Grid && rep.h2Grid->holds)  // chain steps are two fraction steps
        rep.crossCheckOk = rep.crossCheckOk && 2.0 * rep.minGrowthRate >= rep.h2Grid->certifiedLogRate - 1e-3;
}

}  // namespace

Theorem4Report theorem4_certify(const FunctionalGenerator& gen, double delta, std::size_t horizon) {
    Theorem4Report rep;
    std::string stage = "validate";
    try {
        validate(gen, horizon);
        stage = "find_zero_set";
        rep.critical = find_zero_set(gen, 4096);
        if (rep.critical.points.empty()) {
            rep.degenerate = true;
            stage = "h1";
            rep.h1Circle = check_h1_functional(gen, H1Scope::circleGrid);
            if (!rep.h1Circle->valid) {
                rep.failingStage = stage;
                return rep;
            }
            stage = "h2_grid";
            rep.h2Grid = check_h2_functional(gen);
            if (!rep.h2Grid->holds) {
                rep.failingStage = stage;
                return rep;
            }
            rep.pass = true;
            stage = "cross_validation";
            cross_validate(gen, rep);
            return rep;
        }
        stage = "select_delta";
        const double d = delta > 0.0 ? delta : default_delta(rep.critical, gen.omega, 0.05, horizon);
        rep.critical.delta = d;
        stage = "h1";
        rep.h1Circle = check_h1_functional(gen, H1Scope::scaledCircle);
        rep.h1Difference = check_h1_functional(gen, H1Scope::differenceOnly, 1u << 14, d, &rep.critical);
        if (!rep.h1Circle->valid && !rep.h1Difference->valid) {
            rep.failingStage = stage;
            return rep;
        }
        stage = "collision_graph";
        rep.graph = collision_graph(rep.critical, gen.omega, d, horizon);
        stage = "refine";
        rep.analysis = refine_critical_points(gen, rep.critical, *rep.graph);
        rep.sens = sensitivity(*rep.analysis);
        for (std::size_t ci = 0; ci < rep.analysis->classes.size(); ++ci)
            for (std::size_t k = 1; k <= rep.analysis->classes[ci].size(); ++k)
                rep.lemma7.push_back(lemma7_check(*rep.analysis, gen, ci, k));
        rep.secondFamilyClear = second_family_clear(rep.critical, *rep.graph, gen.omega);
        stage = "h4";
        rep.h4 = h4_check(*rep.analysis);
        for (const auto& v : rep.h4)
            if (!v.holds) {
                rep.failingStage = stage;
                return rep;
            }
        rep.pass = true;
        stage = "cross_validation";
        cross_validate(gen, rep);
    } catch (const Error& e) {
        rep.pass = false;
        rep.failingStage = stage;
        rep.error = e.what();
    }
    return rep;
}

bool second_family_clear(const CriticalSet& cs, const CollisionGraph& graph, double omega) {
    // odd elements vanish at b(x - 2 omega) = 0, i.e. on the critical points shifted by +omega
    for (std::size_t p = 0; p < graph.Tdelta.size(); ++p)
        for (std::size_t j = 0; j <= graph.Tdelta[p] + graph.Tdelta[graph.Rdelta[p]]; ++j) {
            const double y = rotate(cs.points[p], 2.0 * omega, (long long)j);
            for (double q : cs.points)
                if (circle_dist(y, q + omega) <= graph.delta) return false;
        }
    return true;
}

// ---------------------------------------------------------------- sampled properties

bool monotone_exits(const CriticalSet& cs, double omega, double x, std::size_t n, double delta) {
    for (double p : cs.points) {
        bool leftHalf = false;
        bool inside = false;
        for (std::size_t j = 0; j <= n; ++j) {
            const double d = circle_dist(rotate(x, omega, (long long)j), p);
            if (d <= 0.5 * delta) {
                if (leftHalf && inside) return false;
                inside = true;
                leftHalf = false;
            } else if (d <= delta) {
                if (inside) leftHalf = true;
            } else {
                inside = false;
                leftHalf = false;
            }
        }
    }
    return true;
}

GoodRegionCheck good_region_check(const FunctionalGenerator& gen, const CriticalSet& cs, double delta,
                                  std::size_t samples) {
    GoodRegionCheck r;
    std::vector<double> zeros;
    for (double p : cs.points) zeros.push_back(wrap01(p - gen.omega));
    auto dist_to_zeros = [&](double x) {
        double d = 1.0;
        for (double z : zeros) d = std::min(d, circle_dist(x, z));
        return d;
    };
    r.C1 = std::numeric_limits<double>::infinity();
    for (double d : cs.derivs) r.C1 = std::min(r.C1, std::abs(d));
    for (std::size_t i = 0; i < kSupGrid; ++i) {
        const double x = double(i) / kSupGrid;
        if (dist_to_zeros(x) > delta) r.C1 = std::min(r.C1, std::abs(gen.b(x)) / delta);
    }
    const double thr = 0.5 * r.C1 * delta * gen.g;
    r.worstLambdaRatio = r.worstCotRatio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = (double(i) + 0.5) / double(samples);
        bool ok = true;
        for (int j = 0; j < 4; ++j)
            if (dist_to_zeros(x - double(j) * gen.omega) < 0.5 * delta) ok = false;
        if (!ok) continue;
        ++r.tested;
        const RZStep s = functional_step(gen, x);
        const double lr = s.lambda / (thr * thr), cr = abs_cot(s.Phi) / thr;
        r.worstLambdaRatio = std::min(r.worstLambdaRatio, lr);
        r.worstCotRatio = std::min(r.worstCotRatio, cr);
        if (lr < 1.0) ++r.lambdaMisses;
        if (cr < 1.0) ++r.cotMisses;
    }
    return r;
}

}  // namespace cfh
