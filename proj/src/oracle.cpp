#include "cfhyp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfhyp/error.hpp"

namespace cfh::oracle {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::converging: return "converging";
        case Verdict::oscillating: return "oscillating";
        case Verdict::divergingToInfinity: return "divergingToInfinity";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

double chordal(double a, double b) {
    const bool ia = std::isinf(a), ib = std::isinf(b);
    if (ia && ib) return 0.0;
    if (ia) return 1.0 / std::sqrt(1.0 + b * b);
    if (ib) return 1.0 / std::sqrt(1.0 + a * a);
    return std::abs(a - b) / (std::sqrt(1.0 + a * a) * std::sqrt(1.0 + b * b));
}

ConvergenceMeasurement direct_limit(const NumericCF& cf, std::size_t horizon, double tolerance) {
    if (horizon < 16) throw Error(ErrorKind::InvalidArgument, "direct_limit: horizon must be >= 16");
    if (cf.horizon() < horizon) throw Error(ErrorKind::InvalidArgument, "direct_limit: fraction shorter than horizon");
    const auto conv = convergents(cf, horizon);
    std::vector<double> f(conv.size());
    for (std::size_t i = 0; i < conv.size(); ++i) f[i] = conv[i].value();

    ConvergenceMeasurement m;
    m.horizon = horizon;
    m.tolerance = tolerance;
    m.lastValue = f[horizon];
    m.lastInfinite = std::isinf(m.lastValue);

    const std::size_t from = horizon - horizon / 4;
    bool anyInf = false;
    for (std::size_t n = from; n <= horizon; ++n) anyInf = anyInf || std::isinf(f[n]);
    // plain differences unless an infinite value forces the chordal metric
    std::vector<double> diffs;
    std::vector<double> chord;
    for (std::size_t n = from; n < horizon; ++n) {
        diffs.push_back(anyInf ? chordal(f[n + 1], f[n]) : std::abs(f[n + 1] - f[n]));
        chord.push_back(chordal(f[n + 1], f[n]));
    }
    m.cauchyTail = *std::max_element(diffs.begin(), diffs.end());

    if (!m.lastInfinite && m.cauchyTail <= tolerance) {
        m.verdict = Verdict::converging;
        return m;
    }
    bool growing = true;
    for (std::size_t n = from; n < horizon; ++n)
        if (!(std::abs(f[n + 1]) >= std::abs(f[n]))) growing = false;
    if (m.lastInfinite || (growing && std::abs(m.lastValue) > 1.0 / tolerance)) {
        m.verdict = Verdict::divergingToInfinity;
        return m;
    }
    const std::size_t half = chord.size() / 2;
    const double early = *std::max_element(chord.begin(), chord.begin() + std::max<std::size_t>(half, 1));
    const double late = *std::max_element(chord.begin() + half, chord.end());
    m.verdict = (late > 1e-3 && late >= 0.8 * early) ? Verdict::oscillating : Verdict::inconclusive;
    return m;
}

double lyapunov_estimate(const std::vector<RZStep>& chain, std::size_t n) {
    if (n < 100) throw Error(ErrorKind::InvalidArgument, "lyapunov_estimate: n must be >= 100");
    if (chain.size() < n) throw Error(ErrorKind::InvalidArgument, "lyapunov_estimate: chain shorter than n");
    return chain_product(chain, n).log_norm() / double(n);
}

double lyapunov_estimate(const NumericCF& cf, std::size_t n) {
    if (n < 100) throw Error(ErrorKind::InvalidArgument, "lyapunov_estimate: n must be >= 100");
    if (cf.horizon() < n) throw Error(ErrorKind::InvalidArgument, "lyapunov_estimate: fraction shorter than n");
    LogScaledMat2 acc;
    for (std::size_t j = 1; j <= n; ++j) acc = mul_scaled(acc, transfer_matrix(cf.b_at(j), cf.a_at(j)));
    return acc.log_norm() / double(n);
}

GridLyapunov lyapunov_functional(const FunctionalGenerator& gen, std::size_t n, std::size_t gridSize) {
    if (gridSize == 0) throw Error(ErrorKind::InvalidArgument, "lyapunov_functional: empty grid");
    GridLyapunov r;
    for (std::size_t i = 0; i < gridSize; ++i) {
        const double x = double(i) / double(gridSize);
        r.xs.push_back(x);
        r.values.push_back(lyapunov_estimate(sample_chain(gen, x, n), n));
    }
    r.min = *std::min_element(r.values.begin(), r.values.end());
    r.max = *std::max_element(r.values.begin(), r.values.end());
    r.mean = std::accumulate(r.values.begin(), r.values.end(), 0.0) / double(gridSize);
    return r;
}

double line_angle(const Vec2& a, const Vec2& b) {
    const double c = std::abs(a.x * b.x + a.y * b.y) / (std::hypot(a.x, a.y) * std::hypot(b.x, b.y));
    const double s = std::abs(a.x * b.y - a.y * b.x) / (std::hypot(a.x, a.y) * std::hypot(b.x, b.y));
    return std::atan2(s, c);
}

namespace {

Vec2 normalized(Vec2 v) {
    const double h = std::hypot(v.x, v.y);
    return {v.x / h, v.y / h};
}

}  // namespace

BundleEstimate bundle_estimate(const FunctionalGenerator& gen, double x, std::size_t n) {
    auto bj = [&](long long j) { return gen.g * gen.b(x - double(j - 1) * gen.omega); };
    BundleEstimate be;
    be.b0 = bj(0);

    // growth along the forward chain decides whether a splitting exists at all
    LogScaledMat2 fwd;
    for (std::size_t j = 1; j <= n; ++j) fwd = mul_scaled(fwd, transfer_matrix(bj((long long)j)));
    be.lyapunov = fwd.log_norm() / double(n);
    // bounded products give rate ~ log C / n, so also ask for real total growth
    if (!(be.lyapunov > 1e-3) || !(fwd.log_norm() > 3.0))
        throw Error(ErrorKind::NoSplitting, "growth rate " + std::to_string(be.lyapunov) + " is not positive");

    // unstable line at time 1: push a generic vector through A_{-n+1}, ..., A_0
    Vec2 u{0.6, 0.8};
    for (long long j = -(long long)n + 1; j <= 0; ++j) u = normalized(transfer_matrix(bj(j)) * u);
    // stable line at time 1: pull a generic vector back through A_n^{-1}, ..., A_1^{-1}
    Vec2 s{0.6, 0.8};
    for (long long j = (long long)n; j >= 1; --j) {
        const Mat2 A = transfer_matrix(bj(j));
        s = normalized((1.0 / A.det()) * A.adjugate() * s);
    }
    be.unstableDir = u;
    be.stableDir = s;

    // e_k = c_k u + d_k s
    const double det = u.x * s.y - u.y * s.x;
    if (std::abs(det) < 1e-14) throw Error(ErrorKind::NoSplitting, "stable and unstable lines coincide");
    be.c1 = s.y / det;
    be.c2 = -s.x / det;
    if (std::abs(be.c1) < 1e-14) {
        be.limitInfinite = true;
        be.ratio = be.limit = std::numeric_limits<double>::infinity();
    } else {
        be.ratio = be.c2 / be.c1;
        be.limit = be.b0 + be.ratio;
    }
    return be;
}

CollisionGraph brute_force_collisions(const std::vector<double>& points, double omega, double delta,
                                      std::size_t horizon) {
    if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (2.0 * delta >= circle_dist(points[i], points[j]))
                throw Error(ErrorKind::DeltaTooLarge, "neighborhoods overlap");
    CollisionGraph gr;
    gr.delta = delta;
    gr.horizon = horizon;
    gr.Tdelta.assign(n, 0);
    gr.Rdelta.assign(n, 0);
    gr.hitDistance.assign(n, 0.0);
    gr.primary.assign(n, false);
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t k = 1;
        for (; k <= horizon; ++k) {
            const double y = rotate(points[p], 2.0 * omega, (long long)k);
            std::vector<std::size_t> hits;
            for (std::size_t q = 0; q < n; ++q)
                if (circle_dist(y, points[q]) <= delta) hits.push_back(q);
            if (hits.size() > 1) throw Error(ErrorKind::DeltaTooLarge, "ambiguous hit");
            if (hits.size() == 1) {
                gr.Tdelta[p] = k;
                gr.Rdelta[p] = hits[0];
                gr.hitDistance[p] = circle_dist(y, points[hits[0]]);
                gr.primary[p] = hits[0] == p;
                break;
            }
        }
        if (k > horizon) throw Error(ErrorKind::HorizonExceeded, "no collision within horizon");
    }
    // classes: follow successors from every point, keep each cycle once
    std::vector<std::size_t> hitCount(n, 0);
    for (std::size_t r : gr.Rdelta) ++hitCount[r];
    for (std::size_t c : hitCount)
        if (c != 1) throw Error(ErrorKind::NonCyclicCollision, "successor map is not a permutation");
    std::vector<std::vector<std::size_t>> cycles;
    std::vector<bool> seen(n, false);
    for (std::size_t p = 0; p < n; ++p) {
        if (seen[p]) continue;
        std::vector<std::size_t> cyc;
        for (std::size_t q = p; !seen[q]; q = gr.Rdelta[q]) {
            seen[q] = true;
            cyc.push_back(q);
        }
        // rotate to start at the largest collision time, smallest index on ties
        std::size_t best = 0;
        for (std::size_t i = 1; i < cyc.size(); ++i) {
            const std::size_t a = cyc[i], b = cyc[best];
            if (gr.Tdelta[a] > gr.Tdelta[b] || (gr.Tdelta[a] == gr.Tdelta[b] && a < b)) best = i;
        }
        std::rotate(cyc.begin(), cyc.begin() + long(best), cyc.end());
        cycles.push_back(std::move(cyc));
    }
    std::sort(cycles.begin(), cycles.end(), [&](const auto& a, const auto& b) {
        if (gr.Tdelta[a[0]] != gr.Tdelta[b[0]]) return gr.Tdelta[a[0]] > gr.Tdelta[b[0]];
        return a[0] < b[0];
    });
    for (auto& c : cycles) {
        gr.periods.push_back(c.size());
        gr.classes.push_back(std::move(c));
    }
    return gr;
}

}  // namespace cfh::oracle
