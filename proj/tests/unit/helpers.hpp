#pragma once

#include <cmath>
#include <random>

#include "cfhyp/linalg2.hpp"

namespace testutil {

inline double frob_diff(const cfh::Mat2& a, const cfh::Mat2& b) { return (a - b).frobenius(); }

inline std::mt19937_64& rng(unsigned long long seed) {
    thread_local std::mt19937_64 gen;
    gen.seed(seed);
    return gen;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline cfh::Mat2 transfer(double b, double a = -1.0) { return {b, a, 1.0, 0.0}; }

}  // namespace testutil
