#pragma once

// Problem specs, reports and series for the command-line front end.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfhyp/contfrac.hpp"
#include "cfhyp/criteria.hpp"
#include "cfhyp/rotation.hpp"

namespace cfh::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct NumericSpec {
    double b0 = 0.0;
    std::string generator = "constant";  // constant | list | periodic | scaled
    std::vector<double> a;               // constant: a[0]; list/periodic: per element or pattern
    std::vector<double> b;
    std::vector<double> bHat;  // scaled pattern
    std::vector<std::size_t> tSeq;
    double g = 1.0;
};

struct FunctionalSpec {
    bool trig = true;
    double c0 = 0.0;
    std::vector<double> cosC, sinC, samples;
    double omega = 0.5;
    double g = 1.0;
};

struct Theorem3Spec {
    double Clambda = 0.0, delta = 0.0, Glambda = 0.0;
    std::size_t N0 = 0, K0 = 0;
    std::vector<std::size_t> mSeq;
};

struct AnalysisSpec {
    std::size_t horizon = 0;  // 0: default for the kind
    std::size_t collisionHorizon = 10000;
    double delta = 0.0;  // 0: automatic
    std::size_t gridSize = 64;
    double tolerance = 1e-9;
    double margin = 1e-9;
    std::optional<Theorem3Spec> theorem3;
    std::optional<std::vector<double>> gSweep;
};

struct ProblemSpec {
    std::string kind = "numeric";
    NumericSpec numeric;
    FunctionalSpec functional;
    AnalysisSpec analysis;
};

// Throws Error(Schema) naming the offending field.
ProblemSpec parse_spec(const Json& j);
Json spec_to_json(const ProblemSpec& s);

// Horizon after kind defaults.
std::size_t effective_horizon(const ProblemSpec& s);

NumericCF build_numeric(const ProblemSpec& s);
FunctionalGenerator build_functional(const ProblemSpec& s);

Json analyze(const ProblemSpec& s);
// {schemaVersion, reports, summary}
Json sweep(const ProblemSpec& s);

// CSV text with header; what = convergents | lyapunov | phi-angles
std::string series(const ProblemSpec& s, const std::string& what, std::size_t n, std::size_t grid);

// Deterministic text: fixed key order, doubles with 17 significant digits, non-finite as null.
std::string dump(const Json& j, int indent = 2);

}  // namespace cfh::cli
