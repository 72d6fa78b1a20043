#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cfhyp/cocycle.hpp"
#include "cfhyp/error.hpp"
#include "cfhyp/oracle.hpp"

namespace cfh::cli {

namespace {

[[noreturn]] void schema(const std::string& field, const std::string& msg) {
    throw Error(ErrorKind::Schema, "field '" + field + "': " + msg);
}

void only_keys(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) schema(path.empty() ? "<root>" : path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) schema(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

double number(const Json& j, const std::string& path, const char* key, std::optional<double> dflt = {}) {
    if (!j.contains(key)) {
        if (dflt) return *dflt;
        schema(join(path, key), "missing");
    }
    const auto& v = j.at(key);
    if (!v.is_number()) schema(join(path, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) schema(join(path, key), "not finite");
    return d;
}

std::size_t count(const Json& j, const std::string& path, const char* key, std::size_t dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) schema(join(path, key), "expected a non-negative integer");
    return v.get<std::size_t>();
}

std::vector<double> numbers(const Json& j, const std::string& path, const char* key, bool required = false) {
    if (!j.contains(key)) {
        if (required) schema(join(path, key), "missing");
        return {};
    }
    const auto& v = j.at(key);
    if (!v.is_array()) schema(join(path, key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
            schema(join(path, key) + "[" + std::to_string(i) + "]", "expected a finite number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

std::vector<std::size_t> indices(const Json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) return {};
    const auto& v = j.at(key);
    if (!v.is_array()) schema(join(path, key), "expected an array of indices");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer() || v[i].get<long long>() < 1)
            schema(join(path, key) + "[" + std::to_string(i) + "]", "expected a positive integer");
        out.push_back(v[i].get<std::size_t>());
    }
    return out;
}

NumericSpec parse_numeric(const Json& j) {
    const std::string p = "numeric";
    only_keys(j, p, {"b0", "generator", "a", "b", "bHat", "tSeq", "g"});
    NumericSpec n;
    n.b0 = number(j, p, "b0", 0.0);
    if (j.contains("generator")) {
        if (!j["generator"].is_string()) schema("numeric.generator", "expected a string");
        n.generator = j["generator"].get<std::string>();
    }
    if (n.generator == "constant") {
        n.a = {number(j, p, "a", -1.0)};
        n.b = {number(j, p, "b")};
    } else if (n.generator == "list" || n.generator == "periodic") {
        n.b = numbers(j, p, "b", true);
        if (n.b.empty()) schema("numeric.b", "must not be empty");
        if (j.contains("a") && j["a"].is_number()) {
            n.a = std::vector<double>(n.b.size(), number(j, p, "a"));
        } else {
            n.a = numbers(j, p, "a");
            if (n.a.empty()) n.a.assign(n.b.size(), -1.0);
        }
        if (n.a.size() != n.b.size()) schema("numeric.a", "length differs from numeric.b");
    } else if (n.generator == "scaled") {
        n.bHat = numbers(j, p, "bHat", true);
        if (n.bHat.empty()) schema("numeric.bHat", "must not be empty");
        n.tSeq = indices(j, p, "tSeq");
        n.g = number(j, p, "g");
        if (!(n.g > 0.0)) schema("numeric.g", "must be positive");
    } else {
        schema("numeric.generator", "expected constant, list, periodic or scaled");
    }
    for (double a : n.a)
        if (a == 0.0) schema("numeric.a", "partial numerators must be nonzero");
    return n;
}

FunctionalSpec parse_functional(const Json& j) {
    const std::string p = "functional";
    only_keys(j, p, {"b", "omega", "g"});
    FunctionalSpec f;
    if (!j.contains("b")) schema("functional.b", "missing");
    const auto& b = j["b"];
    if (b.is_object() && b.contains("samples")) {
        only_keys(b, "functional.b", {"samples"});
        f.trig = false;
        f.samples = numbers(b, "functional.b", "samples", true);
        if (f.samples.size() < 4) schema("functional.b.samples", "need at least 4 samples");
    } else {
        only_keys(b, "functional.b", {"const", "cos", "sin"});
        f.c0 = number(b, "functional.b", "const", 0.0);
        f.cosC = numbers(b, "functional.b", "cos");
        f.sinC = numbers(b, "functional.b", "sin");
    }
    f.omega = number(j, p, "omega");
    if (!(f.omega > 0.0 && f.omega < 1.0)) schema("functional.omega", "must lie in (0, 1)");
    f.g = number(j, p, "g", 1.0);
    if (!(f.g >= 1.0)) schema("functional.g", "must be >= 1");
    return f;
}

AnalysisSpec parse_analysis(const Json& j) {
    const std::string p = "analysis";
    only_keys(j, p, {"horizon", "collisionHorizon", "delta", "gridSize", "tolerance", "margin", "theorem3", "gSweep"});
    AnalysisSpec a;
    a.horizon = count(j, p, "horizon", 0);
    a.collisionHorizon = count(j, p, "collisionHorizon", 10000);
    if (a.collisionHorizon == 0) schema("analysis.collisionHorizon", "must be positive");
    a.delta = number(j, p, "delta", 0.0);
    if (a.delta < 0.0) schema("analysis.delta", "must be >= 0");
    a.gridSize = count(j, p, "gridSize", 64);
    if (a.gridSize == 0) schema("analysis.gridSize", "must be positive");
    a.tolerance = number(j, p, "tolerance", 1e-9);
    if (!(a.tolerance > 0.0)) schema("analysis.tolerance", "must be positive");
    a.margin = number(j, p, "margin", 1e-9);
    if (a.margin < 0.0) schema("analysis.margin", "must be >= 0");
    if (j.contains("theorem3")) {
        const auto& t = j["theorem3"];
        const std::string tp = "analysis.theorem3";
        only_keys(t, tp, {"Clambda", "delta", "Glambda", "N0", "K0", "mSeq"});
        Theorem3Spec s;
        s.Clambda = number(t, tp, "Clambda");
        s.delta = number(t, tp, "delta");
        s.Glambda = number(t, tp, "Glambda");
        s.N0 = count(t, tp, "N0", 0);
        s.K0 = count(t, tp, "K0", 0);
        s.mSeq = indices(t, tp, "mSeq");
        a.theorem3 = s;
    }
    if (j.contains("gSweep")) {
        const auto& s = j["gSweep"];
        std::vector<double> gs;
        if (s.is_array()) {
            gs = numbers(j, p, "gSweep");
        } else if (s.is_object()) {
            const std::string sp = "analysis.gSweep";
            only_keys(s, sp, {"from", "to", "count", "spacing"});
            const double lo = number(s, sp, "from"), hi = number(s, sp, "to");
            const std::size_t n = count(s, sp, "count", 0);
            std::string spacing = "log";
            if (s.contains("spacing")) {
                if (!s["spacing"].is_string()) schema(sp + ".spacing", "expected log or linear");
                spacing = s["spacing"].get<std::string>();
            }
            if (spacing != "log" && spacing != "linear") schema(sp + ".spacing", "expected log or linear");
            if (!(lo >= 1.0) || !(hi >= lo)) schema(sp + ".from", "need 1 <= from <= to");
            for (std::size_t i = 0; i < n; ++i) {
                const double t = n == 1 ? 0.0 : double(i) / double(n - 1);
                gs.push_back(spacing == "log" ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
            }
        } else {
            schema("analysis.gSweep", "expected an array or {from, to, count, spacing}");
        }
        for (std::size_t i = 0; i < gs.size(); ++i)
            if (!(gs[i] >= 1.0)) schema("analysis.gSweep[" + std::to_string(i) + "]", "g must be >= 1");
        a.gSweep = gs;
    }
    return a;
}

Json h1_json(const H1Certificate& c) {
    return Json{{"valid", c.valid},
                {"scope", to_string(c.scope)},
                {"hStarSq", c.hStarSq},
                {"Lambda0", c.Lambda0},
                {"gridSize", c.gridSize},
                {"lipschitzMargin", c.lipschitzMargin},
                {"argmin", c.argmin},
                {"worpitskyTrigger", c.worpitskyTrigger},
                {"alternationTrigger", c.alternationTrigger},
                {"tolerance", c.tolerance}};
}

Json h2_json(const H2Certificate& c) {
    Json w = c.witness ? Json(*c.witness) : Json(nullptr);
    return Json{{"holds", c.holds},
                {"Lambda0", c.Lambda0},
                {"Clambda", c.Clambda},
                {"delta", c.delta},
                {"ChatLambda", c.ChatLambda},
                {"conditionsOk", c.conditionsOk},
                {"boundConstant", c.boundConstant},
                {"boundRate", c.boundRate},
                {"witness", w},
                {"horizon", c.horizon},
                {"autoSelected", c.autoSelected},
                {"crossCheckOk", c.crossCheckOk},
                {"worstLogSlack", c.worstLogSlack},
                {"certifiedLogRate", c.certifiedLogRate}};
}

Json theorem3_json(const Theorem3Certificate& t) {
    Json blocks = Json::array();
    for (const auto& b : t.blocks)
        blocks.push_back({{"n", b.n},
                          {"l", b.l},
                          {"j", b.j},
                          {"nNext", b.nNext},
                          {"conditions", b.conditions},
                          {"cond7Printed", b.cond7Printed},
                          {"cond7Cot", b.cond7Cot},
                          {"uBound", b.uBound},
                          {"interval", b.interval}});
    return Json{{"overall", t.overall},
                {"overallPrinted", t.overallPrinted},
                {"degenerate", t.degenerate},
                {"Lambda0Min", t.Lambda0Min},
                {"Lambda0Max", t.Lambda0Max},
                {"Clambda", t.Clambda},
                {"Glambda", t.Glambda},
                {"delta", t.delta},
                {"N0", t.N0},
                {"K0", t.K0},
                {"mSeq", t.mSeq},
                {"constantsOk", t.constantsOk},
                {"offViolationOk", t.offViolationOk},
                {"offViolationWitness", t.offViolationWitness ? Json(*t.offViolationWitness) : Json(nullptr)},
                {"sequencesOk", t.sequencesOk},
                {"failingK", t.failingK ? Json(*t.failingK) : Json(nullptr)},
                {"failingCondition", t.failingCondition ? Json(*t.failingCondition) : Json(nullptr)},
                {"blocks", blocks},
                {"h2", t.h2 ? h2_json(*t.h2) : Json(nullptr)},
                {"certifiedLogRate", t.certifiedLogRate},
                {"measuredLogRate", t.measuredLogRate},
                {"crossCheckOk", t.crossCheckOk}};
}

Json corollary2_json(const Corollary2Params& c) {
    return Json{{"holds", c.holds},
                {"g", c.g},
                {"C1", c.C1},
                {"C2", c.C2},
                {"alpha", c.alpha},
                {"tSeq", c.tSeq},
                {"mSeq", c.mSeq},
                {"K0", c.K0},
                {"N0", c.N0},
                {"conditions", c.conditions},
                {"failingCondition", c.failingCondition ? Json(*c.failingCondition) : Json(nullptr)},
                {"witness", c.witness ? Json(*c.witness) : Json(nullptr)},
                {"h1Ok", c.h1Ok},
                {"h2OffOk", c.h2OffOk},
                {"constantsOk", c.constantsOk},
                {"Lambda0Min", c.Lambda0Min},
                {"Clambda", c.Clambda},
                {"delta", c.delta},
                {"certifiedLogRate", c.certifiedLogRate},
                {"measuredLogRate", c.measuredLogRate},
                {"crossCheckOk", c.crossCheckOk}};
}

Json stage_error(const std::string& stage, const std::exception& e) {
    return Json{{"stage", stage}, {"error", e.what()}};
}

Json critical_json(const CriticalSet& cs) {
    return Json{{"count", cs.points.size()}, {"points", cs.points}, {"derivs", cs.derivs}, {"delta", cs.delta}};
}

Json graph_json(const CollisionGraph& g) {
    std::vector<bool> primary(g.primary.begin(), g.primary.end());
    return Json{{"delta", g.delta},
                {"horizon", g.horizon},
                {"Tdelta", g.Tdelta},
                {"Rdelta", g.Rdelta},
                {"hitDistance", g.hitDistance},
                {"primary", primary},
                {"M", g.classes.size()},
                {"classes", g.classes},
                {"periods", g.periods}};
}

Json analysis_json(const ClassAnalysis& a) {
    Json classes = Json::array();
    for (const auto& cls : a.classes) {
        Json c = Json::array();
        for (const auto& p : cls)
            c.push_back({{"point", p.point},
                         {"T", p.T},
                         {"x0", p.x0},
                         {"xStar", p.xStar},
                         {"prediction", p.prediction},
                         {"deviation", p.deviation},
                         {"deviationDoubled", p.deviationDoubled < 0 ? Json(nullptr) : Json(p.deviationDoubled)},
                         {"derivative", p.derivative},
                         {"rMin", p.rMin},
                         {"rMax", p.rMax}});
        classes.push_back(c);
    }
    return Json{{"g", a.g}, {"delta", a.delta}, {"C2", a.C2}, {"classes", classes}, {"offsets", a.offsets}};
}

Json h4_json(const H4Verdict& v) {
    return Json{{"class", v.cls},
                {"holds", v.holds},
                {"branch", v.branch},
                {"evenPeriod", v.evenPeriod},
                {"cond1", v.cond1},
                {"cond1Witness", v.cond1Witness},
                {"branch21", {v.branch1a, v.branch1b}},
                {"branch22", {v.branch2a, v.branch2b}},
                {"bounds21", v.bounds1},
                {"margins21", v.margins1},
                {"bounds22", v.bounds2},
                {"margins22", v.margins2}};
}

Json lemma7_json(const Lemma7Verdict& v) {
    return Json{{"class", v.cls},
                {"k", v.k},
                {"holds", v.holds},
                {"longerFirst", v.longerFirst},
                {"alternating", v.alternating},
                {"offsetOk", v.offsetOk},
                {"offset", v.offset},
                {"bound", v.bound},
                {"margin", v.margin},
                {"doublePeriod", v.doublePeriod},
                {"sampled", v.sampled},
                {"samples", v.samples},
                {"measuredC2", v.measuredC2},
                {"cotLowerBound", v.cotLowerBound},
                {"minAbsCot", v.minAbsCot}};
}

Json sens_json(const SensitivityReport& s) {
    return Json{{"tauMax", s.tauMax},
                {"rMax", s.rMax},
                {"DeltaMin", s.DeltaMin},
                {"logDeltaMin", s.logDeltaMin},
                {"gWindow", s.gWindow}};
}

Json grid_h2_json(const GridH2& h) {
    return Json{{"holds", h.holds},
                {"Lambda0", h.Lambda0},
                {"minAbsCot", h.minAbsCot},
                {"gridSize", h.gridSize},
                {"Clambda", h.Clambda},
                {"delta", h.delta},
                {"certifiedLogRate", h.certifiedLogRate}};
}

template <class T, class F>
Json opt_json(const std::optional<T>& o, F f) {
    return o ? f(*o) : Json(nullptr);
}

Json oracle_numeric(const NumericCF& cf, const MinusOneForm& mo, std::size_t horizon, double tol) {
    Json o = Json::object();
    try {
        const auto m = oracle::direct_limit(cf, horizon, tol);
        o["directLimit"] = {{"verdict", oracle::to_string(m.verdict)},
                            {"lastValue", m.lastValue},
                            {"lastInfinite", m.lastInfinite},
                            {"cauchyTail", m.cauchyTail},
                            {"horizon", m.horizon},
                            {"tolerance", m.tolerance}};
    } catch (const std::exception& e) {
        o["directLimit"] = stage_error("direct_limit", e);
    }
    if (horizon >= 100)
        o["lyapunov"] = oracle::lyapunov_estimate(mo.cf, horizon);
    else
        o["lyapunov"] = nullptr;
    return o;
}

Json provenance(const std::string& claim, const std::string& cert, bool internalOk, const std::string& oracleRef,
                bool oracleOk) {
    return Json{{"claim", claim},
                {"certificate", cert},
                {"certificateCrossCheckOk", internalOk},
                {"oracle", oracleRef},
                {"oracleAgrees", oracleOk}};
}

Json overall(const Json& basis, const std::string& oracleVerdict) {
    return Json{{"verdict", basis.empty() ? "uncertified" : "certified"},
                {"oracleVerdict", oracleVerdict},
                {"basis", basis}};
}

Json analyze_numeric(const ProblemSpec& s) {
    const std::size_t horizon = effective_horizon(s);
    CheckOptions opt;
    opt.margin = s.analysis.margin;
    const NumericCF cf = build_numeric(s);
    Json r;
    r["schemaVersion"] = kSchemaVersion;
    r["kind"] = "numeric";
    r["problem"] = spec_to_json(s);
    r["effective"] = {{"horizon", horizon}, {"tolerance", s.analysis.tolerance}, {"margin", opt.margin}};

    Json classical = Json::array();
    for (const auto& v : classical_tests(cf, horizon))
        classical.push_back({{"test", to_string(v.test)},
                             {"holdsUpToHorizon", v.holdsUpToHorizon},
                             {"horizon", v.horizon},
                             {"witness", v.witness ? Json(*v.witness) : Json(nullptr)},
                             {"partialSum", v.partialSum ? Json(*v.partialSum) : Json(nullptr)},
                             {"note", v.note}});
    r["classical"] = classical;

    const MinusOneForm mo = to_minus_one_form(cf);
    const Json orc = oracle_numeric(cf, mo, horizon, s.analysis.tolerance);
    const bool oracleConverges = orc["directLimit"].contains("verdict") && orc["directLimit"]["verdict"] == "converging";
    const std::string oracleVerdict =
        orc["directLimit"].contains("verdict") ? orc["directLimit"]["verdict"].get<std::string>() : "error";

    Json certs = Json::object();
    Json basis = Json::array();
    for (const auto& v : classical)
        if (v["holdsUpToHorizon"].get<bool>() && v["test"] != "seidelStern")
            basis.push_back(provenance("converges", "classical." + v["test"].get<std::string>(), true,
                                       "oracle.directLimit", oracleConverges));

    std::optional<H1Certificate> h1;
    try {
        h1 = check_h1(mo.cf.b, opt);
        certs["h1"] = h1_json(*h1);
    } catch (const std::exception& e) {
        certs["h1"] = stage_error("h1", e);
    }
    std::vector<RZStep> chain;
    std::optional<H2Certificate> h2;
    if (h1 && h1->valid) {
        try {
            chain = build_rz_chain(pair_svds(mo.cf));
            h2 = check_h2_auto(chain, h1->Lambda0, opt);
            certs["h2"] = h2_json(*h2);
            if (h2->holds)
                basis.push_back(provenance("uniformly hyperbolic, converges", "certificates.h2", h2->crossCheckOk,
                                           "oracle.directLimit", oracleConverges));
        } catch (const std::exception& e) {
            certs["h2"] = stage_error("h2", e);
        }
    } else {
        certs["h2"] = Json{{"skipped", "h1 not valid"}};
    }

    if (h2 && (!h2->holds || s.analysis.theorem3)) {
        try {
            Theorem3Params p;
            std::vector<std::size_t> mSeq;
            if (s.analysis.theorem3) {
                const auto& t = *s.analysis.theorem3;
                p.Clambda = t.Clambda;
                p.delta = t.delta;
                p.Glambda = t.Glambda;
                p.N0 = t.N0;
                p.K0 = t.K0;
                mSeq = t.mSeq;
            } else {
                p.Clambda = h2->Clambda;
                p.delta = h2->delta;
                p.Glambda = std::sqrt(h1->Lambda0);
            }
            const auto t3 = theorem3_certify(chain, mSeq, p, opt, mSeq.empty());
            certs["theorem3"] = theorem3_json(t3);
            if (t3.overall)
                basis.push_back(provenance("uniformly hyperbolic, converges", "certificates.theorem3", t3.crossCheckOk,
                                           "oracle.directLimit", oracleConverges));
        } catch (const std::exception& e) {
            certs["theorem3"] = stage_error("theorem3", e);
        }
    } else {
        certs["theorem3"] = Json{{"skipped", h2 ? "h2 holds" : "h2 unavailable"}};
    }

    if (s.numeric.generator == "scaled") {
        try {
            std::vector<double> bHat(horizon);
            for (std::size_t j = 0; j < horizon; ++j) bHat[j] = s.numeric.bHat[j % s.numeric.bHat.size()];
            const auto c2 = corollary2_certify(bHat, s.numeric.tSeq, s.numeric.g, {}, opt);
            certs["corollary2"] = corollary2_json(c2);
            if (c2.holds)
                basis.push_back(provenance("uniformly hyperbolic, converges", "certificates.corollary2",
                                           c2.crossCheckOk, "oracle.directLimit", oracleConverges));
        } catch (const std::exception& e) {
            certs["corollary2"] = stage_error("corollary2", e);
        }
    }
    r["certificates"] = certs;
    r["oracle"] = orc;
    r["overall"] = overall(basis, oracleVerdict);
    return r;
}

Json functional_oracle(const FunctionalGenerator& gen, std::size_t n, std::size_t grid, double tol) {
    Json o;
    double sup = 0.0;
    std::size_t converging = 0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double x = double(i) / double(grid);
        const auto cf = sample_chain(gen, x, n);
        const auto conv = convergents(cf, n);
        sup = std::max(sup, oracle::chordal(conv[n].value(), conv[n - n / 4].value()));
        if (n >= 16 && oracle::direct_limit(cf, n, tol).verdict == oracle::Verdict::converging) ++converging;
    }
    o["steps"] = n;
    o["gridSize"] = grid;
    o["supChordal"] = sup;
    o["supChordalCompare"] = {n - n / 4, n};
    o["convergingPoints"] = converging;
    if (n >= 100) {
        const auto ly = oracle::lyapunov_functional(gen, n, grid);
        o["lyapunov"] = {{"min", ly.min}, {"mean", ly.mean}, {"max", ly.max}};
    } else {
        o["lyapunov"] = nullptr;
    }
    return o;
}

Json analyze_functional(const ProblemSpec& s, const FunctionalGenerator& gen) {
    const std::size_t horizon = effective_horizon(s);
    Json r;
    r["schemaVersion"] = kSchemaVersion;
    r["kind"] = "functional";
    r["problem"] = spec_to_json(s);
    r["effective"] = {{"horizon", horizon},
                      {"collisionHorizon", s.analysis.collisionHorizon},
                      {"g", gen.g},
                      {"delta", s.analysis.delta},
                      {"gridSize", s.analysis.gridSize},
                      {"tolerance", s.analysis.tolerance}};
    const auto t = theorem4_certify(gen, s.analysis.delta, s.analysis.collisionHorizon);
    Json c;
    c["path"] = t.degenerate ? "corollary1" : "theorem4";
    c["pass"] = t.pass;
    c["failingStage"] = t.failingStage;
    c["error"] = t.error;
    c["criticalSet"] = critical_json(t.critical);
    c["h1Circle"] = opt_json(t.h1Circle, h1_json);
    c["h1Difference"] = opt_json(t.h1Difference, h1_json);
    c["h2Grid"] = opt_json(t.h2Grid, grid_h2_json);
    c["collisionGraph"] = opt_json(t.graph, graph_json);
    c["refined"] = opt_json(t.analysis, analysis_json);
    Json h4 = Json::array();
    for (const auto& v : t.h4) h4.push_back(h4_json(v));
    c["h4"] = h4;
    Json l7 = Json::array();
    for (const auto& v : t.lemma7) l7.push_back(lemma7_json(v));
    c["lemma7"] = l7;
    c["sensitivity"] = opt_json(t.sens, sens_json);
    c["secondFamilyClear"] = t.secondFamilyClear;
    c["crossValidation"] = {{"done", t.crossChecked},
                            {"supChordalTail", t.supChordalTail},
                            {"minGrowthRate", t.minGrowthRate},
                            {"ok", t.crossCheckOk}};
    r["certificates"] = {{"functional", c}};

    Json orc;
    try {
        orc = functional_oracle(gen, horizon, s.analysis.gridSize, s.analysis.tolerance);
    } catch (const std::exception& e) {
        orc = stage_error("oracle", e);
    }
    r["oracle"] = orc;
    const bool oracleOk = orc.contains("convergingPoints") && orc["convergingPoints"] == s.analysis.gridSize;
    Json basis = Json::array();
    if (t.pass)
        basis.push_back(provenance("converges for every x", "certificates.functional", t.crossCheckOk, "oracle.convergingPoints",
                                   oracleOk));
    r["overall"] = overall(basis, oracleOk ? "converging" : "not converging on every grid point");
    return r;
}

void format(std::ostringstream& os, const Json& j, int indent, int depth) {
    const std::string pad = indent > 0 ? std::string(std::size_t(indent * (depth + 1)), ' ') : "";
    const std::string padEnd = indent > 0 ? std::string(std::size_t(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << '{' << nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ',' << nl;
                first = false;
                os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
                format(os, it.value(), indent, depth + 1);
            }
            os << nl << padEnd << '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << '[' << nl;
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ',' << nl;
                os << pad;
                format(os, j[i], indent, depth + 1);
            }
            os << nl << padEnd << ']';
            return;
        }
        case Json::value_t::number_float: {
            const double d = j.get<double>();
            if (!std::isfinite(d)) {
                os << "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", d);
            os << buf;
            return;
        }
        default:
            os << j.dump();
    }
}

}  // namespace

ProblemSpec parse_spec(const Json& j) {
    only_keys(j, "", {"schemaVersion", "kind", "numeric", "functional", "analysis"});
    if (!j.contains("schemaVersion")) schema("schemaVersion", "missing");
    if (!j["schemaVersion"].is_number_integer() || j["schemaVersion"].get<long long>() != kSchemaVersion)
        schema("schemaVersion", "expected 1");
    ProblemSpec s;
    if (!j.contains("kind") || !j["kind"].is_string()) schema("kind", "expected numeric or functional");
    s.kind = j["kind"].get<std::string>();
    if (s.kind == "numeric") {
        if (!j.contains("numeric")) schema("numeric", "missing");
        if (j.contains("functional")) schema("functional", "not allowed for a numeric problem");
        s.numeric = parse_numeric(j["numeric"]);
    } else if (s.kind == "functional") {
        if (!j.contains("functional")) schema("functional", "missing");
        if (j.contains("numeric")) schema("numeric", "not allowed for a functional problem");
        s.functional = parse_functional(j["functional"]);
    } else {
        schema("kind", "expected numeric or functional");
    }
    if (j.contains("analysis")) s.analysis = parse_analysis(j["analysis"]);
    if (s.kind == "numeric" && s.analysis.gSweep) schema("analysis.gSweep", "only for functional problems");
    if (s.kind == "functional" && s.analysis.theorem3) schema("analysis.theorem3", "only for numeric problems");
    if (s.kind == "numeric") {
        const std::size_t h = effective_horizon(s);
        if (s.numeric.generator == "list" && h > s.numeric.b.size())
            schema("analysis.horizon", "exceeds the length of numeric.b");
        if (h < 4) schema("analysis.horizon", "must be at least 4");
        for (std::size_t t : s.numeric.tSeq)
            if (t > h) schema("numeric.tSeq", "index beyond the horizon");
    }
    return s;
}

Json spec_to_json(const ProblemSpec& s) {
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["kind"] = s.kind;
    if (s.kind == "numeric") {
        const auto& n = s.numeric;
        Json nj;
        nj["b0"] = n.b0;
        nj["generator"] = n.generator;
        if (n.generator == "constant") {
            nj["a"] = n.a.at(0);
            nj["b"] = n.b.at(0);
        } else if (n.generator == "scaled") {
            nj["bHat"] = n.bHat;
            nj["tSeq"] = n.tSeq;
            nj["g"] = n.g;
        } else {
            nj["a"] = n.a;
            nj["b"] = n.b;
        }
        j["numeric"] = nj;
    } else {
        const auto& f = s.functional;
        Json b;
        if (f.trig)
            b = {{"const", f.c0}, {"cos", f.cosC}, {"sin", f.sinC}};
        else
            b = {{"samples", f.samples}};
        j["functional"] = {{"b", b}, {"omega", f.omega}, {"g", f.g}};
    }
    const auto& a = s.analysis;
    Json aj;
    aj["horizon"] = effective_horizon(s);
    aj["collisionHorizon"] = a.collisionHorizon;
    aj["delta"] = a.delta;
    aj["gridSize"] = a.gridSize;
    aj["tolerance"] = a.tolerance;
    aj["margin"] = a.margin;
    if (a.theorem3)
        aj["theorem3"] = {{"Clambda", a.theorem3->Clambda}, {"delta", a.theorem3->delta},
                          {"Glambda", a.theorem3->Glambda}, {"N0", a.theorem3->N0},
                          {"K0", a.theorem3->K0},           {"mSeq", a.theorem3->mSeq}};
    if (a.gSweep) aj["gSweep"] = *a.gSweep;
    j["analysis"] = aj;
    return j;
}

std::size_t effective_horizon(const ProblemSpec& s) {
    if (s.analysis.horizon) return s.analysis.horizon;
    if (s.kind == "functional") return 400;
    if (s.numeric.generator == "list") return s.numeric.b.size();
    return 200;
}

NumericCF build_numeric(const ProblemSpec& s) {
    const auto& n = s.numeric;
    const std::size_t h = effective_horizon(s);
    if (n.generator == "constant") return NumericCF::constant(n.b0, n.a.at(0), n.b.at(0), h);
    if (n.generator == "periodic") return NumericCF::periodic(n.b0, n.a, n.b, h);
    if (n.generator == "list") {
        NumericCF cf;
        cf.b0 = n.b0;
        cf.a.assign(n.a.begin(), n.a.begin() + long(h));
        cf.b.assign(n.b.begin(), n.b.begin() + long(h));
        return cf;
    }
    std::vector<double> b(h);
    for (std::size_t j = 0; j < h; ++j) b[j] = n.g * n.bHat[j % n.bHat.size()];
    return NumericCF::minus_one(n.b0, b);
}

FunctionalGenerator build_functional(const ProblemSpec& s) {
    const auto& f = s.functional;
    FunctionalGenerator gen;
    gen.b = f.trig ? PeriodicFn::trig(f.c0, f.cosC, f.sinC) : PeriodicFn::samples(f.samples);
    gen.omega = f.omega;
    gen.g = f.g;
    return gen;
}

Json analyze(const ProblemSpec& s) {
    if (s.kind == "numeric") return analyze_numeric(s);
    return analyze_functional(s, build_functional(s));
}

Json sweep(const ProblemSpec& s) {
    if (s.kind != "functional") schema("kind", "sweep needs a functional problem");
    if (!s.analysis.gSweep) schema("analysis.gSweep", "required for sweep");
    Json reports = Json::array();
    std::vector<std::pair<double, bool>> verdicts;
    Json sens = Json::array();
    for (double g : *s.analysis.gSweep) {
        FunctionalGenerator gen = build_functional(s);
        gen.g = g;
        Json r = analyze_functional(s, gen);
        const auto& c = r["certificates"]["functional"];
        const bool pass = c["pass"].get<bool>();
        verdicts.emplace_back(g, pass);
        if (pass) sens.push_back({{"g", g}, {"sensitivity", c["sensitivity"]}});
        reports.push_back(std::move(r));
    }
    // maximal runs of passing values in increasing g
    std::sort(verdicts.begin(), verdicts.end());
    Json intervals = Json::array();
    for (std::size_t i = 0; i < verdicts.size();) {
        if (!verdicts[i].second) {
            ++i;
            continue;
        }
        std::size_t k = i;
        while (k + 1 < verdicts.size() && verdicts[k + 1].second) ++k;
        intervals.push_back({verdicts[i].first, verdicts[k].first});
        i = k + 1;
    }
    std::size_t passes = 0;
    for (auto& v : verdicts) passes += v.second;
    Json out;
    out["schemaVersion"] = kSchemaVersion;
    out["reports"] = reports;
    out["summary"] = {{"tested", verdicts.size()}, {"passing", passes}, {"passIntervals", intervals},
                      {"sensitivity", sens}};
    return out;
}

std::string series(const ProblemSpec& s, const std::string& what, std::size_t n, std::size_t grid) {
    if (what != "convergents" && what != "lyapunov" && what != "phi-angles")
        throw Error(ErrorKind::InvalidArgument, "--what must be convergents, lyapunov or phi-angles");
    std::ostringstream os;
    char buf[64];
    auto num = [&](double d) {
        if (!std::isfinite(d)) return std::string(d > 0 ? "inf" : (d < 0 ? "-inf" : "nan"));
        std::snprintf(buf, sizeof buf, "%.17g", d);
        return std::string(buf);
    };
    if (s.kind == "numeric") {
        if (what == "phi-angles")
            os << "index,Phi,lambda\n";
        else
            os << "index,value\n";
        if (n == 0) return os.str();
        ProblemSpec t = s;
        t.analysis.horizon = what == "phi-angles" ? 2 * n + 2 : n;
        if (t.numeric.generator == "list" && t.analysis.horizon > t.numeric.b.size())
            throw Error(ErrorKind::InvalidArgument, "--n exceeds the length of numeric.b");
        const NumericCF cf = build_numeric(t);
        if (what == "convergents") {
            const auto conv = convergents(cf, n);
            for (std::size_t k = 1; k <= n; ++k) os << k << ',' << num(conv[k].value()) << '\n';
        } else if (what == "lyapunov") {
            const auto mo = to_minus_one_form(cf);
            LogScaledMat2 acc;
            for (std::size_t k = 1; k <= n; ++k) {
                acc = mul_scaled(acc, transfer_matrix(mo.cf.b_at(k), mo.cf.a_at(k)));
                os << k << ',' << num(acc.log_norm() / double(k)) << '\n';
            }
        } else {
            const auto chain = build_rz_chain(pair_svds(to_minus_one_form(cf).cf));
            for (std::size_t k = 1; k <= n; ++k)
                os << k << ',' << num(chain[k - 1].Phi) << ',' << num(chain[k - 1].lambda) << '\n';
        }
        return os.str();
    }
    const FunctionalGenerator gen = build_functional(s);
    if (what == "phi-angles")
        os << "index,x,Phi,lambda\n";
    else
        os << "index,x,value\n";
    if (n == 0) return os.str();
    if (grid == 0) throw Error(ErrorKind::InvalidArgument, "--grid must be positive");
    if (what == "lyapunov" && n < 100) throw Error(ErrorKind::InvalidArgument, "lyapunov needs --n >= 100");
    for (std::size_t i = 0; i < grid; ++i) {
        const double x = double(i) / double(grid);
        os << i << ',' << num(x) << ',';
        if (what == "convergents") {
            os << num(convergents(sample_chain(gen, x, n), n)[n].value()) << '\n';
        } else if (what == "lyapunov") {
            os << num(oracle::lyapunov_estimate(sample_chain(gen, x, n), n)) << '\n';
        } else {
            const auto st = functional_step(gen, x);
            os << num(st.Phi) << ',' << num(st.lambda) << '\n';
        }
    }
    return os.str();
}

std::string dump(const Json& j, int indent) {
    std::ostringstream os;
    format(os, j, indent, 0);
    return os.str();
}

}  // namespace cfh::cli
