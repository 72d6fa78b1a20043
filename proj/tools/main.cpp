// cfhyp: analyze continued fractions from JSON problem specs.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cfhyp/error.hpp"
#include "report.hpp"

namespace {

using cfh::cli::Json;

struct Overrides {
    double tolerance = 0.0;
    std::size_t horizon = 0;
};

cfh::cli::ProblemSpec load(const std::string& path, const Overrides& ov) {
    std::ifstream in(path);
    if (!in) throw cfh::Error(cfh::ErrorKind::InvalidArgument, "cannot open " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw cfh::Error(cfh::ErrorKind::Schema, std::string("not valid JSON: ") + e.what());
    }
    auto spec = cfh::cli::parse_spec(j);
    if (ov.tolerance > 0.0) spec.analysis.tolerance = ov.tolerance;
    if (ov.horizon > 0) {
        spec.analysis.horizon = ov.horizon;
        // re-run the checks that depend on the horizon
        spec = cfh::cli::parse_spec(cfh::cli::spec_to_json(spec));
    }
    return spec;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text << '\n';
        return;
    }
    std::ofstream f(out);
    if (!f) throw cfh::Error(cfh::ErrorKind::InvalidArgument, "cannot write " + out);
    f << text << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convergence analysis of real and functional continued fractions"};
    app.require_subcommand(1);
    Overrides ov;
    app.add_option("--tolerance", ov.tolerance, "override analysis.tolerance")->check(CLI::PositiveNumber);
    app.add_option("--horizon", ov.horizon, "override analysis.horizon")->check(CLI::PositiveNumber);

    std::string specPath, outPath, what = "convergents";
    std::size_t n = 0, grid = 64;

    auto* analyze = app.add_subcommand("analyze", "run the applicable certificates and oracles, print a JSON report");
    analyze->add_option("spec", specPath, "problem spec (JSON)")->required();
    analyze->add_option("--out", outPath, "write the report here instead of stdout");

    auto* series = app.add_subcommand("series", "print a CSV series");
    series->add_option("spec", specPath, "problem spec (JSON)")->required();
    series->add_option("--what", what, "convergents, lyapunov or phi-angles")
        ->check(CLI::IsMember({"convergents", "lyapunov", "phi-angles"}));
    series->add_option("--n", n, "number of steps")->required();
    series->add_option("--grid", grid, "x-grid size for functional problems");
    series->add_option("--out", outPath, "write the CSV here instead of stdout");

    auto* sweep = app.add_subcommand("sweep", "analyze a functional problem over analysis.gSweep");
    sweep->add_option("spec", specPath, "problem spec (JSON)")->required();
    sweep->add_option("--out", outPath, "write the result here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto spec = load(specPath, ov);
        if (*analyze) {
            emit(cfh::cli::dump(cfh::cli::analyze(spec)), outPath);
        } else if (*series) {
            std::string csv = cfh::cli::series(spec, what, n, grid);
            if (!csv.empty() && csv.back() == '\n') csv.pop_back();
            emit(csv, outPath);
        } else {
            emit(cfh::cli::dump(cfh::cli::sweep(spec)), outPath);
        }
    } catch (const cfh::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == cfh::ErrorKind::Schema ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
