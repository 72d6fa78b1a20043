#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfhyp/cocycle.hpp"
#include "cfhyp/contfrac.hpp"
#include "cfhyp/error.hpp"
#include "cfhyp/oracle.hpp"
#include "cfhyp/rotation.hpp"
#include "report.hpp"

namespace py = pybind11;
using namespace cfh;

namespace {

NumericCF make_cf(double b0, std::vector<double> a, std::vector<double> b) {
    if (a.empty()) a.assign(b.size(), -1.0);
    if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "a and b differ in length");
    return NumericCF{b0, std::move(a), std::move(b)};
}

FunctionalGenerator make_gen(double c0, std::vector<double> cosC, std::vector<double> sinC, double omega, double g) {
    FunctionalGenerator gen;
    gen.b = PeriodicFn::trig(c0, std::move(cosC), std::move(sinC));
    gen.omega = omega;
    gen.g = g;
    return gen;
}

}  // namespace

PYBIND11_MODULE(_cfhyp, m) {
    m.doc() = "Continued-fraction convergence analysis";

    static py::exception<Error> err(m, "CfhypError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(err, e.what());
        }
    });

    py::class_<StepSVD2>(m, "PairSVD")
        .def_readonly("lam", &StepSVD2::lambda)
        .def_readonly("phi", &StepSVD2::phi)
        .def_readonly("chi", &StepSVD2::chi)
        .def_readonly("h_sq", &StepSVD2::hSq)
        .def_readonly("sign", &StepSVD2::sign);

    m.def("svd_pair", [](double bOdd, double bEven) { return svd_pair(bOdd, bEven); }, py::arg("b_odd"),
          py::arg("b_even"));

    m.def(
        "convergents",
        [](double b0, std::vector<double> a, std::vector<double> b) {
            const auto cf = make_cf(b0, std::move(a), std::move(b));
            std::vector<double> out;
            for (const auto& c : convergents(cf, cf.horizon())) out.push_back(c.value());
            return out;
        },
        py::arg("b0"), py::arg("a"), py::arg("b"), "f_0..f_n; empty a means all -1");

    m.def(
        "direct_limit",
        [](double b0, std::vector<double> a, std::vector<double> b, double tol) {
            const auto cf = make_cf(b0, std::move(a), std::move(b));
            const auto r = oracle::direct_limit(cf, cf.horizon(), tol);
            return py::dict(py::arg("verdict") = oracle::to_string(r.verdict), py::arg("value") = r.lastValue,
                            py::arg("cauchy_tail") = r.cauchyTail);
        },
        py::arg("b0"), py::arg("a"), py::arg("b"), py::arg("tol") = 1e-9);

    m.def(
        "lyapunov",
        [](double b0, std::vector<double> a, std::vector<double> b) {
            const auto cf = make_cf(b0, std::move(a), std::move(b));
            return oracle::lyapunov_estimate(to_minus_one_form(cf).cf, cf.horizon());
        },
        py::arg("b0"), py::arg("a"), py::arg("b"));

    m.def(
        "certify_functional",
        [](double c0, std::vector<double> cosC, std::vector<double> sinC, double omega, double g, double delta) {
            const auto r = theorem4_certify(make_gen(c0, std::move(cosC), std::move(sinC), omega, g), delta);
            return py::dict(py::arg("pass") = r.pass, py::arg("failing_stage") = r.failingStage,
                            py::arg("error") = r.error, py::arg("degenerate") = r.degenerate,
                            py::arg("critical_points") = r.critical.points,
                            py::arg("cross_check_ok") = r.crossCheckOk);
        },
        py::arg("c0"), py::arg("cos") = std::vector<double>{}, py::arg("sin") = std::vector<double>{},
        py::arg("omega") = 0.5, py::arg("g") = 1.0, py::arg("delta") = 0.0);

    m.def(
        "analyze_json",
        [](const std::string& spec) {
            return cli::dump(cli::analyze(cli::parse_spec(cli::Json::parse(spec))));
        },
        py::arg("spec"), "report for a JSON problem spec, as JSON text");
}
