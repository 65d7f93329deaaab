#include "concordance/error.hpp"
#include "concordance/json_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace concordance;

namespace {

json parse(const std::string& doc) {
    try {
        return json::parse(doc);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedInput, e.what());
    }
}

std::vector<SubsetIndex> targets_of(const json& doc, const PartialSignature& p) {
    if (!doc.contains("targets")) return p.missing_labels();
    std::vector<SubsetIndex> out;
    for (const auto& t : doc["targets"]) out.push_back(subset_from_json(p.dimension(), t));
    return out;
}

McConfig mc(std::uint64_t samples, std::uint64_t seed) {
    McConfig c;
    c.samples = samples;
    c.seed = seed;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Concordance signatures: attainability, bounds, estimation, elliptical families";

    static py::exception<Error> error(m, "ConcordanceError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string message = "[" + std::string(to_string(e.code())) + "] " + e.what();
            py::set_error(error, message.c_str());
        }
    });

    m.def("dimension_cap", &dimension_cap);
    m.def("set_dimension_cap", &set_dimension_cap, py::arg("cap"));

    m.def("amatrix", [](int d) { return Eigen::MatrixXd(build_A_matrix(d).dense()); }, py::arg("d"));

    m.def("signature_from_weights",
          [](int d, std::vector<double> w) { return signature_from_weights(MixtureWeights(d, std::move(w))).values(); },
          py::arg("d"), py::arg("w"));
    m.def("weights_from_signature",
          [](int d, std::vector<double> kappa) { return weights_from_signature(EvenSignature(d, std::move(kappa))).values(); },
          py::arg("d"), py::arg("kappa"));
    m.def("solve_signature_system",
          [](int d, const std::vector<double>& kappa) { return solve_signature_system(d, kappa); }, py::arg("d"), py::arg("kappa"));

    m.def("check_attainable", [](const std::string& doc) { return to_json(check_attainable(partial_from_json(parse(doc)))).dump(); },
          py::arg("signature_json"));
    m.def(
        "bound_missing",
        [](const std::string& doc) {
            const auto j = parse(doc);
            const auto p = partial_from_json(j);
            return to_json(bound_missing(p, targets_of(j, p))).dump();
        },
        py::arg("signature_json"));
    m.def(
        "enumerate_vertices",
        [](const std::string& doc) {
            py::gil_scoped_release release;
            return to_json(enumerate_vertices(partial_from_json(parse(doc)))).dump();
        },
        py::arg("signature_json"));

    m.def(
        "empirical_signature",
        [](const Eigen::MatrixXd& x, bool ties) {
            py::gil_scoped_release release;
            const SampleMatrix data(x);
            const auto e = ties ? empirical_signature_ties(data) : empirical_signature(data);
            return to_json(e, data.n()).dump();
        },
        py::arg("x"), py::arg("ties") = false);

    m.def(
        "elliptical_signature",
        [](const Eigen::MatrixXd& p, std::uint64_t samples, std::uint64_t seed) {
            py::gil_scoped_release release;
            return to_json(elliptical_signature(CorrelationMatrix(p), mc(samples, seed))).dump();
        },
        py::arg("p"), py::arg("samples") = 1'000'000, py::arg("seed") = 0);
    m.def(
        "t_limit_weights",
        [](const Eigen::MatrixXd& p, const std::string& mode, std::uint64_t samples, std::uint64_t seed) {
            if (mode != "analytic" && mode != "monte_carlo") throw Error(ErrorCode::MalformedInput, "mode must be analytic or monte_carlo");
            py::gil_scoped_release release;
            const auto t = t_limit_weights(CorrelationMatrix(p), mode == "analytic" ? TLimitMode::Analytic : TLimitMode::MonteCarlo,
                                           mc(samples, seed));
            return to_json(t).dump();
        },
        py::arg("p"), py::arg("mode") = "analytic", py::arg("samples") = 1'000'000, py::arg("seed") = 0);
    m.def("elliptical_attainable", [](const Eigen::MatrixXd& tau) { return to_json(elliptical_attainable(tau)).dump(); },
          py::arg("kendall"));
    m.def("check_cut_polytope", [](const Eigen::MatrixXd& tau) { return to_json(check_cut_polytope(tau)).dump(); },
          py::arg("kendall"));

    m.def(
        "b_matrix",
        [](int d) {
            std::vector<std::vector<std::string>> out;
            for (const auto& row : build_B_matrix_exact(d)) {
                auto& r = out.emplace_back();
                for (const auto& q : row) r.push_back(q.to_string());
            }
            return out;
        },
        py::arg("d"));
    m.def(
        "skeletal_solve",
        [](int d, std::vector<double> k) { return to_json(skeletal_solve(make_skeletal(d, std::move(k))), d).dump(); },
        py::arg("d"), py::arg("k"));

    m.def(
        "sample_mixture",
        [](int d, std::vector<double> w, std::uint64_t n, std::uint64_t seed) {
            const MixtureWeights weights(d, std::move(w));
            py::gil_scoped_release release;
            return sample_mixture(weights, n, seed).values;
        },
        py::arg("d"), py::arg("w"), py::arg("n"), py::arg("seed") = 0);
    m.def("sample_counterexample", &sample_counterexample, py::arg("theta"), py::arg("n"), py::arg("seed") = 0);
    m.def(
        "validate_mixture",
        [](const Eigen::MatrixXd& x, double level) {
            py::gil_scoped_release release;
            return to_json(validate_mixture(x, level)).dump();
        },
        py::arg("x"), py::arg("level") = 0.01);
}
