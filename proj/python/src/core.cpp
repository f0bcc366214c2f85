#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>

#include "matprop/error.hpp"
#include "matprop/estimators.hpp"
#include "matprop/harness.hpp"
#include "matprop/instances.hpp"
#include "matprop/linalg.hpp"
#include "matprop/matrix_io.hpp"
#include "matprop/oracle.hpp"
#include "matprop/rank_tester.hpp"
#include "matprop/spectral_testers.hpp"

namespace py = pybind11;
using namespace matprop;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseMatrix to_matrix(const Array& a, const std::string& field) {
    if (a.ndim() != 2) throw ShapeMismatch("expected a 2-d array");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    std::vector<double> data(a.data(), a.data() + rows * cols);
    return DenseMatrix(rows, cols, std::move(data), Field::parse(field));
}

Array to_array(const DenseMatrix& m) {
    Array out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

Overrides to_overrides(const std::map<std::string, double>& in) {
    Overrides o;
    for (const auto& [k, v] : in) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        set_override(o, k, s.str());
    }
    return o;
}

py::dict report_dict(const EstimatorReport& r) {
    py::dict d;
    d["estimate"] = r.estimate;
    d["queries"] = r.queries_used;
    d["samples"] = r.nominal_samples;
    d["aux"] = r.aux;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sublinear-query matrix property testers and estimators";

    auto base = py::register_exception<Error>(m, "MatpropError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<OutOfRange>(m, "OutOfRange", base.ptr());
    py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base.ptr());
    py::register_exception<EmptyPool>(m, "EmptyPool", base.ptr());

    py::class_<Verdict>(m, "Verdict")
        .def_property_readonly("decision", [](const Verdict& v) { return std::string(to_string(v.decision)); })
        .def_readonly("statistic", &Verdict::statistic)
        .def_readonly("queries_used", &Verdict::queries_used)
        .def_readonly("stage", &Verdict::stage)
        .def_readonly("stage_queries", &Verdict::stage_queries)
        .def("__repr__", [](const Verdict& v) {
            return "Verdict(" + std::string(to_string(v.decision)) + ", queries=" + std::to_string(v.queries_used) +
                   ", stage=" + std::to_string(v.stage) + ")";
        });

    py::class_<TrialRecord>(m, "TrialRecord")
        .def_readonly("trial", &TrialRecord::trial)
        .def_readonly("seed", &TrialRecord::seed)
        .def_property_readonly("verdict", [](const TrialRecord& r) { return std::string(to_string(r.verdict)); })
        .def_readonly("queries", &TrialRecord::queries)
        .def_readonly("statistic", &TrialRecord::statistic)
        .def_readonly("stage", &TrialRecord::stage)
        .def_readonly("ms", &TrialRecord::ms);

    py::class_<ExperimentSummary>(m, "ExperimentSummary")
        .def_readonly("trials", &ExperimentSummary::trials)
        .def_readonly("detections", &ExperimentSummary::detections)
        .def_readonly("detection_rate", &ExperimentSummary::detection_rate)
        .def_property_readonly("wilson95", [](const ExperimentSummary& s) { return py::make_tuple(s.wilson95.lo, s.wilson95.hi); })
        .def_readonly("mean_queries", &ExperimentSummary::mean_queries)
        .def_readonly("max_queries", &ExperimentSummary::max_queries);

    py::class_<ExperimentResult>(m, "ExperimentResult")
        .def_readonly("records", &ExperimentResult::records)
        .def_readonly("summary", &ExperimentResult::summary)
        .def_property_readonly("csv", [](const ExperimentResult& r) {
            std::ostringstream out;
            write_csv(out, r.records);
            return out.str();
        });

    m.def(
        "generate",
        [](const std::string& family, std::size_t n, std::size_t d, double eps, const std::string& field, double eta,
           double trunc_C, int member, double noise_exponent, std::uint64_t seed) {
            InstanceSpec spec;
            spec.family = parse_family(family);
            spec.n = n;
            spec.d = d;
            spec.eps = eps;
            const Field f = Field::parse(field);
            spec.p = f.is_real() ? 0 : f.modulus();
            spec.eta = eta;
            spec.trunc_C = trunc_C;
            spec.member = member;
            spec.noise_exponent = noise_exponent;
            spec.seed = seed;
            return to_array(generate(spec));
        },
        py::arg("family"), py::arg("n") = 16, py::arg("d") = 1, py::arg("eps") = 0.1, py::arg("field") = "real",
        py::arg("eta") = 0.1, py::arg("trunc_C") = 6.0, py::arg("member") = 0, py::arg("noise_exponent") = 14.0,
        py::arg("seed") = 0, "Instance matrix of the named family as a float64 array.");

    m.def(
        "rank", [](const Array& a, const std::string& field) { return rank_exact(to_matrix(a, field)); },
        py::arg("a"), py::arg("field") = "real");
    m.def(
        "singular_values", [](const Array& a) { return singular_values(to_matrix(a, "real")).singular_values; },
        py::arg("a"));
    m.def("stable_rank", [](const Array& a) { return stable_rank(to_matrix(a, "real")); }, py::arg("a"));
    m.def(
        "schatten_norm", [](const Array& a, double p) { return schatten_norm(to_matrix(a, "real"), p); },
        py::arg("a"), py::arg("p"));
    m.def(
        "entropy", [](const Array& a) { return matrix_entropy(to_matrix(a, "real")); }, py::arg("a"),
        "SVD entropy in nats with weights sigma^2 / n^2.");
    m.def(
        "distance_to_rank",
        [](const Array& a, std::size_t r, const std::string& field) { return distance_to_rank(to_matrix(a, field), r); },
        py::arg("a"), py::arg("r"), py::arg("field"));

    m.def(
        "test_rank",
        [](const Array& a, std::size_t d, double eps, const std::string& field, std::uint64_t seed,
           const std::map<std::string, double>& overrides) {
            EntryOracle oracle(to_matrix(a, field));
            Rng rng(seed);
            return test_rank(oracle, make_rank_config(d, eps, seed, to_overrides(overrides)), rng);
        },
        py::arg("a"), py::arg("d"), py::arg("eps") = 0.1, py::arg("field") = "real", py::arg("seed") = 0,
        py::arg("overrides") = std::map<std::string, double>{});
    m.def(
        "test_rank_sensing",
        [](const Array& a, std::size_t d, const std::string& field, std::uint64_t seed) {
            SensingOracle oracle(to_matrix(a, field));
            Rng rng(seed);
            return test_rank_sensing(oracle, d, rng);
        },
        py::arg("a"), py::arg("d"), py::arg("field") = "real", py::arg("seed") = 0);
    m.def(
        "test_stable_rank",
        [](const Array& a, double d, double eps, bool sensing, std::uint64_t seed,
           const std::map<std::string, double>& overrides) {
            const StableRankConfig cfg = make_stable_rank_config(
                d, eps, sensing ? QueryModel::Sensing : QueryModel::Sampling, seed, to_overrides(overrides));
            Rng rng(seed);
            if (sensing) {
                SensingOracle oracle(to_matrix(a, "real"));
                return test_stable_rank(oracle, cfg, rng);
            }
            EntryOracle oracle(to_matrix(a, "real"));
            return test_stable_rank(oracle, cfg, rng);
        },
        py::arg("a"), py::arg("d"), py::arg("eps") = 0.1, py::arg("sensing") = false, py::arg("seed") = 0,
        py::arg("overrides") = std::map<std::string, double>{});
    m.def(
        "test_schatten",
        [](const Array& a, double p, double c, double eps, std::uint64_t seed,
           const std::map<std::string, double>& overrides) {
            EntryOracle oracle(to_matrix(a, "real"));
            Rng rng(seed);
            return test_schatten(oracle, make_schatten_config(p, c, eps, seed, to_overrides(overrides)), rng);
        },
        py::arg("a"), py::arg("p") = 4.0, py::arg("c") = 0.5, py::arg("eps") = 0.1, py::arg("seed") = 0,
        py::arg("overrides") = std::map<std::string, double>{});

    m.def(
        "estimate_norm",
        [](const Array& a, const std::string& method, std::uint64_t seed, std::optional<std::size_t> q,
           std::optional<std::size_t> N, std::optional<std::size_t> k, std::optional<double> tau,
           std::optional<double> d_hint) {
            SamplerParams sp;
            if (N) sp.N_cycles = *N;
            if (k) sp.k_sketch = *k;
            if (tau) sp.tau = *tau;
            if (d_hint) sp.d_hint = *d_hint;
            if (q) sp.q_cycle = *q;
            Rng rng(seed);
            if (method == "sensing") {
                SensingOracle oracle(to_matrix(a, "real"));
                return report_dict(estimate_opnorm_sensing(oracle, sp, rng));
            }
            EntryOracle oracle(to_matrix(a, "real"));
            if (method == "frobenius") return report_dict(estimate_frobenius(oracle, q.value_or(1000), rng));
            if (method == "screen") return report_dict(opnorm_screen(oracle, q.value_or(32), rng));
            if (method == "sampling") return report_dict(estimate_opnorm_sampling(oracle, sp, rng));
            if (method == "cycles") return report_dict(estimate_opnorm_cycles(oracle, sp.q_cycle, sp.N_cycles, rng));
            throw InvalidArgument("unknown method '" + method + "'");
        },
        py::arg("a"), py::arg("method"), py::arg("seed") = 0, py::arg("q") = py::none(), py::arg("N") = py::none(),
        py::arg("k") = py::none(), py::arg("tau") = py::none(), py::arg("d_hint") = py::none(),
        "method: frobenius (estimates ||A||_F^2), screen, sampling, cycles or sensing.");

    m.def(
        "run_experiment",
        [](const std::map<std::string, std::string>& settings, std::size_t workers) {
            ExperimentConfig cfg;
            for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
            py::gil_scoped_release release;
            return run_experiment(cfg, workers);
        },
        py::arg("settings"), py::arg("workers") = 0,
        "settings use the config-file keys, e.g. {'tester': 'rank', 'family': 'zero', 'trials': '10'}.");

    m.def("constant_registry", [] {
        py::list out;
        for (const auto& c : constant_registry()) out.append(py::make_tuple(c.name, c.default_value, c.help));
        return out;
    });

    m.def(
        "format_matrix",
        [](const Array& a, const std::string& field, std::optional<std::uint64_t> seed,
           std::optional<std::string> family) {
            std::ostringstream out;
            write_matrix(out, to_matrix(a, field), {seed, family});
            return out.str();
        },
        py::arg("a"), py::arg("field") = "real", py::arg("seed") = py::none(), py::arg("family") = py::none());
    m.def(
        "parse_matrix",
        [](const std::string& text) {
            std::istringstream in(text);
            const MatrixFile f = read_matrix(in);
            return py::make_tuple(to_array(f.matrix), f.matrix.field().to_string(), f.meta.seed, f.meta.family);
        },
        py::arg("text"), "Returns (array, field, seed, family).");
}
