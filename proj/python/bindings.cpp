#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "precsel/eval/metrics.hpp"
#include "precsel/features/scalar_features.hpp"
#include "precsel/imgcodec/sparsity_image.hpp"
#include "precsel/krylov/pcg.hpp"
#include "precsel/labelgen/labels.hpp"
#include "precsel/matio/matrix_market.hpp"
#include "precsel/synth/generators.hpp"

namespace py = pybind11;
using namespace precsel;

namespace {

template <class T>
py::array_t<T> to_array(std::span<const T> s) {
    std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(s.size())}, strides{static_cast<py::ssize_t>(sizeof(T))};
    return py::array_t<T>(shape, strides, s.data());
}

py::dict feature_dict(const ScalarFeatures& f) {
    py::dict d;
    const auto values = f.as_array();
    const auto& names = ScalarFeatures::names();
    for (std::size_t k = 0; k < values.size(); ++k) d[names[k]] = values[k];
    d["condest_converged"] = f.condest_converged;
    d["eigs_converged"] = f.eigs_converged;
    return d;
}

PrecondKind kind_of(const std::string& name) { return parse_precond_kind(name); }

}  // namespace

PYBIND11_MODULE(_precsel, m) {
    m.doc() = "Native core of the precsel package";

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

    py::class_<SparseMatrix>(m, "SparseMatrix")
        .def(py::init([](index_t n, std::vector<index_t> indptr, std::vector<index_t> indices, std::vector<double> data) {
                 return SparseMatrix(n, std::move(indptr), std::move(indices), std::move(data));
             }),
             py::arg("n"), py::arg("indptr"), py::arg("indices"), py::arg("data"))
        .def_property_readonly("n", &SparseMatrix::n)
        .def_property_readonly("nnz", &SparseMatrix::nnz)
        .def_property_readonly("indptr", [](const SparseMatrix& a) { return to_array(a.row_ptr()); })
        .def_property_readonly("indices", [](const SparseMatrix& a) { return to_array(a.col_idx()); })
        .def_property_readonly("data", [](const SparseMatrix& a) { return to_array(a.values()); })
        .def("multiply", [](const SparseMatrix& a, std::vector<double> x) { return a.multiply(x); })
        .def("__repr__", [](const SparseMatrix& a) {
            return "<SparseMatrix n=" + std::to_string(a.n()) + " nnz=" + std::to_string(a.nnz()) + ">";
        });

    m.def("load_matrix", [](const std::string& path) { return load_matrix(path); }, py::arg("path"));
    m.def("tridiagonal", &synth::tridiagonal, py::arg("n"), py::arg("lower"), py::arg("diag"), py::arg("upper"));
    m.def("poisson2d", py::overload_cast<index_t>(&synth::poisson2d), py::arg("k"));
    m.def("random_spd", &synth::random_spd, py::arg("n"), py::arg("density"), py::arg("dominance"), py::arg("seed"));

    m.def("features", [](const SparseMatrix& a) { return feature_dict(compute_features(a)); }, py::arg("a"));
    m.def("condest", [](const SparseMatrix& a, double tol) { return estimate_condest(a, tol); }, py::arg("a"),
          py::arg("solver_tol") = 1e-10);
    m.def(
        "extreme_eigs",
        [](const SparseMatrix& a, double tol) {
            auto e = estimate_extreme_eigs(a, tol);
            return py::make_tuple(e.min_eig, e.max_eig, e.converged());
        },
        py::arg("a"), py::arg("tol") = 1e-6);

    m.def(
        "encode_image",
        [](const SparseMatrix& a, index_t size, index_t n_min, index_t n_max) {
            auto img = encode_image(a, size, {n_min, n_max});
            py::array_t<std::uint8_t> out({size, size, static_cast<index_t>(3)});
            std::copy(img.pixels().begin(), img.pixels().end(), out.mutable_data());
            return out;
        },
        py::arg("a"), py::arg("m"), py::arg("n_min"), py::arg("n_max"));

    m.def("precond_kinds", [] {
        std::vector<std::string> out;
        for (PrecondKind k : kAllPrecondKinds) out.emplace_back(to_string(k));
        return out;
    });

    m.def(
        "solve",
        [](const SparseMatrix& a, std::vector<double> b, const std::string& kind, double rtol, int max_iter) {
            auto pre = build_preconditioner(a, kind_of(kind));
            PcgOptions o;
            o.rtol = rtol;
            o.max_iter = max_iter;
            auto r = pcg_solve(a, b, *pre, o);
            py::dict d;
            d["x"] = r.x;
            d["iterations"] = r.iterations;
            d["rel_residual"] = r.rel_residual;
            d["converged"] = r.converged;
            return d;
        },
        py::arg("a"), py::arg("b"), py::arg("precond") = "NONE", py::arg("rtol") = 1e-8, py::arg("max_iter") = -1);

    m.def(
        "time_pair",
        [](const SparseMatrix& a, const std::string& kind, std::uint64_t seed, double time_limit, int reps) {
            TimingOptions o;
            o.time_limit = time_limit;
            o.reps = reps;
            auto t = time_pair(a, kind_of(kind), generate_rhs_suite(a, seed), o);
            py::dict d;
            d["feasible"] = t.feasible;
            d["total_time"] = t.total_time;
            d["worst_rel_residual"] = t.worst_rel_residual;
            d["worst_rel_error"] = t.worst_rel_error;
            d["failure"] = t.failure;
            return d;
        },
        py::arg("a"), py::arg("precond"), py::arg("seed") = 0, py::arg("time_limit") = 60.0, py::arg("reps") = 5);

    m.def(
        "optimal_set",
        [](const std::map<std::string, double>& times, double band) {
            std::vector<PairTiming> ts;
            for (const auto& [name, t] : times) {
                PairTiming p;
                p.kind = kind_of(name);
                p.feasible = std::isfinite(t);
                p.total_time = t;
                ts.push_back(p);
            }
            auto rec = optimal_set("", ts, band);
            std::vector<std::string> out;
            for (PrecondKind k : rec.optimal) out.emplace_back(to_string(k));
            return py::make_tuple(out, rec.t_star);
        },
        py::arg("times"), py::arg("band") = 1.1);

    m.def("accuracy", &accuracy, py::arg("truth"), py::arg("pred"));
    m.def("slowdown", &slowdown, py::arg("pred"), py::arg("times"), py::arg("t_star"));
}
