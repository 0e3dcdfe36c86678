#include "decheat/analysis.hpp"
#include "decheat/errors.hpp"
#include "decheat/export.hpp"
#include "decheat/meshgen.hpp"
#include "decheat/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <optional>

namespace py = pybind11;
using namespace decheat;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, 3, Eigen::RowMajor>;

SimplicialSurface surface_from_arrays(const Eigen::Ref<const RowMatrix>& v, const Eigen::Ref<const IndexMatrix>& f) {
    if (v.cols() != 3) {
        throw ConfigError("vertices must have shape (n, 3)");
    }
    std::vector<Vec3> verts;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        verts.emplace_back(v(i, 0), v(i, 1), v(i, 2));
    }
    std::vector<Triangle> tris;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        tris.push_back({f(i, 0), f(i, 1), f(i, 2)});
    }
    return SimplicialSurface(std::move(verts), std::move(tris));
}

RowMatrix vertex_array(const SimplicialSurface& s) {
    RowMatrix out(s.vertex_count(), 3);
    for (Index i = 0; i < s.vertex_count(); ++i) {
        out.row(i) = s.vertices()[static_cast<std::size_t>(i)].transpose();
    }
    return out;
}

IndexMatrix triangle_array(const SimplicialSurface& s) {
    IndexMatrix out(s.triangle_count(), 3);
    for (Index t = 0; t < s.triangle_count(); ++t) {
        const Triangle& tri = s.triangles()[static_cast<std::size_t>(t)];
        out.row(t) << tri[0], tri[1], tri[2];
    }
    return out;
}

SourceModel make_source(const std::string& kind, const std::vector<Index>& vertices, double value) {
    if (kind == "none") {
        return SourceModel::none();
    }
    if (kind == "constant") {
        return SourceModel::constant(vertices, value);
    }
    if (kind == "sqrt_ramp") {
        return SourceModel::sqrt_ramp(vertices);
    }
    throw ConfigError("source must be 'none', 'constant' or 'sqrt_ramp'");
}

// None picks a closed condition on closed meshes and Dirichlet 0 otherwise.
BoundaryCondition make_boundary(const SimplicialSurface& s, std::optional<double> value) {
    if (value) {
        return BoundaryCondition::dirichlet(s, *value);
    }
    return s.is_closed() ? BoundaryCondition::closed() : BoundaryCondition::dirichlet(s, 0.0);
}

SchemeConfig make_config(const std::string& scheme, double dt, const PhysicalParams& params, double tol) {
    SchemeConfig cfg;
    cfg.scheme = parse_scheme(scheme);
    cfg.dt = dt;
    cfg.params = params;
    cfg.solver_tol = tol;
    cfg.validate();
    return cfg;
}

py::dict state_dict(const std::vector<SimState>& states) {
    std::vector<std::int64_t> steps;
    std::vector<double> times;
    RowMatrix psi(static_cast<Eigen::Index>(states.size()), states.empty() ? 0 : states.front().psi.size());
    for (std::size_t k = 0; k < states.size(); ++k) {
        steps.push_back(states[k].step);
        times.push_back(states[k].time);
        psi.row(static_cast<Eigen::Index>(k)) = states[k].psi.transpose();
    }
    py::dict d;
    d["step"] = steps;
    d["time"] = times;
    d["psi"] = psi;
    return d;
}

} // namespace

PYBIND11_MODULE(_decheat, m) {
    m.doc() = "Heat diffusion on triangulated surfaces with discrete exterior calculus";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    auto mesh_error = py::register_exception<MeshError>(m, "MeshError", error.ptr());
    py::register_exception<ParseError>(m, "ParseError", mesh_error.ptr());
    py::register_exception<TopologyError>(m, "TopologyError", mesh_error.ptr());
    py::register_exception<GeometryError>(m, "GeometryError", mesh_error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<SolverError>(m, "SolverError", error.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
    py::register_exception<IoError>(m, "IoError", error.ptr());

    py::class_<SimplicialSurface>(m, "Surface")
        .def(py::init(&surface_from_arrays), py::arg("vertices"), py::arg("triangles"))
        .def_property_readonly("vertices", &vertex_array)
        .def_property_readonly("triangles", &triangle_array)
        .def_property_readonly("boundary_vertices", &SimplicialSurface::boundary_vertices)
        .def_property_readonly("vertex_count", &SimplicialSurface::vertex_count)
        .def_property_readonly("edge_count", &SimplicialSurface::edge_count)
        .def_property_readonly("triangle_count", &SimplicialSurface::triangle_count)
        .def_property_readonly("is_closed", &SimplicialSurface::is_closed)
        .def_property_readonly("euler_characteristic", &SimplicialSurface::euler_characteristic)
        .def("total_area", &SimplicialSurface::total_area)
        .def("mean_edge_length", &SimplicialSurface::mean_edge_length)
        .def("__repr__", [](const SimplicialSurface& s) {
            return "<Surface V=" + std::to_string(s.vertex_count()) + " F=" + std::to_string(s.triangle_count()) + ">";
        });

    m.def("load_obj", &load_obj_file, py::arg("path"));
    m.def("load_obj_string", [](const std::string& text) { return load_obj_string(text); }, py::arg("text"));
    m.def("save_obj", &save_obj_file, py::arg("surface"), py::arg("path"));

    auto gen = m.def_submodule("meshgen", "Test meshes");
    gen.def("single_triangle", &meshgen::single_triangle);
    gen.def("hex_patch", &meshgen::hex_patch, py::arg("side") = 1.0);
    gen.def("unit_square", &meshgen::unit_square, py::arg("cells"));
    gen.def("delaunay_square", &meshgen::delaunay_square, py::arg("cells"), py::arg("seed"), py::arg("jitter") = 0.2);
    gen.def("torus", &meshgen::torus, py::arg("major"), py::arg("minor"), py::arg("n_major"), py::arg("n_minor"));

    py::class_<DualMetrics>(m, "DualMetrics")
        .def_readonly("primal_length", &DualMetrics::primal_length)
        .def_readonly("dual_length", &DualMetrics::dual_length)
        .def_readonly("dual_area", &DualMetrics::dual_area)
        .def_readonly("negative_dual_edges", &DualMetrics::negative_dual_edges);
    m.def(
        "build_metrics",
        [](const SimplicialSurface& s, bool strict) { return build_metrics(s, {strict}); }, py::arg("surface"),
        py::arg("strict") = false);

    py::class_<LaplaceOperator>(m, "LaplaceOperator")
        .def_readonly("stiffness", &LaplaceOperator::stiffness)
        .def_readonly("mass", &LaplaceOperator::mass)
        .def("apply", &LaplaceOperator::apply, py::arg("psi"))
        .def("negative_weight_count", &LaplaceOperator::negative_weight_count)
        .def_property_readonly("size", &LaplaceOperator::size);
    m.def(
        "laplacian",
        [](const SimplicialSurface& s, bool strict) { return assemble_laplacian(s, build_metrics(s, {strict})); },
        py::arg("surface"), py::arg("strict") = false);
    m.def("cotan_laplacian", &cotan_oracle, py::arg("surface"));

    py::class_<PhysicalParams>(m, "PhysicalParams")
        .def(py::init([](double rho, double c, double k) { return PhysicalParams{rho, c, k}; }), py::arg("rho") = 1.0,
             py::arg("c") = 1.0, py::arg("k") = 1.0)
        .def_readwrite("rho", &PhysicalParams::rho)
        .def_readwrite("c", &PhysicalParams::c)
        .def_readwrite("k", &PhysicalParams::k);

    m.def(
        "step",
        [](const SimplicialSurface& s, const Vector& psi, const std::string& scheme, double dt, double time,
           const PhysicalParams& params, const std::string& source, const std::vector<Index>& source_vertices,
           double source_value, std::optional<double> boundary, double solver_tol) {
            const auto cfg = make_config(scheme, dt, params, solver_tol);
            const auto bc = make_boundary(s, boundary);
            bc.validate(s);
            const HeatStepper stepper(assemble_laplacian(s, build_metrics(s)), cfg,
                                      make_source(source, source_vertices, source_value), bc);
            return stepper.step({psi, time, 0}).psi;
        },
        py::arg("surface"), py::arg("psi"), py::arg("scheme"), py::arg("dt"), py::arg("time") = 0.0,
        py::arg("params") = PhysicalParams{}, py::arg("source") = "none",
        py::arg("source_vertices") = std::vector<Index>{0}, py::arg("source_value") = 1.0,
        py::arg("boundary") = py::none(), py::arg("solver_tol") = 1e-10,
        "One time step. boundary=None means closed for closed meshes, Dirichlet 0 otherwise.");

    m.def(
        "run",
        [](const SimplicialSurface& s, const Vector& initial, const std::string& scheme, double dt,
           std::int64_t n_steps, std::int64_t stride, const PhysicalParams& params, const std::string& source,
           const std::vector<Index>& source_vertices, double source_value, std::optional<double> boundary,
           double solver_tol) {
            RunOptions opt;
            opt.n_steps = n_steps;
            opt.snapshot_stride = stride;
            const auto cfg = make_config(scheme, dt, params, solver_tol);
            py::gil_scoped_release release;
            auto states = run(s, cfg, make_source(source, source_vertices, source_value), make_boundary(s, boundary),
                              initial, opt);
            py::gil_scoped_acquire acquire;
            return state_dict(states);
        },
        py::arg("surface"), py::arg("initial"), py::arg("scheme"), py::arg("dt"), py::arg("n_steps"),
        py::arg("stride") = 1, py::arg("params") = PhysicalParams{}, py::arg("source") = "none",
        py::arg("source_vertices") = std::vector<Index>{0}, py::arg("source_value") = 1.0,
        py::arg("boundary") = py::none(), py::arg("solver_tol") = 1e-10,
        "Returns {'step', 'time', 'psi'} for the recorded snapshots; psi has one row per snapshot.");

    m.def(
        "cg_solve",
        [](const SparseMatrix& A, const Vector& b, double tol, int max_iter) {
            const auto r = cg_solve(A, b, tol, max_iter);
            return py::make_tuple(r.x, r.iterations, r.relative_residual);
        },
        py::arg("A"), py::arg("b"), py::arg("tol") = 1e-10, py::arg("max_iter") = 1000);

    m.def(
        "classify",
        [](const Vector& psi) {
            std::vector<std::string> out;
            for (Eigen::Index i = 0; i < psi.size(); ++i) {
                out.emplace_back(to_string(classify_temperature(psi[i])));
            }
            return out;
        },
        py::arg("psi"));
    m.attr("BLUE_THRESHOLD") = kBlueThreshold;

    m.def(
        "export_ply",
        [](const SimplicialSurface& s, const Vector& psi, const std::string& path) {
            std::ofstream out(path, std::ios::binary);
            if (!out) {
                throw IoError("cannot open " + path);
            }
            return export_ply(s, Snapshot::from_state({psi, 0.0, 0}), out);
        },
        py::arg("surface"), py::arg("psi"), py::arg("path"));
    m.def(
        "export_csv",
        [](const Vector& psi, double time, const std::string& path) {
            std::ofstream out(path, std::ios::binary);
            if (!out) {
                throw IoError("cannot open " + path);
            }
            return export_csv(Snapshot::from_state({psi, time, 0}), out);
        },
        py::arg("psi"), py::arg("time"), py::arg("path"));

    m.def(
        "perturbation_ratios",
        [](const SimplicialSurface& s, const std::string& scheme, double dt, int trials, std::uint64_t seed,
           std::optional<double> boundary, double solver_tol) {
            PerturbationOptions opt;
            opt.trials = trials;
            opt.seed = seed;
            const auto report =
                perturbation_experiment(s, make_config(scheme, dt, {}, solver_tol), make_boundary(s, boundary), opt);
            std::vector<double> ratios;
            for (const auto& t : report.trials) {
                ratios.push_back(t.ratio);
            }
            return ratios;
        },
        py::arg("surface"), py::arg("scheme"), py::arg("dt"), py::arg("trials") = 100, py::arg("seed") = 1,
        py::arg("boundary") = py::none(), py::arg("solver_tol") = 1e-10,
        "Growth of a random perturbation's max norm over one step, per trial.");

    m.def(
        "convergence_study",
        [](const std::vector<int>& cells, const std::vector<double>& dts, const std::string& scheme,
           double final_time) {
            ConvergenceOptions opt;
            opt.final_time = final_time;
            const auto report = convergence_study(cells, dts, parse_scheme(scheme), opt);
            py::list runs;
            for (const auto& r : report.runs) {
                py::dict d;
                d["cells"] = r.cells;
                d["h"] = r.h;
                d["dt"] = r.dt;
                d["steps"] = r.steps;
                d["max_error"] = r.max_error;
                runs.append(d);
            }
            py::dict out;
            out["runs"] = runs;
            out["observed_orders"] = report.observed_orders;
            out["fitted_order"] = report.fitted_order;
            out["monotone"] = report.monotone_decreasing();
            return out;
        },
        py::arg("cells"), py::arg("dts"), py::arg("scheme") = "implicit", py::arg("final_time") = 0.1);
}
