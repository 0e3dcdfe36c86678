#include "decheat/cli.hpp"

#include "decheat/analysis.hpp"
#include "decheat/errors.hpp"
#include "decheat/export.hpp"
#include "decheat/mesh.hpp"
#include "decheat/meshgen.hpp"
#include "decheat/random.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

namespace decheat::cli {

namespace fs = std::filesystem;

namespace {

std::string number(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, end);
}

std::string_view to_string(SourceKind k) {
    switch (k) {
    case SourceKind::none:
        return "none";
    case SourceKind::sqrt_ramp:
        return "paper_sqrt";
    case SourceKind::constant:
        return "constant";
    }
    return "unknown";
}

std::string_view to_string(BoundaryKind k) {
    switch (k) {
    case BoundaryKind::automatic:
        return "auto";
    case BoundaryKind::closed:
        return "closed";
    case BoundaryKind::dirichlet:
        return "dirichlet";
    }
    return "unknown";
}

BoundaryCondition resolve_boundary(BoundaryKind kind, double value, const SimplicialSurface& surface) {
    if (kind == BoundaryKind::closed || (kind == BoundaryKind::automatic && surface.is_closed())) {
        auto bc = BoundaryCondition::closed();
        bc.validate(surface);
        return bc;
    }
    return BoundaryCondition::dirichlet(surface, value);
}

SourceModel make_source(const RunConfig& cfg) {
    switch (cfg.source) {
    case SourceKind::none:
        return SourceModel::none();
    case SourceKind::sqrt_ramp:
        return SourceModel::sqrt_ramp(cfg.source_vertices);
    case SourceKind::constant:
        return SourceModel::constant(cfg.source_vertices, cfg.source_value);
    }
    return SourceModel::none();
}

Vector initial_field(const std::string& text, Index n, std::uint64_t seed) {
    if (text == "zero") {
        return Vector::Zero(n);
    }
    if (text == "random") {
        Rng rng(seed);
        Vector v(n);
        for (Index i = 0; i < n; ++i) {
            v[i] = rng.uniform();
        }
        return v;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw ConfigError("initial field must be 'zero', 'random' or a number, got '" + text + "'");
    }
    return Vector::Constant(n, value);
}

std::string snapshot_name(std::int64_t step, const char* ext) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(6) << std::setfill('0') << step << ext;
    return name.str();
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
}

SimplicialSurface mesh_or_default(const std::string& path, int default_cells) {
    return path.empty() ? meshgen::unit_square(default_cells) : load_obj_file(path);
}

void write_rows(const std::vector<ReportRow>& rows, const std::string& report_path, std::ostream& out) {
    if (report_path.empty()) {
        write_report_csv(rows, out);
        return;
    }
    auto file = open_output(report_path);
    write_report_csv(rows, file);
}

} // namespace

void RunConfig::validate() const {
    if (mesh_path.empty()) {
        throw ConfigError("--mesh is required");
    }
    SchemeConfig sc{params, dt, scheme, solver_tol, solver_max_iter};
    sc.validate();
    if (n_steps < 0) {
        throw ConfigError("--steps must be non-negative");
    }
    if (snapshot_stride < 1) {
        throw ConfigError("--stride must be at least 1");
    }
    if (source != SourceKind::none && source_vertices.empty()) {
        throw ConfigError("a source needs at least one --source-vertex");
    }
    if (!std::isfinite(source_value) || !std::isfinite(boundary_value)) {
        throw ConfigError("source and boundary values must be finite");
    }
    initial_field(initial, 0, seed);
}

std::int64_t expected_snapshot_count(std::int64_t n_steps, std::int64_t stride) {
    return (n_steps + stride - 1) / stride + 1;
}

void execute_run(const RunConfig& config, std::ostream& log) {
    config.validate();
    const SimplicialSurface surface = load_obj_file(config.mesh_path);
    const DualMetrics metrics = build_metrics(surface, {config.strict_mesh});
    const LaplaceOperator laplacian = assemble_laplacian(surface, metrics);
    const BoundaryCondition boundary = resolve_boundary(config.boundary, config.boundary_value, surface);
    for (Index v : config.source_vertices) {
        if (config.source != SourceKind::none && (v < 0 || v >= surface.vertex_count())) {
            throw ConfigError("source vertex " + std::to_string(v) + " out of range (mesh has " +
                              std::to_string(surface.vertex_count()) + " vertices)");
        }
    }
    const Vector initial = initial_field(config.initial, surface.vertex_count(), config.seed);
    const SchemeConfig scheme{config.params, config.dt, config.scheme, config.solver_tol, config.solver_max_iter};
    const Index negative_weights = laplacian.negative_weight_count();
    if (negative_weights > 0) {
        log << "warning: " << negative_weights
            << " negative edge weights (obtuse triangles); stability and maximum principle are not guaranteed\n";
    }

    const fs::path dir(config.output_dir);
    ensure_directory(dir);

    std::ostringstream report;
    report << "step,time,min_psi,max_psi,heat,red,yellow,blue\n";
    std::int64_t written = 0;
    RunOptions options;
    options.n_steps = config.n_steps;
    options.snapshot_stride = config.snapshot_stride;
    options.on_snapshot = [&](const SimState& state) {
        const Snapshot snap = Snapshot::from_state(state);
        auto ply = open_output(dir / snapshot_name(state.step, ".ply"));
        export_ply(surface, snap, ply);
        auto csv = open_output(dir / snapshot_name(state.step, ".csv"));
        export_csv(snap, csv);
        const auto counts = snap.class_counts();
        report << state.step << ',' << number(state.time) << ',' << number(state.psi.minCoeff()) << ','
               << number(state.psi.maxCoeff()) << ',' << number(laplacian.mass.dot(state.psi)) << ',' << counts[0]
               << ',' << counts[1] << ',' << counts[2] << '\n';
        ++written;
    };
    const auto snapshots = run(laplacian, scheme, make_source(config), boundary, initial, options);

    {
        auto file = open_output(dir / "report.csv");
        file << report.str();
        if (!file) {
            throw IoError("failed writing report.csv");
        }
    }
    if (config.dump_operators) {
        auto file = open_output(dir / "stiffness_coo.txt");
        dump_coo(laplacian.stiffness, file);
        auto mass = open_output(dir / "mass.txt");
        for (Eigen::Index v = 0; v < laplacian.mass.size(); ++v) {
            mass << v << ' ' << number(laplacian.mass[v]) << '\n';
        }
    }

    std::ostringstream m;
    m << "mesh=" << config.mesh_path << '\n'
      << "scheme=" << decheat::to_string(config.scheme) << '\n'
      << "dt=" << number(config.dt) << '\n'
      << "steps=" << config.n_steps << '\n'
      << "stride=" << config.snapshot_stride << '\n'
      << "rho=" << number(config.params.rho) << '\n'
      << "c=" << number(config.params.c) << '\n'
      << "k=" << number(config.params.k) << '\n'
      << "source=" << to_string(config.source) << '\n'
      << "source_value=" << number(config.source_value) << '\n'
      << "source_vertices=";
    for (std::size_t i = 0; i < config.source_vertices.size(); ++i) {
        m << (i ? "," : "") << config.source_vertices[i];
    }
    m << '\n'
      << "boundary=" << to_string(config.boundary) << '\n'
      << "boundary_resolved=" << (boundary.kind == BoundaryCondition::Kind::none ? "closed" : "dirichlet") << '\n'
      << "boundary_value=" << number(config.boundary_value) << '\n'
      << "initial=" << config.initial << '\n'
      << "solver_tol=" << number(config.solver_tol) << '\n'
      << "solver_max_iter=" << config.solver_max_iter << '\n'
      << "strict_mesh=" << (config.strict_mesh ? "true" : "false") << '\n'
      << "seed=" << config.seed << '\n'
      << "vertices=" << surface.vertex_count() << '\n'
      << "edges=" << surface.edge_count() << '\n'
      << "faces=" << surface.triangle_count() << '\n'
      << "boundary_vertices=" << surface.boundary_vertices().size() << '\n'
      << "euler_characteristic=" << surface.euler_characteristic() << '\n'
      << "total_area=" << number(surface.total_area()) << '\n'
      << "mean_edge_length=" << number(surface.mean_edge_length()) << '\n'
      << "negative_dual_edges=" << metrics.negative_dual_edges << '\n'
      << "negative_weights=" << negative_weights << '\n'
      << "snapshots=" << written << '\n'
      << "final_time=" << number(snapshots.back().time) << '\n'
      << "final_max_psi=" << number(snapshots.back().psi.maxCoeff()) << '\n';
    auto manifest = open_output(dir / "manifest.txt");
    manifest << m.str();
    if (!manifest) {
        throw IoError("failed writing manifest.txt");
    }
    log << "wrote " << written << " snapshots to " << dir.string() << '\n';
}

namespace {

struct VerifyOptions {
    std::string scheme = "semi_implicit";
    double dt = 1.0;
    int trials = 100;
    std::uint64_t seed = 1;
    std::string mesh;
    std::optional<Index> spike_vertex;
    std::int64_t steps = 100;
    double solver_tol = 1e-10;
    std::string report;
    std::string sweep = "all";
    std::vector<int> cells;
    std::vector<double> dts;
};

int verify_contraction(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
    const SimplicialSurface surface = mesh_or_default(o.mesh, 20);
    SchemeConfig cfg;
    cfg.dt = o.dt;
    cfg.scheme = parse_scheme(o.scheme);
    cfg.solver_tol = o.solver_tol;
    cfg.validate();
    const BoundaryCondition bc = resolve_boundary(BoundaryKind::automatic, 0.0, surface);
    const StabilityReport report =
        perturbation_experiment(surface, cfg, bc, {o.trials, o.seed, o.spike_vertex});
    const double slack = contraction_slack(cfg);
    write_rows(report.rows(slack), o.report, out);
    const bool ok = report.contracts(slack);
    err << "contraction " << o.scheme << " dt=" << number(o.dt) << ": max ratio " << number(report.max_ratio())
        << " (limit " << number(1.0 + slack) << ") " << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kOk : kPropertyFailed;
}

int verify_max_principle(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
    const SimplicialSurface surface = mesh_or_default(o.mesh, 20);
    SchemeConfig cfg;
    cfg.dt = o.dt;
    cfg.scheme = parse_scheme(o.scheme);
    cfg.solver_tol = o.solver_tol;
    cfg.validate();
    if (o.steps < 0) {
        throw ConfigError("--steps must be non-negative");
    }
    const BoundaryCondition bc = resolve_boundary(BoundaryKind::automatic, 0.0, surface);
    const Vector initial = initial_field("random", surface.vertex_count(), o.seed);
    double lower = initial.minCoeff();
    double upper = initial.maxCoeff();
    for (double v : bc.values) {
        lower = std::min(lower, v);
        upper = std::max(upper, v);
    }
    RunOptions options;
    options.n_steps = o.steps;
    std::optional<std::vector<SimState>> snapshots;
    std::string failure;
    try {
        snapshots = run(surface, cfg, SourceModel::none(), bc, initial, options);
    } catch (const NumericalError& e) {
        failure = e.what();
    }
    const double tol = 10.0 * cfg.solver_tol;
    MaxPrincipleResult result;
    double excursion = 0.0;
    if (snapshots) {
        result = max_principle_check(*snapshots, lower, upper, tol);
        for (const auto& s : *snapshots) {
            excursion = std::max({excursion, lower - s.psi.minCoeff(), s.psi.maxCoeff() - upper});
        }
    } else {
        result = {false, -1, -1, std::numeric_limits<double>::infinity()};
        excursion = std::numeric_limits<double>::infinity();
    }
    ReportRow row;
    row.scheme = cfg.scheme;
    row.dt = cfg.dt;
    row.h = surface.mean_edge_length();
    row.steps = result.pass ? o.steps : result.step;
    row.max_error = excursion;
    row.pass = result.pass;
    write_rows({row}, o.report, out);
    if (result.pass) {
        err << "max principle " << o.scheme << " dt=" << number(o.dt) << ": PASS\n";
    } else if (!failure.empty()) {
        err << "max principle " << o.scheme << ": FAIL (" << failure << ")\n";
    } else {
        err << "max principle " << o.scheme << ": FAIL at step " << result.step << " vertex " << result.vertex
            << " value " << number(result.value) << " outside [" << number(lower) << ", " << number(upper) << "]\n";
    }
    return result.pass ? kOk : kPropertyFailed;
}

int verify_convergence(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
    const SchemeKind scheme = parse_scheme(o.scheme);
    struct Sweep {
        std::string name;
        std::vector<int> cells;
        std::vector<double> dts;
    };
    std::vector<Sweep> sweeps;
    if (!o.cells.empty() || !o.dts.empty()) {
        if (o.cells.empty() || o.dts.empty()) {
            throw ConfigError("--cells and --dts must be given together");
        }
        sweeps.push_back({"custom", o.cells, o.dts});
    } else {
        if (o.sweep != "all" && o.sweep != "temporal" && o.sweep != "spatial" && o.sweep != "path") {
            throw ConfigError("--sweep must be temporal, spatial, path or all");
        }
        if (o.sweep == "all" || o.sweep == "temporal") {
            sweeps.push_back({"temporal", {64}, {1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4}});
        }
        if (o.sweep == "all" || o.sweep == "spatial") {
            sweeps.push_back({"spatial", {4, 8, 16, 32}, {2e-5}});
        }
        if (o.sweep == "all" || o.sweep == "path") {
            sweeps.push_back({"path", {8, 16, 32}, {1.25e-2, 6.25e-3, 3.125e-3}});
        }
    }
    std::vector<ReportRow> rows;
    bool ok = true;
    for (const Sweep& s : sweeps) {
        const ConvergenceReport report = convergence_study(s.cells, s.dts, scheme);
        const auto r = report.rows();
        rows.insert(rows.end(), r.begin(), r.end());
        const bool monotone = report.monotone_decreasing();
        ok = ok && monotone;
        err << "convergence " << s.name << ' ' << o.scheme << ": fitted order " << number(report.fitted_order)
            << (monotone ? " monotone PASS" : " not monotone FAIL") << '\n';
    }
    write_rows(rows, o.report, out);
    return ok ? kOk : kPropertyFailed;
}

struct GenerateOptions {
    std::string kind;
    std::string out;
    int cells = 20;
    std::uint64_t seed = 1;
    double side = 1.0;
    double major = 3.0;
    double minor = 1.0;
    int n_major = 48;
    int n_minor = 16;
};

int generate(const GenerateOptions& g, std::ostream& err) {
    std::optional<SimplicialSurface> mesh;
    if (g.kind == "triangle") {
        mesh = meshgen::single_triangle();
    } else if (g.kind == "hex") {
        mesh = meshgen::hex_patch(g.side);
    } else if (g.kind == "square") {
        mesh = meshgen::unit_square(g.cells);
    } else if (g.kind == "delaunay") {
        mesh = meshgen::delaunay_square(g.cells, g.seed);
    } else if (g.kind == "torus") {
        mesh = meshgen::torus(g.major, g.minor, g.n_major, g.n_minor);
    } else {
        throw ConfigError("unknown mesh kind '" + g.kind + "'");
    }
    save_obj_file(*mesh, g.out);
    err << "wrote " << g.out << ": " << mesh->vertex_count() << " vertices, " << mesh->triangle_count()
        << " triangles\n";
    return kOk;
}

int dispatch(CLI::App& app, const std::vector<const char*>& argv, std::ostream& out, std::ostream& err) {
    RunConfig run_cfg;
    std::string scheme_name = "semi_implicit";
    std::string source_name = "none";
    std::string boundary_name = "auto";

    app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
    app.add_option("--mesh", run_cfg.mesh_path, "input OBJ mesh");
    app.add_option("--scheme", scheme_name, "explicit, implicit or semi_implicit")->capture_default_str();
    app.add_option("--dt", run_cfg.dt, "time step")->capture_default_str();
    app.add_option("--steps", run_cfg.n_steps, "number of time steps")->capture_default_str();
    app.add_option("--stride", run_cfg.snapshot_stride, "export every N steps")->capture_default_str();
    app.add_option("--rho", run_cfg.params.rho, "density")->capture_default_str();
    app.add_option("--c", run_cfg.params.c, "specific heat")->capture_default_str();
    app.add_option("--k", run_cfg.params.k, "thermal conductivity")->capture_default_str();
    app.add_option("--source", source_name, "none, paper_sqrt (sqrt(t/500)) or constant")->capture_default_str();
    app.add_option("--source-vertex", run_cfg.source_vertices, "source vertex ids")->capture_default_str();
    app.add_option("--source-value", run_cfg.source_value, "amplitude for --source constant")->capture_default_str();
    app.add_option("--boundary", boundary_name, "auto, closed or dirichlet")->capture_default_str();
    app.add_option("--boundary-value", run_cfg.boundary_value, "Dirichlet value")->capture_default_str();
    app.add_option("--initial", run_cfg.initial, "zero, random or a constant")->capture_default_str();
    app.add_option("--solver-tol", run_cfg.solver_tol, "CG relative residual tolerance")->capture_default_str();
    app.add_option("--solver-max-iter", run_cfg.solver_max_iter, "CG iteration cap (0 = 10 V)")->capture_default_str();
    app.add_flag("--strict-mesh", run_cfg.strict_mesh, "reject meshes with negative dual lengths");
    app.add_flag("--dump-operators", run_cfg.dump_operators, "write stiffness_coo.txt and mass.txt");
    app.add_option("--out", run_cfg.output_dir, "output directory")->capture_default_str();
    app.add_option("--seed", run_cfg.seed, "seed for --initial random")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "check stability, maximum principle or convergence");
    verify->require_subcommand(1);
    VerifyOptions vo;
    auto add_common = [&vo](CLI::App* sub) {
        sub->add_option("--scheme", vo.scheme, "explicit, implicit or semi_implicit")->capture_default_str();
        sub->add_option("--solver-tol", vo.solver_tol)->capture_default_str();
        sub->add_option("--report", vo.report, "write CSV here instead of stdout");
    };
    auto* contraction = verify->add_subcommand("contraction", "perturbation growth over one step");
    add_common(contraction);
    contraction->add_option("--dt", vo.dt)->capture_default_str();
    contraction->add_option("--trials", vo.trials)->capture_default_str();
    contraction->add_option("--seed", vo.seed)->capture_default_str();
    contraction->add_option("--mesh", vo.mesh, "OBJ mesh (default: 20x20 unit square)");
    contraction->add_option("--spike-vertex", vo.spike_vertex, "perturb a single vertex");
    auto* maxp = verify->add_subcommand("maxprinciple", "bounds of a source-free run");
    add_common(maxp);
    maxp->add_option("--dt", vo.dt)->capture_default_str();
    maxp->add_option("--steps", vo.steps)->capture_default_str();
    maxp->add_option("--seed", vo.seed)->capture_default_str();
    maxp->add_option("--mesh", vo.mesh, "OBJ mesh (default: 20x20 unit square)");
    auto* conv = verify->add_subcommand("convergence", "error against the analytic unit-square solution");
    add_common(conv);
    conv->add_option("--sweep", vo.sweep, "temporal, spatial, path or all")->capture_default_str();
    conv->add_option("--cells", vo.cells, "custom resolutions");
    conv->add_option("--dts", vo.dts, "custom time steps");

    auto* gen = app.add_subcommand("generate", "write a test mesh as OBJ");
    GenerateOptions go;
    gen->add_option("kind", go.kind, "triangle, hex, square, delaunay or torus")->required();
    gen->add_option("--out", go.out, "output OBJ path")->required();
    gen->add_option("--cells", go.cells)->capture_default_str();
    gen->add_option("--seed", go.seed)->capture_default_str();
    gen->add_option("--side", go.side)->capture_default_str();
    gen->add_option("--major", go.major)->capture_default_str();
    gen->add_option("--minor", go.minor)->capture_default_str();
    gen->add_option("--n-major", go.n_major)->capture_default_str();
    gen->add_option("--n-minor", go.n_minor)->capture_default_str();

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    if (*contraction) {
        return verify_contraction(vo, out, err);
    }
    if (*maxp) {
        return verify_max_principle(vo, out, err);
    }
    if (*conv) {
        return verify_convergence(vo, out, err);
    }
    if (*gen) {
        return generate(go, err);
    }

    run_cfg.scheme = parse_scheme(scheme_name);
    static const std::map<std::string, SourceKind> sources{
        {"none", SourceKind::none}, {"paper_sqrt", SourceKind::sqrt_ramp}, {"constant", SourceKind::constant}};
    static const std::map<std::string, BoundaryKind> boundaries{
        {"auto", BoundaryKind::automatic}, {"closed", BoundaryKind::closed}, {"dirichlet", BoundaryKind::dirichlet}};
    if (!sources.count(source_name)) {
        throw ConfigError("unknown source '" + source_name + "'");
    }
    if (!boundaries.count(boundary_name)) {
        throw ConfigError("unknown boundary '" + boundary_name + "'");
    }
    run_cfg.source = sources.at(source_name);
    run_cfg.boundary = boundaries.at(boundary_name);
    execute_run(run_cfg, err);
    return kOk;
}

} // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Heat diffusion on triangulated surfaces with DEC schemes", "decheat"};
    std::vector<const char*> args(argv, argv + argc);
    try {
        return dispatch(app, args, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const MeshError& e) {
        err << "mesh error: " << e.what() << '\n';
        return kMeshError;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return kSolverError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kSolverError;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
}

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"decheat"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return main(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace decheat::cli
