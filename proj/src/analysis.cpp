#include "decheat/analysis.hpp"

#include "decheat/errors.hpp"
#include "decheat/meshgen.hpp"
#include "decheat/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace decheat {

namespace {

void put_number(std::ostringstream& out, double value) {
    if (std::isnan(value)) {
        return;
    }
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    (void)ec;
    out.write(buf, end - buf);
}

double max_abs(const Vector& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

std::vector<double> pairwise_orders(const std::vector<double>& axis, const std::vector<double>& errors) {
    std::vector<double> orders;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        orders.push_back(std::log(errors[k] / errors[k + 1]) / std::log(axis[k] / axis[k + 1]));
    }
    return orders;
}

double least_squares_slope(const std::vector<double>& axis, const std::vector<double>& errors) {
    const auto n = static_cast<double>(axis.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < axis.size(); ++k) {
        const double x = std::log(axis[k]);
        const double y = std::log(errors[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

} // namespace

void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
    std::ostringstream buf;
    buf << "scheme,dt,h,steps,max_error,ratio,pass,order\n";
    for (const ReportRow& r : rows) {
        buf << to_string(r.scheme) << ',';
        put_number(buf, r.dt);
        buf << ',';
        put_number(buf, r.h);
        buf << ',' << r.steps << ',';
        put_number(buf, r.max_error);
        buf << ',';
        put_number(buf, r.ratio);
        buf << ',' << (r.pass ? "true" : "false") << ',';
        put_number(buf, r.order);
        buf << '\n';
    }
    out << buf.str();
    if (!out) {
        throw IoError("failed writing report");
    }
}

// ---------------------------------------------------------------------------

double StabilityReport::max_ratio() const {
    double worst = 0.0;
    for (const auto& t : trials) {
        worst = std::max(worst, t.ratio);
    }
    return worst;
}

bool StabilityReport::contracts(double slack) const {
    return std::all_of(trials.begin(), trials.end(), [slack](const StabilityTrial& t) { return t.ratio <= 1.0 + slack; });
}

std::vector<ReportRow> StabilityReport::rows(double slack) const {
    std::vector<ReportRow> out;
    for (const auto& t : trials) {
        ReportRow row;
        row.scheme = scheme;
        row.dt = t.dt;
        row.h = h;
        row.steps = 1;
        row.ratio = t.ratio;
        row.pass = t.ratio <= 1.0 + slack;
        out.push_back(row);
    }
    return out;
}

double contraction_ratio(const Vector& before, const Vector& after) {
    const double denom = max_abs(before);
    return denom == 0.0 ? 0.0 : max_abs(after) / denom;
}

double contraction_slack(const SchemeConfig& config) {
    return config.scheme == SchemeKind::implicit ? 10.0 * config.solver_tol : 0.0;
}

StabilityReport perturbation_experiment(const SimplicialSurface& surface, const SchemeConfig& config,
                                        const BoundaryCondition& boundary, const PerturbationOptions& options) {
    if (options.trials < 0) {
        throw ConfigError("trials must be non-negative");
    }
    boundary.validate(surface);
    const LaplaceOperator laplacian = assemble_laplacian(surface, build_metrics(surface));
    const HeatStepper stepper(laplacian, config, SourceModel::none(), boundary);
    const Index n = surface.vertex_count();
    if (options.spike_vertex && (*options.spike_vertex < 0 || *options.spike_vertex >= n)) {
        throw ConfigError("spike vertex out of range");
    }

    std::vector<std::uint8_t> fixed(static_cast<std::size_t>(n), 0);
    for (Index v : boundary.vertices) {
        fixed[static_cast<std::size_t>(v)] = 1;
    }

    StabilityReport report;
    report.scheme = config.scheme;
    report.h = surface.mean_edge_length();
    Rng rng(options.seed);
    for (int trial = 0; trial < options.trials; ++trial) {
        SimState base{Vector(n)};
        Vector eps = Vector::Zero(n);
        for (Index v = 0; v < n; ++v) {
            base.psi[v] = rng.uniform();
        }
        for (std::size_t k = 0; k < boundary.vertices.size(); ++k) {
            base.psi[boundary.vertices[k]] = boundary.values[k];
        }
        if (options.spike_vertex) {
            if (!fixed[static_cast<std::size_t>(*options.spike_vertex)]) {
                eps[*options.spike_vertex] = 1.0;
            }
        } else {
            for (Index v = 0; v < n; ++v) {
                if (!fixed[static_cast<std::size_t>(v)]) {
                    eps[v] = rng.uniform(-1.0, 1.0);
                }
            }
        }
        const SimState perturbed{base.psi + eps};
        const SimState next_base = stepper.step(base);
        const SimState next_perturbed = stepper.step(perturbed);
        report.trials.push_back({config.dt, max_abs(next_base.psi),
                                 contraction_ratio(eps, next_perturbed.psi - next_base.psi)});
    }
    return report;
}

// ---------------------------------------------------------------------------

MaxPrincipleResult max_principle_check(const std::vector<SimState>& snapshots, double lower, double upper, double tol) {
    for (const SimState& s : snapshots) {
        for (Eigen::Index v = 0; v < s.psi.size(); ++v) {
            const double value = s.psi[v];
            if (!(value >= lower - tol && value <= upper + tol)) {
                return {false, s.step, static_cast<Index>(v), value};
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------

double analytic_solution(double x, double y, double t, const PhysicalParams& params) {
    constexpr double pi = std::numbers::pi;
    return std::exp(-2.0 * pi * pi * params.k * t / (params.rho * params.c)) * std::sin(pi * x) * std::sin(pi * y);
}

bool ConvergenceReport::monotone_decreasing() const {
    for (std::size_t k = 1; k < runs.size(); ++k) {
        if (!(runs[k].max_error < runs[k - 1].max_error)) {
            return false;
        }
    }
    return true;
}

std::vector<ReportRow> ConvergenceReport::rows() const {
    std::vector<ReportRow> out;
    const bool monotone = monotone_decreasing();
    for (std::size_t k = 0; k < runs.size(); ++k) {
        ReportRow row;
        row.scheme = scheme;
        row.dt = runs[k].dt;
        row.h = runs[k].h;
        row.steps = runs[k].steps;
        row.max_error = runs[k].max_error;
        if (k > 0) {
            row.ratio = runs[k].max_error / runs[k - 1].max_error;
            row.order = observed_orders[k - 1];
        }
        row.pass = monotone;
        out.push_back(row);
    }
    return out;
}

ConvergenceReport convergence_study(const std::vector<int>& resolutions, const std::vector<double>& time_steps,
                                    SchemeKind scheme, const ConvergenceOptions& options) {
    const std::size_t n = std::max(resolutions.size(), time_steps.size());
    const bool paired = resolutions.size() == time_steps.size();
    if (resolutions.empty() || time_steps.empty() ||
        (!paired && resolutions.size() != 1 && time_steps.size() != 1)) {
        throw ConfigError("convergence study needs one resolution, one time step, or equal-length lists");
    }
    if (!(options.final_time > 0.0)) {
        throw ConfigError("final time must be positive");
    }

    ConvergenceReport report;
    report.scheme = scheme;
    report.final_time = options.final_time;
    for (std::size_t k = 0; k < n; ++k) {
        const int cells = resolutions[resolutions.size() == 1 ? 0 : k];
        const double dt = time_steps[time_steps.size() == 1 ? 0 : k];
        const double exact_steps = options.final_time / dt;
        const auto steps = static_cast<std::int64_t>(std::llround(exact_steps));
        if (steps < 1 || std::abs(exact_steps - static_cast<double>(steps)) > 1e-9 * exact_steps) {
            throw ConfigError("final time is not a multiple of dt = " + std::to_string(dt));
        }

        const SimplicialSurface mesh = meshgen::unit_square(cells);
        Vector initial(mesh.vertex_count());
        for (Index v = 0; v < mesh.vertex_count(); ++v) {
            const Vec3& p = mesh.vertices()[static_cast<std::size_t>(v)];
            initial[v] = analytic_solution(p.x(), p.y(), 0.0, options.params);
        }
        SchemeConfig cfg;
        cfg.params = options.params;
        cfg.dt = dt;
        cfg.scheme = scheme;
        cfg.solver_tol = options.solver_tol;
        RunOptions run_options;
        run_options.n_steps = steps;
        run_options.snapshot_stride = steps;
        const auto snapshots =
            run(mesh, cfg, SourceModel::none(), BoundaryCondition::dirichlet(mesh, 0.0), initial, run_options);
        const SimState& last = snapshots.back();

        double err = 0.0;
        for (Index v = 0; v < mesh.vertex_count(); ++v) {
            const Vec3& p = mesh.vertices()[static_cast<std::size_t>(v)];
            err = std::max(err, std::abs(last.psi[v] - analytic_solution(p.x(), p.y(), last.time, options.params)));
        }
        report.runs.push_back({cells, 1.0 / cells, dt, steps, err});
    }

    std::vector<double> axis;
    std::vector<double> errors;
    for (const auto& r : report.runs) {
        axis.push_back(resolutions.size() > 1 ? r.h : r.dt);
        errors.push_back(r.max_error);
    }
    report.observed_orders = pairwise_orders(axis, errors);
    report.fitted_order = n > 1 ? least_squares_slope(axis, errors) : 0.0;
    return report;
}

} // namespace decheat
