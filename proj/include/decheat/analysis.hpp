#pragma once

#include "decheat/schemes.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace decheat {

/// One row of an analysis report. Fields that do not apply to a given
/// experiment are left as NaN and serialized as empty CSV cells.
struct ReportRow {
    SchemeKind scheme = SchemeKind::implicit;
    double dt = 0.0;
    double h = 0.0;
    std::int64_t steps = 0;
    double max_error = std::numeric_limits<double>::quiet_NaN();
    double ratio = std::numeric_limits<double>::quiet_NaN();
    bool pass = true;
    double order = std::numeric_limits<double>::quiet_NaN();
};

/// CSV with header scheme,dt,h,steps,max_error,ratio,pass,order.
void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out);

// ---------------------------------------------------------------------------
// Perturbation growth

struct PerturbationOptions {
    int trials = 100;
    std::uint64_t seed = 1;
    /// Perturb only this vertex (by 1) instead of random values in [-1, 1].
    std::optional<Index> spike_vertex;
};

struct StabilityTrial {
    double dt = 0.0;
    double max_field = 0.0;
    /// max|eps^1| / max|eps^0|, 0 when eps^0 vanishes.
    double ratio = 0.0;
};

struct StabilityReport {
    SchemeKind scheme = SchemeKind::implicit;
    double h = 0.0;
    std::vector<StabilityTrial> trials;

    double max_ratio() const;
    /// Every ratio <= 1 + slack.
    bool contracts(double slack) const;
    std::vector<ReportRow> rows(double slack) const;
};

/// Ratio between the largest perturbation after and before one step.
double contraction_ratio(const Vector& before, const Vector& after);

/// For each trial, draws a base field in [0, 1] and a perturbation (zero on
/// Dirichlet vertices), advances both one step with no source and reports the
/// growth of the perturbation's max norm.
StabilityReport perturbation_experiment(const SimplicialSurface& surface, const SchemeConfig& config,
                                        const BoundaryCondition& boundary, const PerturbationOptions& options);

/// Contraction slack allowed at a given solver tolerance: 0 for the direct
/// schemes, 10 * tol for the implicit one.
double contraction_slack(const SchemeConfig& config);

// ---------------------------------------------------------------------------
// Maximum principle

struct MaxPrincipleResult {
    bool pass = true;
    std::int64_t step = -1;
    Index vertex = -1;
    double value = 0.0;
};

/// Passes iff every snapshot stays in [lower - tol, upper + tol]; otherwise
/// reports the first offending snapshot step and vertex.
MaxPrincipleResult max_principle_check(const std::vector<SimState>& snapshots, double lower, double upper, double tol);

// ---------------------------------------------------------------------------
// Convergence on the unit square

/// exp(-2 pi^2 k t / (rho c)) sin(pi x) sin(pi y).
double analytic_solution(double x, double y, double t, const PhysicalParams& params = {});

struct ConvergenceRun {
    int cells = 0;
    double h = 0.0;
    double dt = 0.0;
    std::int64_t steps = 0;
    double max_error = 0.0;
};

struct ConvergenceReport {
    SchemeKind scheme = SchemeKind::implicit;
    double final_time = 0.0;
    std::vector<ConvergenceRun> runs;
    /// Order between consecutive runs, against h when h varies, else against dt.
    std::vector<double> observed_orders;
    /// Least-squares slope of log(error) over the same axis.
    double fitted_order = 0.0;

    bool monotone_decreasing() const;
    std::vector<ReportRow> rows() const;
};

struct ConvergenceOptions {
    double final_time = 0.1;
    PhysicalParams params;
    double solver_tol = 1e-12;
};

/// Runs the scheme on unit_square(cells) with zero Dirichlet data, no source
/// and psi0 = sin(pi x) sin(pi y), comparing to analytic_solution at the final
/// time in the max norm.
///
/// One resolution and several time steps gives a temporal sweep, one time
/// step and several resolutions a spatial sweep, and equal-length lists a
/// joint refinement path. final_time must be an integer multiple of every dt.
ConvergenceReport convergence_study(const std::vector<int>& resolutions, const std::vector<double>& time_steps,
                                    SchemeKind scheme, const ConvergenceOptions& options = {});

} // namespace decheat
