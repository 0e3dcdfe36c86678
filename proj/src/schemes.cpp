#include "decheat/schemes.hpp"

#include "decheat/errors.hpp"
#include "decheat/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace decheat {

std::string_view to_string(SchemeKind kind) {
    switch (kind) {
    case SchemeKind::explicit_euler:
        return "explicit";
    case SchemeKind::implicit:
        return "implicit";
    case SchemeKind::semi_implicit:
        return "semi_implicit";
    }
    return "unknown";
}

SchemeKind parse_scheme(std::string_view name) {
    if (name == "explicit") {
        return SchemeKind::explicit_euler;
    }
    if (name == "implicit") {
        return SchemeKind::implicit;
    }
    if (name == "semi_implicit") {
        return SchemeKind::semi_implicit;
    }
    throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

void SchemeConfig::validate() const {
    if (!(params.rho > 0.0 && params.c > 0.0 && params.k > 0.0) ||
        !std::isfinite(params.rho * params.c * params.k)) {
        throw ConfigError("rho, c and k must be positive");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("time step must be positive, got " + std::to_string(dt));
    }
    if (!(solver_tol > 0.0 && solver_tol < 1.0)) {
        throw ConfigError("solver tolerance must lie in (0, 1)");
    }
    if (solver_max_iter < 0) {
        throw ConfigError("solver max iterations must be positive");
    }
}

SourceModel SourceModel::none() {
    return {};
}

SourceModel SourceModel::constant(std::vector<Index> vertices, double q) {
    return {std::move(vertices), [q](double) { return q; }};
}

SourceModel SourceModel::sqrt_ramp(std::vector<Index> vertices) {
    return {std::move(vertices), [](double t) { return std::sqrt(t / 500.0); }};
}

BoundaryCondition BoundaryCondition::closed() {
    return {};
}

BoundaryCondition BoundaryCondition::dirichlet(const SimplicialSurface& surface, double value) {
    return dirichlet(surface, std::vector<double>(surface.boundary_vertices().size(), value));
}

BoundaryCondition BoundaryCondition::dirichlet(const SimplicialSurface& surface, std::vector<double> values) {
    BoundaryCondition bc{Kind::dirichlet, surface.boundary_vertices(), std::move(values)};
    bc.validate(surface);
    return bc;
}

void BoundaryCondition::validate(const SimplicialSurface& surface) const {
    if (kind == Kind::none) {
        if (!surface.is_closed()) {
            throw ConfigError("mesh has " + std::to_string(surface.boundary_vertices().size()) +
                              " boundary vertices; a closed-mesh boundary condition needs none");
        }
        return;
    }
    if (vertices != surface.boundary_vertices()) {
        throw ConfigError("Dirichlet vertices must be exactly the mesh boundary vertices");
    }
    if (values.size() != vertices.size()) {
        throw ConfigError("Dirichlet condition needs one value per boundary vertex");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ConfigError("Dirichlet values must be finite");
        }
    }
}

Vector apply_source(const SimState& state, const SourceModel& source, const SchemeConfig& config, Index vertex_count) {
    if (state.time < 0.0) {
        throw ConfigError("source evaluated at negative time");
    }
    Vector increment = Vector::Zero(vertex_count);
    if (source.empty()) {
        return increment;
    }
    const double q = source.amplitude(state.time);
    if (!std::isfinite(q)) {
        throw NumericalError("source amplitude is not finite at t = " + std::to_string(state.time));
    }
    const double value = config.dt / config.params.c * config.params.rho * q;
    for (Index v : source.vertices) {
        if (v < 0 || v >= vertex_count) {
            throw ConfigError("source vertex " + std::to_string(v) + " out of range");
        }
        increment[v] = value;
    }
    return increment;
}

HeatStepper::HeatStepper(const LaplaceOperator& laplacian, SchemeConfig config, SourceModel source,
                         BoundaryCondition boundary)
    : laplacian_(laplacian), config_(config), source_(std::move(source)), boundary_(std::move(boundary)) {
    config_.validate();
    const Index n = laplacian_.size();
    if (laplacian_.stiffness.rows() != n || laplacian_.stiffness.cols() != n) {
        throw ConfigError("stiffness and mass sizes disagree");
    }
    if (boundary_.values.size() != boundary_.vertices.size()) {
        throw ConfigError("Dirichlet condition needs one value per vertex");
    }
    for (Index v : source_.vertices) {
        if (v < 0 || v >= n) {
            throw ConfigError("source vertex " + std::to_string(v) + " out of range");
        }
    }
    negative_weights_ = laplacian_.negative_weight_count();
    max_iter_ = config_.solver_max_iter > 0 ? config_.solver_max_iter : std::max(10 * n, 10);

    free_of_vertex_.assign(static_cast<std::size_t>(n), 0);
    fixed_values_ = Vector::Zero(static_cast<Eigen::Index>(boundary_.vertices.size()));
    std::vector<Index> fixed_of_vertex(static_cast<std::size_t>(n), -1);
    if (boundary_.kind == BoundaryCondition::Kind::dirichlet) {
        for (std::size_t k = 0; k < boundary_.vertices.size(); ++k) {
            const Index v = boundary_.vertices[k];
            if (v < 0 || v >= n) {
                throw ConfigError("Dirichlet vertex " + std::to_string(v) + " out of range");
            }
            free_of_vertex_[static_cast<std::size_t>(v)] = -1;
            fixed_of_vertex[static_cast<std::size_t>(v)] = static_cast<Index>(k);
            fixed_values_[static_cast<Eigen::Index>(k)] = boundary_.values[k];
        }
    }
    for (Index v = 0; v < n; ++v) {
        if (free_of_vertex_[static_cast<std::size_t>(v)] == 0) {
            free_of_vertex_[static_cast<std::size_t>(v)] = static_cast<Index>(free_vertices_.size());
            free_vertices_.push_back(v);
        }
    }

    if (config_.scheme != SchemeKind::implicit) {
        return;
    }
    const double alpha = config_.params.diffusivity() * config_.dt;
    const auto nf = static_cast<Index>(free_vertices_.size());
    const auto nb = static_cast<Index>(boundary_.vertices.size());
    std::vector<Eigen::Triplet<double, Index>> sys;
    std::vector<Eigen::Triplet<double, Index>> cpl;
    for (Index f = 0; f < nf; ++f) {
        const Index v = free_vertices_[static_cast<std::size_t>(f)];
        sys.emplace_back(f, f, laplacian_.mass[v]);
        for (SparseMatrix::InnerIterator it(laplacian_.stiffness, v); it; ++it) {
            const auto col = static_cast<Index>(it.col());
            const double entry = -alpha * it.value();
            if (const Index g = free_of_vertex_[static_cast<std::size_t>(col)]; g >= 0) {
                sys.emplace_back(f, g, entry);
            } else {
                cpl.emplace_back(f, fixed_of_vertex[static_cast<std::size_t>(col)], entry);
            }
        }
    }
    system_ = SparseMatrix(nf, nf);
    system_.setFromTriplets(sys.begin(), sys.end());
    system_.makeCompressed();
    coupling_ = SparseMatrix(nf, nb);
    coupling_.setFromTriplets(cpl.begin(), cpl.end());
    coupling_.makeCompressed();
}

void HeatStepper::impose_boundary(Vector& psi) const {
    for (std::size_t k = 0; k < boundary_.vertices.size(); ++k) {
        psi[boundary_.vertices[k]] = boundary_.values[k];
    }
}

void HeatStepper::check_finite(const Vector& psi, std::int64_t step) const {
    if (!psi.allFinite()) {
        throw NumericalError(std::string(to_string(config_.scheme)) + " step " + std::to_string(step) +
                             " produced a non-finite temperature (unstable time step?)");
    }
}

SimState HeatStepper::step(const SimState& state) const {
    if (state.psi.size() != laplacian_.size()) {
        throw ConfigError("state has " + std::to_string(state.psi.size()) + " values for " +
                          std::to_string(laplacian_.size()) + " vertices");
    }
    const Vector source = apply_source(state, source_, config_, laplacian_.size());
    // Dirichlet vertices always read as their prescribed values, whatever the input holds.
    SimState current = state;
    impose_boundary(current.psi);
    switch (config_.scheme) {
    case SchemeKind::explicit_euler:
        return step_explicit(current, source);
    case SchemeKind::implicit:
        return step_implicit(current, source);
    case SchemeKind::semi_implicit:
        return step_semi_implicit(current, source);
    }
    throw ConfigError("unknown scheme");
}

SimState HeatStepper::step_explicit(const SimState& state, const Vector& source) const {
    const double alpha = config_.params.diffusivity() * config_.dt;
    SimState next{state.psi + alpha * laplacian_.apply(state.psi) + source, state.time + config_.dt, state.step + 1};
    impose_boundary(next.psi);
    check_finite(next.psi, next.step);
    return next;
}

SimState HeatStepper::step_implicit(const SimState& state, const Vector& source) const {
    const auto nf = static_cast<Eigen::Index>(free_vertices_.size());
    Vector rhs(nf);
    Vector guess(nf);
    for (Eigen::Index f = 0; f < nf; ++f) {
        const Index v = free_vertices_[static_cast<std::size_t>(f)];
        rhs[f] = laplacian_.mass[v] * (state.psi[v] + source[v]);
        guess[f] = state.psi[v];
    }
    if (coupling_.nonZeros() > 0) {
        rhs -= coupling_ * fixed_values_;
    }
    SimState next{Vector::Zero(state.psi.size()), state.time + config_.dt, state.step + 1};
    if (nf > 0) {
        const CgResult solved = cg_solve(system_, rhs, config_.solver_tol, max_iter_, guess);
        for (Eigen::Index f = 0; f < nf; ++f) {
            next.psi[free_vertices_[static_cast<std::size_t>(f)]] = solved.x[f];
        }
    }
    impose_boundary(next.psi);
    check_finite(next.psi, next.step);
    return next;
}

SimState HeatStepper::step_semi_implicit(const SimState& state, const Vector& source) const {
    const double alpha = config_.params.diffusivity() * config_.dt;
    SimState next{state.psi, state.time + config_.dt, state.step + 1};
    for (Index v : free_vertices_) {
        const double centre = state.psi[v];
        double weight_sum = 0.0;
        double flux = 0.0;
        for (SparseMatrix::InnerIterator it(laplacian_.stiffness, v); it; ++it) {
            if (it.col() == v) {
                continue;
            }
            weight_sum += it.value();
            flux += it.value() * (state.psi[it.col()] - centre);
        }
        const double a = alpha / laplacian_.mass[v];
        const double denom = 1.0 + a * weight_sum;
        if (!(denom > 0.0)) {
            throw NumericalError("semi-implicit denominator at vertex " + std::to_string(v) +
                                 " is non-positive (negative weights)");
        }
        next.psi[v] = centre + (a * flux + source[v]) / denom;
    }
    impose_boundary(next.psi);
    check_finite(next.psi, next.step);
    return next;
}

SimState step_explicit(const SimState& state, const LaplaceOperator& laplacian, const SchemeConfig& config,
                       const SourceModel& source, const BoundaryCondition& boundary) {
    SchemeConfig cfg = config;
    cfg.scheme = SchemeKind::explicit_euler;
    return HeatStepper(laplacian, cfg, source, boundary).step(state);
}

SimState step_implicit(const SimState& state, const LaplaceOperator& laplacian, const SchemeConfig& config,
                       const SourceModel& source, const BoundaryCondition& boundary) {
    SchemeConfig cfg = config;
    cfg.scheme = SchemeKind::implicit;
    return HeatStepper(laplacian, cfg, source, boundary).step(state);
}

SimState step_semi_implicit(const SimState& state, const LaplaceOperator& laplacian, const SchemeConfig& config,
                            const SourceModel& source, const BoundaryCondition& boundary) {
    SchemeConfig cfg = config;
    cfg.scheme = SchemeKind::semi_implicit;
    return HeatStepper(laplacian, cfg, source, boundary).step(state);
}

std::vector<SimState> run(const SimplicialSurface& surface, const SchemeConfig& config, const SourceModel& source,
                          const BoundaryCondition& boundary, const Vector& initial, const RunOptions& options) {
    boundary.validate(surface);
    const LaplaceOperator laplacian = assemble_laplacian(surface, build_metrics(surface, options.metrics));
    return run(laplacian, config, source, boundary, initial, options);
}

std::vector<SimState> run(const LaplaceOperator& laplacian, const SchemeConfig& config, const SourceModel& source,
                          const BoundaryCondition& boundary, const Vector& initial, const RunOptions& options) {
    if (options.n_steps < 0 || options.snapshot_stride < 1) {
        throw ConfigError("need n_steps >= 0 and snapshot_stride >= 1");
    }
    if (initial.size() != laplacian.size()) {
        throw ConfigError("initial field size does not match the mesh");
    }
    const HeatStepper stepper(laplacian, config, source, boundary);
    std::vector<SimState> snapshots;
    auto record = [&](const SimState& s) {
        snapshots.push_back(s);
        if (options.on_snapshot) {
            options.on_snapshot(s);
        }
    };

    // Two-slot buffer: current and next.
    SimState current{initial, 0.0, 0};
    record(current);
    for (std::int64_t n = 1; n <= options.n_steps; ++n) {
        SimState next = stepper.step(current);
        current = std::move(next);
        if (n % options.snapshot_stride == 0 || n == options.n_steps) {
            record(current);
        }
    }
    return snapshots;
}

} // namespace decheat
