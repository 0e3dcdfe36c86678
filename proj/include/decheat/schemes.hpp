#pragma once

#include "decheat/dec.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace decheat {

enum class SchemeKind { explicit_euler, implicit, semi_implicit };

std::string_view to_string(SchemeKind kind);
/// Accepts "explicit", "implicit", "semi_implicit". Throws ConfigError otherwise.
SchemeKind parse_scheme(std::string_view name);

/// Density, specific heat and conductivity of rho c dpsi/dt = k Lap psi + rho Q.
struct PhysicalParams {
    double rho = 1.0;
    double c = 1.0;
    double k = 1.0;

    double diffusivity() const noexcept { return k / (c * rho); }
};

struct SchemeConfig {
    PhysicalParams params;
    double dt = 1.0;
    SchemeKind scheme = SchemeKind::semi_implicit;
    double solver_tol = 1e-10;
    /// 0 selects 10 * vertex count.
    int solver_max_iter = 0;

    /// Throws ConfigError on non-positive physical constants, dt <= 0 or tol outside (0, 1).
    void validate() const;
};

struct SimState {
    Vector psi;
    double time = 0.0;
    std::int64_t step = 0;
};

/// Source vertices and a time-dependent amplitude Q(t).
struct SourceModel {
    std::vector<Index> vertices;
    std::function<double(double)> amplitude;

    static SourceModel none();
    static SourceModel constant(std::vector<Index> vertices, double q);
    /// Q(t) = sqrt(t / 500).
    static SourceModel sqrt_ramp(std::vector<Index> vertices);

    bool empty() const noexcept { return vertices.empty() || !amplitude; }
};

/// Either a closed mesh (no boundary at all) or fixed values on every boundary vertex.
struct BoundaryCondition {
    enum class Kind { none, dirichlet };

    Kind kind = Kind::none;
    /// Boundary vertex ids and their fixed values, in matching order.
    std::vector<Index> vertices;
    std::vector<double> values;

    static BoundaryCondition closed();
    static BoundaryCondition dirichlet(const SimplicialSurface& surface, double value);
    static BoundaryCondition dirichlet(const SimplicialSurface& surface, std::vector<double> values);

    /// Throws ConfigError when the condition does not match the surface's boundary.
    void validate(const SimplicialSurface& surface) const;
};

/// (dt / c) * rho * Q(t_n) on source vertices, zero elsewhere.
Vector apply_source(const SimState& state, const SourceModel& source, const SchemeConfig& config, Index vertex_count);

/// Advances one scheme over a fixed operator.
///
/// Construction precomputes the free/fixed vertex split and, for the implicit
/// scheme, the symmetric system M + alpha S restricted to free vertices
/// (M = diag(dual area), S = -stiffness, alpha = k dt / (c rho)). step() is
/// const and may be called from several threads.
class HeatStepper {
public:
    HeatStepper(const LaplaceOperator& laplacian, SchemeConfig config, SourceModel source, BoundaryCondition boundary);

    SimState step(const SimState& state) const;

    const SchemeConfig& config() const noexcept { return config_; }
    /// True when some off-diagonal weight is negative; the stability and
    /// maximum-principle guarantees then no longer hold.
    bool has_negative_weights() const noexcept { return negative_weights_ > 0; }

private:
    SimState step_explicit(const SimState& state, const Vector& source) const;
    SimState step_implicit(const SimState& state, const Vector& source) const;
    SimState step_semi_implicit(const SimState& state, const Vector& source) const;
    void impose_boundary(Vector& psi) const;
    void check_finite(const Vector& psi, std::int64_t step) const;

    LaplaceOperator laplacian_;
    SchemeConfig config_;
    SourceModel source_;
    BoundaryCondition boundary_;
    Index negative_weights_ = 0;
    int max_iter_ = 0;

    std::vector<Index> free_of_vertex_; // -1 on Dirichlet vertices
    std::vector<Index> free_vertices_;
    SparseMatrix system_;   // (M + alpha S) on free vertices
    SparseMatrix coupling_; // alpha S from fixed to free vertices
    Vector fixed_values_;
};

SimState step_explicit(const SimState& state, const LaplaceOperator& laplacian, const SchemeConfig& config,
                       const SourceModel& source, const BoundaryCondition& boundary);
SimState step_implicit(const SimState& state, const LaplaceOperator& laplacian, const SchemeConfig& config,
                       const SourceModel& source, const BoundaryCondition& boundary);
SimState step_semi_implicit(const SimState& state, const LaplaceOperator& laplacian, const SchemeConfig& config,
                            const SourceModel& source, const BoundaryCondition& boundary);

struct RunOptions {
    std::int64_t n_steps = 0;
    std::int64_t snapshot_stride = 1;
    MetricsOptions metrics;
    /// Called for every recorded snapshot, in order.
    std::function<void(const SimState&)> on_snapshot;
};

/// Builds metrics and operator from `surface`, then applies `config.scheme`
/// n_steps times. Records the initial state, every state whose step index is
/// a multiple of the stride, and the final state.
std::vector<SimState> run(const SimplicialSurface& surface, const SchemeConfig& config, const SourceModel& source,
                          const BoundaryCondition& boundary, const Vector& initial, const RunOptions& options);

/// Same loop over a prebuilt operator.
std::vector<SimState> run(const LaplaceOperator& laplacian, const SchemeConfig& config, const SourceModel& source,
                          const BoundaryCondition& boundary, const Vector& initial, const RunOptions& options);

} // namespace decheat
