#pragma once

#include "decheat/schemes.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace decheat::cli {

enum ExitCode : int {
    kOk = 0,
    kPropertyFailed = 1,
    kConfigError = 2,
    kMeshError = 3,
    kSolverError = 4,
    kIoError = 5,
};

enum class SourceKind { none, sqrt_ramp, constant };
enum class BoundaryKind { automatic, closed, dirichlet };

/// Everything a simulation run needs. Defaults follow rho = c = k = 1.
struct RunConfig {
    std::string mesh_path;
    SchemeKind scheme = SchemeKind::semi_implicit;
    double dt = 1.0;
    std::int64_t n_steps = 100;
    std::int64_t snapshot_stride = 1;
    PhysicalParams params;
    std::vector<Index> source_vertices{0};
    SourceKind source = SourceKind::none;
    double source_value = 1.0;
    /// automatic picks closed for closed meshes and dirichlet otherwise.
    BoundaryKind boundary = BoundaryKind::automatic;
    double boundary_value = 0.0;
    /// "zero", "random" (uniform [0,1] from seed) or a number.
    std::string initial = "zero";
    double solver_tol = 1e-10;
    int solver_max_iter = 0;
    bool strict_mesh = false;
    bool dump_operators = false;
    std::string output_dir = "out";
    std::uint64_t seed = 1;

    /// Throws ConfigError.
    void validate() const;
};

/// Number of snapshot exports for a run: ceil(n_steps / stride) + 1.
std::int64_t expected_snapshot_count(std::int64_t n_steps, std::int64_t stride);

/// Executes a configured run and writes snapshot_NNNNNN.{ply,csv}, report.csv
/// and manifest.txt to config.output_dir. Throws the library error types.
void execute_run(const RunConfig& config, std::ostream& log);

/// Full command-line entry point. Never throws; returns an ExitCode.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace decheat::cli
