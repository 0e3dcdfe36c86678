#pragma once

#include "decheat/schemes.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace decheat {

enum class TemperatureClass { red, yellow, blue };

/// Temperatures at or below this count as unreached (blue).
inline constexpr double kBlueThreshold = 1e-9;

/// red: psi > 1; yellow: kBlueThreshold < psi <= 1; blue: psi <= kBlueThreshold.
/// Throws ConfigError for non-finite input.
TemperatureClass classify_temperature(double psi);
std::string_view to_string(TemperatureClass cls);

struct Snapshot {
    std::int64_t step = 0;
    double time = 0.0;
    Vector psi;
    std::vector<TemperatureClass> classes;

    static Snapshot from_state(const SimState& state);
    /// Count per class, indexed by TemperatureClass.
    std::array<std::size_t, 3> class_counts() const;
};

/// ASCII PLY 1.0: vertex x y z (float) with uchar red green blue, then the face list.
std::size_t export_ply(const SimplicialSurface& surface, const Snapshot& snapshot, std::ostream& sink);

/// Header `vertex_id,time,psi,class`, one LF-terminated row per vertex, 17 significant digits.
std::size_t export_csv(const Snapshot& snapshot, std::ostream& sink);

} // namespace decheat
