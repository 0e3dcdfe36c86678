#include "decheat/export.hpp"

#include "decheat/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace decheat {

namespace {

void append_number(std::string& out, double value, int precision) {
    char buf[40];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, precision);
    (void)ec;
    out.append(buf, end);
}

std::size_t flush(const std::string& text, std::ostream& sink) {
    sink.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!sink) {
        throw IoError("failed writing snapshot");
    }
    return text.size();
}

constexpr std::array<const char*, 3> kColour{"255 0 0", "255 255 0", "0 0 255"};

} // namespace

TemperatureClass classify_temperature(double psi) {
    if (!std::isfinite(psi)) {
        throw ConfigError("cannot classify non-finite temperature");
    }
    if (psi > 1.0) {
        return TemperatureClass::red;
    }
    if (psi > kBlueThreshold) {
        return TemperatureClass::yellow;
    }
    return TemperatureClass::blue;
}

std::string_view to_string(TemperatureClass cls) {
    switch (cls) {
    case TemperatureClass::red:
        return "red";
    case TemperatureClass::yellow:
        return "yellow";
    case TemperatureClass::blue:
        return "blue";
    }
    return "unknown";
}

Snapshot Snapshot::from_state(const SimState& state) {
    Snapshot snap{state.step, state.time, state.psi, {}};
    snap.classes.reserve(static_cast<std::size_t>(state.psi.size()));
    for (Eigen::Index v = 0; v < state.psi.size(); ++v) {
        snap.classes.push_back(classify_temperature(state.psi[v]));
    }
    return snap;
}

std::array<std::size_t, 3> Snapshot::class_counts() const {
    std::array<std::size_t, 3> counts{};
    for (TemperatureClass c : classes) {
        ++counts[static_cast<std::size_t>(c)];
    }
    return counts;
}

std::size_t export_ply(const SimplicialSurface& surface, const Snapshot& snapshot, std::ostream& sink) {
    if (snapshot.classes.size() != static_cast<std::size_t>(surface.vertex_count())) {
        throw ConfigError("snapshot does not match the surface vertex count");
    }
    std::string text;
    text += "ply\nformat ascii 1.0\n";
    text += "element vertex " + std::to_string(surface.vertex_count()) + "\n";
    text += "property float x\nproperty float y\nproperty float z\n";
    text += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    text += "element face " + std::to_string(surface.triangle_count()) + "\n";
    text += "property list uchar int vertex_indices\nend_header\n";
    constexpr int float_digits = std::numeric_limits<float>::max_digits10;
    for (std::size_t v = 0; v < surface.vertices().size(); ++v) {
        const Vec3& p = surface.vertices()[v];
        for (int axis = 0; axis < 3; ++axis) {
            append_number(text, static_cast<float>(p[axis]), float_digits);
            text += ' ';
        }
        text += kColour[static_cast<std::size_t>(snapshot.classes[v])];
        text += '\n';
    }
    for (const Triangle& t : surface.triangles()) {
        text += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
    }
    return flush(text, sink);
}

std::size_t export_csv(const Snapshot& snapshot, std::ostream& sink) {
    std::string text = "vertex_id,time,psi,class\n";
    for (Eigen::Index v = 0; v < snapshot.psi.size(); ++v) {
        text += std::to_string(v);
        text += ',';
        append_number(text, snapshot.time, 17);
        text += ',';
        append_number(text, snapshot.psi[v], 17);
        text += ',';
        text += to_string(snapshot.classes[static_cast<std::size_t>(v)]);
        text += '\n';
    }
    return flush(text, sink);
}

} // namespace decheat
