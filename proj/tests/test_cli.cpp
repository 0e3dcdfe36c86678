#include "decheat/cli.hpp"
#include "decheat/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace decheat;

namespace {

const std::string kData = DECHEAT_DATA_DIR;

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("decheat_test_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::main(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_with_extension(const fs::path& dir, const std::string& ext) {
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        n += entry.path().extension() == ext;
    }
    return n;
}

std::size_t line_count(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST_CASE("expected snapshot count") {
    CHECK(cli::expected_snapshot_count(100, 1) == 101);
    CHECK(cli::expected_snapshot_count(100, 30) == 5);
    CHECK(cli::expected_snapshot_count(100, 25) == 5);
    CHECK(cli::expected_snapshot_count(0, 7) == 1);
}

TEST_CASE("run writes snapshots, report and manifest") {
    TempDir tmp;
    const std::string out = tmp / "run";
    const auto r = invoke({"--mesh", kData + "/meshes/square.obj", "--steps", "10", "--stride", "4", "--dt", "0.001",
                           "--initial", "random", "--out", out, "--dump-operators"});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    CHECK(count_with_extension(out, ".ply") == 4);
    CHECK(count_with_extension(out, ".csv") == 5);
    for (const char* name : {"snapshot_000000.ply", "snapshot_000008.csv", "snapshot_000010.ply", "report.csv",
                             "manifest.txt", "stiffness_coo.txt", "mass.txt"}) {
        CHECK_MESSAGE(fs::exists(fs::path(out) / name), name);
    }
    const std::string csv = slurp(out + "/snapshot_000010.csv");
    CHECK(csv.rfind("vertex_id,time,psi,class\n", 0) == 0);
    CHECK(line_count(csv) == 442);
    CHECK(line_count(slurp(out + "/report.csv")) == 5);
    CHECK(line_count(slurp(out + "/mass.txt")) == 441);
    const std::string manifest = slurp(out + "/manifest.txt");
    CHECK(manifest.find("scheme=semi_implicit\n") != std::string::npos);
    CHECK(manifest.find("steps=10\n") != std::string::npos);
}

TEST_CASE("invalid configuration exits 2 and writes nothing") {
    TempDir tmp;
    const std::string out = tmp / "bad";
    auto r = invoke({"--mesh", kData + "/meshes/square.obj", "--dt", "-1", "--out", out});
    CHECK(r.code == cli::kConfigError);
    CHECK_FALSE(fs::exists(out));
    CHECK(r.err.find("config error") != std::string::npos);

    r = invoke({"--mesh", kData + "/meshes/square.obj", "--scheme", "leapfrog", "--out", out});
    CHECK(r.code == cli::kConfigError);
    r = invoke({"--mesh", kData + "/meshes/square.obj", "--boundary", "closed", "--out", out});
    CHECK(r.code == cli::kConfigError);
    r = invoke({"--mesh", kData + "/meshes/square.obj", "--stride", "0", "--out", out});
    CHECK(r.code == cli::kConfigError);
    r = invoke({"--no-such-flag"});
    CHECK(r.code == cli::kConfigError);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("mesh and io failures map to their exit codes") {
    TempDir tmp;
    const std::string bad = tmp / "bad.obj";
    std::ofstream(bad) << "v 0 0 0\nv 1 0 0\nf 1 2 9\n";
    CHECK(invoke({"--mesh", bad, "--out", tmp / "o"}).code == cli::kMeshError);
    CHECK(invoke({"--mesh", tmp / "missing.obj", "--out", tmp / "o"}).code == cli::kIoError);
    CHECK_FALSE(fs::exists(tmp / "o"));
}

TEST_CASE("help exits 0") {
    const auto r = invoke({"--help"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.find("verify") != std::string::npos);
}

TEST_CASE("verify contraction") {
    auto r = invoke({"verify", "contraction", "--scheme", "semi_implicit", "--dt", "100", "--trials", "20"});
    CHECK(r.code == cli::kOk);
    CHECK(r.out.rfind("scheme,dt,h,steps,max_error,ratio,pass,order\n", 0) == 0);
    CHECK(line_count(r.out) == 21);

    r = invoke({"verify", "contraction", "--scheme", "explicit", "--dt", "1", "--mesh",
                kData + "/meshes/hex_patch.obj", "--trials", "5"});
    CHECK(r.code == cli::kPropertyFailed);
    CHECK(r.out.find(",false,") != std::string::npos);
}

TEST_CASE("verify maxprinciple and convergence") {
    auto r = invoke({"verify", "maxprinciple", "--scheme", "implicit", "--dt", "10", "--steps", "10"});
    CHECK_MESSAGE(r.code == cli::kOk, r.err);
    r = invoke({"verify", "maxprinciple", "--scheme", "explicit", "--dt", "10", "--steps", "3"});
    CHECK(r.code == cli::kPropertyFailed);
    TempDir tmp;
    r = invoke({"verify", "convergence", "--scheme", "implicit", "--cells", "4", "8", "--dts", "0.025", "0.0125",
                "--report", tmp / "conv.csv"});
    CHECK_MESSAGE(r.code == cli::kOk, r.err);
    CHECK(line_count(slurp(tmp / "conv.csv")) == 3);
    CHECK(r.out.empty());
}

TEST_CASE("identical runs produce byte-identical outputs") {
    TempDir tmp;
    const std::vector<std::string> base{"--mesh", kData + "/meshes/delaunay.obj", "--scheme", "implicit",
                                        "--steps", "5", "--initial", "random", "--seed", "11",
                                        "--source", "paper_sqrt", "--source-vertex", "40"};
    auto a = base;
    a.insert(a.end(), {"--out", tmp / "a"});
    auto b = base;
    b.insert(b.end(), {"--out", tmp / "b"});
    REQUIRE(invoke(a).code == cli::kOk);
    REQUIRE(invoke(b).code == cli::kOk);
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(tmp.path / "a")) {
        const auto name = entry.path().filename().string();
        CHECK_MESSAGE(slurp(entry.path().string()) == slurp(tmp / ("b/" + name)), name);
        ++compared;
    }
    CHECK(compared == 6 + 6 + 2);
}

TEST_CASE("config file with command-line override") {
    TempDir tmp;
    const std::string cfg = tmp / "run.ini";
    std::ofstream(cfg) << "mesh=" << kData << "/meshes/hex_patch.obj\n"
                       << "scheme=implicit\nsteps=3\ndt=0.5\nboundary-value=2\n";
    const auto r = invoke({"--config", cfg, "--steps", "2", "--out", tmp / "o"});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    CHECK(count_with_extension(tmp.path / "o", ".ply") == 3);
    const std::string manifest = slurp(tmp / "o/manifest.txt");
    CHECK(manifest.find("scheme=implicit\n") != std::string::npos);
    CHECK(manifest.find("steps=2\n") != std::string::npos);
    CHECK(manifest.find("boundary_value=2\n") != std::string::npos);
}

TEST_CASE("generate writes loadable meshes") {
    TempDir tmp;
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"generate", "triangle"}, {"generate", "hex", "--side", "2"},
          {"generate", "square", "--cells", "5"}, {"generate", "delaunay", "--cells", "6", "--seed", "4"},
          {"generate", "torus", "--n-major", "20", "--n-minor", "8"}}) {
        auto full = args;
        const std::string path = tmp / (args[1] + ".obj");
        full.insert(full.end(), {"--out", path});
        REQUIRE(invoke(full).code == cli::kOk);
        CHECK_NOTHROW(load_obj_file(path));
    }
    CHECK(load_obj_file(tmp / "torus.obj").vertex_count() == 160);
    CHECK(invoke({"generate", "sphere", "--out", tmp / "x.obj"}).code == cli::kConfigError);
}

TEST_CASE("implicit torus run with the ramped source heats monotonically") {
    TempDir tmp;
    const auto r = invoke({"--mesh", kData + "/meshes/torus.obj", "--scheme", "implicit", "--dt", "10", "--steps",
                           "50", "--source", "paper_sqrt", "--source-vertex", "0", "--out", tmp / "o"});
    REQUIRE_MESSAGE(r.code == cli::kOk, r.err);
    std::istringstream report(slurp(tmp / "o/report.csv"));
    std::string line;
    std::getline(report, line);
    CHECK(line == "step,time,min_psi,max_psi,heat,red,yellow,blue");
    double previous = -1.0;
    int rows = 0;
    while (std::getline(report, line)) {
        std::istringstream fields(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(fields, cell, ',')) {
            values.push_back(std::stod(cell));
        }
        REQUIRE(values.size() == 8);
        for (double v : values) {
            CHECK(std::isfinite(v));
        }
        CHECK(values[3] >= previous);
        previous = values[3];
        ++rows;
    }
    CHECK(rows == 51);
    CHECK(previous > 1.0);
}
