#include "decheat/analysis.hpp"
#include "decheat/errors.hpp"
#include "decheat/meshgen.hpp"
#include "decheat/random.hpp"
#include "decheat/schemes.hpp"

#include <doctest.h>

#include <cmath>

using namespace decheat;

namespace {

LaplaceOperator laplacian_of(const SimplicialSurface& s) {
    return assemble_laplacian(s, build_metrics(s));
}

SchemeConfig config(SchemeKind kind, double dt) {
    SchemeConfig cfg;
    cfg.scheme = kind;
    cfg.dt = dt;
    return cfg;
}

SimState centre_spike(const SimplicialSurface& hex) {
    SimState s{Vector::Zero(hex.vertex_count())};
    s.psi[0] = 1.0;
    return s;
}

Vector random_field(Index n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    Rng rng(seed);
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v[i] = rng.uniform(lo, hi);
    }
    return v;
}

double max_abs(const Vector& v) {
    return v.cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("scheme names round-trip") {
    for (auto k : {SchemeKind::explicit_euler, SchemeKind::implicit, SchemeKind::semi_implicit}) {
        CHECK(parse_scheme(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_scheme("crank_nicolson"), ConfigError);
}

TEST_CASE("SchemeConfig validation") {
    SchemeConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.dt = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.params.k = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.solver_tol = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("BoundaryCondition must match the mesh boundary") {
    const auto square = meshgen::unit_square(4);
    CHECK_THROWS_AS(BoundaryCondition::closed().validate(square), ConfigError);
    CHECK_NOTHROW(BoundaryCondition::closed().validate(meshgen::torus(3, 1, 12, 6)));
    auto bc = BoundaryCondition::dirichlet(square, 0.0);
    CHECK(bc.vertices.size() == 16);
    bc.vertices.pop_back();
    bc.values.pop_back();
    CHECK_THROWS_AS(bc.validate(square), ConfigError);
    CHECK_THROWS_AS(BoundaryCondition::dirichlet(square, std::vector<double>(3, 0.0)), ConfigError);
}

TEST_CASE("apply_source evaluates Q at the current time") {
    const auto src = SourceModel::sqrt_ramp({1, 2});
    auto inc = apply_source({Vector::Zero(4), 500.0, 500}, src, config(SchemeKind::semi_implicit, 1.0), 4);
    CHECK(inc[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(inc[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(inc[0] == 0.0);
    CHECK(inc[3] == 0.0);

    inc = apply_source({Vector::Zero(4), 0.0, 0}, src, config(SchemeKind::semi_implicit, 1.0), 4);
    CHECK(inc.isZero(0.0));

    inc = apply_source({Vector::Zero(4), 125.0, 0}, src, config(SchemeKind::semi_implicit, 2.0), 4);
    CHECK(inc[1] == doctest::Approx(1.0).epsilon(1e-15));

    SchemeConfig scaled = config(SchemeKind::semi_implicit, 1.0);
    scaled.params.rho = 2.0;
    scaled.params.c = 4.0;
    inc = apply_source({Vector::Zero(4), 3.0, 0}, SourceModel::constant({0}, 1.0), scaled, 4);
    CHECK(inc[0] == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS_AS(apply_source({Vector::Zero(4), -1.0, 0}, src, config(SchemeKind::implicit, 1.0), 4), ConfigError);
    CHECK_THROWS_AS(apply_source({Vector::Zero(4), 0.0, 0}, SourceModel::constant({9}, 1.0),
                                 config(SchemeKind::implicit, 1.0), 4),
                    ConfigError);
}

TEST_CASE("hex patch with Dirichlet ring: single-unknown hand values") {
    const auto hex = meshgen::hex_patch();
    const auto L = laplacian_of(hex);
    const auto ring = BoundaryCondition::dirichlet(hex, 0.0);
    const auto none = SourceModel::none();

    const auto ex = step_explicit(centre_spike(hex), L, config(SchemeKind::explicit_euler, 1.0), none, ring);
    CHECK(ex.psi[0] == doctest::Approx(-3.0).epsilon(1e-13));
    CHECK(ex.time == 1.0);
    CHECK(ex.step == 1);

    const auto im = step_implicit(centre_spike(hex), L, config(SchemeKind::implicit, 1.0), none, ring);
    CHECK(std::abs(im.psi[0] - 0.2) <= 1e-10);

    const auto semi = step_semi_implicit(centre_spike(hex), L, config(SchemeKind::semi_implicit, 1.0), none, ring);
    CHECK(std::abs(semi.psi[0] - 0.2) <= 1e-14);
    CHECK(std::abs(semi.psi[0] - im.psi[0]) <= 1e-10);

    for (Index v = 1; v < 7; ++v) {
        CHECK(ex.psi[v] == 0.0);
        CHECK(im.psi[v] == 0.0);
        CHECK(semi.psi[v] == 0.0);
    }
}

TEST_CASE("hex patch: Dirichlet coupling and physical constants") {
    const auto hex = meshgen::hex_patch();
    const auto L = laplacian_of(hex);
    // Ring held at 1, centre at 0: both schemes give 4 / (1 + 4).
    const auto hot_ring = BoundaryCondition::dirichlet(hex, 1.0);
    const SimState cold{Vector::Zero(7)};
    const auto im = step_implicit(cold, L, config(SchemeKind::implicit, 1.0), SourceModel::none(), hot_ring);
    const auto semi = step_semi_implicit(cold, L, config(SchemeKind::semi_implicit, 1.0), SourceModel::none(), hot_ring);
    CHECK(std::abs(im.psi[0] - 0.8) <= 1e-10);
    CHECK(std::abs(semi.psi[0] - 0.8) <= 1e-14);

    // k = 2 doubles the diffusion coefficient: 1 / (1 + 2 * 4).
    SchemeConfig cfg = config(SchemeKind::semi_implicit, 1.0);
    cfg.params.k = 2.0;
    const auto ring = BoundaryCondition::dirichlet(hex, 0.0);
    const auto k2 = step_semi_implicit(centre_spike(hex), L, cfg, SourceModel::none(), ring);
    CHECK(k2.psi[0] == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("constant fields stay constant on a closed mesh without source") {
    const auto torus = meshgen::torus(3, 1, 24, 12);
    const auto L = laplacian_of(torus);
    const SimState c{Vector::Constant(torus.vertex_count(), 2.5)};
    const auto closed = BoundaryCondition::closed();
    const auto semi = step_semi_implicit(c, L, config(SchemeKind::semi_implicit, 50.0), SourceModel::none(), closed);
    CHECK((semi.psi.array() == 2.5).all());
    const auto ex = step_explicit(c, L, config(SchemeKind::explicit_euler, 0.01), SourceModel::none(), closed);
    CHECK(max_abs(ex.psi.array() - 2.5) <= 1e-13);
    const auto im = step_implicit(c, L, config(SchemeKind::implicit, 50.0), SourceModel::none(), closed);
    CHECK(max_abs(im.psi.array() - 2.5) <= 1e-9);
}

TEST_CASE("vanishing time step is the identity") {
    const auto mesh = meshgen::delaunay_square(8, 2);
    const auto L = laplacian_of(mesh);
    const auto bc = BoundaryCondition::dirichlet(mesh, 0.0);
    SimState s{random_field(mesh.vertex_count(), 3)};
    for (Index v : bc.vertices) {
        s.psi[v] = 0.0;
    }
    for (auto kind : {SchemeKind::explicit_euler, SchemeKind::implicit, SchemeKind::semi_implicit}) {
        const auto next = HeatStepper(L, config(kind, 1e-14), SourceModel::none(), bc).step(s);
        CHECK(max_abs(next.psi - s.psi) <= 1e-10);
    }
}

TEST_CASE("explicit step reports non-finite values") {
    const auto hex = meshgen::hex_patch();
    const auto L = laplacian_of(hex);
    const HeatStepper stepper(L, config(SchemeKind::explicit_euler, 1.0), SourceModel::none(),
                              BoundaryCondition::dirichlet(hex, 0.0));
    SimState s = centre_spike(hex);
    bool threw = false;
    try {
        for (int i = 0; i < 2000; ++i) {
            s = stepper.step(s);
        }
    } catch (const NumericalError&) {
        threw = true;
    }
    CHECK(threw);
}

TEST_CASE("implicit step conserves heat on a closed mesh") {
    const auto torus = meshgen::torus(3, 1, 30, 14);
    const auto L = laplacian_of(torus);
    SimState s{random_field(torus.vertex_count(), 8)};
    const double heat = L.mass.dot(s.psi);
    const HeatStepper implicit(L, config(SchemeKind::implicit, 1.0), SourceModel::none(), BoundaryCondition::closed());
    const HeatStepper explicit_(L, config(SchemeKind::explicit_euler, 0.001), SourceModel::none(),
                                BoundaryCondition::closed());
    SimState e = s;
    for (int n = 0; n < 10; ++n) {
        s = implicit.step(s);
        e = explicit_.step(e);
    }
    CHECK(std::abs(L.mass.dot(s.psi) - heat) <= 1e-9 * heat);
    CHECK(std::abs(L.mass.dot(e.psi) - heat) <= 1e-13 * heat);
}

TEST_CASE("perturbations contract under the implicit and semi-implicit schemes") {
    const auto meshes = {meshgen::unit_square(10), meshgen::torus(3, 1, 30, 14)};
    for (const auto& mesh : meshes) {
        const auto L = laplacian_of(mesh);
        REQUIRE(L.negative_weight_count() == 0);
        const auto bc = mesh.is_closed() ? BoundaryCondition::closed() : BoundaryCondition::dirichlet(mesh, 0.0);
        for (double dt : {0.01, 1.0, 100.0}) {
            for (auto kind : {SchemeKind::implicit, SchemeKind::semi_implicit}) {
                const auto cfg = config(kind, dt);
                const HeatStepper stepper(L, cfg, SourceModel::constant({0}, 0.3), bc);
                for (std::uint64_t seed = 0; seed < 10; ++seed) {
                    SimState a{random_field(mesh.vertex_count(), seed)};
                    SimState b{a.psi + random_field(mesh.vertex_count(), seed + 100, -0.5, 0.5)};
                    for (Index v : bc.vertices) {
                        a.psi[v] = b.psi[v] = 0.0;
                    }
                    const double before = max_abs(a.psi - b.psi);
                    const double after = max_abs(stepper.step(a).psi - stepper.step(b).psi);
                    const double slack = kind == SchemeKind::implicit ? 10 * cfg.solver_tol : 1e-12;
                    CHECK(after <= before + slack);
                }
            }
        }
    }
}

TEST_CASE("semi-implicit maximum principle holds without solver slack") {
    const auto mesh = meshgen::delaunay_square(10, 6);
    const auto L = laplacian_of(mesh);
    REQUIRE(L.negative_weight_count() == 0);
    for (double g : {0.2, 0.7}) {
        const auto bc = BoundaryCondition::dirichlet(mesh, g);
        const HeatStepper stepper(L, config(SchemeKind::semi_implicit, 10.0), SourceModel::none(), bc);
        SimState s{random_field(mesh.vertex_count(), 77, 0.1, 0.9)};
        for (Index v : bc.vertices) {
            s.psi[v] = g;
        }
        for (int n = 0; n < 20; ++n) {
            s = stepper.step(s);
            CHECK(s.psi.minCoeff() >= 0.1);
            CHECK(s.psi.maxCoeff() <= 0.9);
        }
    }
}

TEST_CASE("one-step difference between explicit and implicit is second order in dt") {
    const auto mesh = meshgen::unit_square(8);
    const auto L = laplacian_of(mesh);
    const auto bc = BoundaryCondition::dirichlet(mesh, 0.0);
    SimState s{Vector::Zero(mesh.vertex_count())};
    for (Index v = 0; v < mesh.vertex_count(); ++v) {
        s.psi[v] = analytic_solution(mesh.vertices()[v].x(), mesh.vertices()[v].y(), 0.0);
    }
    std::vector<double> diffs;
    std::vector<double> semi_diffs;
    std::vector<double> dts{2e-4, 1e-4, 5e-5, 2.5e-5};
    for (double dt : dts) {
        SchemeConfig cfg = config(SchemeKind::implicit, dt);
        cfg.solver_tol = 1e-14;
        const auto ex = step_explicit(s, L, cfg, SourceModel::none(), bc);
        const auto im = step_implicit(s, L, cfg, SourceModel::none(), bc);
        const auto semi = step_semi_implicit(s, L, cfg, SourceModel::none(), bc);
        diffs.push_back(max_abs(ex.psi - im.psi));
        semi_diffs.push_back(max_abs(semi.psi - im.psi));
    }
    for (std::size_t k = 0; k + 1 < diffs.size(); ++k) {
        const double r = std::log(dts[k] / dts[k + 1]);
        CHECK(std::log(diffs[k] / diffs[k + 1]) / r >= 1.9);
        CHECK(std::log(semi_diffs[k] / semi_diffs[k + 1]) / r >= 1.9);
    }
}

TEST_CASE("run: snapshot bookkeeping") {
    const auto mesh = meshgen::unit_square(4);
    const auto bc = BoundaryCondition::dirichlet(mesh, 0.0);
    const Vector init = Vector::Zero(mesh.vertex_count());
    RunOptions opt;
    opt.n_steps = 0;
    auto snaps = run(mesh, config(SchemeKind::semi_implicit, 0.1), SourceModel::none(), bc, init, opt);
    REQUIRE(snaps.size() == 1);
    CHECK(snaps[0].step == 0);
    CHECK(snaps[0].psi == init);

    int calls = 0;
    opt.n_steps = 100;
    opt.snapshot_stride = 30;
    opt.on_snapshot = [&](const SimState&) { ++calls; };
    snaps = run(mesh, config(SchemeKind::semi_implicit, 0.1), SourceModel::none(), bc, init, opt);
    CHECK(snaps.size() == 5);
    CHECK(calls == 5);
    CHECK(snaps.back().step == 100);
    CHECK(snaps[3].step == 90);

    opt.snapshot_stride = 0;
    CHECK_THROWS_AS(run(mesh, config(SchemeKind::semi_implicit, 0.1), SourceModel::none(), bc, init, opt),
                    ConfigError);
    opt.snapshot_stride = 1;
    CHECK_THROWS_AS(run(mesh, config(SchemeKind::semi_implicit, 0.1), SourceModel::none(),
                        BoundaryCondition::closed(), init, opt),
                    ConfigError);
}

TEST_CASE("run: semi-implicit max norm is non-increasing with zero Dirichlet data") {
    for (const auto& mesh : {meshgen::unit_square(12), meshgen::delaunay_square(11, 9)}) {
        const auto bc = BoundaryCondition::dirichlet(mesh, 0.0);
        RunOptions opt;
        opt.n_steps = 60;
        const auto snaps = run(mesh, config(SchemeKind::semi_implicit, 0.05), SourceModel::none(), bc,
                               random_field(mesh.vertex_count(), 4, -1.0, 1.0), opt);
        for (std::size_t n = 1; n < snaps.size(); ++n) {
            CHECK(max_abs(snaps[n].psi) <= max_abs(snaps[n - 1].psi));
        }
    }
}

TEST_CASE("run: implicit stays in bounds at dt = 10, explicit does not") {
    const auto mesh = meshgen::unit_square(20);
    const auto bc = BoundaryCondition::dirichlet(mesh, 0.0);
    Vector init = random_field(mesh.vertex_count(), 12);
    for (Index v : bc.vertices) {
        init[v] = 0.0;
    }
    RunOptions opt;
    opt.n_steps = 20;
    SchemeConfig cfg = config(SchemeKind::implicit, 10.0);
    const auto snaps = run(mesh, cfg, SourceModel::none(), bc, init, opt);
    CHECK(max_principle_check(snaps, init.minCoeff(), init.maxCoeff(), 10 * cfg.solver_tol).pass);

    opt.n_steps = 3;
    const auto ex = run(mesh, config(SchemeKind::explicit_euler, 10.0), SourceModel::none(), bc, init, opt);
    const auto check = max_principle_check(ex, init.minCoeff(), init.maxCoeff(), 10 * cfg.solver_tol);
    CHECK_FALSE(check.pass);
    CHECK(check.step == 1);
}
