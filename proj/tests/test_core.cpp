#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "psflow/initial_data.hpp"
#include "psflow/operators.hpp"
#include "psflow/snapshot_store.hpp"

using namespace psflow;

TEST_CASE("make_params derives the exponent family") {
    const FlowParams a = make_params(3, 2.0);
    CHECK(a.p_star == 6.0);
    CHECK(a.q == 5.0);
    CHECK(a.q1p == 4.0);

    const FlowParams b = make_params(4, 2.0);
    CHECK(b.p_star == 4.0);
    CHECK(b.q == 3.0);
    CHECK(b.q1p == 2.0);

    // p = 2.5 with n = 3 is inside [2, n).
    const FlowParams c = make_params(3, 2.5);
    CHECK(c.p_star == Catch::Approx(15.0));
    CHECK(c.q == Catch::Approx(14.0));
    CHECK(c.q1p == Catch::Approx(12.5));
}

TEST_CASE("make_params rejects parameters outside the hypotheses") {
    CHECK_THROWS_AS(make_params(3, 3.0), parameter_error);   // p < n violated
    CHECK_THROWS_AS(make_params(3, 1.99), parameter_error);
    CHECK_THROWS_AS(make_params(2, 2.0), parameter_error);
    CHECK_THROWS_AS(make_params(3, 3.5), parameter_error);
}

TEST_CASE("exponent identities hold for every accepted (n, p)") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(uniform(rng) * 6);
        const double p = 2.0 + uniform(rng) * (n - 2.0 - 1e-9);
        const FlowParams fp = make_params(n, p);
        CHECK(fp.q1p > 0.0);
        CHECK(fp.q > fp.p - 1.0);
        // (q+1) p / n = p^2 / (n-p) = q + 1 - p, the time-scaling identity.
        CHECK(fp.time_scaling_exponent() == Catch::Approx(fp.q1p).epsilon(1e-13));
        CHECK(fp.time_scaling_exponent() ==
              Catch::Approx(fp.p * fp.p / (fp.n - fp.p)).epsilon(1e-13));
    }
}

TEST_CASE("grid measures match the analytic domain size") {
    auto g1 = Grid::cartesian_1d(1.0, 201);
    CHECK(g1.measure() == Catch::Approx(1.0).margin(1e-12));

    auto g2 = Grid::cartesian_2d(1.5, 0.5, 31, 17);
    CHECK(g2.measure() == Catch::Approx(0.75).margin(1e-12));

    // Radial: trapezoid against omega r^{n-1} dr approaches |B_R| = omega R^n / n.
    auto gr = Grid::radial(1.0, 2001, 3);
    CHECK(gr.measure() == Catch::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-6));
}

TEST_CASE("boundary and interior index sets are disjoint and complete") {
    for (const Grid& g : {Grid::cartesian_1d(1.0, 11), Grid::cartesian_2d(1.0, 1.0, 7, 9),
                          Grid::radial(1.0, 11, 3)}) {
        int boundary = 0;
        for (int i = 0; i < g.size(); ++i)
            if (g.is_boundary(i)) ++boundary;
        switch (g.mode()) {
            case GridMode::cartesian_1d: CHECK(boundary == 2); break;
            case GridMode::cartesian_2d: CHECK(boundary == 2 * 7 + 2 * 9 - 4); break;
            case GridMode::radial: CHECK(boundary == 1); break;
        }
        CHECK(g.size() >= 3);
        for (int i = 0; i < g.size(); ++i) CHECK(g.node_weight(i) >= 0.0);
    }
}

TEST_CASE("grid rejects degenerate axes") {
    CHECK_THROWS_AS(Grid::cartesian_1d(1.0, 2), geometry_error);
    CHECK_THROWS_AS(Grid::cartesian_1d(0.0, 11), geometry_error);
    CHECK_THROWS_AS(Grid::radial(1.0, 11, 1), geometry_error);
}

TEST_CASE("normalize_initial produces a unit L^{q+1} norm") {
    const FlowParams fp = make_params(3, 2.0);
    auto g = std::make_shared<Grid>(Grid::cartesian_1d(1.0, 101));

    SECTION("already normalized data is returned unchanged") {
        Field u = normalize_initial(preset_bump(g), fp);
        Field v = normalize_initial(u, fp);
        for (int i = 0; i < u.size(); ++i) CHECK(std::abs(u[i] - v[i]) <= 1e-15);
    }

    SECTION("constant interior field maps to |Omega|^{-1/(q+1)}") {
        Field c(g, 0.0);
        for (int i = 0; i < c.size(); ++i)
            if (!g->is_boundary(i)) c[i] = 3.7;
        Field u = normalize_initial(c, fp);
        CHECK(std::abs(lr_norm(u, fp.q + 1.0) - 1.0) <= 1e-12);
        // Quadrature oracle: the interior-constant field has
        // ||c||_{q+1} = c * m^{1/(q+1)} with m the interior measure.
        double m = 0.0;
        for (int i = 0; i < c.size(); ++i)
            if (!g->is_boundary(i)) m += g->node_weight(i);
        const double expected = std::pow(m, -1.0 / (fp.q + 1.0));
        for (int i = 0; i < u.size(); ++i)
            if (!g->is_boundary(i)) CHECK(u[i] == Catch::Approx(expected).epsilon(1e-13));
    }

    SECTION("idempotence to 1e-14") {
        Field raw = preset_plateau(g, 2.3, 0.17);
        Field once = normalize_initial(raw, fp);
        Field twice = normalize_initial(once, fp);
        for (int i = 0; i < once.size(); ++i) CHECK(std::abs(once[i] - twice[i]) <= 1e-14);
    }

    SECTION("zero field is rejected") {
        Field z(g, 0.0);
        CHECK_THROWS_AS(normalize_initial(z, fp), degenerate_data_error);
    }

    SECTION("negative data is rejected") {
        Field z(g, 0.0);
        z[g->size() / 2] = -0.1;
        CHECK_THROWS_AS(normalize_initial(z, fp), degenerate_data_error);
    }
}

TEST_CASE("snapshot store enforces ordering and gamma monotonicity") {
    auto g = std::make_shared<Grid>(Grid::cartesian_1d(1.0, 11));
    Field f(g, 0.0);
    SnapshotStore store;
    store.append({0.0, f, 1.0, 5.0});
    CHECK_THROWS_AS(store.append({0.0, f, 0.9, 5.0}), data_integrity_error);  // s not increasing
    store.append({0.1, f, 0.9, 4.0});
    CHECK_THROWS_AS(store.append({0.2, f, 0.95, 4.0}), data_integrity_error); // gamma increased
    store.append({0.2, f, 0.9, 4.0});  // equal gamma is allowed
    CHECK(store.size() == 3);
}

TEST_CASE("field presets satisfy the initial-data contract") {
    const FlowParams fp = make_params(3, 2.0);
    for (auto grid : {std::make_shared<Grid>(Grid::cartesian_1d(1.0, 51)),
                      std::make_shared<Grid>(Grid::radial(1.0, 51, 3))}) {
        for (const char* name : {"bump", "plateau", "truncated_talenti"}) {
            Field f = make_preset(name, grid, fp, 1.0, 0.1, 1.0);
            INFO(name);
            CHECK(f.all_finite());
            CHECK(f.boundary_is_zero());
            CHECK(f.min() >= 0.0);
            CHECK(f.max() > 0.0);
        }
    }
    CHECK_THROWS_AS(make_preset("nope", std::make_shared<Grid>(Grid::cartesian_1d(1.0, 11)), fp,
                                1.0, 0.1, 1.0),
                    parameter_error);
}
