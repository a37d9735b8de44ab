#include <catch2/catch_amalgamated.hpp>

#include "psflow/initial_data.hpp"
#include "psflow/positivity.hpp"

using namespace psflow;

namespace {
const FlowParams kParams = make_params(3, 2.0);
}

TEST_CASE("subdomain construction and chain soundness") {
    for (auto g : {std::make_shared<Grid>(Grid::cartesian_1d(1.0, 401)),
                   std::make_shared<Grid>(Grid::radial(1.0, 401, 3)),
                   std::make_shared<Grid>(Grid::cartesian_2d(1.0, 0.8, 201, 161))}) {
        for (int rho_cells : {1, 2}) {
            const SubdomainSpec spec = make_subdomain(*g, rho_cells);
            INFO(to_string(g->mode()) << " rho_cells=" << rho_cells);
            CHECK(spec.margin == Catch::Approx(16.0 * spec.rho));
            CHECK(spec.measure > 0.0);
            CHECK_FALSE(spec.indices.empty());
            CHECK_FALSE(spec.chain.empty());
            for (int idx : spec.indices)
                CHECK(g->boundary_distance(idx) >= spec.margin - 1e-12);
            CHECK(check_chain_soundness(*g, spec).empty());
        }
    }

    SECTION("margin exhausting the domain is rejected") {
        auto g = std::make_shared<Grid>(Grid::cartesian_1d(1.0, 21));
        CHECK_THROWS_AS(make_subdomain(*g, 4), geometry_error);  // margin 16*4h > 1/2
    }
}

TEST_CASE("sublevel measure") {
    auto g = std::make_shared<Grid>(Grid::cartesian_1d(1.0, 401));
    const SubdomainSpec spec = make_subdomain(*g, 1);

    SECTION("constant field at or above the level has alpha = 1") {
        Field c(*&g, 0.0);
        for (int i = 0; i < c.size(); ++i) c[i] = 0.7;
        const auto m = sublevel_measure(c, spec, 0.7);
        CHECK(m.alpha_hat == Catch::Approx(1.0));
        CHECK(m.measure_ge == Catch::Approx(spec.measure));
    }

    SECTION("level above the max gives zero") {
        Field c(g, 0.3);
        CHECK(sublevel_measure(c, spec, 0.5).alpha_hat == 0.0);
    }

    SECTION("bump half-height fraction matches a direct count") {
        const Field u = normalize_initial(preset_bump(g), kParams);
        const double level = 0.5 * u.max();
        const auto m = sublevel_measure(u, spec, level);
        double manual = 0.0;
        for (int idx : spec.indices)
            if (u[idx] >= level) manual += g->node_weight(idx);
        CHECK(m.measure_ge == Catch::Approx(manual));
        CHECK(m.alpha_hat == Catch::Approx(manual / spec.measure));
        CHECK(m.alpha_hat > 0.0);
        CHECK(m.alpha_hat < 1.0);
    }

    SECTION("monotone nonincreasing in the level") {
        const Field u = normalize_initial(preset_bump(g), kParams);
        double prev = 1e300;
        for (double level = 0.05; level < 1.3; level += 0.05) {
            const double a = sublevel_measure(u, spec, level).alpha_hat;
            CHECK(a <= prev + 1e-15);
            prev = a;
        }
    }

    SECTION("open and closed thresholds are both reported") {
        Field c(g, 0.7);
        const auto m = sublevel_measure(c, spec, 0.7);
        CHECK(m.measure_ge == Catch::Approx(spec.measure));
        CHECK(m.measure_gt == 0.0);
    }

    SECTION("parameter and geometry errors") {
        Field c(g, 1.0);
        CHECK_THROWS_AS(sublevel_measure(c, spec, -1.0), parameter_error);
        SubdomainSpec empty;
        CHECK_THROWS_AS(sublevel_measure(c, empty, 0.5), geometry_error);
    }
}

TEST_CASE("volume-constraint measure bound") {
    auto g = std::make_shared<Grid>(Grid::cartesian_1d(1.0, 401));
    const SubdomainSpec spec = make_subdomain(*g, 1);

    SECTION("slack terms at their caps give alpha = 1/(2 M^{q+1} |Omega'|)") {
        // Engineer M and L to meet both caps exactly; a normalized constant
        // field then satisfies every hypothesis.
        const double q1 = kParams.q + 1.0;
        const double m_cap = std::pow(0.25 / spec.complement_measure, 1.0 / q1);
        const double l_cap = std::pow(0.25 / spec.measure, 1.0 / q1);
        Field u(g, 0.0);
        for (int i = 0; i < u.size(); ++i)
            if (!g->is_boundary(i)) u[i] = 1.0;
        u = normalize_initial(u, kParams);
        REQUIRE(u.max() <= m_cap);

        const auto vca = volume_constraint_alpha(u, spec, m_cap, l_cap, kParams);
        CHECK(vca.hypotheses_hold);
        CHECK(vca.satisfied);
        const double expected_alpha = 1.0 / (2.0 * std::pow(m_cap, q1) * spec.measure);
        CHECK(vca.alpha_lower == Catch::Approx(expected_alpha).epsilon(1e-10));
        CHECK(vca.bound == Catch::Approx(0.5 / std::pow(m_cap, q1)).epsilon(1e-10));
    }

    SECTION("M below max u is reported as the violated hypothesis") {
        Field u = normalize_initial(preset_bump(g), kParams);
        const auto vca = volume_constraint_alpha(u, spec, 0.5 * u.max(), 0.1, kParams);
        CHECK_FALSE(vca.hypotheses_hold);
        bool found = false;
        for (const auto& v : vca.violations)
            if (v.find("M < max u") != std::string::npos) found = true;
        CHECK(found);
    }

    SECTION("unnormalized field is reported") {
        Field u(g, 0.5);
        const auto vca = volume_constraint_alpha(u, spec, 2.0, 0.1, kParams);
        CHECK_FALSE(vca.hypotheses_hold);
    }
}

TEST_CASE("positivity floor track") {
    auto g = std::make_shared<Grid>(Grid::cartesian_1d(1.0, 401));
    const SubdomainSpec spec = make_subdomain(*g, 1);
    const Field u0 = normalize_initial(preset_bump(g), kParams);
    struct Row {
        double t;
        Field u;
    };
    std::vector<Row> series{{0.0, u0}, {0.5, u0}};
    const auto floors = positivity_floor_track(series, spec);
    REQUIRE(floors.size() == 2);
    double expected = 1e300;
    for (int idx : spec.indices) expected = std::min(expected, u0[idx]);
    CHECK(floors[0].inf_u == Catch::Approx(expected));
    CHECK(floors[0].inf_u > 0.0);
}

TEST_CASE("stretched-time coordinate is a monotone bijection") {
    const double T = 0.37;
    double prev = -1e300;
    for (double t = 0.0; t < T; t += T / 64.0) {
        const double tau = stretched_tau(t, T);
        CHECK(tau > prev);
        prev = tau;
        CHECK(stretched_tau_inverse(tau, T) == Catch::Approx(t).margin(1e-12));
    }
    CHECK(stretched_tau(0.0, T) == 0.0);
    CHECK_THROWS_AS(stretched_tau(T, T), range_error);
    CHECK_THROWS_AS(stretched_tau(-0.1, T), range_error);
}
