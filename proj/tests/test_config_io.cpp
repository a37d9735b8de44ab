#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <random>

#include "psflow/config.hpp"
#include "psflow/initial_data.hpp"
#include "psflow/interpolation.hpp"
#include "psflow/io.hpp"

using namespace psflow;

TEST_CASE("config parsing resolves every section") {
    const std::string text = R"cfg(
# comment
[params]
n = 4
p = 2.5

[grid]
mode = radial
extent = 2.0
points = 101

[initial]
preset = truncated_talenti
lam = 0.7

[prototype]
ds_max = 1e-3
energy_budget = 1e-9

[direct]
dt = 5e-4
t_end = 0.25
source_mode = explicit_source

[diagnostics]
levels = 0.1 0.3 0.5
m_policy = boundedness

[output]
dir = somewhere
)cfg";
    const RunConfig cfg = parse_config(text);
    CHECK(cfg.n == 4);
    CHECK(cfg.p == 2.5);
    CHECK(cfg.mode == GridMode::radial);
    CHECK(cfg.extent == 2.0);
    CHECK(cfg.points == 101);
    CHECK(cfg.preset == "truncated_talenti");
    CHECK(cfg.lam == 0.7);
    CHECK(cfg.proto.ds_max == 1e-3);
    CHECK(cfg.proto.energy_budget == 1e-9);
    CHECK(cfg.dt == 5e-4);
    CHECK(cfg.coupling == LambdaCoupling::explicit_source);
    CHECK(cfg.levels == std::vector<double>{0.1, 0.3, 0.5});
    CHECK(cfg.m_policy == MPolicy::boundedness);
    CHECK(cfg.out_dir == "somewhere");

    const FlowParams fp = cfg.params();
    CHECK(fp.p_star == Catch::Approx(20.0 / 3.0));
}

TEST_CASE("config rejection cites the offending line and constraint") {
    SECTION("p outside [2, n)") {
        try {
            parse_config("[params]\nn = 3\np = 1.5\n");
            FAIL("expected config_error");
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find("[2, n)") != std::string::npos);
        }
    }

    SECTION("unknown field with line number") {
        try {
            parse_config("[params]\nn = 3\np = 2.0\nwhatever = 1\n");
            FAIL("expected config_error");
        } catch (const config_error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("line 4") != std::string::npos);
            CHECK(msg.find("whatever") != std::string::npos);
        }
    }

    SECTION("malformed line") {
        CHECK_THROWS_AS(parse_config("[params\n"), config_error);
        CHECK_THROWS_AS(parse_config("[params]\nn 3\n"), config_error);
        CHECK_THROWS_AS(parse_config("[params]\nn = abc\n"), config_error);
    }

    SECTION("missing initial file") {
        CHECK_THROWS_AS(parse_config("[initial]\nfile = /no/such/file.psf\n"), config_error);
    }

    SECTION("inconsistent step bounds") {
        CHECK_THROWS_AS(parse_config("[prototype]\nds_init = 1e-3\nds_max = 1e-5\n"), config_error);
    }
}

TEST_CASE("manifest echoes resolved values and hashes the source") {
    const std::string text = "[params]\nn = 3\np = 2.0\n";
    const RunConfig cfg = parse_config(text);
    const std::string m = manifest_text(cfg);
    for (const char* key :
         {"config_hash", "p_star", "q1p", "ds_init", "ds_max", "energy_budget", "extinction_eps",
          "snapshot_cadence", "dt", "num_samples", "rho_cells", "m_policy", "dir"})
        CHECK(m.find(key) != std::string::npos);
    // identical source, identical manifest
    CHECK(manifest_text(parse_config(text)) == m);
}

TEST_CASE("snapshot files round-trip bit-exactly") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "psflow_test_io";
    fs::create_directories(dir);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uniform(-5.0, 5.0);

    const FlowParams fp = make_params(3, 2.0);
    for (auto g : {std::make_shared<Grid>(Grid::cartesian_1d(0.7, 23)),
                   std::make_shared<Grid>(Grid::cartesian_2d(1.0, 2.0, 9, 7)),
                   std::make_shared<Grid>(Grid::radial(1.5, 17, 3))}) {
        Field f(g);
        for (int i = 0; i < f.size(); ++i) f[i] = uniform(rng);
        const std::string path = (dir / "snap.psf").string();
        write_snapshot(path, f);
        const Field back = read_snapshot(path, g->mode() == GridMode::radial ? fp.n : 0);
        REQUIRE(back.grid() == *g);
        for (int i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);  // bit-exact
    }

    SECTION("radial file without the equation dimension is rejected") {
        auto g = std::make_shared<Grid>(Grid::radial(1.0, 11, 3));
        const std::string path = (dir / "r.psf").string();
        write_snapshot(path, Field(g, 1.0));
        CHECK_THROWS_AS(read_snapshot(path), error);
    }
    fs::remove_all(dir);
}

TEST_CASE("g17 formatting round-trips doubles") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double x = uniform(rng) * std::pow(10.0, (k % 61) - 30);
        CHECK(std::stod(fmt_g17(x)) == x);
    }
}

TEST_CASE("monotone cubic interpolation") {
    SECTION("matches nodes exactly") {
        MonotoneCubic m({0.0, 1.0, 2.0, 3.0}, {5.0, 3.0, 2.5, 0.1});
        CHECK(m(0.0) == 5.0);
        CHECK(m(2.0) == 2.5);
        CHECK(m(3.0) == 0.1);
    }

    SECTION("preserves monotonicity between nodes on random decreasing data") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> uniform(0.01, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x{0.0}, y{10.0};
            for (int k = 1; k <= 30; ++k) {
                x.push_back(x.back() + uniform(rng));
                y.push_back(y.back() - uniform(rng));
            }
            MonotoneCubic m(x, y);
            double prev = m(x.front());
            for (int k = 1; k <= 2000; ++k) {
                const double t = x.front() + (x.back() - x.front()) * k / 2000.0;
                const double val = m(t);
                CHECK(val <= prev + 1e-12);
                prev = val;
            }
        }
    }

    SECTION("rejects unsorted abscissae") {
        CHECK_THROWS_AS(MonotoneCubic({0.0, 0.0}, {1.0, 2.0}), data_integrity_error);
        CHECK_THROWS_AS(MonotoneCubic({0.0}, {1.0}), data_integrity_error);
    }
}

TEST_CASE("csv writer is deterministic") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "psflow_test_csv";
    fs::create_directories(dir);
    auto emit = [&](const std::string& name) {
        CsvWriter csv((dir / name).string(), {"a", "b"});
        csv.row({1.0 / 3.0, 2.0 / 7.0});
        csv.row({1e-300, 12345.6789});
    };
    emit("one.csv");
    emit("two.csv");
    CHECK(read_text_file((dir / "one.csv").string()) == read_text_file((dir / "two.csv").string()));
    fs::remove_all(dir);
}
