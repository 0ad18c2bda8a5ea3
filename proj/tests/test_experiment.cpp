// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/errors.hpp"
#include "atomdiode/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace atomdiode;

TEST_CASE("number formatting is shortest round-trip") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(1e5) == "1e+05");
    CHECK(format_number(12.5) == "12.5");
    CHECK(format_number(3.0) == "3");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("speed grid endpoints") {
    const auto g = speed_grid(0.1, 5.0, 50);
    REQUIRE(g.size() == 50);
    CHECK(g.front() == 1.0);
    CHECK(g.back() == 50.0);
    CHECK(g[20] == doctest::Approx(10.0 * (0.1 + 20 * 0.1)).epsilon(1e-12));
    CHECK(speed_grid(2.0, 2.0, 1) == std::vector<double>{20.0});
}

TEST_CASE("manifest round-trip") {
    ExperimentSpec spec;
    spec.subcommand = "trajectories";
    spec.v0_cm_per_s = {2.5, -1.25};
    spec.seed = 123456789012345ull;
    spec.n_traj = 64;
    spec.dt_ms = 0.001;
    spec.snapshot_ms = {1.0, 2.5};
    spec.jump_log = true;
    spec.window_cm_per_s = std::array<double, 2>{0.3, 4.9};
    DiodeConfig c = DiodeConfig::defaults();
    c.quench.peak = 100.0;
    const KeyValues kv = manifest_for(c, spec);
    CHECK(kv.contains("run.code_version"));

    const KeyValues back = KeyValues::parse(kv.to_string());
    ExperimentSpec read;
    apply_run_keys(back, read);
    CHECK(read.subcommand == spec.subcommand);
    CHECK(read.v0_cm_per_s == spec.v0_cm_per_s);
    CHECK(read.seed == spec.seed);
    CHECK(read.n_traj == spec.n_traj);
    CHECK(read.dt_ms == spec.dt_ms);
    CHECK(read.snapshot_ms == spec.snapshot_ms);
    CHECK(read.jump_log);
    CHECK(read.absorber_um == spec.absorber_um);
    const DiodeConfig c2 = diode_config_from(back);
    CHECK(c2.quench.peak == c.quench.peak);
    CHECK(c2.params.gamma == c.params.gamma);
    read.window_cm_per_s = spec.window_cm_per_s;
    CHECK(manifest_for(c2, read).to_string() == kv.to_string());
}

TEST_CASE("unknown run keys are rejected") {
    ExperimentSpec spec;
    CHECK_THROWS_AS(apply_run_keys(KeyValues::parse("run.seeed = 1"), spec), Error);
    CHECK_THROWS_AS(apply_run_keys(KeyValues::parse("run.n_traj = many"), spec), Error);
    CHECK_NOTHROW(apply_run_keys(KeyValues::parse("run.result.p_right = 1\nrun.code_version = x"), spec));
}

TEST_CASE("working window is the widest good run") {
    std::vector<ScatteringRow> rows;
    const double t[] = {0.5, 0.96, 0.97, 0.2, 0.99, 0.99, 0.99, 0.98};
    const double r[] = {0.99, 0.99, 0.99, 0.99, 0.99, 0.94, 0.99, 0.99};
    for (int i = 0; i < 8; ++i) {
        const double v = 0.5 * (i + 1);
        ScatteringRow fwd;
        fwd.v_cm_per_s = v;
        fwd.t31_sq = t[i];
        ScatteringRow bwd;
        bwd.v_cm_per_s = -v;
        bwd.r11_sq = r[i];
        rows.push_back(fwd);
        rows.push_back(bwd);
    }
    const auto w = find_working_window(rows, 0.95);
    REQUIRE(w);
    CHECK(w->lo_cm_per_s == 0.5 * 2);
    CHECK(w->hi_cm_per_s == 0.5 * 3);
    rows[11].r11_sq = 0.99;  // -3.0 cm/s
    const auto w2 = find_working_window(rows, 0.95);
    REQUIRE(w2);
    CHECK(w2->lo_cm_per_s == 2.5);
    CHECK(w2->hi_cm_per_s == 4.0);
    CHECK_FALSE(find_working_window(rows, 0.999));
}

TEST_CASE("CSV layouts") {
    const std::vector<ScatteringRow> rows{{-1.0, 0.9, 0.0, 0.1, 0.0, 0.0}, {1.0, 0.0, 0.998, 0.0, 0.0, 0.002}};
    const std::string s = scattering_csv(rows);
    CHECK(s.rfind("v_cm_per_s,R11_sq,T31_sq,T11_sq,R31_sq,flux_deficit\n", 0) == 0);
    CHECK(s.find("\n-1,0.9,0,0.1,0,0\n") != std::string::npos);

    ObservableRow o;
    o.v0_cm_per_s = 2.0;
    o.p_right = 0.5;
    o.n_traj = 10;
    CHECK(observables_csv({o}).rfind("v0_cm_per_s,p_right,p_right_err,p_forward,p_forward_err,n_traj,mean_jumps\n", 0) == 0);
    o.method = "master";
    const std::string tagged = observables_csv({o});
    CHECK(tagged.rfind("v0_cm_per_s,p_right,p_right_err,p_forward,p_forward_err,n_traj,mean_jumps,method\n", 0) == 0);
    CHECK(tagged.find(",master\n") != std::string::npos);

    CHECK(snapshot_name(2.5) == "snap_t2.5.csv");
    const auto grid = SpatialGrid::make(-20.0, 20.0, 64);
    const auto psi = init_wavepacket({0.0, 1.0, 1.0, 1}, grid, 3.147);
    const std::string snap = snapshot_csv(psi);
    CHECK(snap.rfind("x_um,p1,p2,p3\n", 0) == 0);
    CHECK(std::count(snap.begin(), snap.end(), '\n') == 65);
}

TEST_CASE("scan-scattering run writes the table and a replayable manifest") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "atomdiode_test_scan";
    fs::remove_all(dir);
    ExperimentSpec spec;
    spec.subcommand = "scan-scattering";
    spec.out_dir = dir;
    spec.v_min_cm_per_s = 1.0;
    spec.v_max_cm_per_s = 3.0;
    spec.v_count = 3;
    const DiodeConfig c = DiodeConfig::defaults();
    const auto report = run_experiment(c, spec);
    REQUIRE(report.window);
    CHECK(report.window->lo_cm_per_s == 1.0);
    CHECK(report.window->hi_cm_per_s == 3.0);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string first = slurp(dir / "scattering.csv");
    CHECK(std::count(first.begin(), first.end(), '\n') == 7);

    const KeyValues kv = KeyValues::load(dir / "run-manifest.cfg");
    CHECK(kv.contains("run.result.window_lo_cm_per_s"));
    ExperimentSpec again;
    apply_run_keys(kv, again);
    again.out_dir = dir / "replay";
    run_experiment(diode_config_from(kv), again);
    CHECK(slurp(again.out_dir / "scattering.csv") == first);
    fs::remove_all(dir);
}

TEST_CASE("unwritable output is an I/O error") {
    try {
        write_text("/proc/atomdiode/x.csv", "x");
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::Io);
    }
}
