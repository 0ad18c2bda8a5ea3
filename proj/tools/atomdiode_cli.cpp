// SPDX-License-Identifier: Apache-2.0
// atomdiode: command-line front end for scans, packet propagation and
// trajectory ensembles. See README.md for the subcommands.
#include "atomdiode/config_io.hpp"
#include "atomdiode/errors.hpp"
#include "atomdiode/experiment.hpp"
#include "atomdiode/units.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace atomdiode;

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_traj;
    std::vector<double> v0;
    std::vector<double> omega_q;
    std::optional<int> workers;
    std::optional<double> dt_ms;
    std::optional<std::size_t> grid_points;
    std::optional<double> v_min, v_max;
    std::optional<int> v_count;
    std::optional<double> t_max_ms;
    std::optional<double> absorber_um;
    std::vector<double> snapshots;
    bool dt_guard = false;
    bool jump_log = false;
    bool quiet = false;
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "key = value config file (physics keys and optional run.* keys)");
    app->add_option("--out", f.out, "output directory (default $ATOMDIODE_OUT/<subcommand> or ./out/<subcommand>)");
    app->add_option("--workers", f.workers, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    app->add_flag("--quiet", f.quiet, "no progress lines on stderr");
}

void add_scan(CLI::App* app, Flags& f) {
    app->add_option("--v-min", f.v_min, "smallest speed, cm/s");
    app->add_option("--v-max", f.v_max, "largest speed, cm/s");
    app->add_option("--v-count", f.v_count, "number of speeds");
}

void add_packet(CLI::App* app, Flags& f) {
    app->add_option("--v0", f.v0, "mean packet velocities, cm/s (signed)")->delimiter(',');
    app->add_option("--dt-ms", f.dt_ms, "time step upper bound, ms");
    app->add_option("--grid-points", f.grid_points, "grid points (power of two)");
    app->add_option("--t-max-ms", f.t_max_ms, "horizon, ms (default 600 um / |v0|)");
    app->add_option("--omega-q", f.omega_q, "quench peak Rabi frequency, 1/s")->expected(1);
}

fs::path default_out(const std::string& subcommand) {
    if (const char* root = std::getenv("ATOMDIODE_OUT"); root && *root) return fs::path(root) / subcommand;
    return fs::path("out") / subcommand;
}

int fail(std::string_view category, const std::string& message) {
    std::cerr << "error: " << category << ": " << message << '\n';
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"atom diode with laser quenching: scattering scans, wave packets and quantum jumps"};
    app.require_subcommand(1);
    Flags f;

    auto* scan = app.add_subcommand("scan-scattering", "R/T probabilities vs velocity from both sides; finds the working window");
    add_common(scan, f);
    add_scan(scan, f);

    auto* quench = app.add_subcommand("scan-quench", "|T31|^2 vs velocity for several quench strengths");
    add_common(quench, f);
    add_scan(quench, f);
    quench->add_option("--omega-q", f.omega_q, "quench peak Rabi frequencies, 1/s")->delimiter(',');

    auto* prop = app.add_subcommand("propagate", "conditional (no-jump) packet evolution with monitors and snapshots");
    add_common(prop, f);
    add_packet(prop, f);
    prop->add_option("--absorber-um", f.absorber_um, "absorbing layer width at both box ends, um (0: periodic)");
    prop->add_option("--snapshot-ms", f.snapshots, "snapshot times, ms")->delimiter(',');

    auto* traj = app.add_subcommand("trajectories", "quantum-jump ensembles: p_right and p_forward per v0");
    add_common(traj, f);
    add_packet(traj, f);
    traj->add_option("--seed", f.seed, "master seed");
    traj->add_option("--n-traj,--n", f.n_traj, "trajectories per v0 (even)");
    traj->add_option("--absorber-um", f.absorber_um, "absorbing layer width at both box ends, um");
    traj->add_flag("--dt-guard", f.dt_guard, "halve dt until observables move < 1e-4");
    traj->add_flag("--jump-log", f.jump_log, "write jumps.jsonl");

    auto* master = app.add_subcommand("master-oracle", "density-matrix integration vs trajectory ensemble on a small grid");
    add_common(master, f);
    add_packet(master, f);
    master->add_option("--seed", f.seed, "master seed");
    master->add_option("--n-traj,--n", f.n_traj, "trajectories per v0 (even)");

    std::string manifest_path;
    auto* replay = app.add_subcommand("replay", "rerun from a run-manifest.cfg");
    replay->add_option("manifest", manifest_path, "manifest file")->required();
    replay->add_option("--out", f.out, "output directory (default: the manifest's directory)");
    replay->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    replay->add_flag("--quiet", f.quiet, "no progress lines on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(category_name(ErrorCategory::Config), e.what());
    }

    try {
        ExperimentSpec spec;
        KeyValues kv;
        const CLI::App* sub = app.get_subcommands().front();
        if (sub == replay) {
            kv = KeyValues::load(manifest_path);
            apply_run_keys(kv, spec);
            spec.out_dir = f.out.empty() ? fs::path(manifest_path).parent_path() : fs::path(f.out);
            if (spec.out_dir.empty()) spec.out_dir = ".";
        } else {
            spec.subcommand = sub->get_name();
            if (spec.subcommand == "master-oracle") {
                spec.v0_cm_per_s = {1.2};
                spec.dv0_cm_per_s = 0.05;
                spec.n_traj = 500;
            }
            if (!f.config.empty()) {
                kv = KeyValues::load(f.config);
                apply_run_keys(kv, spec);
                spec.subcommand = sub->get_name();
            }
            spec.out_dir = f.out.empty() ? default_out(spec.subcommand) : fs::path(f.out);
        }
        DiodeConfig config = diode_config_from(kv);

        if (f.seed) spec.seed = *f.seed;
        if (f.n_traj) spec.n_traj = *f.n_traj;
        if (!f.v0.empty()) spec.v0_cm_per_s = f.v0;
        if (f.workers) spec.workers = *f.workers;
        if (f.dt_ms) spec.dt_ms = *f.dt_ms;
        if (f.grid_points) spec.grid_points = *f.grid_points;
        if (f.v_min) spec.v_min_cm_per_s = *f.v_min;
        if (f.v_max) spec.v_max_cm_per_s = *f.v_max;
        if (f.v_count) spec.v_count = *f.v_count;
        if (f.t_max_ms) spec.t_max_ms = *f.t_max_ms;
        if (f.absorber_um) spec.absorber_um = *f.absorber_um;
        if (!f.snapshots.empty()) spec.snapshot_ms = f.snapshots;
        if (f.dt_guard) spec.dt_guard = true;
        if (f.jump_log) spec.jump_log = true;
        if (!f.omega_q.empty()) {
            if (spec.subcommand == "scan-quench") {
                spec.omega_q_per_s = f.omega_q;
            } else {
                config.quench.peak = units::rate_from_per_s(f.omega_q.front());
                validate(config);
            }
        }

        const auto report = run_experiment(config, spec, f.quiet ? nullptr : &std::cerr);
        for (const auto& p : report.written) std::cout << p.string() << '\n';
        return 0;
    } catch (const Error& e) {
        return fail(category_name(e.category()), e.what());
    } catch (const std::exception& e) {
        return fail("Internal", e.what());
    }
}
