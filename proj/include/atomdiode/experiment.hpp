// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "atomdiode/config_io.hpp"
#include "atomdiode/density_matrix.hpp"
#include "atomdiode/quantum_jump.hpp"
#include "atomdiode/scattering.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace atomdiode {

/// Resolved inputs of one CLI run. Every field is written to the run manifest
/// as a `run.*` key and read back from it, so a manifest alone reproduces the run.
struct ExperimentSpec {
    std::string subcommand;  ///< scan-scattering, scan-quench, propagate, trajectories, master-oracle
    std::filesystem::path config_path;
    std::filesystem::path out_dir;

    // velocity scans (cm/s)
    double v_min_cm_per_s = 0.1;
    double v_max_cm_per_s = 5.0;
    int v_count = 50;
    double window_threshold = 0.95;
    std::vector<double> omega_q_per_s{0.0, 1.0e4, 1.0e5};

    // packets and trajectories
    std::vector<double> v0_cm_per_s{2.0, 3.0, -2.0, -3.0};
    double dv0_cm_per_s = 0.1;
    double x0_left_um = -115.0;
    double x0_right_um = 255.0;
    double absorber_um = 100.0;
    std::uint64_t seed = 1;
    std::size_t n_traj = 200;
    int workers = 1;
    double dt_ms = 0.0;       ///< 0: coupling estimate
    bool dt_guard = false;    ///< run the halving guard on the first v0
    std::size_t grid_points = 0;  ///< 0: automatic
    bool jump_log = false;

    // propagate
    double t_max_ms = 0.0;    ///< 0: 600 um / |v0|
    std::size_t monitor_stride = 100;
    std::vector<double> snapshot_ms;

    // master-oracle (scaled box)
    double x_min_um = -150.0;
    double x_max_um = 150.0;
    double x0_um = -25.0;
    double x_measure_um = 0.0;  ///< 0: mirror centre
    int quadrature_nodes = 8;

    /// Window found by scan-scattering, recorded for the manifest only.
    std::optional<std::array<double, 2>> window_cm_per_s;
};

/// Applies the `run.*` keys of `kv` (unknown `run.` keys are rejected, except
/// `run.result.*` and `run.code_version`, which are outputs).
void apply_run_keys(const KeyValues& kv, ExperimentSpec& spec);

/// Physics keys plus `run.*` keys for every spec field.
KeyValues manifest_for(const DiodeConfig& config, const ExperimentSpec& spec);

/// Library and source revision string recorded in manifests.
std::string code_version();

/// Shortest round-trip decimal form used in every CSV and manifest.
std::string format_number(double value);

// ---- scans ----------------------------------------------------------------

/// v_min..v_max in cm/s, `count` points inclusive, converted to um/ms.
std::vector<double> speed_grid(double v_min_cm_per_s, double v_max_cm_per_s, int count);

struct ScatteringRow {
    double v_cm_per_s = 0.0;  ///< signed: > 0 incident from the left, < 0 from the right
    double r11_sq = 0.0;
    double t31_sq = 0.0;
    double t11_sq = 0.0;
    double r31_sq = 0.0;
    double flux_deficit = 0.0;
};

ScatteringRow scattering_row(const ScatteringResult& result);

/// Channel-1 incidence from both sides on the speed grid; rows sorted by
/// signed velocity.
std::vector<ScatteringRow> scattering_table(const DiodeConfig& config, std::span<const double> speeds,
                                            const ScatteringNumerics& numerics = {}, int workers = 1);

struct WorkingWindow {
    double lo_cm_per_s = 0.0;
    double hi_cm_per_s = 0.0;
    double width() const { return hi_cm_per_s - lo_cm_per_s; }
};

/// Widest contiguous run of positive speeds with |T31(v)|^2 >= threshold and
/// |R11(-v)|^2 >= threshold, from a table made by scattering_table.
std::optional<WorkingWindow> find_working_window(const std::vector<ScatteringRow>& rows, double threshold = 0.95);

// ---- CSV ------------------------------------------------------------------

std::string scattering_csv(const std::vector<ScatteringRow>& rows);

struct ObservableRow {
    double v0_cm_per_s = 0.0;
    double p_right = 0.0;
    double p_right_err = 0.0;
    double p_forward = 0.0;
    double p_forward_err = 0.0;
    std::size_t n_traj = 0;
    double mean_jumps = 0.0;
    std::string method;  ///< empty: trajectory CSV without the method column
};

ObservableRow observable_row(double v0_cm_per_s, const EnsembleStats& stats, std::string method = {});
std::string observables_csv(const std::vector<ObservableRow>& rows);

/// |psi_b|^2 per channel, header x_um,p1,p2,p3.
std::string snapshot_csv(const ChannelState& state);
/// `snap_t{time_ms}.csv`
std::string snapshot_name(double time_ms);

/// One JSON object per trajectory: seed, index, jump times/u/<x>, final observables.
std::string jump_log_jsonl(double v0_cm_per_s, const EnsembleStats& stats);

/// Writes `text` to `path` (creating parent directories). Throws Error(Io).
void write_text(const std::filesystem::path& path, const std::string& text);

// ---- scenarios --------------------------------------------------------------

/// Trajectory scenario for one v0 (cm/s) with the spec's packet and overrides.
Scenario trajectory_scenario(const DiodeConfig& config, const ExperimentSpec& spec, double v0_cm_per_s);

/// Scaled master-oracle scenario: periodic box [x_min, x_max] with grid_points
/// (default 512) points and no absorbers.
Scenario oracle_scenario(const DiodeConfig& config, const ExperimentSpec& spec, double v0_cm_per_s);

// ---- runner -------------------------------------------------------------------

struct RunReport {
    std::vector<std::filesystem::path> written;
    std::optional<WorkingWindow> window;
};

/// Runs `spec.subcommand` and writes its artifacts plus `run-manifest.cfg`
/// into spec.out_dir. Progress lines go to `log` when non-null.
RunReport run_experiment(const DiodeConfig& config, ExperimentSpec spec, std::ostream* log = nullptr);

}  // namespace atomdiode
