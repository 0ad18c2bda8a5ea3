// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/experiment.hpp"

#include "atomdiode/errors.hpp"
#include "atomdiode/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#ifndef ATOMDIODE_GIT_REV
#define ATOMDIODE_GIT_REV "unknown"
#endif
#ifndef ATOMDIODE_VERSION
#define ATOMDIODE_VERSION "0.0.0"
#endif

namespace atomdiode {

namespace {

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_number(values[i]);
    }
    return out;
}

std::vector<double> split_numbers(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(parse_number(item, key));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw Error(ErrorCategory::Config, "key '" + key + "': expected true or false, got '" + text + "'");
}

template <class Int>
Int parse_count(const std::string& text, const std::string& key) {
    const double v = parse_number(text, key);
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) {
        throw Error(ErrorCategory::Config, "key '" + key + "': expected a non-negative integer, got '" + text + "'");
    }
    return static_cast<Int>(v);
}

struct RunKey {
    const char* name;
    std::function<std::string(const ExperimentSpec&)> get;
    std::function<void(ExperimentSpec&, const std::string&, const std::string&)> set;
};

#define NUMBER_KEY(key, field)                                                                      \
    RunKey {                                                                                        \
        "run." key, [](const ExperimentSpec& s) { return format_number(s.field); },                 \
            [](ExperimentSpec& s, const std::string& v, const std::string& k) { s.field = parse_number(v, k); } \
    }
#define COUNT_KEY(key, field, type)                                                                  \
    RunKey {                                                                                         \
        "run." key, [](const ExperimentSpec& s) { return std::to_string(s.field); },                 \
            [](ExperimentSpec& s, const std::string& v, const std::string& k) { s.field = parse_count<type>(v, k); } \
    }
#define LIST_KEY(key, field)                                                                          \
    RunKey {                                                                                          \
        "run." key, [](const ExperimentSpec& s) { return join(s.field); },                            \
            [](ExperimentSpec& s, const std::string& v, const std::string& k) { s.field = split_numbers(v, k); } \
    }
#define BOOL_KEY(key, field)                                                                          \
    RunKey {                                                                                          \
        "run." key, [](const ExperimentSpec& s) { return std::string(s.field ? "true" : "false"); },   \
            [](ExperimentSpec& s, const std::string& v, const std::string& k) { s.field = parse_bool(v, k); } \
    }

const std::vector<RunKey>& run_keys() {
    static const std::vector<RunKey> keys = {
        RunKey{"run.subcommand", [](const ExperimentSpec& s) { return s.subcommand; },
               [](ExperimentSpec& s, const std::string& v, const std::string&) { s.subcommand = v; }},
        NUMBER_KEY("v_min_cm_per_s", v_min_cm_per_s),
        NUMBER_KEY("v_max_cm_per_s", v_max_cm_per_s),
        COUNT_KEY("v_count", v_count, int),
        NUMBER_KEY("window_threshold", window_threshold),
        LIST_KEY("omega_q_per_s", omega_q_per_s),
        LIST_KEY("v0_cm_per_s", v0_cm_per_s),
        NUMBER_KEY("dv0_cm_per_s", dv0_cm_per_s),
        NUMBER_KEY("x0_left_um", x0_left_um),
        NUMBER_KEY("x0_right_um", x0_right_um),
        NUMBER_KEY("absorber_um", absorber_um),
        COUNT_KEY("seed", seed, std::uint64_t),
        COUNT_KEY("n_traj", n_traj, std::size_t),
        COUNT_KEY("workers", workers, int),
        NUMBER_KEY("dt_ms", dt_ms),
        BOOL_KEY("dt_guard", dt_guard),
        COUNT_KEY("grid_points", grid_points, std::size_t),
        BOOL_KEY("jump_log", jump_log),
        NUMBER_KEY("t_max_ms", t_max_ms),
        COUNT_KEY("monitor_stride", monitor_stride, std::size_t),
        LIST_KEY("snapshot_ms", snapshot_ms),
        NUMBER_KEY("x_min_um", x_min_um),
        NUMBER_KEY("x_max_um", x_max_um),
        NUMBER_KEY("x0_um", x0_um),
        NUMBER_KEY("x_measure_um", x_measure_um),
        COUNT_KEY("quadrature_nodes", quadrature_nodes, int),
    };
    return keys;
}

#undef NUMBER_KEY
#undef COUNT_KEY
#undef LIST_KEY
#undef BOOL_KEY

void check_spec(const ExperimentSpec& spec) {
    static const std::vector<std::string> known = {"scan-scattering", "scan-quench", "propagate", "trajectories",
                                                   "master-oracle"};
    if (std::find(known.begin(), known.end(), spec.subcommand) == known.end()) {
        throw Error(ErrorCategory::Config, "unknown subcommand '" + spec.subcommand + "'");
    }
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw Error(ErrorCategory::Config, what);
    };
    require(spec.v_min_cm_per_s > 0.0 && spec.v_max_cm_per_s >= spec.v_min_cm_per_s, "velocity range must satisfy 0 < min <= max");
    require(spec.v_count >= 1, "velocity count must be >= 1");
    require(spec.dv0_cm_per_s > 0.0, "dv0 must be > 0");
    require(spec.absorber_um >= 0.0, "absorber width must be >= 0");
    require(spec.workers >= 1, "workers must be >= 1");
    require(spec.dt_ms >= 0.0, "dt must be >= 0");
    require(spec.t_max_ms >= 0.0, "t_max must be >= 0");
    require(spec.quadrature_nodes >= 1, "quadrature nodes must be >= 1");
    for (double v : spec.v0_cm_per_s) require(v != 0.0 && std::isfinite(v), "v0 values must be non-zero");
    for (double q : spec.omega_q_per_s) require(q >= 0.0, "quench strengths must be >= 0");
    if (spec.subcommand == "trajectories" || spec.subcommand == "master-oracle") {
        require(spec.n_traj >= 2 && spec.n_traj % 2 == 0, "trajectory count must be even and >= 2");
    }
}

}  // namespace

std::string format_number(double value) {
    if (value == 0.0) return "0";  // also folds -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string code_version() { return std::string("atomdiode ") + ATOMDIODE_VERSION + " (" + ATOMDIODE_GIT_REV + ")"; }

void apply_run_keys(const KeyValues& kv, ExperimentSpec& spec) {
    const auto& keys = run_keys();
    for (const auto& [key, value] : kv.entries()) {
        if (key.rfind("run.", 0) != 0) continue;
        if (key.rfind("run.result.", 0) == 0 || key == "run.code_version") continue;
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const RunKey& k) { return key == k.name; });
        if (it == keys.end()) throw Error(ErrorCategory::Config, "unknown run key '" + key + "'");
        it->set(spec, value, key);
    }
}

KeyValues manifest_for(const DiodeConfig& config, const ExperimentSpec& spec) {
    KeyValues kv;
    write_diode_config(config, kv);
    for (const auto& k : run_keys()) kv.set(k.name, k.get(spec));
    kv.set("run.code_version", code_version());
    if (spec.window_cm_per_s) {
        kv.set("run.result.window_lo_cm_per_s", format_number((*spec.window_cm_per_s)[0]));
        kv.set("run.result.window_hi_cm_per_s", format_number((*spec.window_cm_per_s)[1]));
    }
    return kv;
}

std::vector<double> speed_grid(double v_min_cm_per_s, double v_max_cm_per_s, int count) {
    std::vector<double> out;
    if (count <= 0) return out;
    if (count == 1) return {units::velocity_from_cm_per_s(v_min_cm_per_s)};
    for (int i = 0; i < count; ++i) {
        double v = v_min_cm_per_s + (v_max_cm_per_s - v_min_cm_per_s) * i / (count - 1);
        // Drop the last-digit noise of the linear spacing so grid points print as typed.
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
        std::from_chars(buf, res.ptr, v);
        out.push_back(units::velocity_from_cm_per_s(v));
    }
    return out;
}

ScatteringRow scattering_row(const ScatteringResult& r) {
    ScatteringRow row;
    const double v = units::velocity_to_cm_per_s(r.speed);
    row.v_cm_per_s = r.side == Side::FromLeft ? v : -v;
    row.r11_sq = r.reflection_probability(1);
    row.t31_sq = r.transmission_probability(3);
    row.t11_sq = r.transmission_probability(1);
    row.r31_sq = r.reflection_probability(3);
    row.flux_deficit = flux_deficit(r);
    return row;
}

std::vector<ScatteringRow> scattering_table(const DiodeConfig& config, std::span<const double> speeds,
                                            const ScatteringNumerics& numerics, int workers) {
    std::vector<ScatteringRow> rows;
    for (Side side : {Side::FromRight, Side::FromLeft}) {
        for (const auto& r : velocity_scan(config, side, 1, speeds, numerics, workers)) rows.push_back(scattering_row(r));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ScatteringRow& a, const ScatteringRow& b) { return a.v_cm_per_s < b.v_cm_per_s; });
    return rows;
}

std::optional<WorkingWindow> find_working_window(const std::vector<ScatteringRow>& rows, double threshold) {
    std::map<double, double> reflected;  // |v| -> |R11(-v)|^2
    for (const auto& r : rows) {
        if (r.v_cm_per_s < 0.0) reflected[-r.v_cm_per_s] = r.r11_sq;
    }
    std::vector<std::pair<double, bool>> good;
    for (const auto& r : rows) {
        if (r.v_cm_per_s <= 0.0) continue;
        const auto it = reflected.find(r.v_cm_per_s);
        good.emplace_back(r.v_cm_per_s, it != reflected.end() && r.t31_sq >= threshold && it->second >= threshold);
    }
    std::optional<WorkingWindow> best;
    std::size_t i = 0;
    while (i < good.size()) {
        if (!good[i].second) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < good.size() && good[j + 1].second) ++j;
        const WorkingWindow w{good[i].first, good[j].first};
        if (!best || w.width() > best->width()) best = w;
        i = j + 1;
    }
    return best;
}

std::string scattering_csv(const std::vector<ScatteringRow>& rows) {
    std::string out = "v_cm_per_s,R11_sq,T31_sq,T11_sq,R31_sq,flux_deficit\n";
    for (const auto& r : rows) {
        out += format_number(r.v_cm_per_s) + ',' + format_number(r.r11_sq) + ',' + format_number(r.t31_sq) + ',' +
               format_number(r.t11_sq) + ',' + format_number(r.r31_sq) + ',' + format_number(r.flux_deficit) + '\n';
    }
    return out;
}

ObservableRow observable_row(double v0_cm_per_s, const EnsembleStats& stats, std::string method) {
    return {v0_cm_per_s, stats.p_right, stats.p_right_err, stats.p_forward, stats.p_forward_err,
            stats.n, stats.mean_jumps, std::move(method)};
}

std::string observables_csv(const std::vector<ObservableRow>& rows) {
    const bool tagged = !rows.empty() && !rows.front().method.empty();
    std::string out = "v0_cm_per_s,p_right,p_right_err,p_forward,p_forward_err,n_traj,mean_jumps";
    out += tagged ? ",method\n" : "\n";
    for (const auto& r : rows) {
        out += format_number(r.v0_cm_per_s) + ',' + format_number(r.p_right) + ',' + format_number(r.p_right_err) + ',' +
               format_number(r.p_forward) + ',' + format_number(r.p_forward_err) + ',' + std::to_string(r.n_traj) + ',' +
               format_number(r.mean_jumps);
        if (tagged) out += ',' + r.method;
        out += '\n';
    }
    return out;
}

std::string snapshot_csv(const ChannelState& state) {
    std::string out = "x_um,p1,p2,p3\n";
    const auto c1 = state.channel(1);
    const auto c2 = state.channel(2);
    const auto c3 = state.channel(3);
    for (std::size_t i = 0; i < state.grid.n; ++i) {
        out += format_number(state.grid.x(i)) + ',' + format_number(std::norm(c1[i])) + ',' +
               format_number(std::norm(c2[i])) + ',' + format_number(std::norm(c3[i])) + '\n';
    }
    return out;
}

std::string snapshot_name(double time_ms) { return "snap_t" + format_number(time_ms) + ".csv"; }

std::string jump_log_jsonl(double v0_cm_per_s, const EnsembleStats& stats) {
    std::string out;
    for (const auto& rec : stats.records) {
        nlohmann::ordered_json j;
        j["v0_cm_per_s"] = v0_cm_per_s;
        j["seed"] = rec.seed;
        j["index"] = rec.index;
        auto jumps = nlohmann::ordered_json::array();
        for (const auto& e : rec.jumps) jumps.push_back({{"t_ms", e.time}, {"u", e.u}, {"x_um", e.mean_x}});
        j["jumps"] = std::move(jumps);
        j["p_right"] = rec.p_right;
        j["p_forward"] = rec.p_forward;
        out += j.dump() + '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCategory::Io, "cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCategory::Io, "write failed for '" + path.string() + "'");
}

Scenario trajectory_scenario(const DiodeConfig& config, const ExperimentSpec& spec, double v0_cm_per_s) {
    const double v0 = units::velocity_from_cm_per_s(v0_cm_per_s);
    const double dv0 = units::velocity_from_cm_per_s(spec.dv0_cm_per_s);
    Scenario sc = make_scenario(config, v0, dv0, spec.absorber_um, spec.x0_left_um, spec.x0_right_um);
    if (spec.t_max_ms > 0.0) {
        sc.t_max = spec.t_max_ms;
        sc.grid = auto_grid(config, sc.packet, sc.t_max, spec.absorber_um);
    }
    if (spec.grid_points > 0) sc.grid = SpatialGrid::make(sc.grid.x_min, sc.grid.x_max, spec.grid_points);
    const double dt_max = spec.dt_ms > 0.0 ? spec.dt_ms : coupling_time_step(config, sc.grid);
    sc.dt = divide_interval(sc.t_max, dt_max).second;
    return sc;
}

Scenario oracle_scenario(const DiodeConfig& config, const ExperimentSpec& spec, double v0_cm_per_s) {
    Scenario sc;
    sc.config = config;
    sc.packet = {spec.x0_um, units::velocity_from_cm_per_s(v0_cm_per_s), units::velocity_from_cm_per_s(spec.dv0_cm_per_s), 1};
    sc.grid = SpatialGrid::make(spec.x_min_um, spec.x_max_um, spec.grid_points > 0 ? spec.grid_points : 512);
    sc.t_max = spec.t_max_ms > 0.0 ? spec.t_max_ms : 5.0;
    sc.x_measure = spec.x_measure_um != 0.0 ? spec.x_measure_um : config.mirror.center;
    sc.absorber_um = 0.0;
    // Both methods see the same periodic box, so nothing is lost at the edges.
    sc.edge_limit = -1.0;
    const double dt_max = spec.dt_ms > 0.0 ? spec.dt_ms : MasterEquation(config, sc.grid, 2).stable_dt();
    sc.dt = divide_interval(sc.t_max, dt_max).second;
    return sc;
}

namespace {

void say(std::ostream* log, const std::string& line) {
    if (log) *log << line << std::endl;
}

RunReport run_scan_scattering(const DiodeConfig& config, ExperimentSpec& spec, std::ostream* log) {
    RunReport report;
    const auto speeds = speed_grid(spec.v_min_cm_per_s, spec.v_max_cm_per_s, spec.v_count);
    say(log, "scan-scattering: " + std::to_string(speeds.size()) + " speeds per side");
    const auto rows = scattering_table(config, speeds, {}, spec.workers);
    const auto path = spec.out_dir / "scattering.csv";
    write_text(path, scattering_csv(rows));
    report.written.push_back(path);
    report.window = find_working_window(rows, spec.window_threshold);
    if (report.window) {
        spec.window_cm_per_s = std::array<double, 2>{report.window->lo_cm_per_s, report.window->hi_cm_per_s};
        say(log, "working window [" + format_number(report.window->lo_cm_per_s) + ", " +
                     format_number(report.window->hi_cm_per_s) + "] cm/s");
    } else {
        say(log, "no working window at threshold " + format_number(spec.window_threshold));
    }
    return report;
}

RunReport run_scan_quench(const DiodeConfig& config, ExperimentSpec& spec, std::ostream* log) {
    RunReport report;
    const auto speeds = speed_grid(spec.v_min_cm_per_s, spec.v_max_cm_per_s, spec.v_count);
    for (double q : spec.omega_q_per_s) {
        DiodeConfig c = config;
        c.quench.peak = units::rate_from_per_s(q);
        say(log, "scan-quench: Omega_Q = " + format_number(q) + " /s");
        std::vector<ScatteringRow> rows;
        for (const auto& r : velocity_scan(c, Side::FromLeft, 1, speeds, {}, spec.workers)) rows.push_back(scattering_row(r));
        const auto path = spec.out_dir / ("scan_quench_q" + format_number(q) + ".csv");
        write_text(path, scattering_csv(rows));
        report.written.push_back(path);
    }
    return report;
}

RunReport run_propagate(const DiodeConfig& config, ExperimentSpec& spec, std::ostream* log) {
    RunReport report;
    for (double v0 : spec.v0_cm_per_s) {
        Scenario sc = trajectory_scenario(config, spec, v0);
        say(log, "propagate: v0 = " + format_number(v0) + " cm/s, grid [" + format_number(sc.grid.x_min) + ", " +
                     format_number(sc.grid.x_max) + "] x " + std::to_string(sc.grid.n) + ", dt = " + format_number(sc.dt) +
                     " ms");
        SplitOperator::Options opt;
        opt.sublevels = 0;
        opt.edge_limit = sc.edge_limit;
        opt.absorber_width = sc.absorber_um;
        const SplitOperator op(sc.config, sc.grid, sc.dt, opt);
        const auto psi = init_wavepacket(sc.packet, sc.grid, sc.config.params.hbar_over_m);
        const std::filesystem::path dir = spec.out_dir / ("propagate_v" + format_number(v0));
        PropagationOptions po;
        po.monitor_stride = spec.monitor_stride;
        po.snapshot_times = spec.snapshot_ms;
        // Callbacks arrive in ascending order of the requested times; files are
        // named after the request, not the nearest step time.
        std::vector<double> requested = spec.snapshot_ms;
        std::sort(requested.begin(), requested.end());
        std::size_t next = 0;
        po.on_snapshot = [&](const ChannelState& s) {
            const auto path = dir / snapshot_name(requested.at(next++));
            write_text(path, snapshot_csv(s));
            report.written.push_back(path);
        };
        const auto result = propagate_conditional(psi, op, sc.t_max, po);
        std::string csv = "t_ms,norm2,n1,n2,n3,mean_x_um\n";
        for (const auto& m : result.monitors) {
            csv += format_number(m.time) + ',' + format_number(m.norm2) + ',' + format_number(m.channel_norm2[0]) + ',' +
                   format_number(m.channel_norm2[1]) + ',' + format_number(m.channel_norm2[2]) + ',' +
                   format_number(m.mean_x) + '\n';
        }
        const auto path = dir / "monitors.csv";
        write_text(path, csv);
        report.written.push_back(path);
    }
    return report;
}

RunReport run_trajectories(const DiodeConfig& config, ExperimentSpec& spec, std::ostream* log) {
    RunReport report;
    std::vector<ObservableRow> rows;
    std::string jsonl;
    for (double v0 : spec.v0_cm_per_s) {
        Scenario sc = trajectory_scenario(config, spec, v0);
        if (spec.dt_guard) {
            const auto choice = choose_time_step(sc, 1e-4, sc.dt);
            sc.dt = choice.dt;
            say(log, "dt guard: dt = " + format_number(choice.dt) + " ms after " + std::to_string(choice.halvings) +
                         " halvings (change " + format_number(choice.change) + ")");
        }
        say(log, "trajectories: v0 = " + format_number(v0) + " cm/s, N = " + std::to_string(spec.n_traj) + ", grid [" +
                     format_number(sc.grid.x_min) + ", " + format_number(sc.grid.x_max) + "] x " +
                     std::to_string(sc.grid.n) + ", dt = " + format_number(sc.dt) + " ms, t_max = " +
                     format_number(sc.t_max) + " ms");
        const auto stats = ensemble_observables(spec.seed, spec.n_traj, sc, {spec.workers, true});
        rows.push_back(observable_row(v0, stats));
        if (spec.jump_log) jsonl += jump_log_jsonl(v0, stats);
    }
    const auto path = spec.out_dir / "trajectories.csv";
    write_text(path, observables_csv(rows));
    report.written.push_back(path);
    if (spec.jump_log) {
        const auto log_path = spec.out_dir / "jumps.jsonl";
        write_text(log_path, jsonl);
        report.written.push_back(log_path);
    }
    return report;
}

RunReport run_master_oracle(const DiodeConfig& config, ExperimentSpec& spec, std::ostream* log) {
    RunReport report;
    std::vector<ObservableRow> rows;
    for (double v0 : spec.v0_cm_per_s) {
        const Scenario sc = oracle_scenario(config, spec, v0);
        say(log, "master-oracle: v0 = " + format_number(v0) + " cm/s on [" + format_number(sc.grid.x_min) + ", " +
                     format_number(sc.grid.x_max) + "] x " + std::to_string(sc.grid.n) + ", t_max = " +
                     format_number(sc.t_max) + " ms");
        const auto psi = init_wavepacket(sc.packet, sc.grid, config.params.hbar_over_m);
        MasterRunOptions mo;
        mo.quadrature_nodes = spec.quadrature_nodes;
        const auto rho = propagate_master(DensityState::pure(psi), config, sc.t_max, mo);
        const auto obs = oracle_observables(rho, sc.x_measure);
        rows.push_back({v0, obs.p_right, 0.0, obs.p_forward, 0.0, 0, 0.0, "master"});
        say(log, "  master: p_right = " + format_number(obs.p_right) + ", p_forward = " + format_number(obs.p_forward));
        const auto stats = ensemble_observables(spec.seed, spec.n_traj, sc, {spec.workers, true});
        rows.push_back(observable_row(v0, stats, "mcwf"));
        say(log, "  mcwf:   p_right = " + format_number(stats.p_right) + " +- " + format_number(stats.p_right_err) +
                     ", p_forward = " + format_number(stats.p_forward) + " +- " + format_number(stats.p_forward_err));
    }
    const auto path = spec.out_dir / "master.csv";
    write_text(path, observables_csv(rows));
    report.written.push_back(path);
    return report;
}

}  // namespace

RunReport run_experiment(const DiodeConfig& config, ExperimentSpec spec, std::ostream* log) {
    validate(config);
    check_spec(spec);
    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec) throw Error(ErrorCategory::Io, "cannot create output directory '" + spec.out_dir.string() + "': " + ec.message());

    RunReport report;
    if (spec.subcommand == "scan-scattering") {
        report = run_scan_scattering(config, spec, log);
    } else if (spec.subcommand == "scan-quench") {
        report = run_scan_quench(config, spec, log);
    } else if (spec.subcommand == "propagate") {
        report = run_propagate(config, spec, log);
    } else if (spec.subcommand == "trajectories") {
        report = run_trajectories(config, spec, log);
    } else {
        report = run_master_oracle(config, spec, log);
    }
    const auto manifest = spec.out_dir / "run-manifest.cfg";
    write_text(manifest, "# atomdiode run manifest; replay with `atomdiode replay " + manifest.filename().string() +
                             "`\n" + manifest_for(config, spec).to_string());
    report.written.push_back(manifest);
    return report;
}

}  // namespace atomdiode
