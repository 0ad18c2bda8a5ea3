// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/config_io.hpp"
#include "atomdiode/density_matrix.hpp"
#include "atomdiode/errors.hpp"
#include "atomdiode/experiment.hpp"
#include "atomdiode/quantum_jump.hpp"
#include "atomdiode/scattering.hpp"
#include "atomdiode/units.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace atomdiode;
using namespace pybind11::literals;

namespace {

py::array_t<std::complex<double>> channels_array(const ChannelState& s) {
    py::array_t<std::complex<double>> out({std::size_t{3}, s.grid.n});
    std::copy(s.psi.begin(), s.psi.end(), out.mutable_data());
    return out;
}

py::array_t<double> grid_x(const SpatialGrid& g) {
    py::array_t<double> out(g.n);
    for (std::size_t i = 0; i < g.n; ++i) out.mutable_at(i) = g.x(i);
    return out;
}

py::dict stats_dict(const EnsembleStats& st) {
    py::list jumps;
    for (const auto& r : st.records) {
        py::list one;
        for (const auto& e : r.jumps) one.append(py::make_tuple(e.time, e.u, e.mean_x));
        jumps.append(one);
    }
    return py::dict("n"_a = st.n, "p_right"_a = st.p_right, "p_right_err"_a = st.p_right_err,
                    "p_forward"_a = st.p_forward, "p_forward_err"_a = st.p_forward_err,
                    "mean_jumps"_a = st.mean_jumps, "jump_histogram"_a = st.jump_histogram, "jumps"_a = jumps);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "atom diode core: scattering, wave packets, quantum jumps, density matrix";

    static py::exception<Error> error(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            error((std::string(category_name(e.category())) + ": " + e.what()).c_str());
        }
    });

    m.attr("__version__") = code_version();
    m.attr("NEON_HBAR_OVER_M") = units::kNeonHbarOverM;

    py::class_<LaserProfile>(m, "LaserProfile")
        .def(py::init<>())
        .def(py::init([](double peak, double center, double sigma) { return LaserProfile{peak, center, sigma}; }),
             "peak"_a, "center"_a, "sigma"_a = 15.0)
        .def_readwrite("peak", &LaserProfile::peak, "peak Rabi frequency, 1/ms")
        .def_readwrite("center", &LaserProfile::center, "um")
        .def_readwrite("sigma", &LaserProfile::sigma, "um")
        .def("__repr__", [](const LaserProfile& l) {
            return "LaserProfile(peak=" + format_number(l.peak) + ", center=" + format_number(l.center) +
                   ", sigma=" + format_number(l.sigma) + ")";
        });

    py::class_<PhysicalParams>(m, "PhysicalParams")
        .def(py::init<>())
        .def_readwrite("hbar_over_m", &PhysicalParams::hbar_over_m, "um^2/ms")
        .def_readwrite("v_rec", &PhysicalParams::v_rec, "um/ms")
        .def_readwrite("gamma", &PhysicalParams::gamma, "1/ms");

    py::class_<DiodeConfig>(m, "DiodeConfig")
        .def(py::init(&DiodeConfig::defaults))
        .def_static("defaults", &DiodeConfig::defaults)
        .def_static("load", [](const std::filesystem::path& p) { return load_diode_config(p); }, "path"_a)
        .def_static("parse", [](const std::string& text) { return diode_config_from(KeyValues::parse(text)); }, "text"_a)
        .def_readwrite("params", &DiodeConfig::params)
        .def_readwrite("stokes", &DiodeConfig::stokes)
        .def_readwrite("pump", &DiodeConfig::pump)
        .def_readwrite("mirror", &DiodeConfig::mirror)
        .def_readwrite("quench", &DiodeConfig::quench)
        .def("validate", [](const DiodeConfig& c) { validate(c); })
        .def("mirrored", [](const DiodeConfig& c) { return mirrored(c); })
        .def("to_text", [](const DiodeConfig& c) { return format_diode_config(c); })
        .def("potential", [](const DiodeConfig& c, double x) { return Eigen::Matrix3cd(potential_at(x, c)); }, "x"_a,
             "3x3 potential matrix at x (um), 1/ms");

    py::enum_<Side>(m, "Side").value("FROM_LEFT", Side::FromLeft).value("FROM_RIGHT", Side::FromRight);

    m.def(
        "scattering",
        [](const DiodeConfig& c, double speed_cm_per_s, Side side, int channel) {
            ScatteringQuery q{units::velocity_from_cm_per_s(speed_cm_per_s), side, channel, c, {}};
            const auto r = scattering_amplitudes(q);
            py::list refl, trans;
            for (int ch = 1; ch <= 3; ++ch) {
                refl.append(r.reflection_probability(ch));
                trans.append(r.transmission_probability(ch));
            }
            return py::dict("R"_a = refl, "T"_a = trans, "r"_a = r.reflection, "t"_a = r.transmission,
                            "k"_a = r.wavenumber, "flux_deficit"_a = flux_deficit(r),
                            "condition_number"_a = r.condition_number);
        },
        "config"_a, "speed_cm_per_s"_a, "side"_a = Side::FromLeft, "channel"_a = 1,
        "Stationary |R|^2, |T|^2 per outgoing channel for one incident speed (cm/s).");

    m.def(
        "scattering_table",
        [](const DiodeConfig& c, double v_min, double v_max, int count, int workers) {
            const auto rows = scattering_table(c, speed_grid(v_min, v_max, count), {}, workers);
            const auto n = static_cast<py::ssize_t>(rows.size());
            py::array_t<double> v(n), r11(n), t31(n), t11(n), r31(n), fd(n);
            for (py::ssize_t i = 0; i < n; ++i) {
                v.mutable_at(i) = rows[i].v_cm_per_s;
                r11.mutable_at(i) = rows[i].r11_sq;
                t31.mutable_at(i) = rows[i].t31_sq;
                t11.mutable_at(i) = rows[i].t11_sq;
                r31.mutable_at(i) = rows[i].r31_sq;
                fd.mutable_at(i) = rows[i].flux_deficit;
            }
            const auto w = find_working_window(rows);
            py::object window = py::none();
            if (w) window = py::make_tuple(w->lo_cm_per_s, w->hi_cm_per_s);
            return py::dict("v_cm_per_s"_a = v, "R11_sq"_a = r11, "T31_sq"_a = t31, "T11_sq"_a = t11,
                            "R31_sq"_a = r31, "flux_deficit"_a = fd, "window"_a = window);
        },
        "config"_a, "v_min"_a = 0.1, "v_max"_a = 5.0, "count"_a = 50, "workers"_a = 1,
        "Both-sided channel-1 scan on a speed grid in cm/s, plus the working window.");

    m.def(
        "propagate",
        [](const DiodeConfig& c, double v0_cm_per_s, double dv0_cm_per_s, double t_ms, double absorber_um) {
            const Scenario sc = make_scenario(c, units::velocity_from_cm_per_s(v0_cm_per_s),
                                              units::velocity_from_cm_per_s(dv0_cm_per_s), absorber_um);
            const double span = t_ms > 0.0 ? t_ms : sc.t_max;
            const auto [steps, dt] = divide_interval(span, sc.dt);
            const SplitOperator fitted(c, sc.grid, dt, {sc.sublevels, sc.edge_limit, sc.absorber_um, 1e4});
            auto k = fitted.enter(init_wavepacket(sc.packet, sc.grid, c.params.hbar_over_m));
            for (std::size_t s = 0; s < steps; ++s) fitted.advance(k);
            const ChannelState out = fitted.leave(k);
            return py::dict("x_um"_a = grid_x(sc.grid), "psi"_a = channels_array(out), "t_ms"_a = span,
                            "outflow"_a = k.outflow, "norms"_a = fitted.channel_norms2(k));
        },
        "config"_a, "v0_cm_per_s"_a, "dv0_cm_per_s"_a = 0.1, "t_ms"_a = 0.0, "absorber_um"_a = 100.0,
        "Conditional (no-jump) evolution of the default packet; returns the final channel amplitudes.");

    m.def(
        "trajectories",
        [](const DiodeConfig& c, double v0_cm_per_s, std::size_t n, std::uint64_t seed, double t_max_ms,
           double dv0_cm_per_s, int workers) {
            ExperimentSpec spec;
            spec.n_traj = n;
            spec.seed = seed;
            spec.t_max_ms = t_max_ms;
            spec.dv0_cm_per_s = dv0_cm_per_s;
            const Scenario sc = trajectory_scenario(c, spec, v0_cm_per_s);
            py::gil_scoped_release release;
            auto st = ensemble_observables(seed, n, sc, {workers, true});
            py::gil_scoped_acquire acquire;
            return stats_dict(st);
        },
        "config"_a, "v0_cm_per_s"_a, "n"_a = 200, "seed"_a = 1, "t_max_ms"_a = 0.0, "dv0_cm_per_s"_a = 0.1,
        "workers"_a = 1, "Quantum-jump ensemble; p_right / p_forward with N-vs-N/2 error bars.");

    m.def(
        "master_oracle",
        [](const DiodeConfig& c, double v0_cm_per_s, double dv0_cm_per_s, double x0_um, double x_min, double x_max,
           std::size_t points, double t_max_ms, std::size_t n_traj, std::uint64_t seed) {
            ExperimentSpec spec;
            spec.dv0_cm_per_s = dv0_cm_per_s;
            spec.x0_um = x0_um;
            spec.x_min_um = x_min;
            spec.x_max_um = x_max;
            spec.grid_points = points;
            spec.t_max_ms = t_max_ms;
            const Scenario sc = oracle_scenario(c, spec, v0_cm_per_s);
            py::gil_scoped_release release;
            const auto rho = propagate_master(
                DensityState::pure(init_wavepacket(sc.packet, sc.grid, c.params.hbar_over_m)), c, sc.t_max);
            const auto obs = oracle_observables(rho, sc.x_measure);
            py::gil_scoped_acquire acquire;
            py::dict out("p_right"_a = obs.p_right, "p_forward"_a = obs.p_forward, "trace"_a = rho.trace());
            if (n_traj > 0) {
                EnsembleStats st;
                {
                    py::gil_scoped_release again;
                    st = ensemble_observables(seed, n_traj, sc);
                }
                out["mcwf"] = stats_dict(st);
            }
            return out;
        },
        "config"_a, "v0_cm_per_s"_a, "dv0_cm_per_s"_a = 0.05, "x0_um"_a = -25.0, "x_min"_a = -60.0,
        "x_max"_a = 60.0, "points"_a = 256, "t_max_ms"_a = 0.5, "n_traj"_a = 0, "seed"_a = 1,
        "Density-matrix observables on a small periodic grid, optionally with a trajectory ensemble.");

    m.def("sample_recoil", py::overload_cast<double>(&sample_recoil), "r"_a, "Inverse CDF of (3/8)(1+u^2).");
    m.def("recoil_cdf", &recoil_cdf, "u"_a);
}
