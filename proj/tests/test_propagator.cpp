// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/errors.hpp"
#include "atomdiode/propagator.hpp"
#include "atomdiode/quantum_jump.hpp"
#include "atomdiode/scattering.hpp"
#include "atomdiode/units.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace atomdiode;

namespace {

DiodeConfig dark() {
    DiodeConfig c = DiodeConfig::defaults();
    c.stokes.peak = c.pump.peak = c.mirror.peak = c.quench.peak = 0.0;
    return c;
}

double distance(const ChannelState& a, const ChannelState& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.psi.size(); ++i) s += std::norm(a.psi[i] - b.psi[i]);
    return std::sqrt(s * a.grid.dx());
}

ErrorCategory category_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.category();
    }
    FAIL("no error thrown");
    return ErrorCategory::Io;
}

}  // namespace

TEST_CASE("initial packet moments") {
    const double hm = units::kNeonHbarOverM;
    const auto grid = SpatialGrid::make(-128.0, 128.0, 1024);
    const PacketSpec spec{-20.0, 5.0, 1.0, 1};
    const auto s = init_wavepacket(spec, grid, hm);
    CHECK(s.norm2() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.channel_norm2(2) == 0.0);
    CHECK(position_width(spec, hm) == doctest::Approx(1.5735566).epsilon(1e-7));
    const auto xm = oracle::position_moments(s, 1);
    CHECK(xm[0] == doctest::Approx(-20.0).epsilon(1e-12));
    CHECK(xm[1] == doctest::Approx(position_width(spec, hm)).epsilon(1e-10));
    const auto vm = velocity_moments(s, hm);
    CHECK(vm[0] == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(vm[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(weight_forward(s) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(weight_right_of(s, -20.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("free packet spreads by the exact law") {
    const DiodeConfig c = dark();
    const double hm = c.params.hbar_over_m;
    const auto grid = SpatialGrid::make(-200.0, 200.0, 1024);
    const PacketSpec spec{-30.0, 5.0, 1.0, 1};
    const SplitOperator op(c, grid, 0.05);
    const auto out = propagate_conditional(init_wavepacket(spec, grid, hm), op, 10.0);
    const auto xm = oracle::position_moments(out.final_state, 1);
    const double s0 = position_width(spec, hm);
    CHECK(out.final_state.time == doctest::Approx(10.0));
    CHECK(xm[0] == doctest::Approx(20.0).epsilon(1e-10));
    CHECK(xm[1] == doctest::Approx(oracle::free_width(s0, 1.0, 10.0)).epsilon(1e-8));
    CHECK(out.final_state.norm2() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("channel 2 decays at gamma") {
    const DiodeConfig c = dark();
    const auto grid = SpatialGrid::make(-100.0, 100.0, 512);
    const SplitOperator op(c, grid, 1e-3);
    const auto out = propagate_conditional(init_wavepacket({0.0, 2.0, 1.0, 2}, grid, c.params.hbar_over_m), op, 0.02);
    CHECK(out.final_state.norm2() == doctest::Approx(std::exp(-c.params.gamma * 0.02)).epsilon(1e-12));
}

TEST_CASE("split-operator error is second order") {
    DiodeConfig c = DiodeConfig::defaults();
    c.quench.peak = units::rate_from_per_s(1.0e5);
    const PacketSpec spec{0.0, 20.0, 2.0, 1};
    const double t = 0.2;
    const auto grid = auto_grid(c, spec, t);
    const auto psi0 = init_wavepacket(spec, grid, c.params.hbar_over_m);
    auto run = [&](double dt) { return propagate_conditional(psi0, SplitOperator(c, grid, dt), t).final_state; };
    const auto ref = run(1e-3 / 32.0);
    const double e1 = distance(run(1e-3), ref);
    const double e2 = distance(run(5e-4), ref);
    const double e3 = distance(run(2.5e-4), ref);
    MESSAGE("errors " << e1 << " " << e2 << " " << e3);
    CHECK(e1 > 1e-6);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("norm bookkeeping") {
    DiodeConfig c = DiodeConfig::defaults();
    const PacketSpec spec{0.0, 20.0, 2.0, 1};
    const double t = 1.0;
    const auto grid = auto_grid(c, spec, t);
    const auto psi0 = init_wavepacket(spec, grid, c.params.hbar_over_m);

    SUBCASE("non-increasing with decay and matching -gamma n2") {
        const SplitOperator op(c, grid, 1e-3);
        PropagationOptions opt;
        opt.monitor_stride = 1;
        const auto out = propagate_conditional(psi0, op, t, opt);
        for (std::size_t i = 1; i < out.norms.size(); ++i) CHECK(out.norms[i] <= out.norms[i - 1] * (1.0 + 1e-14));
        double integral = 0.0;
        for (std::size_t i = 1; i < out.monitors.size(); ++i) {
            const double dt = out.monitors[i].time - out.monitors[i - 1].time;
            integral += 0.5 * dt * (out.monitors[i].channel_norm2[1] + out.monitors[i - 1].channel_norm2[1]);
        }
        const double loss = 1.0 - out.norms.back();
        CHECK(loss > 1e-3);
        CHECK(loss == doctest::Approx(c.params.gamma * integral).epsilon(1e-3));
    }
    SUBCASE("conserved without decay") {
        c.params.gamma = 0.0;
        const auto out = propagate_conditional(psi0, SplitOperator(c, grid, 1e-3), t);
        for (double n : out.norms) CHECK(n == doctest::Approx(1.0).epsilon(1e-11));
    }
}

TEST_CASE("absorbing layers book the outflow") {
    const DiodeConfig c = dark();
    const auto grid = SpatialGrid::make(-150.0, 150.0, 1024);
    SplitOperator::Options opt;
    opt.absorber_width = 50.0;
    const SplitOperator op(c, grid, 0.05, opt);
    auto k = op.enter(init_wavepacket({0.0, 10.0, 1.0, 1}, grid, c.params.hbar_over_m));
    for (int i = 0; i < 1000; ++i) op.advance(k);
    CHECK(op.norm2(k) < 1e-10);
    CHECK(k.outflow[1][0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(k.outflow[0][0] < 1e-10);
    CHECK(k.outflow_total() + op.norm2(k) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grid errors") {
    const DiodeConfig c = dark();
    const double hm = c.params.hbar_over_m;
    const auto grid = SpatialGrid::make(-50.0, 50.0, 256);
    CHECK(category_of([&] { init_wavepacket({45.0, 1.0, 1.0, 1}, grid, hm); }) == ErrorCategory::PacketOutsideGrid);
    CHECK(category_of([&] { init_wavepacket({0.0, 1.0e4, 1.0, 1}, grid, hm); }) == ErrorCategory::PacketOutsideGrid);
    const SplitOperator op(c, grid, 0.01);
    const auto psi0 = init_wavepacket({0.0, 10.0, 1.0, 1}, grid, hm);
    CHECK(category_of([&] { propagate_conditional(psi0, op, 5.0); }) == ErrorCategory::BoundaryOverrun);
    CHECK(category_of([&] { propagate_conditional(psi0, op, 0.015); }) == ErrorCategory::Config);
}

TEST_CASE("forward packet transfer matches the stationary |T31|^2") {
    const DiodeConfig c = DiodeConfig::defaults();
    const double v0 = units::velocity_from_cm_per_s(3.0);
    const Scenario sc = make_scenario(c, v0, 1.0);
    const SplitOperator op(c, sc.grid, sc.dt, {sc.sublevels, sc.edge_limit, sc.absorber_um, 1e4});
    auto k = op.enter(init_wavepacket(sc.packet, sc.grid, c.params.hbar_over_m));
    for (std::size_t i = 0; i < sc.steps(); ++i) op.advance(k);
    const double ch3 = op.channel_norms2(k)[2] + k.outflow[0][2] + k.outflow[1][2];
    const double t31 = scattering_amplitudes({v0, Side::FromLeft, 1, c, {}}).transmission_probability(3);
    MESSAGE("packet " << ch3 << " stationary " << t31);
    CHECK(std::abs(ch3 - t31) < 2e-3);
}
