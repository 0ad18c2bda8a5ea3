// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/density_matrix.hpp"
#include "atomdiode/errors.hpp"
#include "atomdiode/quantum_jump.hpp"
#include "atomdiode/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace atomdiode;

namespace {

// Channel-2 packet, no lasers: one decay, then free flight with a recoil kick.
Scenario decay_toy() {
    Scenario s;
    s.config = DiodeConfig::defaults();
    s.config.stokes.peak = s.config.pump.peak = s.config.mirror.peak = s.config.quench.peak = 0.0;
    s.config.params.v_rec = 10.0;
    s.packet = {0.0, 2.0, 1.0, 2};
    s.grid = SpatialGrid::make(-30.0, 30.0, 128);
    s.t_max = 0.1;
    s.dt = 1e-3;
    s.x_measure = 0.0;
    s.edge_limit = -1.0;
    return s;
}

// Channel-1 packet on a pump beam: Rabi cycling with decay, jumps at random times.
Scenario pumped_toy() {
    Scenario s;
    s.config = DiodeConfig::defaults();
    s.config.stokes = {0.0, -10.0, 3.0};
    s.config.pump = {60.0, 0.0, 3.0};
    s.config.mirror = {0.0, 10.0, 3.0};
    s.config.quench = {0.0, 20.0, 3.0};
    s.config.params.v_rec = 10.0;
    s.packet = {-3.0, 5.0, 1.0, 1};
    s.grid = SpatialGrid::make(-40.0, 40.0, 256);
    s.t_max = 0.2;
    s.dt = 1e-3;
    s.x_measure = 0.0;
    s.edge_limit = -1.0;
    return s;
}

void check_same(const EnsembleStats& a, const EnsembleStats& b) {
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const auto& x = a.records[i];
        const auto& y = b.records[i];
        CHECK(x.index == y.index);
        CHECK(x.p_right == y.p_right);
        CHECK(x.p_forward == y.p_forward);
        REQUIRE(x.jumps.size() == y.jumps.size());
        for (std::size_t j = 0; j < x.jumps.size(); ++j) {
            CHECK(x.jumps[j].time == y.jumps[j].time);
            CHECK(x.jumps[j].u == y.jumps[j].u);
        }
    }
    CHECK(a.p_right == b.p_right);
    CHECK(a.p_forward_err == b.p_forward_err);
}

}  // namespace

TEST_CASE("philox4x32-10 known answers") {
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) ==
          std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("counter streams are reproducible and distinct") {
    CounterRng a(5, 0), b(5, 0), c(5, 1), d(6, 0);
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        CHECK(x > 0.0);
        CHECK(x < 1.0);
        CHECK(x != c.uniform());
        CHECK(x != d.uniform());
    }
    CHECK(a.draws() == 100);
}

TEST_CASE("recoil sampler") {
    CHECK(sample_recoil(0.5) == 0.0);
    CHECK(sample_recoil(0.0) == -1.0);
    CHECK(sample_recoil(1.0) == 1.0);
    CHECK(sample_recoil(1e-300) == doctest::Approx(-1.0).epsilon(1e-6));
    for (double r = 0.01; r < 1.0; r += 0.01) CHECK(recoil_cdf(sample_recoil(r)) == doctest::Approx(r).epsilon(1e-13));

    CounterRng rng(42, 0);
    double m2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double u = sample_recoil(rng);
        m2 += u * u;
    }
    CHECK(std::abs(m2 / n - 0.4) < 0.002);

    // Kolmogorov-Smirnov at the 1% level
    std::vector<double> xs(100000);
    CounterRng rng2(43, 0);
    for (double& x : xs) x = sample_recoil(rng2);
    std::sort(xs.begin(), xs.end());
    double dmax = 0.0;
    const double m = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = recoil_cdf(xs[i]);
        dmax = std::max({dmax, std::abs(f - i / m), std::abs(f - (i + 1) / m)});
    }
    CHECK(dmax < 1.628 / std::sqrt(m));
}

TEST_CASE("jump moves channel 2 to channel 1 with the recoil kick") {
    const Scenario s = decay_toy();
    const auto psi = init_wavepacket(s.packet, s.grid, s.config.params.hbar_over_m);
    for (double u : {-1.0, -0.3, 0.0, 0.8}) {
        const auto out = apply_jump(psi, u, s.config.params);
        CHECK(out.norm2() == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(out.channel_norm2(1) == doctest::Approx(1.0).epsilon(1e-13));
        const auto vm = velocity_moments(out, s.config.params.hbar_over_m, 1);
        CHECK(vm[0] == doctest::Approx(2.0 + 10.0 * u).epsilon(1e-9));
        for (std::size_t i = 0; i < s.grid.n; ++i) CHECK(std::abs(out.channel(1)[i]) == doctest::Approx(std::abs(psi.channel(2)[i])));
    }
    auto empty = init_wavepacket({0.0, 2.0, 1.0, 1}, s.grid, s.config.params.hbar_over_m);
    try {
        apply_jump(empty, 0.0, s.config.params);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::EmptySourceChannel);
    }
}

TEST_CASE("no decay, no jumps") {
    Scenario s = pumped_toy();
    s.config.params.gamma = 0.0;
    const auto st = ensemble_observables(3, 8, s);
    CHECK(st.mean_jumps == 0.0);
    CHECK(st.p_right_err < 1e-15);
    const auto rec = run_trajectory(3, 0, s, true);
    const auto cond = propagate_conditional(init_wavepacket(s.packet, s.grid, s.config.params.hbar_over_m),
                                            SplitOperator(s.config, s.grid, s.dt, {s.sublevels, s.edge_limit, 0.0}),
                                            s.t_max);
    CHECK(rec.final_state->psi == cond.final_state.psi);
    CHECK(rec.p_right == doctest::Approx(weight_right_of(cond.final_state, 0.0)).epsilon(1e-12));
    CHECK(rec.p_right == st.records[0].p_right);
}

TEST_CASE("ensembles are reproducible") {
    const Scenario s = pumped_toy();
    const auto a = ensemble_observables(7, 16, s, {1, true});
    CHECK(a.mean_jumps > 0.2);
    CHECK(a.jump_histogram.size() > 2);
    SUBCASE("same seed") { check_same(a, ensemble_observables(7, 16, s, {1, true})); }
    SUBCASE("workers") { check_same(a, ensemble_observables(7, 16, s, {3, true})); }
    SUBCASE("shared prefix equals independent runs") { check_same(a, ensemble_observables(7, 16, s, {1, false})); }
    SUBCASE("single trajectory equals its ensemble slot") {
        const auto r = run_trajectory(7, 5, s);
        CHECK(r.p_right == a.records[5].p_right);
        CHECK(r.jumps.size() == a.records[5].jumps.size());
    }
    SUBCASE("other seed differs") { CHECK(ensemble_observables(8, 16, s).p_right != a.p_right); }
    SUBCASE("odd sizes are rejected") { CHECK_THROWS_AS(ensemble_observables(7, 15, s), Error); }
}

TEST_CASE("error bars shrink with N") {
    const Scenario s = decay_toy();
    double small = 0.0, large = 0.0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        small += ensemble_observables(seed, 64, s).p_forward_err;
        large += ensemble_observables(seed + 100, 1024, s).p_forward_err;
    }
    MESSAGE("mean err N=64 " << small / 8 << " N=1024 " << large / 8);
    CHECK(small > 2.0 * large);
}

TEST_CASE("trajectory mean matches the master equation on a small grid") {
    const Scenario s = decay_toy();
    const auto st = ensemble_observables(11, 2000, s);
    CHECK(st.jump_fraction(1) > 0.99);
    MasterRunOptions opt;
    opt.dt = 1e-3;
    const auto rho = propagate_master(
        DensityState::pure(init_wavepacket(s.packet, s.grid, s.config.params.hbar_over_m)), s.config, s.t_max, opt);
    const auto ob = oracle_observables(rho, s.x_measure);
    MESSAGE("mcwf " << st.p_right << " " << st.p_forward << " master " << ob.p_right << " " << ob.p_forward);
    // binomial bound 0.5 / sqrt(2000) ~ 0.011
    CHECK(std::abs(st.p_right - ob.p_right) < 0.035);
    CHECK(std::abs(st.p_forward - ob.p_forward) < 0.035);
}
