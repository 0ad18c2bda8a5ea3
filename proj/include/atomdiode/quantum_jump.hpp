// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "atomdiode/errors.hpp"
#include "atomdiode/propagator.hpp"
#include "atomdiode/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace atomdiode {

/// Everything that defines one Monte Carlo wave-function experiment.
struct Scenario {
    DiodeConfig config;
    PacketSpec packet;
    SpatialGrid grid;
    double dt = 4e-3;      ///< ms; t_max must be a whole number of steps
    double t_max = 20.0;   ///< ms
    double x_measure = 85.0;  ///< um; p_right counts channel 1 beyond this point
    int max_jumps = 100;
    /// Jump instants are resolved to dt / 2^sublevels.
    int sublevels = 4;
    double edge_limit = 1e-6;
    /// Absorbing layers at both box ends (um); 0 keeps a periodic box with
    /// the edge check. Weight leaving through the right layer is counted as
    /// right of x_measure and moving forward, through the left as neither.
    double absorber_um = 0.0;

    std::size_t steps() const;
};

/// Scenario with the packet entering from the side implied by v0, horizon
/// 600 um / |v0|, measurement point at the mirror centre, absorbing layers of
/// `absorber_um` and an automatic grid.
Scenario make_scenario(const DiodeConfig& config, double v0, double dv0, double absorber_um = 100.0,
                       double x0_left = -115.0, double x0_right = 255.0);

/// Smallest power-of-two grid whose k range covers the packet, one recoil and
/// the momentum gained in the deepest dressed-state well. Without absorbers
/// the box holds everything the packet can reach by t_max (including one
/// reflection); with absorbers it holds the lasers and the initial packet
/// plus the two layers.
SpatialGrid auto_grid(const DiodeConfig& config, const PacketSpec& packet, double t_max, double absorber_um = 0.0);

/// Inverse of F(u) = 1/2 + 3/8 (u + u^3/3) for r in [0, 1].
double sample_recoil(double r);
double sample_recoil(CounterRng& rng);
/// F(u) itself, clamped to [0, 1] outside [-1, 1].
double recoil_cdf(double u);

/// Channel 1 becomes exp(i u v_rec x / (hbar/m)) psi_2, renormalized; channels
/// 2 and 3 are cleared. Throws Error(EmptySourceChannel) when channel 2 holds
/// less than 1e-14 of the state's norm.
ChannelState apply_jump(const ChannelState& state, double u, const PhysicalParams& params);

struct JumpEvent {
    double time = 0.0;    ///< ms
    double u = 0.0;
    double mean_x = 0.0;  ///< <x> of channel 2 at the jump, um
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    std::vector<JumpEvent> jumps;
    double p_right = 0.0;    ///< of the renormalized final state
    double p_forward = 0.0;
    double final_norm2 = 0.0;  ///< unnormalized since the last jump, absorbed weight included
    std::optional<ChannelState> final_state;  ///< kept only on request
};

/// Stream `index` under `seed`: draw 0 is the first threshold, then each jump
/// consumes one recoil draw and one new threshold.
TrajectoryRecord run_trajectory(std::uint64_t seed, std::uint64_t index, const Scenario& scenario,
                                bool keep_state = false);

struct EnsembleStats {
    std::size_t n = 0;
    double p_right = 0.0;
    double p_right_err = 0.0;
    double p_forward = 0.0;
    double p_forward_err = 0.0;
    double mean_jumps = 0.0;
    std::vector<std::size_t> jump_histogram;  ///< [k] = trajectories with k jumps
    std::vector<TrajectoryRecord> records;    ///< index order

    /// Fraction of trajectories with exactly k jumps.
    double jump_fraction(std::size_t k) const;
};

struct EnsembleOptions {
    int workers = 1;
    /// Evolve the common no-jump history once and start each trajectory from
    /// the step before its first jump. Bit-identical to independent runs.
    bool share_prefix = true;
};

/// Trajectories 0..n-1 of stream family `seed`. Error bars are
/// |mean over n - mean over the first n/2|. Requires n >= 2 and even. Failed
/// trajectories are collected and reported together in one Error whose
/// category is that of the lowest failing index.
EnsembleStats ensemble_observables(std::uint64_t seed, std::size_t n, const Scenario& scenario,
                                   const EnsembleOptions& options = {});

/// Statistics of already computed records (index order).
EnsembleStats summarize(std::vector<TrajectoryRecord> records);

struct TimeStepChoice {
    double dt = 0.0;
    double change = 0.0;  ///< largest observable change when dt was halved
    int halvings = 0;
};

/// Starting from dt_start (or an estimate from the coupling strengths),
/// halves dt until the conditional first-jump distribution and final channel
/// norms move by less than `tolerance` between dt and dt / 2. Returns the
/// coarser step of the last pair.
TimeStepChoice choose_time_step(const Scenario& scenario, double tolerance = 1e-4, double dt_start = 0.0,
                                int max_halvings = 6);

/// 2 / (largest |eigenvalue| of the laser-coupling part of the potential + gamma/2).
double coupling_time_step(const DiodeConfig& config, const SpatialGrid& grid);

}  // namespace atomdiode
