// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "atomdiode/fft.hpp"
#include "atomdiode/model.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace atomdiode {

/// Periodic uniform grid x_i = x_min + i dx, i < n, dx = (x_max - x_min) / n.
struct SpatialGrid {
    double x_min = -400.0;
    double x_max = 600.0;
    std::size_t n = 8192;

    /// Throws Error(Config) unless n is a power of two >= 16 and x_min < x_max.
    static SpatialGrid make(double x_min, double x_max, std::size_t n);

    double dx() const { return (x_max - x_min) / static_cast<double>(n); }
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
    /// Wavenumber of FFT bin i (standard FFT ordering), 1/um.
    double k(std::size_t i) const;
    double k_max() const;
};

/// Gaussian minimum-uncertainty packet; dv0 is the velocity standard deviation.
struct PacketSpec {
    double x0 = 0.0;   ///< um
    double v0 = 0.0;   ///< um/ms, signed
    double dv0 = 1.0;  ///< um/ms, > 0
    int channel = 1;
};

/// Position standard deviation (hbar/m) / (2 dv0), in um.
double position_width(const PacketSpec& spec, double hbar_over_m);

/// Three channel wavefunctions on a shared grid, stored channel-major.
/// Norms are continuum norms, sum |psi|^2 dx.
struct ChannelState {
    SpatialGrid grid;
    std::vector<cplx> psi;  ///< 3 * grid.n values
    double time = 0.0;      ///< ms

    std::span<cplx> channel(int ch) { return {psi.data() + (ch - 1) * grid.n, grid.n}; }
    std::span<const cplx> channel(int ch) const { return {psi.data() + (ch - 1) * grid.n, grid.n}; }

    double norm2() const;
    double channel_norm2(int ch) const;
    double mean_x() const;  ///< over all channels, normalized by norm2()
};

ChannelState init_wavepacket(const PacketSpec& spec, const SpatialGrid& grid, double hbar_over_m);

/// Unnormalized weight of channel `ch` at x > x_cut (a grid point exactly at
/// x_cut counts half).
double weight_right_of(const ChannelState& state, double x_cut, int ch = 1);
/// Unnormalized weight of channel `ch` with k > 0 (the k = 0 bin counts half).
double weight_forward(const ChannelState& state, int ch = 1);
/// Mean and standard deviation of the velocity distribution of channel `ch`.
std::array<double, 2> velocity_moments(const ChannelState& state, double hbar_over_m, int ch = 1);

/// Strang split-operator propagator for the conditional Hamiltonian:
/// half kinetic step, exact 3x3 potential exponential per grid point, half
/// kinetic step. Tables for the step dt and for sub-steps dt / 2^l,
/// l = 1..sublevels, are built once and shared by copies.
///
/// Between steps the state is held in a kicked momentum representation
/// chi = K(h/2) F psi, which lets consecutive steps share one transform pair.
/// All methods are const and operate on caller-owned buffers, so one instance
/// may be used from several threads at once.
class SplitOperator {
public:
    struct Options {
        int sublevels = 4;
        /// Largest tolerated |psi| in the outer edge cells relative to max |psi|
        /// at entry (or now, if larger); <= 0 disables the check. Referring to
        /// the entry peak keeps strongly absorbed states from tripping on
        /// round-off.
        double edge_limit = 1e-6;
        /// Width in um of absorbing layers inside both box ends; 0 keeps the
        /// box periodic. With layers the edge check is off and the absorbed
        /// weight is booked per side and channel in Kicked::outflow.
        double absorber_width = 0.0;
        /// Peak absorption rate times layer width, um/ms.
        double absorber_strength = 1e4;
    };

    SplitOperator(const DiodeConfig& config, const SpatialGrid& grid, double dt, Options options);
    SplitOperator(const DiodeConfig& config, const SpatialGrid& grid, double dt)
        : SplitOperator(config, grid, dt, Options{}) {}

    struct Kicked {
        AlignedBuffer chi;
        int level = 0;
        double time = 0.0;
        std::size_t steps = 0;
        double peak2 = 0.0;  ///< max |psi|^2 at entry
        /// Weight removed by the absorbers since entry, [0] left / [1] right, per channel.
        std::array<std::array<double, 3>, 2> outflow{};

        double outflow_total() const;
    };

    double dt() const { return dt_; }
    double step_size(int level) const;
    int sublevels() const;
    const SpatialGrid& grid() const;
    const DiodeConfig& config() const;
    bool absorbing() const;

    Kicked enter(const ChannelState& state, int level = 0) const;
    ChannelState leave(const Kicked& kicked) const;
    void relevel(Kicked& kicked, int level) const;
    /// One step of size step_size(kicked.level); returns the new norm2.
    /// Throws Error(BoundaryOverrun) when the edge amplitude exceeds the limit;
    /// `kicked` is unusable afterwards.
    double advance(Kicked& kicked) const;
    double norm2(const Kicked& kicked) const;
    std::array<double, 3> channel_norms2(const Kicked& kicked) const;

private:
    struct Tables;
    std::shared_ptr<const Tables> tables_;
    std::shared_ptr<const FftPlan> plan_;
    double dt_;

    void absorb(Kicked& kicked) const;
    void check_edges(const AlignedBuffer& psi, double time, double peak2) const;
};

/// One Strang step of the propagator's dt.
ChannelState split_operator_step(const ChannelState& state, const SplitOperator& op);

struct MonitorSample {
    double time = 0.0;
    double norm2 = 0.0;
    std::array<double, 3> channel_norm2{};
    double mean_x = 0.0;
};

struct PropagationOptions {
    std::size_t monitor_stride = 0;  ///< 0: only first and last sample
    std::vector<double> snapshot_times;
    std::function<void(const ChannelState&)> on_snapshot;
};

struct PropagationResult {
    ChannelState final_state;
    std::vector<double> times;  ///< every step
    std::vector<double> norms;  ///< norm2 at `times`, non-increasing for gamma >= 0
    std::vector<MonitorSample> monitors;
};

/// Conditional (no-jump) evolution to t_end, which must lie an integer number
/// of steps after state.time.
PropagationResult propagate_conditional(const ChannelState& state, const SplitOperator& op, double t_end,
                                        const PropagationOptions& options = {});

/// Number of steps and step size dividing `span` into steps no longer than dt_max.
std::pair<std::size_t, double> divide_interval(double span, double dt_max);

}  // namespace atomdiode
