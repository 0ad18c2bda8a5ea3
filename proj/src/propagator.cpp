// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/propagator.hpp"

#include "atomdiode/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace atomdiode {

namespace {

constexpr cplx I{0.0, 1.0};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

AlignedBuffer to_aligned(std::span<const cplx> values) {
    AlignedBuffer buf(values.size());
    std::copy(values.begin(), values.end(), buf.data());
    return buf;
}

// |FFT|^2 of one channel, in FFT bin order.
std::vector<double> momentum_density(const ChannelState& state, int ch) {
    const std::size_t n = state.grid.n;
    AlignedBuffer buf = to_aligned(state.channel(ch));
    const FftPlan plan = FftPlan::batched_1d(n, 1);
    plan.forward(buf);
    std::vector<double> density(n);
    for (std::size_t i = 0; i < n; ++i) density[i] = std::norm(buf[i]);
    return density;
}

}  // namespace

SpatialGrid SpatialGrid::make(double x_min, double x_max, std::size_t n) {
    if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
        throw Error(ErrorCategory::Config, "grid requires x_min < x_max");
    }
    if (!is_power_of_two(n) || n < 16) {
        throw Error(ErrorCategory::Config, "grid point count must be a power of two >= 16");
    }
    return {x_min, x_max, n};
}

double SpatialGrid::k(std::size_t i) const {
    const auto signed_index = i < n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
    return 2.0 * std::numbers::pi * signed_index / (x_max - x_min);
}

double SpatialGrid::k_max() const { return std::numbers::pi / dx(); }

double position_width(const PacketSpec& spec, double hbar_over_m) { return hbar_over_m / (2.0 * spec.dv0); }

double ChannelState::norm2() const {
    double s = 0.0;
    for (const cplx& v : psi) s += std::norm(v);
    return s * grid.dx();
}

double ChannelState::channel_norm2(int ch) const {
    double s = 0.0;
    for (const cplx& v : channel(ch)) s += std::norm(v);
    return s * grid.dx();
}

double ChannelState::mean_x() const {
    double w = 0.0;
    double wx = 0.0;
    for (int ch = 1; ch <= kChannels; ++ch) {
        const auto c = channel(ch);
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double p = std::norm(c[i]);
            w += p;
            wx += p * grid.x(i);
        }
    }
    return w > 0.0 ? wx / w : 0.0;
}

ChannelState init_wavepacket(const PacketSpec& spec, const SpatialGrid& grid, double hbar_over_m) {
    if (spec.channel < 1 || spec.channel > kChannels) throw Error(ErrorCategory::Config, "packet channel must be 1..3");
    if (!(spec.dv0 > 0.0)) throw Error(ErrorCategory::Config, "packet velocity width must be > 0");
    const double sigma_x = position_width(spec, hbar_over_m);
    const double k0 = spec.v0 / hbar_over_m;
    const double sigma_k = 1.0 / (2.0 * sigma_x);
    if (spec.x0 - 8.0 * sigma_x < grid.x_min || spec.x0 + 8.0 * sigma_x > grid.x_max - grid.dx() ||
        std::abs(k0) + 6.0 * sigma_k > grid.k_max() || sigma_x < 2.0 * grid.dx()) {
        std::ostringstream msg;
        msg << "packet x0 = " << spec.x0 << " um, sigma_x = " << sigma_x << " um, k0 = " << k0
            << "/um does not fit grid [" << grid.x_min << ", " << grid.x_max << "] with " << grid.n << " points";
        throw Error(ErrorCategory::PacketOutsideGrid, msg.str());
    }

    ChannelState state;
    state.grid = grid;
    state.psi.assign(kChannels * grid.n, cplx{});
    auto c = state.channel(spec.channel);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double d = grid.x(i) - spec.x0;
        c[i] = std::exp(cplx(-d * d / (4.0 * sigma_x * sigma_x), k0 * grid.x(i)));
    }
    const double scale = 1.0 / std::sqrt(state.norm2());
    for (cplx& v : c) v *= scale;
    return state;
}

double weight_right_of(const ChannelState& state, double x_cut, int ch) {
    const auto c = state.channel(ch);
    double s = 0.0;
    for (std::size_t i = 0; i < state.grid.n; ++i) {
        const double x = state.grid.x(i);
        if (x > x_cut) {
            s += std::norm(c[i]);
        } else if (x == x_cut) {
            s += 0.5 * std::norm(c[i]);
        }
    }
    return s * state.grid.dx();
}

double weight_forward(const ChannelState& state, int ch) {
    const auto density = momentum_density(state, ch);
    const std::size_t n = state.grid.n;
    double s = 0.5 * density[0];
    for (std::size_t i = 1; i < n / 2; ++i) s += density[i];
    // Parseval: sum |F psi|^2 = n sum |psi|^2.
    return s * state.grid.dx() / static_cast<double>(n);
}

std::array<double, 2> velocity_moments(const ChannelState& state, double hbar_over_m, int ch) {
    const auto density = momentum_density(state, ch);
    double w = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i) {
        const double k = state.grid.k(i);
        w += density[i];
        m1 += density[i] * k;
        m2 += density[i] * k * k;
    }
    if (w <= 0.0) return {0.0, 0.0};
    const double mean = m1 / w;
    const double var = std::max(0.0, m2 / w - mean * mean);
    return {hbar_over_m * mean, hbar_over_m * std::sqrt(var)};
}

struct SplitOperator::Tables {
    DiodeConfig config;
    SpatialGrid grid;
    double dt = 0.0;
    int sublevels = 0;
    // Per level: 3x3 potential propagators (row-major) per grid point, and
    // kinetic phases per FFT bin.
    std::vector<std::vector<std::array<cplx, 9>>> potential;
    std::vector<std::vector<cplx>> half_kick;
    std::vector<std::vector<cplx>> full_kick_scaled;  // includes 1/n of the inverse transform
    std::size_t edge_cells = 4;
    double edge_limit = 1e-6;
    // Absorber: per level, masks for cells [0, layer) then [n - layer, n).
    std::size_t layer = 0;
    std::vector<std::vector<double>> mask;
};



SplitOperator::SplitOperator(const DiodeConfig& config, const SpatialGrid& grid, double dt, Options options)
    : dt_(dt) {
    const int sublevels = options.sublevels;
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCategory::Config, "time step must be > 0");
    if (sublevels < 0 || sublevels > 10) throw Error(ErrorCategory::Config, "sub-step levels must be 0..10");
    auto t = std::make_shared<Tables>();
    t->config = config;
    t->grid = grid;
    t->dt = dt;
    t->sublevels = sublevels;
    t->edge_cells = std::max<std::size_t>(4, grid.n / 1024);
    t->edge_limit = options.edge_limit;
    if (options.absorber_width < 0.0 || 2.0 * options.absorber_width >= grid.x_max - grid.x_min) {
        throw Error(ErrorCategory::Config, "absorber layers must be >= 0 and fit inside the box");
    }
    t->layer = static_cast<std::size_t>(std::ceil(options.absorber_width / grid.dx()));
    if (t->layer > 0) t->edge_limit = 0.0;

    const std::size_t n = grid.n;
    const double hm = config.params.hbar_over_m;
    std::vector<PotentialMatrix> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = potential_at(grid.x(i), config);

    for (int level = 0; level <= sublevels; ++level) {
        const double h = dt / std::ldexp(1.0, level);
        std::vector<std::array<cplx, 9>> u(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Matrix3cd e = (cplx(0.0, -h) * v[i]).exp();
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) u[i][3 * r + c] = e(r, c);
            }
        }
        std::vector<cplx> half(n);
        std::vector<cplx> full(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double kin = 0.5 * hm * grid.k(i) * grid.k(i);
            half[i] = std::exp(cplx(0.0, -0.5 * kin * h));
            full[i] = std::exp(cplx(0.0, -kin * h)) / static_cast<double>(n);
        }
        if (t->layer > 0) {
            // Cubic ramp: a single pass at speed v keeps exp(-absorber_strength / (2 v)).
            const double strength = options.absorber_strength / options.absorber_width;
            std::vector<double> m(2 * t->layer);
            for (std::size_t j = 0; j < t->layer; ++j) {
                // depth 1 at the outermost cell
                const double depth = static_cast<double>(t->layer - j) / static_cast<double>(t->layer);
                const double eta = strength * depth * depth * depth;
                m[j] = std::exp(-eta * h);
                m[2 * t->layer - 1 - j] = m[j];
            }
            t->mask.push_back(std::move(m));
        }
        t->potential.push_back(std::move(u));
        t->half_kick.push_back(std::move(half));
        t->full_kick_scaled.push_back(std::move(full));
    }
    tables_ = std::move(t);
    plan_ = std::make_shared<const FftPlan>(FftPlan::batched_1d(n, kChannels));
}

double SplitOperator::step_size(int level) const { return dt_ / std::ldexp(1.0, level); }
int SplitOperator::sublevels() const { return tables_->sublevels; }
const SpatialGrid& SplitOperator::grid() const { return tables_->grid; }
const DiodeConfig& SplitOperator::config() const { return tables_->config; }
bool SplitOperator::absorbing() const { return tables_->layer > 0; }

double SplitOperator::Kicked::outflow_total() const {
    double s = 0.0;
    for (const auto& side : outflow) {
        for (double w : side) s += w;
    }
    return s;
}

SplitOperator::Kicked SplitOperator::enter(const ChannelState& state, int level) const {
    if (state.grid.n != tables_->grid.n || state.psi.size() != kChannels * tables_->grid.n) {
        throw Error(ErrorCategory::Config, "state grid does not match propagator grid");
    }
    Kicked k;
    k.chi = to_aligned(state.psi);
    k.level = level;
    k.time = state.time;
    for (const cplx& v : state.psi) k.peak2 = std::max(k.peak2, std::norm(v));
    plan_->forward(k.chi);
    const std::size_t n = tables_->grid.n;
    const auto& half = tables_->half_kick[level];
    for (int ch = 0; ch < kChannels; ++ch) {
        cplx* c = k.chi.data() + ch * n;
        for (std::size_t i = 0; i < n; ++i) c[i] *= half[i];
    }
    return k;
}

ChannelState SplitOperator::leave(const Kicked& kicked) const {
    const std::size_t n = tables_->grid.n;
    AlignedBuffer buf = kicked.chi;
    const auto& half = tables_->half_kick[kicked.level];
    for (int ch = 0; ch < kChannels; ++ch) {
        cplx* c = buf.data() + ch * n;
        for (std::size_t i = 0; i < n; ++i) c[i] *= std::conj(half[i]);
    }
    plan_->backward(buf);
    ChannelState state;
    state.grid = tables_->grid;
    state.time = kicked.time;
    state.psi.resize(kChannels * n);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < kChannels * n; ++i) state.psi[i] = buf[i] * inv;
    return state;
}

void SplitOperator::relevel(Kicked& kicked, int level) const {
    if (level == kicked.level) return;
    const std::size_t n = tables_->grid.n;
    const auto& from = tables_->half_kick[kicked.level];
    const auto& to = tables_->half_kick[level];
    for (int ch = 0; ch < kChannels; ++ch) {
        cplx* c = kicked.chi.data() + ch * n;
        for (std::size_t i = 0; i < n; ++i) c[i] *= to[i] * std::conj(from[i]);
    }
    kicked.level = level;
}

void SplitOperator::check_edges(const AlignedBuffer& psi, double time, double peak2) const {
    const std::size_t n = tables_->grid.n;
    const std::size_t e = tables_->edge_cells;
    double peak = peak2;
    double edge = 0.0;
    for (int ch = 0; ch < kChannels; ++ch) {
        const cplx* c = psi.data() + ch * n;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = std::norm(c[i]);
            peak = std::max(peak, a);
            if (i < e || i >= n - e) edge = std::max(edge, a);
        }
    }
    const double limit = tables_->edge_limit;
    if (peak > 0.0 && edge > limit * limit * peak) {
        std::ostringstream msg;
        msg << "wavefunction reached the grid edge at t = " << time << " ms (edge/peak amplitude "
            << std::sqrt(edge / peak) << ")";
        throw Error(ErrorCategory::BoundaryOverrun, msg.str());
    }
}

double SplitOperator::advance(Kicked& kicked) const {
    const std::size_t n = tables_->grid.n;
    const int level = kicked.level;
    cplx* c1 = kicked.chi.data();
    cplx* c2 = c1 + n;
    cplx* c3 = c2 + n;

    plan_->backward(kicked.chi);
    const auto& u = tables_->potential[level];
    for (std::size_t i = 0; i < n; ++i) {
        const auto& m = u[i];
        const cplx a = c1[i];
        const cplx b = c2[i];
        const cplx d = c3[i];
        c1[i] = m[0] * a + m[1] * b + m[2] * d;
        c2[i] = m[3] * a + m[4] * b + m[5] * d;
        c3[i] = m[6] * a + m[7] * b + m[8] * d;
    }
    if (tables_->layer > 0) absorb(kicked);
    kicked.time += step_size(level);
    if (kicked.steps++ % 16 == 0 && tables_->edge_limit > 0.0) check_edges(kicked.chi, kicked.time, kicked.peak2);
    plan_->forward(kicked.chi);

    const auto& full = tables_->full_kick_scaled[level];
    double s = 0.0;
    for (int ch = 0; ch < kChannels; ++ch) {
        cplx* c = kicked.chi.data() + ch * n;
        for (std::size_t i = 0; i < n; ++i) {
            c[i] *= full[i];
            s += std::norm(c[i]);
        }
    }
    return s * tables_->grid.dx() / static_cast<double>(n);
}

void SplitOperator::absorb(Kicked& kicked) const {
    const std::size_t n = tables_->grid.n;
    const std::size_t layer = tables_->layer;
    const auto& mask = tables_->mask[kicked.level];
    // chi holds n psi here (unnormalized inverse transform).
    const double scale = tables_->grid.dx() / (static_cast<double>(n) * static_cast<double>(n));
    for (int ch = 0; ch < kChannels; ++ch) {
        cplx* c = kicked.chi.data() + ch * n;
        double left = 0.0;
        double right = 0.0;
        for (std::size_t j = 0; j < layer; ++j) {
            const double a = std::norm(c[j]);
            c[j] *= mask[j];
            left += a - std::norm(c[j]);
            const std::size_t i = n - layer + j;
            const double b = std::norm(c[i]);
            c[i] *= mask[layer + j];
            right += b - std::norm(c[i]);
        }
        kicked.outflow[0][ch] += left * scale;
        kicked.outflow[1][ch] += right * scale;
    }
}

double SplitOperator::norm2(const Kicked& kicked) const {
    double s = 0.0;
    for (std::size_t i = 0; i < kicked.chi.size(); ++i) s += std::norm(kicked.chi[i]);
    return s * tables_->grid.dx() / static_cast<double>(tables_->grid.n);
}

std::array<double, 3> SplitOperator::channel_norms2(const Kicked& kicked) const {
    const std::size_t n = tables_->grid.n;
    std::array<double, 3> out{};
    for (int ch = 0; ch < kChannels; ++ch) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::norm(kicked.chi[ch * n + i]);
        out[ch] = s * tables_->grid.dx() / static_cast<double>(n);
    }
    return out;
}

ChannelState split_operator_step(const ChannelState& state, const SplitOperator& op) {
    auto k = op.enter(state);
    op.advance(k);
    return op.leave(k);
}

std::pair<std::size_t, double> divide_interval(double span, double dt_max) {
    if (!(span > 0.0) || !(dt_max > 0.0)) throw Error(ErrorCategory::Config, "interval and step must be > 0");
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt_max - 1e-9)));
    return {n, span / static_cast<double>(n)};
}

PropagationResult propagate_conditional(const ChannelState& state, const SplitOperator& op, double t_end,
                                        const PropagationOptions& options) {
    const double span = t_end - state.time;
    if (span < -1e-12 * std::max(1.0, std::abs(t_end))) {
        throw Error(ErrorCategory::Config, "t_end precedes the state time");
    }
    const double ratio = span / op.dt();
    const auto steps = static_cast<std::size_t>(std::llround(std::max(0.0, ratio)));
    if (std::abs(ratio - static_cast<double>(steps)) > 1e-6) {
        throw Error(ErrorCategory::Config, "t_end must be an integer number of steps after the state time");
    }

    PropagationResult result;
    auto kicked = op.enter(state);
    auto sample = [&](const ChannelState& x_state) {
        MonitorSample m;
        m.time = x_state.time;
        m.channel_norm2 = op.channel_norms2(kicked);
        m.norm2 = m.channel_norm2[0] + m.channel_norm2[1] + m.channel_norm2[2];
        m.mean_x = x_state.mean_x();
        result.monitors.push_back(m);
    };

    std::vector<double> pending_snaps = options.snapshot_times;
    std::sort(pending_snaps.begin(), pending_snaps.end());
    std::size_t next_snap = 0;
    auto maybe_snapshot = [&](std::size_t step_index) {
        const double t = state.time + static_cast<double>(step_index) * op.dt();
        while (next_snap < pending_snaps.size() && pending_snaps[next_snap] <= t + 0.5 * op.dt()) {
            if (options.on_snapshot) {
                ChannelState s = op.leave(kicked);
                s.time = t;
                options.on_snapshot(s);
            }
            ++next_snap;
        }
    };

    result.times.reserve(steps + 1);
    result.norms.reserve(steps + 1);
    result.times.push_back(state.time);
    result.norms.push_back(op.norm2(kicked));
    sample(state);
    maybe_snapshot(0);

    for (std::size_t s = 1; s <= steps; ++s) {
        const double norm = op.advance(kicked);
        kicked.time = state.time + static_cast<double>(s) * op.dt();
        result.times.push_back(kicked.time);
        result.norms.push_back(norm);
        const bool last = s == steps;
        if (!last && options.monitor_stride > 0 && s % options.monitor_stride == 0) sample(op.leave(kicked));
        maybe_snapshot(s);
    }
    result.final_state = op.leave(kicked);
    if (steps > 0) sample(result.final_state);
    return result;
}

}  // namespace atomdiode
