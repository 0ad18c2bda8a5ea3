// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/quantum_jump.hpp"

#include "atomdiode/errors.hpp"
#include "atomdiode/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace atomdiode {

namespace {

// Position spread of a free minimum-uncertainty packet after time t.
double spread_at(const PacketSpec& p, double hbar_over_m, double t) {
    const double s0 = position_width(p, hbar_over_m);
    return std::hypot(s0, p.dv0 * t);
}

double channel2_mean_x(const ChannelState& s) {
    const auto c = s.channel(2);
    double w = 0.0;
    double wx = 0.0;
    for (std::size_t i = 0; i < s.grid.n; ++i) {
        const double p = std::norm(c[i]);
        w += p;
        wx += p * s.grid.x(i);
    }
    return w > 0.0 ? wx / w : 0.0;
}

// Conditional norm including what the absorbers removed.
double total_norm(double in_box, const SplitOperator::Kicked& k) { return in_box + k.outflow_total(); }

void measure(TrajectoryRecord& rec, const ChannelState& final_state, const SplitOperator::Kicked& k,
             double x_measure) {
    const double norm = total_norm(final_state.norm2(), k);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorCategory::NonConvergence, "trajectory ended with zero or non-finite norm");
    }
    const double out_right = k.outflow[1][0];
    rec.final_norm2 = norm;
    rec.p_right = (weight_right_of(final_state, x_measure, 1) + out_right) / norm;
    rec.p_forward = (weight_forward(final_state, 1) + out_right) / norm;
}

// Runs one trajectory from a kicked state sitting on the main time grid.
class Runner {
public:
    Runner(const Scenario& sc, const SplitOperator& op, CounterRng rng, double threshold)
        : sc_(sc), op_(op), rng_(rng), threshold_(threshold), scratch_(op.sublevels() + 1) {}

    static bool crossed(double in_box, const SplitOperator::Kicked& k, double threshold) {
        return total_norm(in_box, k) <= threshold;
    }

    void run(SplitOperator::Kicked& k, std::size_t first_step, std::size_t steps) {
        for (std::size_t s = first_step + 1; s <= steps; ++s) {
            step(k, 0);
            k.time = static_cast<double>(s) * op_.dt();
        }
    }

    std::vector<JumpEvent>& jumps() { return jumps_; }

private:
    const Scenario& sc_;
    const SplitOperator& op_;
    CounterRng rng_;
    double threshold_;
    std::vector<SplitOperator::Kicked> scratch_;
    std::vector<JumpEvent> jumps_;

    // One step of size dt / 2^level; a threshold crossing inside it is
    // resolved by redoing the step as two halves, down to the finest level,
    // where the jump is applied at the end of the sub-step.
    void step(SplitOperator::Kicked& k, int level) {
        SplitOperator::Kicked& save = scratch_[level];
        save = k;
        const double norm = op_.advance(k);
        if (!crossed(norm, k, threshold_)) return;
        if (level == op_.sublevels()) {
            jump(k);
            return;
        }
        std::swap(k, save);
        op_.relevel(k, level + 1);
        step(k, level + 1);
        step(k, level + 1);
        op_.relevel(k, level);
    }

    void jump(SplitOperator::Kicked& k) {
        const ChannelState before = op_.leave(k);
        const double u = sample_recoil(rng_);
        jumps_.push_back({k.time, u, channel2_mean_x(before)});
        if (jumps_.size() > static_cast<std::size_t>(sc_.max_jumps)) {
            std::ostringstream msg;
            msg << "more than " << sc_.max_jumps << " jumps by t = " << k.time << " ms";
            throw Error(ErrorCategory::MaxJumpsExceeded, msg.str());
        }
        const ChannelState after = apply_jump(before, u, sc_.config.params);
        const std::size_t steps = k.steps;
        k = op_.enter(after, k.level);
        k.steps = steps;
        threshold_ = rng_.uniform();
    }
};

SplitOperator make_operator(const Scenario& sc) {
    return SplitOperator(sc.config, sc.grid, sc.dt, {sc.sublevels, sc.edge_limit, sc.absorber_um});
}

TrajectoryRecord finish(const SplitOperator& op, const SplitOperator::Kicked& k, const Scenario& sc,
                        TrajectoryRecord rec, bool keep_state) {
    ChannelState final_state = op.leave(k);
    measure(rec, final_state, k, sc.x_measure);
    if (keep_state) rec.final_state = std::move(final_state);
    return rec;
}

}  // namespace

std::size_t Scenario::steps() const {
    if (!(dt > 0.0) || !(t_max > 0.0)) throw Error(ErrorCategory::Config, "dt and t_max must be > 0");
    const double ratio = t_max / dt;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-6) {
        throw Error(ErrorCategory::Config, "t_max must be a whole number of time steps");
    }
    return n;
}

SpatialGrid auto_grid(const DiodeConfig& config, const PacketSpec& packet, double t_max, double absorber_um) {
    const double hm = config.params.hbar_over_m;
    const double v_max = std::abs(packet.v0) + config.params.v_rec + 4.0 * packet.dv0;
    const auto span = config.laser_span(8.0);
    const double margin = 8.0 * (absorber_um > 0.0 ? position_width(packet, hm) : spread_at(packet, hm, t_max));

    double lo = std::min(span[0], packet.x0 - margin);
    double hi = std::max(span[1], packet.x0 + margin);
    if (absorber_um > 0.0) {
        const double gap = 20.0;
        lo -= gap + absorber_um;
        hi += gap + absorber_um;
    } else if (packet.v0 >= 0.0) {
        // Fastest component reaches the first laser, turns and runs back.
        const double tau = std::max(0.0, (span[0] - packet.x0) / v_max);
        lo = std::min(lo, span[0] - v_max * std::max(0.0, t_max - tau) - margin);
        hi = std::max(hi, packet.x0 + v_max * t_max + margin);
    }
    if (absorber_um <= 0.0 && packet.v0 <= 0.0) {
        const double tau = std::max(0.0, (packet.x0 - span[1]) / v_max);
        hi = std::max(hi, span[1] + v_max * std::max(0.0, t_max - tau) + margin);
        lo = std::min(lo, packet.x0 - v_max * t_max - margin);
    }

    // Deepest well of the Hermitian part of the potential over the box.
    double well = 0.0;
    const int samples = 4096;
    for (int i = 0; i <= samples; ++i) {
        const double x = span[0] + (span[1] - span[0]) * i / samples;
        PotentialMatrix v = potential_at(x, config);
        const Eigen::Matrix3cd h = 0.5 * (v + v.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h, Eigen::EigenvaluesOnly);
        well = std::max(well, -es.eigenvalues().minCoeff());
    }
    const double k_packet = v_max / hm;
    const double k_need = std::sqrt(k_packet * k_packet + 2.0 * well / hm);
    const double points = (hi - lo) * k_need / std::numbers::pi;
    const auto n = std::bit_ceil(std::max<std::size_t>(16, static_cast<std::size_t>(std::floor(points)) + 1));
    return SpatialGrid::make(lo, hi, n);
}

double coupling_time_step(const DiodeConfig& config, const SpatialGrid& grid) {
    double rate = 0.5 * config.params.gamma;
    double coupling = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) {
        PotentialMatrix v = potential_at(grid.x(i), config);
        v(0, 0) = 0.0;
        v(1, 1) = 0.0;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(v, Eigen::EigenvaluesOnly);
        coupling = std::max(coupling, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    rate += coupling;
    return rate > 0.0 ? 2.0 / rate : 1.0;
}

Scenario make_scenario(const DiodeConfig& config, double v0, double dv0, double absorber_um, double x0_left,
                       double x0_right) {
    if (v0 == 0.0 || !std::isfinite(v0)) throw Error(ErrorCategory::Config, "v0 must be non-zero");
    Scenario sc;
    sc.config = config;
    sc.packet = {v0 > 0.0 ? x0_left : x0_right, v0, dv0, 1};
    sc.t_max = 600.0 / std::abs(v0);
    sc.x_measure = config.mirror.center;
    sc.absorber_um = absorber_um;
    sc.grid = auto_grid(config, sc.packet, sc.t_max, absorber_um);
    sc.dt = divide_interval(sc.t_max, coupling_time_step(config, sc.grid)).second;
    return sc;
}

double recoil_cdf(double u) {
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return 0.5 + 0.375 * (u + u * u * u / 3.0);
}

double sample_recoil(double r) {
    if (!(r > 0.0)) return -1.0;
    if (!(r < 1.0)) return 1.0;
    const double target = r - 0.5;
    double lo = -1.0;
    double hi = 1.0;
    double u = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double g = 0.375 * (u + u * u * u / 3.0) - target;
        if (g == 0.0) break;
        if (g > 0.0) {
            hi = u;
        } else {
            lo = u;
        }
        double next = u - g / (0.375 * (1.0 + u * u));
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double du = std::abs(next - u);
        u = next;
        if (du < 1e-14) break;
    }
    return u;
}

double sample_recoil(CounterRng& rng) { return sample_recoil(rng.uniform()); }

ChannelState apply_jump(const ChannelState& state, double u, const PhysicalParams& params) {
    const double total = state.norm2();
    const double source = state.channel_norm2(2);
    if (!(source >= 1e-14 * total) || !(source > 0.0)) {
        std::ostringstream msg;
        msg << "jump from channel 2 holding " << source << " of norm " << total;
        throw Error(ErrorCategory::EmptySourceChannel, msg.str());
    }
    ChannelState out;
    out.grid = state.grid;
    out.time = state.time;
    out.psi.assign(state.psi.size(), cplx{});
    const double kick = u * params.v_rec / params.hbar_over_m;
    const double scale = 1.0 / std::sqrt(source);
    const auto from = state.channel(2);
    auto to = out.channel(1);
    for (std::size_t i = 0; i < state.grid.n; ++i) {
        to[i] = scale * std::polar(1.0, kick * state.grid.x(i)) * from[i];
    }
    return out;
}

TrajectoryRecord run_trajectory(std::uint64_t seed, std::uint64_t index, const Scenario& scenario, bool keep_state) {
    const std::size_t steps = scenario.steps();
    const SplitOperator op = make_operator(scenario);
    CounterRng rng(seed, index);
    const double threshold = rng.uniform();
    Runner runner(scenario, op, rng, threshold);

    ChannelState init = init_wavepacket(scenario.packet, scenario.grid, scenario.config.params.hbar_over_m);
    auto k = op.enter(init);
    runner.run(k, 0, steps);

    TrajectoryRecord rec;
    rec.seed = seed;
    rec.index = index;
    rec.jumps = std::move(runner.jumps());
    return finish(op, k, scenario, std::move(rec), keep_state);
}

double EnsembleStats::jump_fraction(std::size_t k) const {
    if (n == 0 || k >= jump_histogram.size()) return 0.0;
    return static_cast<double>(jump_histogram[k]) / static_cast<double>(n);
}

EnsembleStats summarize(std::vector<TrajectoryRecord> records) {
    EnsembleStats st;
    st.n = records.size();
    if (st.n < 2 || st.n % 2 != 0) throw Error(ErrorCategory::Config, "ensemble size must be even and >= 2");
    const std::size_t half = st.n / 2;
    double right = 0.0;
    double forward = 0.0;
    double right_half = 0.0;
    double forward_half = 0.0;
    double jumps = 0.0;
    for (std::size_t i = 0; i < st.n; ++i) {
        const auto& r = records[i];
        right += r.p_right;
        forward += r.p_forward;
        if (i + 1 == half) {
            right_half = right;
            forward_half = forward;
        }
        const std::size_t j = r.jumps.size();
        if (st.jump_histogram.size() <= j) st.jump_histogram.resize(j + 1, 0);
        ++st.jump_histogram[j];
        jumps += static_cast<double>(j);
    }
    const double n = static_cast<double>(st.n);
    const double h = static_cast<double>(half);
    st.p_right = right / n;
    st.p_forward = forward / n;
    st.p_right_err = std::abs(st.p_right - right_half / h);
    st.p_forward_err = std::abs(st.p_forward - forward_half / h);
    st.mean_jumps = jumps / n;
    st.records = std::move(records);
    return st;
}

EnsembleStats ensemble_observables(std::uint64_t seed, std::size_t n, const Scenario& scenario,
                                   const EnsembleOptions& options) {
    if (n < 2 || n % 2 != 0) throw Error(ErrorCategory::Config, "ensemble size must be even and >= 2");
    const std::size_t steps = scenario.steps();
    const SplitOperator op = make_operator(scenario);

    std::vector<TrajectoryRecord> records(n);
    struct Failure {
        std::size_t index;
        ErrorCategory category;
        std::string message;
    };
    std::vector<std::optional<Failure>> errors(n);
    auto record_error = [&](std::size_t i, const std::exception& e) {
        const auto* err = dynamic_cast<const Error*>(&e);
        errors[i] = Failure{i, err ? err->category() : ErrorCategory::NonConvergence, e.what()};
    };

    if (!options.share_prefix) {
        parallel_for(n, options.workers, [&](std::size_t i) {
            try {
                records[i] = run_trajectory(seed, i, scenario);
            } catch (const std::exception& e) {
                record_error(i, e);
            }
        });
    } else {
        // Thresholds in decreasing order are crossed first.
        std::vector<double> thresholds(n);
        for (std::size_t i = 0; i < n; ++i) thresholds[i] = CounterRng(seed, i).uniform();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return thresholds[a] > thresholds[b]; });

        struct Fork {
            std::size_t index;
            std::size_t step;
            SplitOperator::Kicked state;
        };
        std::vector<Fork> forks;
        std::size_t next = 0;
        ChannelState init = init_wavepacket(scenario.packet, scenario.grid, scenario.config.params.hbar_over_m);
        auto k = op.enter(init);
        bool prefix_failed = false;
        SplitOperator::Kicked before;
        try {
            for (std::size_t s = 1; s <= steps && next < n; ++s) {
                before = k;
                const double norm = total_norm(op.advance(k), k);
                k.time = static_cast<double>(s) * op.dt();
                while (next < n && norm <= thresholds[order[next]]) {
                    forks.push_back({order[next], s - 1, before});
                    ++next;
                }
            }
        } catch (const std::exception& e) {
            // Every trajectory that had not jumped yet follows the same path.
            for (std::size_t j = next; j < n; ++j) record_error(order[j], e);
            prefix_failed = true;
        }
        if (!prefix_failed && next < n) {
            TrajectoryRecord common;
            try {
                common = finish(op, k, scenario, TrajectoryRecord{}, false);
            } catch (const std::exception& e) {
                for (std::size_t j = next; j < n; ++j) record_error(order[j], e);
                prefix_failed = true;
            }
            if (!prefix_failed) {
                for (std::size_t j = next; j < n; ++j) {
                    records[order[j]] = common;
                    records[order[j]].seed = seed;
                    records[order[j]].index = order[j];
                }
            }
        }

        parallel_for(forks.size(), options.workers, [&](std::size_t f) {
            Fork& fork = forks[f];
            const std::size_t i = fork.index;
            try {
                CounterRng rng(seed, i);
                const double threshold = rng.uniform();
                Runner runner(scenario, op, rng, threshold);
                SplitOperator::Kicked state = std::move(fork.state);
                runner.run(state, fork.step, steps);
                TrajectoryRecord rec;
                rec.seed = seed;
                rec.index = i;
                rec.jumps = std::move(runner.jumps());
                records[i] = finish(op, state, scenario, std::move(rec), false);
            } catch (const std::exception& e) {
                record_error(i, e);
            }
        });
    }

    std::size_t failed = 0;
    const Failure* first = nullptr;
    std::ostringstream msg;
    for (const auto& e : errors) {
        if (!e) continue;
        if (!first) first = &*e;
        if (failed < 5) msg << (failed ? "; " : "") << "trajectory " << e->index << " (seed " << seed << "): " << e->message;
        ++failed;
    }
    if (first) {
        std::ostringstream full;
        full << failed << " of " << n << " trajectories failed: " << msg.str() << (failed > 5 ? "; ..." : "");
        throw Error(first->category, full.str());
    }
    return summarize(std::move(records));
}

namespace {

struct Signature {
    std::vector<double> norms;  // every step
    std::array<double, 3> channels{};
    double right = 0.0;
    double forward = 0.0;
};

Signature conditional_signature(const Scenario& sc, double dt) {
    Scenario s = sc;
    s.dt = dt;
    const SplitOperator op = make_operator(s);
    const std::size_t steps = s.steps();
    auto k = op.enter(init_wavepacket(s.packet, s.grid, s.config.params.hbar_over_m));
    Signature sig;
    sig.norms.reserve(steps + 1);
    sig.norms.push_back(total_norm(op.norm2(k), k));
    for (std::size_t i = 0; i < steps; ++i) sig.norms.push_back(total_norm(op.advance(k), k));
    const ChannelState last = op.leave(k);
    for (int ch = 1; ch <= kChannels; ++ch) {
        sig.channels[ch - 1] = last.channel_norm2(ch) + k.outflow[0][ch - 1] + k.outflow[1][ch - 1];
    }
    sig.right = weight_right_of(last, s.x_measure, 1) + k.outflow[1][0];
    sig.forward = weight_forward(last, 1) + k.outflow[1][0];
    return sig;
}

double signature_change(const Signature& coarse, const Signature& fine) {
    double d = 0.0;
    for (std::size_t j = 0; j < coarse.norms.size() && 2 * j < fine.norms.size(); ++j) {
        d = std::max(d, std::abs(coarse.norms[j] - fine.norms[2 * j]));
    }
    for (int c = 0; c < 3; ++c) d = std::max(d, std::abs(coarse.channels[c] - fine.channels[c]));
    d = std::max(d, std::abs(coarse.right - fine.right));
    d = std::max(d, std::abs(coarse.forward - fine.forward));
    return d;
}

}  // namespace

TimeStepChoice choose_time_step(const Scenario& scenario, double tolerance, double dt_start, int max_halvings) {
    const double start = dt_start > 0.0 ? dt_start : coupling_time_step(scenario.config, scenario.grid);
    double dt = divide_interval(scenario.t_max, start).second;
    Signature coarse = conditional_signature(scenario, dt);
    TimeStepChoice choice;
    for (int h = 0; h <= max_halvings; ++h) {
        Signature fine = conditional_signature(scenario, 0.5 * dt);
        choice.dt = dt;
        choice.change = signature_change(coarse, fine);
        choice.halvings = h;
        if (choice.change < tolerance) return choice;
        dt *= 0.5;
        coarse = std::move(fine);
    }
    std::ostringstream msg;
    msg << "time step did not converge: change " << choice.change << " at dt = " << choice.dt << " ms";
    throw Error(ErrorCategory::NonConvergence, msg.str());
}

}  // namespace atomdiode
