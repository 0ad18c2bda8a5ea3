// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/density_matrix.hpp"

#include "atomdiode/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace atomdiode {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kTraceTolerance = 1e-4;

void check_grid(const SpatialGrid& grid) {
    if (grid.n > kMaxDensityPoints) {
        std::ostringstream msg;
        msg << "density-matrix grids are limited to " << kMaxDensityPoints << " points (got " << grid.n << ")";
        throw Error(ErrorCategory::Config, msg.str());
    }
}

// out_ba(i, j) = conj(out_ab(j, i)) for a < b.
void fill_lower(DensityState& s) {
    const std::size_t n = s.grid.n;
    for (int a = 1; a <= 3; ++a) {
        for (int b = a + 1; b <= 3; ++b) {
            const cplx* up = s.block(a, b).data();
            cplx* low = s.block(b, a).data();
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) low[i + j * n] = std::conj(up[j + i * n]);
            }
        }
    }
}

// y = x + h * d, blockwise over all nine blocks.
void axpy(DensityState& y, const DensityState& x, double h, const DensityState& d) {
    for (std::size_t b = 0; b < 9; ++b) {
        cplx* out = y.blocks[b].data();
        const cplx* xs = x.blocks[b].data();
        const cplx* ds = d.blocks[b].data();
        for (std::size_t i = 0; i < y.blocks[b].size(); ++i) out[i] = xs[i] + h * ds[i];
    }
}

}  // namespace

DensityState DensityState::zeros(const SpatialGrid& grid) {
    check_grid(grid);
    DensityState s;
    s.grid = grid;
    for (auto& b : s.blocks) b = AlignedBuffer(grid.n * grid.n);
    return s;
}

DensityState DensityState::pure(const ChannelState& psi) {
    DensityState s = zeros(psi.grid);
    s.time = psi.time;
    const std::size_t n = psi.grid.n;
    for (int a = 1; a <= 3; ++a) {
        for (int b = 1; b <= 3; ++b) {
            const auto pa = psi.channel(a);
            const auto pb = psi.channel(b);
            cplx* out = s.block(a, b).data();
            for (std::size_t j = 0; j < n; ++j) {
                const cplx cb = std::conj(pb[j]);
                for (std::size_t i = 0; i < n; ++i) out[i + j * n] = pa[i] * cb;
            }
        }
    }
    return s;
}

double DensityState::channel_population(int a) const {
    const std::size_t n = grid.n;
    const auto& blk = block(a, a);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += blk[i + i * n].real();
    return s * grid.dx();
}

double DensityState::trace() const { return channel_population(1) + channel_population(2) + channel_population(3); }

double DensityState::purity() const {
    // tr(rho^2) = sum_ab sum_ij rho_ab(i,j) rho_ba(j,i) dx^2 = sum |rho_ab(i,j)|^2 dx^2 for Hermitian rho.
    double s = 0.0;
    for (const auto& b : blocks) {
        for (std::size_t i = 0; i < b.size(); ++i) s += std::norm(b[i]);
    }
    return s * grid.dx() * grid.dx();
}

double DensityState::hermiticity_error() const {
    const std::size_t n = grid.n;
    double err = 0.0;
    for (int a = 1; a <= 3; ++a) {
        for (int b = 1; b <= 3; ++b) {
            const auto& x = block(a, b);
            const auto& y = block(b, a);
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(x[i + j * n] - std::conj(y[j + i * n])));
            }
        }
    }
    return err;
}

std::array<double, 2> DensityState::diagonal_defects() const {
    const std::size_t n = grid.n;
    double imag = 0.0;
    double negative = 0.0;
    for (int a = 1; a <= 3; ++a) {
        const auto& blk = block(a, a);
        for (std::size_t i = 0; i < n; ++i) {
            imag = std::max(imag, std::abs(blk[i + i * n].imag()));
            negative = std::min(negative, blk[i + i * n].real());
        }
    }
    return {imag, negative};
}

double DensityState::min_eigenvalue() const {
    const std::size_t n = grid.n;
    Eigen::MatrixXcd m(3 * n, 3 * n);
    for (int a = 1; a <= 3; ++a) {
        for (int b = 1; b <= 3; ++b) {
            const auto& blk = block(a, b);
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    m((a - 1) * n + i, (b - 1) * n + j) = blk[i + j * n] * grid.dx();
                }
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw Error(ErrorCategory::Config, "quadrature needs at least one node");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

MasterEquation::MasterEquation(const DiodeConfig& config, const SpatialGrid& grid, int quadrature_nodes)
    : config_(config), grid_(grid) {
    check_grid(grid);
    const std::size_t n = grid.n;
    const double hm = config.params.hbar_over_m;

    mirror_.resize(n);
    pump_.resize(n);
    stokes_.resize(n);
    double re_max = -1e300;
    double re_min = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        const PotentialMatrix v = potential_at(grid.x(i), config);
        mirror_[i] = v(0, 0).real();
        pump_[i] = v(0, 1).real();
        stokes_[i] = v(1, 2).real();
        const Eigen::Matrix3cd h = 0.5 * (v + v.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h, Eigen::EigenvaluesOnly);
        re_max = std::max(re_max, es.eigenvalues().maxCoeff());
        re_min = std::min(re_min, es.eigenvalues().minCoeff());
    }
    kinetic_.resize(n);
    double e_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        kinetic_[i] = 0.5 * hm * grid.k(i) * grid.k(i);
        e_max = std::max(e_max, kinetic_[i]);
    }

    // Composite rule: M Gauss-Legendre nodes on each of P panels of [-1, 1],
    // with P chosen so the recoil phase turns by at most 2 rad per panel over
    // the largest separation in the box.
    std::vector<double> x, w;
    gauss_legendre(quadrature_nodes, x, w);
    const double kick = config.params.v_rec / hm;
    const double phase = kick * (grid.x_max - grid.x_min);
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil(phase / 2.0)));
    const double half = 1.0 / static_cast<double>(panels);
    nodes_.clear();
    weights_.clear();
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = -1.0 + (2.0 * static_cast<double>(p) + 1.0) * half;
        for (std::size_t q = 0; q < x.size(); ++q) {
            const double u = mid + half * x[q];
            nodes_.push_back(u);
            weights_.push_back(half * w[q] * 0.375 * (1.0 + u * u));
        }
    }
    // K depends on i - j only.
    std::vector<cplx> by_offset(2 * n - 1);
    for (std::size_t m = 0; m < 2 * n - 1; ++m) {
        const double d = (static_cast<double>(m) - static_cast<double>(n - 1)) * grid.dx();
        by_offset[m] = config.params.gamma * kernel(d);
    }
    jump_kernel_.resize(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) jump_kernel_[i + j * n] = by_offset[i + (n - 1) - j];
    }

    spectral_radius_ = e_max + (re_max - re_min) + 2.0 * config.params.gamma;
    plan_ = std::make_shared<const FftPlan>(FftPlan::batched_1d(n, n));
    for (auto& b : kinetic_rho_) b = AlignedBuffer(n * n);
}

cplx MasterEquation::kernel(double d) const {
    const double kick = config_.params.v_rec / config_.params.hbar_over_m;
    cplx s{};
    for (std::size_t q = 0; q < nodes_.size(); ++q) s += weights_[q] * std::polar(1.0, kick * nodes_[q] * d);
    return s;
}

namespace {

// (V x)_a for column data x_c = rho_cb(i, j), using the sparsity of V:
// V = [[w, p, 0], [p, -i g, s], [0, s, 0]] with g = gamma / 2.
template <int A>
cplx apply_row(double w, double p, double s, cplx g, cplx x1, cplx x2, cplx x3) {
    if constexpr (A == 1) return w * x1 + p * x2;
    if constexpr (A == 2) return p * x1 + g * x2 + s * x3;
    if constexpr (A == 3) return s * x2;
}

template <int A, int B>
void add_potential(std::size_t n, const double* w, const double* p, const double* s, double half_gamma,
                   const DensityState& rho, cplx* o) {
    const cplx* r1b = rho.block(1, B).data();
    const cplx* r2b = rho.block(2, B).data();
    const cplx* r3b = rho.block(3, B).data();
    const cplx* ra1 = rho.block(A, 1).data();
    const cplx* ra2 = rho.block(A, 2).data();
    const cplx* ra3 = rho.block(A, 3).data();
    const cplx g_left{0.0, -half_gamma};
    const cplx g_right{0.0, half_gamma};  // conj(V_22)
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t e = i + j * n;
            const cplx left = apply_row<A>(w[i], p[i], s[i], g_left, r1b[e], r2b[e], r3b[e]);
            // rho V^dagger: V is symmetric, so (rho V^dagger)_ab = sum_c rho_ac conj(V_bc).
            const cplx right = apply_row<B>(w[j], p[j], s[j], g_right, ra1[e], ra2[e], ra3[e]);
            o[e] += cplx{0.0, -1.0} * (left - right);
        }
    }
}

}  // namespace

void MasterEquation::potential_term(int a, int b, const DensityState& rho, cplx* o) const {
    const std::size_t n = grid_.n;
    const double* w = mirror_.data();
    const double* p = pump_.data();
    const double* s = stokes_.data();
    const double g = 0.5 * config_.params.gamma;
    switch (3 * (a - 1) + (b - 1)) {
        case 0: add_potential<1, 1>(n, w, p, s, g, rho, o); break;
        case 1: add_potential<1, 2>(n, w, p, s, g, rho, o); break;
        case 2: add_potential<1, 3>(n, w, p, s, g, rho, o); break;
        case 4: add_potential<2, 2>(n, w, p, s, g, rho, o); break;
        case 5: add_potential<2, 3>(n, w, p, s, g, rho, o); break;
        case 8: add_potential<3, 3>(n, w, p, s, g, rho, o); break;
        default: throw std::logic_error("potential_term expects an upper block");
    }
}

void MasterEquation::derivative(const DensityState& rho, DensityState& out) const {
    const std::size_t n = grid_.n;
    const double inv = 1.0 / static_cast<double>(n);

    // T rho_ab for all nine blocks. Columns are contiguous, so this is one
    // batch of 1D transforms; rho_ab T is then (T rho_ba)^dagger.
    for (std::size_t b = 0; b < 9; ++b) {
        AlignedBuffer& t = kinetic_rho_[b];
        std::copy_n(rho.blocks[b].data(), n * n, t.data());
        plan_->forward(t);
        for (std::size_t j = 0; j < n; ++j) {
            cplx* col = t.data() + j * n;
            for (std::size_t i = 0; i < n; ++i) col[i] *= kinetic_[i] * inv;
        }
        plan_->backward(t);
    }

    constexpr std::size_t tile = 32;
    for (int a = 1; a <= 3; ++a) {
        for (int b = a; b <= 3; ++b) {
            cplx* o = out.block(a, b).data();
            const cplx* tab = kinetic_rho_[3 * (a - 1) + (b - 1)].data();
            const cplx* tba = kinetic_rho_[3 * (b - 1) + (a - 1)].data();
            for (std::size_t j0 = 0; j0 < n; j0 += tile) {
                for (std::size_t i0 = 0; i0 < n; i0 += tile) {
                    for (std::size_t j = j0; j < std::min(n, j0 + tile); ++j) {
                        for (std::size_t i = i0; i < std::min(n, i0 + tile); ++i) {
                            o[i + j * n] = -I * (tab[i + j * n] - std::conj(tba[j + i * n]));
                        }
                    }
                }
            }

            potential_term(a, b, rho, o);

            if (a == 1 && b == 1) {
                const cplx* r22 = rho.block(2, 2).data();
                for (std::size_t e = 0; e < n * n; ++e) o[e] += jump_kernel_[e] * r22[e];
            }
        }
    }
    fill_lower(out);
    out.grid = rho.grid;
    out.time = rho.time;
}

void MasterEquation::rk4_step(DensityState& rho, double dt) const {
    if (stages_.empty()) {
        for (int i = 0; i < 3; ++i) stages_.push_back(DensityState::zeros(grid_));
    }
    DensityState& k = stages_[0];
    DensityState& acc = stages_[1];
    DensityState& tmp = stages_[2];

    derivative(rho, k);
    axpy(acc, k, 0.0, k);
    axpy(tmp, rho, 0.5 * dt, k);
    derivative(tmp, k);
    axpy(acc, acc, 2.0, k);
    axpy(tmp, rho, 0.5 * dt, k);
    derivative(tmp, k);
    axpy(acc, acc, 2.0, k);
    axpy(tmp, rho, dt, k);
    derivative(tmp, k);
    axpy(acc, acc, 1.0, k);
    axpy(rho, rho, dt / 6.0, acc);
    rho.time += dt;

    const double tr = rho.trace();
    if (!std::isfinite(tr)) throw Error(ErrorCategory::NonConvergence, "density matrix became non-finite");
    if (std::abs(tr - 1.0) > kTraceTolerance) {
        std::ostringstream msg;
        msg << "trace drifted to " << tr << " at t = " << rho.time << " ms (dt = " << dt << " ms)";
        throw Error(ErrorCategory::TraceDrift, msg.str());
    }
}

DensityState master_step(const DensityState& state, const DiodeConfig& config, double dt, int quadrature_nodes) {
    if (!(dt > 0.0)) throw Error(ErrorCategory::Config, "time step must be > 0");
    const MasterEquation eq(config, state.grid, quadrature_nodes);
    DensityState out = state;
    eq.rk4_step(out, dt);
    return out;
}

DensityState propagate_master(const DensityState& initial, const DiodeConfig& config, double t_end,
                              const MasterRunOptions& options) {
    const MasterEquation eq(config, initial.grid, options.quadrature_nodes);
    DensityState rho = initial;
    const double span = t_end - initial.time;
    if (span <= 0.0) return rho;
    const double dt_max = options.dt > 0.0 ? options.dt : eq.stable_dt();
    const auto [steps, dt] = divide_interval(span, dt_max);
    for (std::size_t s = 1; s <= steps; ++s) {
        eq.rk4_step(rho, dt);
        rho.time = initial.time + static_cast<double>(s) * dt;
        if (options.monitor && ((options.monitor_stride > 0 && s % options.monitor_stride == 0) || s == steps)) {
            options.monitor(rho);
        }
    }
    return rho;
}

OracleObservables oracle_observables(const DensityState& state, double x_measure) {
    const std::size_t n = state.grid.n;
    const auto& r11 = state.block(1, 1);
    OracleObservables obs;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = state.grid.x(i);
        const double p = r11[i + i * n].real();
        if (x > x_measure) {
            obs.p_right += p;
        } else if (x == x_measure) {
            obs.p_right += 0.5 * p;
        }
    }
    obs.p_right *= state.grid.dx();

    // rho(k, k) sits at (i, -i) of the plain 2D forward transform.
    AlignedBuffer work = r11;
    FftPlan::square_2d(n).forward(work);
    double s = 0.5 * work[0].real();
    for (std::size_t i = 1; i < n / 2; ++i) s += work[i + (n - i) * n].real();
    obs.p_forward = s * state.grid.dx() / static_cast<double>(n);
    return obs;
}

}  // namespace atomdiode
