// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "atomdiode/fft.hpp"
#include "atomdiode/propagator.hpp"

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace atomdiode {

/// rho_ab(x_i, x_j) on an n x n grid for channel pairs (a, b), stored as nine
/// column-major blocks (element (i, j) at i + j n). Continuum normalization:
/// trace = sum_a sum_i rho_aa(x_i, x_i) dx.
///
/// This is a validation tool for small grids (n <= 512): memory and time
/// grow as n^2 and n^2 log n per step.
struct DensityState {
    SpatialGrid grid;
    std::array<AlignedBuffer, 9> blocks;
    double time = 0.0;

    static DensityState zeros(const SpatialGrid& grid);
    /// |psi><psi| of a wavefunction.
    static DensityState pure(const ChannelState& psi);

    AlignedBuffer& block(int a, int b) { return blocks[3 * (a - 1) + (b - 1)]; }
    const AlignedBuffer& block(int a, int b) const { return blocks[3 * (a - 1) + (b - 1)]; }
    cplx at(int a, int b, std::size_t i, std::size_t j) const { return block(a, b)[i + j * grid.n]; }

    double trace() const;
    double channel_population(int a) const;
    /// tr(rho^2) in continuum normalization.
    double purity() const;
    /// max |rho_ab(x, x') - conj(rho_ba(x', x))|.
    double hermiticity_error() const;
    /// max |Im rho_aa(x, x)| and the most negative Re rho_aa(x, x).
    std::array<double, 2> diagonal_defects() const;
    /// Smallest eigenvalue of the 3n x 3n matrix rho dx (dense; slow for large n).
    double min_eigenvalue() const;
};

inline constexpr std::size_t kMaxDensityPoints = 512;

/// Generator of the master equation,
///   d rho/dt = -i (H rho - rho H^dagger)
///              + gamma K(x - x') rho_22(x, x') in block (1, 1),
/// with H the conditional Hamiltonian (hbar = 1 units of 1/ms) and
/// K(d) = int_{-1}^{1} (3/8)(1 + u^2) exp(i u v_rec d / (hbar/m)) du evaluated
/// by Gauss-Legendre quadrature with `quadrature_nodes` nodes per panel; the
/// number of panels grows with v_rec times the box length so the rule stays
/// converged for every separation on the grid.
class MasterEquation {
public:
    MasterEquation(const DiodeConfig& config, const SpatialGrid& grid, int quadrature_nodes = 8);

    const SpatialGrid& grid() const { return grid_; }
    /// Bound on |eigenvalue| of the generator.
    double spectral_radius() const { return spectral_radius_; }
    /// 2.5 / spectral_radius (RK4 is stable up to about 2.8 on the imaginary axis).
    double stable_dt() const { return 2.5 / spectral_radius_; }

    void derivative(const DensityState& rho, DensityState& out) const;
    /// One classical RK4 step. Throws Error(TraceDrift) if |trace - 1| > 1e-4
    /// afterwards and Error(NonConvergence) for non-finite values.
    void rk4_step(DensityState& rho, double dt) const;

    /// Recoil kernel K(d) from the quadrature rule.
    cplx kernel(double d) const;

private:
    DiodeConfig config_;
    SpatialGrid grid_;
    // Potential entries per grid point: W/2, Omega_P/2, (Omega_S + Omega_Q)/2.
    std::vector<double> mirror_;
    std::vector<double> pump_;
    std::vector<double> stokes_;
    std::vector<double> kinetic_;                 // per FFT bin, 1/ms
    std::vector<cplx> jump_kernel_;               // gamma K(x_i - x_j), column-major
    std::vector<double> nodes_;
    std::vector<double> weights_;  // include (3/8)(1 + u^2)
    std::shared_ptr<const FftPlan> plan_;
    double spectral_radius_ = 0.0;
    void potential_term(int a, int b, const DensityState& rho, cplx* out) const;
    // T rho per block and RK4 stages, reused between calls; one run per instance at a time.
    mutable std::array<AlignedBuffer, 9> kinetic_rho_;
    mutable std::vector<DensityState> stages_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// One RK4 step of size dt with a freshly built generator.
DensityState master_step(const DensityState& state, const DiodeConfig& config, double dt, int quadrature_nodes = 8);

struct MasterRunOptions {
    double dt = 0.0;  ///< 0: largest step <= stable_dt that divides the interval
    int quadrature_nodes = 8;
    /// Called after every `monitor_stride` steps (and at the end) when set.
    std::size_t monitor_stride = 0;
    std::function<void(const DensityState&)> monitor;
};

DensityState propagate_master(const DensityState& initial, const DiodeConfig& config, double t_end,
                              const MasterRunOptions& options = {});

struct OracleObservables {
    double p_right = 0.0;
    double p_forward = 0.0;
};

/// Channel-1 weight beyond x_measure (a grid point exactly there counts half)
/// and channel-1 weight with k > 0 (the k = 0 bin counts half), using the
/// same conventions as the wavefunction observables.
OracleObservables oracle_observables(const DensityState& state, double x_measure);

}  // namespace atomdiode
