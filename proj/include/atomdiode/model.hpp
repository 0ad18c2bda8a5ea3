// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>

namespace atomdiode {

using cplx = std::complex<double>;

/// Channels are numbered 1, 2, 3 in public interfaces (|1> ground, |2> fast
/// decaying, |3> long lived) and 0, 1, 2 in storage.
inline constexpr int kChannels = 3;

struct PhysicalParams {
    double hbar_over_m = 0.0;  ///< um^2/ms
    double v_rec = 0.0;        ///< recoil velocity, um/ms
    double gamma = 0.0;        ///< spontaneous decay rate 2 -> 1, 1/ms
};

/// Gaussian laser intensity profile; `peak` is the maximal Rabi frequency in 1/ms,
/// `center` and `sigma` in um.
struct LaserProfile {
    double peak = 0.0;
    double center = 0.0;
    double sigma = 15.0;
};

/// Complete physical description of the diode: the Stokes (2-3) and pump (1-2)
/// lasers performing the adiabatic transfer, the state-selective mirror on
/// level 1 and the quenching laser (2-3) downstream.
struct DiodeConfig {
    PhysicalParams params;
    LaserProfile stokes;
    LaserProfile pump;
    LaserProfile mirror;
    LaserProfile quench;

    /// Neon, Omega_P = Omega_S = 1e6/s, W = 2e7/s, gamma = 1e5/s, no quench,
    /// no recoil, centres at -15, 15, 85, 155 um with sigma = 15 um.
    static DiodeConfig defaults();

    std::array<const LaserProfile*, 4> lasers() const { return {&stokes, &pump, &mirror, &quench}; }

    /// Largest |x - center| + 8 sigma envelope of all lasers, as [lo, hi] in um.
    std::array<double, 2> laser_span(double sigmas = 8.0) const;
};

/// Throws Error(Config) unless all parameters are physical and the centres are
/// ordered stokes < pump < mirror < quench.
void validate(const DiodeConfig& config);

/// Potential part of the conditional Hamiltonian divided by hbar, in 1/ms:
///   [ W/2      Omega_P/2        0            ]
///   [ Omega_P/2  -i gamma/2   (Omega_S+Omega_Q)/2 ]
///   [ 0        (Omega_S+Omega_Q)/2  0          ]
/// Complex symmetric; the only anti-Hermitian entry is (2,2).
using PotentialMatrix = Eigen::Matrix3cd;

/// exp[-(x - center)^2 / (2 sigma^2)], never truncated.
double gaussian_profile(double x, const LaserProfile& profile) noexcept;

PotentialMatrix potential_at(double x, const DiodeConfig& config) noexcept;

/// Mirror image x -> -x of the laser layout (centres negated). Used by
/// symmetry checks; the result intentionally violates the load-time ordering.
DiodeConfig mirrored(const DiodeConfig& config);

}  // namespace atomdiode
