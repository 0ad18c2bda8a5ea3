// SPDX-License-Identifier: Apache-2.0
#pragma once

// Internal unit system used throughout the library:
//   length    micrometer (um)
//   time      millisecond (ms)
//   rates     angular frequency in 1/ms (Rabi frequencies, decay rates)
//   velocity  um/ms  (1 cm/s == 10 um/ms)
//   energy    divided by hbar, i.e. 1/ms
// The only mass-dependent constant carried around is hbar/m in um^2/ms.

namespace atomdiode::units {

inline constexpr double kMsPerS = 1.0e3;
inline constexpr double kUmPerMsPerCmPerS = 10.0;
inline constexpr double kUm2PerMsPerM2PerS = 1.0e9;

// CODATA 2018
inline constexpr double kHbarJs = 1.054571817e-34;
inline constexpr double kAtomicMassKg = 1.66053906660e-27;
inline constexpr double kNeon20AtomicMass = 20.1797;  // standard atomic weight

constexpr double rate_from_per_s(double per_s) { return per_s / kMsPerS; }
constexpr double rate_to_per_s(double per_ms) { return per_ms * kMsPerS; }

constexpr double velocity_from_cm_per_s(double cm_per_s) { return cm_per_s * kUmPerMsPerCmPerS; }
constexpr double velocity_to_cm_per_s(double um_per_ms) { return um_per_ms / kUmPerMsPerCmPerS; }

constexpr double hbar_over_m_from_si(double m2_per_s) { return m2_per_s * kUm2PerMsPerM2PerS; }
constexpr double hbar_over_m_to_si(double um2_per_ms) { return um2_per_ms / kUm2PerMsPerM2PerS; }

/// hbar/m for an atom of the given mass in atomic mass units, in um^2/ms.
constexpr double hbar_over_m_for_mass_u(double mass_u) {
    return hbar_over_m_from_si(kHbarJs / (mass_u * kAtomicMassKg));
}

/// Neon (natural isotopic mix), approximately 3.147 um^2/ms.
inline constexpr double kNeonHbarOverM = hbar_over_m_for_mass_u(kNeon20AtomicMass);

}  // namespace atomdiode::units
