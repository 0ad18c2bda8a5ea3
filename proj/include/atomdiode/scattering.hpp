// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "atomdiode/model.hpp"

#include <array>
#include <span>
#include <vector>

namespace atomdiode {

enum class Side { FromLeft, FromRight };

struct ScatteringNumerics {
    double x_left = -400.0;   ///< um
    double x_right = 600.0;   ///< um
    /// Step inside the region where any laser exceeds `negligible` times the
    /// collision energy. The integrator is exact for constant potentials, so
    /// outside that region the step only limits exponential growth per step.
    double step_um = 0.02;
    double far_step_um = 25.0;
    double negligible = 1e-14;
    double max_condition = 1e12;
};

struct ScatteringQuery {
    double speed = 0.0;  ///< um/ms, > 0
    Side side = Side::FromLeft;
    int incident_channel = 1;
    DiodeConfig config;
    ScatteringNumerics numerics;
};

/// Reflection/transmission amplitudes for unit incident amplitude.
///
/// Channels with real wavenumber use plane waves anchored at x = 0, so a
/// vanishing potential gives T = 1 in the incident channel. Channel 2 with
/// gamma > 0 has complex k and its waves are anchored at the box edge where
/// they are evaluated; its amplitudes are reported but carry no flux.
struct ScatteringResult {
    double speed = 0.0;
    Side side = Side::FromLeft;
    int incident_channel = 1;
    std::array<cplx, 3> reflection{};
    std::array<cplx, 3> transmission{};
    std::array<cplx, 3> wavenumber{};  ///< 1/um; Im k_2 > 0 when gamma > 0
    std::array<bool, 3> open{};        ///< carries asymptotic flux
    double condition_number = 0.0;     ///< of the 3x3 matching system

    /// |R_b|^2 scaled by the flux ratio k_b / k_incident; zero for closed channels.
    double reflection_probability(int channel) const;
    double transmission_probability(int channel) const;
};

/// Stationary multichannel solution of the conditional Hamiltonian.
/// Throws Error(NonConvergence) for non-finite intermediate results and
/// Error(IllConditionedMatching) when the matching system is singular.
ScatteringResult scattering_amplitudes(const ScatteringQuery& query);

/// 1 - sum over open channels of reflected and transmitted flux.
double flux_deficit(const ScatteringResult& result);

/// One result per speed, in grid order. Errors are re-thrown with the
/// offending speed in the message. `workers` > 1 evaluates in parallel;
/// results do not depend on it.
std::vector<ScatteringResult> velocity_scan(const DiodeConfig& config, Side side, int incident_channel,
                                            std::span<const double> speeds,
                                            const ScatteringNumerics& numerics = {}, int workers = 1);

}  // namespace atomdiode
