// SPDX-License-Identifier: Apache-2.0
// Independent reference solutions used by the unit and acceptance tests.
#pragma once

#include "atomdiode/propagator.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

struct ReflectTransmit {
    double r = 0.0;
    double t = 0.0;
};

// Numerov on a uniform grid for -(hm/2) psi'' + V psi = E psi, E = hm k^2 / 2,
// with plane-wave boundary rows in the discrete dispersion relation
// cos(q h) = (1 - 5 h^2 k^2 / 12) / (1 + h^2 k^2 / 12). Incident from the left.
template <class Potential>
ReflectTransmit numerov(double k, double hm, Potential potential, double a, double b, double h) {
    const auto n = static_cast<std::size_t>(std::llround((b - a) / h));
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) f[i] = k * k - 2.0 * potential(a + h * static_cast<double>(i)) / hm;
    const double h2 = h * h / 12.0;
    const double cq = (1.0 - 5.0 * h2 * k * k) / (1.0 + h2 * k * k);
    const cplx e = std::polar(1.0, std::acos(cq));

    std::vector<cplx> lo(n + 1), di(n + 1), up(n + 1), rhs(n + 1);
    // psi_0 - e psi_1 = 1 - e^2 (unit incident wave plus reflection)
    di[0] = 1.0;
    up[0] = -e;
    rhs[0] = 1.0 - e * e;
    for (std::size_t i = 1; i < n; ++i) {
        lo[i] = 1.0 + h2 * f[i - 1];
        di[i] = -2.0 * (1.0 - 5.0 * h2 * f[i]);
        up[i] = 1.0 + h2 * f[i + 1];
    }
    // psi_n = e psi_{n-1} (outgoing only)
    lo[n] = -e;
    di[n] = 1.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const cplx m = lo[i] / di[i - 1];
        di[i] -= m * up[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<cplx> psi(n + 1);
    psi[n] = rhs[n] / di[n];
    for (std::size_t i = n; i-- > 0;) psi[i] = (rhs[i] - up[i] * psi[i + 1]) / di[i];
    return {std::norm(psi[0] - 1.0), std::norm(psi[n])};
}

// Richardson extrapolation of two fourth-order solves at h and h/2.
template <class Potential>
ReflectTransmit numerov_extrapolated(double k, double hm, Potential potential, double a, double b, double h) {
    const auto coarse = numerov(k, hm, potential, a, b, h);
    const auto fine = numerov(k, hm, potential, a, b, 0.5 * h);
    return {fine.r + (fine.r - coarse.r) / 15.0, fine.t + (fine.t - coarse.t) / 15.0};
}

// (3/8) int_{-1}^{1} (1 + u^2) exp(i z u) du
inline double recoil_kernel(double z) {
    if (z == 0.0) return 1.0;
    return 1.5 * (std::sin(z) / z + std::cos(z) / (z * z) - std::sin(z) / (z * z * z));
}

// mean and standard deviation of |psi_ch|^2
inline std::array<double, 2> position_moments(const atomdiode::ChannelState& s, int ch) {
    const auto c = s.channel(ch);
    double w = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < s.grid.n; ++i) {
        const double p = std::norm(c[i]);
        const double x = s.grid.x(i);
        w += p;
        m1 += p * x;
        m2 += p * x * x;
    }
    const double mean = m1 / w;
    return {mean, std::sqrt(m2 / w - mean * mean)};
}

// Free Gaussian: sigma(t)^2 = sigma_0^2 + (dv0 t)^2
inline double free_width(double sigma0, double dv0, double t) { return std::sqrt(sigma0 * sigma0 + dv0 * dv0 * t * t); }

}  // namespace oracle
