// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/model.hpp"

#include "atomdiode/errors.hpp"
#include "atomdiode/units.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace atomdiode {

DiodeConfig DiodeConfig::defaults() {
    using namespace units;
    DiodeConfig c;
    c.params.hbar_over_m = kNeonHbarOverM;
    c.params.v_rec = 0.0;
    c.params.gamma = rate_from_per_s(1.0e5);
    c.stokes = {rate_from_per_s(1.0e6), -15.0, 15.0};
    c.pump = {rate_from_per_s(1.0e6), 15.0, 15.0};
    c.mirror = {rate_from_per_s(2.0e7), 85.0, 15.0};
    c.quench = {0.0, 155.0, 15.0};
    return c;
}

std::array<double, 2> DiodeConfig::laser_span(double sigmas) const {
    double lo = stokes.center - sigmas * stokes.sigma;
    double hi = stokes.center + sigmas * stokes.sigma;
    for (const LaserProfile* l : lasers()) {
        lo = std::min(lo, l->center - sigmas * l->sigma);
        hi = std::max(hi, l->center + sigmas * l->sigma);
    }
    return {lo, hi};
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCategory::Config, what);
}

void validate_laser(const LaserProfile& l, const char* name) {
    require(std::isfinite(l.peak) && l.peak >= 0.0, std::string(name) + ".peak must be finite and >= 0");
    require(std::isfinite(l.center), std::string(name) + ".center must be finite");
    require(std::isfinite(l.sigma) && l.sigma > 0.0, std::string(name) + ".sigma must be > 0");
}

}  // namespace

void validate(const DiodeConfig& c) {
    require(std::isfinite(c.params.hbar_over_m) && c.params.hbar_over_m > 0.0, "hbar_over_m must be > 0");
    require(std::isfinite(c.params.v_rec) && c.params.v_rec >= 0.0, "v_rec must be >= 0");
    require(std::isfinite(c.params.gamma) && c.params.gamma >= 0.0, "gamma must be >= 0");
    validate_laser(c.stokes, "stokes");
    validate_laser(c.pump, "pump");
    validate_laser(c.mirror, "mirror");
    validate_laser(c.quench, "quench");
    require(c.stokes.center < c.pump.center && c.pump.center < c.mirror.center &&
                c.mirror.center < c.quench.center,
            "laser centres must satisfy stokes < pump < mirror < quench");
}

double gaussian_profile(double x, const LaserProfile& profile) noexcept {
    const double d = (x - profile.center) / profile.sigma;
    return std::exp(-0.5 * d * d);
}

PotentialMatrix potential_at(double x, const DiodeConfig& config) noexcept {
    const double w = config.mirror.peak * gaussian_profile(x, config.mirror);
    const double p = config.pump.peak * gaussian_profile(x, config.pump);
    const double sq = config.stokes.peak * gaussian_profile(x, config.stokes) +
                      config.quench.peak * gaussian_profile(x, config.quench);

    PotentialMatrix v = PotentialMatrix::Zero();
    v(0, 0) = 0.5 * w;
    v(0, 1) = v(1, 0) = 0.5 * p;
    v(1, 1) = cplx(0.0, -0.5 * config.params.gamma);
    v(1, 2) = v(2, 1) = 0.5 * sq;
    return v;
}

DiodeConfig mirrored(const DiodeConfig& config) {
    DiodeConfig m = config;
    m.stokes.center = -config.stokes.center;
    m.pump.center = -config.pump.center;
    m.mirror.center = -config.mirror.center;
    m.quench.center = -config.quench.center;
    return m;
}

}  // namespace atomdiode
