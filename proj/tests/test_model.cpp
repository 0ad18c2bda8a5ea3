// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/config_io.hpp"
#include "atomdiode/errors.hpp"
#include "atomdiode/model.hpp"
#include "atomdiode/units.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace atomdiode;

TEST_CASE("gaussian profile values") {
    const LaserProfile l{1.0, 85.0, 15.0};
    CHECK(gaussian_profile(85.0, l) == 1.0);
    CHECK(gaussian_profile(85.0 + 15.0 * std::sqrt(2.0), l) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(gaussian_profile(85.0 - 15.0 * std::sqrt(2.0), l) == doctest::Approx(0.3678794).epsilon(1e-7));
    double prev = 1.0;
    for (double d = 1.0; d < 200.0; d += 1.0) {
        const double g = gaussian_profile(85.0 + d, l);
        CHECK(g < prev);
        CHECK(g > 0.0);
        CHECK(g == gaussian_profile(85.0 - d, l));
        prev = g;
    }
}

TEST_CASE("potential matrix structure") {
    DiodeConfig c = DiodeConfig::defaults();
    c.quench.peak = 100.0;
    for (double x = -200.0; x <= 300.0; x += 7.3) {
        const auto v = potential_at(x, c);
        CHECK(v(0, 2) == cplx{});
        CHECK(v(2, 0) == cplx{});
        CHECK(v(1, 1) == cplx(0.0, -0.5 * c.params.gamma));
        CHECK(v(2, 2) == cplx{});
        CHECK((v - v.transpose()).norm() == 0.0);
        const PotentialMatrix anti = 0.5 * (v - v.adjoint());
        PotentialMatrix expect = PotentialMatrix::Zero();
        expect(1, 1) = cplx(0.0, -0.5 * c.params.gamma);
        CHECK((anti - expect).norm() < 1e-15);
    }
}

TEST_CASE("potential at the mirror centre") {
    const DiodeConfig c = DiodeConfig::defaults();
    const auto v = potential_at(85.0, c);
    CHECK(v(0, 0).real() == 1.0e4);
    // pump tail 70 um away
    CHECK(v(0, 1).real() == doctest::Approx(500.0 * std::exp(-4900.0 / 450.0)).epsilon(1e-14));
    CHECK(v(0, 1).real() / 500.0 == doctest::Approx(1.86e-5).epsilon(0.01));
    CHECK(v(1, 2).real() == doctest::Approx(500.0 * std::exp(-10000.0 / 450.0)).epsilon(1e-14));
}

TEST_CASE("far from all lasers only the decay term remains") {
    DiodeConfig c = DiodeConfig::defaults();
    c.quench.peak = 100.0;
    const double peak = 2.0e4;
    for (double x : {-15.0 - 160.0, 155.0 + 160.0, -1000.0, 2000.0}) {
        const auto v = potential_at(x, c);
        CHECK(std::abs(v(0, 0)) < 1e-20 * peak);
        CHECK(std::abs(v(0, 1)) < 1e-20 * peak);
        CHECK(std::abs(v(1, 2)) < 1e-20 * peak);
        CHECK(v(1, 1) == cplx(0.0, -0.5 * c.params.gamma));
    }
}

TEST_CASE("gamma = 0 gives a Hermitian potential") {
    DiodeConfig c = DiodeConfig::defaults();
    c.params.gamma = 0.0;
    for (double x = -100.0; x <= 200.0; x += 3.1) {
        const auto v = potential_at(x, c);
        CHECK((v - v.adjoint()).norm() == 0.0);
    }
}

TEST_CASE("unit conversions round-trip") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> mant(1.0, 10.0);
    std::uniform_int_distribution<int> expo(-8, 8);
    for (int i = 0; i < 10000; ++i) {
        const double x = mant(gen) * std::pow(10.0, expo(gen));
        CHECK(units::rate_to_per_s(units::rate_from_per_s(x)) == doctest::Approx(x).epsilon(1e-12));
        CHECK(units::velocity_to_cm_per_s(units::velocity_from_cm_per_s(x)) == doctest::Approx(x).epsilon(1e-12));
        CHECK(units::hbar_over_m_to_si(units::hbar_over_m_from_si(x)) == doctest::Approx(x).epsilon(1e-12));
    }
    CHECK(units::velocity_from_cm_per_s(1.0) == 10.0);
}

TEST_CASE("neon hbar/m from CODATA constants") {
    // 1.054571817e-34 J s / (20.1797 * 1.66053906660e-27 kg) in um^2/ms.
    const double si = 1.054571817e-34 / (20.1797 * 1.66053906660e-27);
    CHECK(units::kNeonHbarOverM == doctest::Approx(si * 1e9).epsilon(1e-14));
    CHECK(units::kNeonHbarOverM == doctest::Approx(3.147).epsilon(2e-4));
}

TEST_CASE("config ordering is enforced") {
    DiodeConfig c = DiodeConfig::defaults();
    CHECK_NOTHROW(validate(c));
    c.pump.center = 90.0;
    CHECK_THROWS_AS(validate(c), Error);
    c = DiodeConfig::defaults();
    c.mirror.sigma = 0.0;
    CHECK_THROWS_AS(validate(c), Error);
    c = DiodeConfig::defaults();
    c.params.gamma = -1.0;
    CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("mirrored layout negates the centres") {
    const DiodeConfig c = DiodeConfig::defaults();
    const DiodeConfig m = mirrored(c);
    for (double x = -50.0; x < 50.0; x += 1.7) {
        CHECK((potential_at(x, c) - potential_at(-x, m)).norm() == 0.0);
    }
}
