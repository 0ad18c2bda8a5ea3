// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/config_io.hpp"
#include "atomdiode/errors.hpp"
#include "atomdiode/units.hpp"

#include <doctest.h>

#include <random>
#include <string>

using namespace atomdiode;

namespace {

ErrorCategory category_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.category();
    }
    FAIL("no error thrown");
    return ErrorCategory::Io;
}

}  // namespace

TEST_CASE("parse key/value text") {
    const auto kv = KeyValues::parse("# header\n gamma_per_s = 1e5  # trailing\n\nmirror.center_um=85\n");
    REQUIRE(kv.entries().size() == 2);
    CHECK(*kv.find("gamma_per_s") == "1e5");
    CHECK(*kv.find("mirror.center_um") == "85");
    CHECK(category_of([] { KeyValues::parse("no equals sign"); }) == ErrorCategory::Config);
    CHECK(category_of([] { KeyValues::parse("a = 1\na = 2"); }) == ErrorCategory::Config);
}

TEST_CASE("unknown keys and bad numbers are rejected") {
    CHECK(category_of([] { diode_config_from(KeyValues::parse("gamma = 1")); }) == ErrorCategory::Config);
    CHECK(category_of([] { diode_config_from(KeyValues::parse("gamma_per_s = 1e5x")); }) == ErrorCategory::Config);
    CHECK(category_of([] { diode_config_from(KeyValues::parse("pump.center_um = 100")); }) == ErrorCategory::Config);
    CHECK_NOTHROW(diode_config_from(KeyValues::parse("run.anything = 3")));
    CHECK(category_of([] { KeyValues::load("/nonexistent/file.cfg"); }) == ErrorCategory::Io);
}

TEST_CASE("SI keys convert on load") {
    const auto c = diode_config_from(KeyValues::parse(
        "gamma_per_s = 1e5\nv_rec_cm_per_s = 3\nquench.peak_per_s = 1e4\nquench.center_um = 155\n"));
    CHECK(c.params.gamma == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(c.params.v_rec == doctest::Approx(30.0).epsilon(1e-15));
    CHECK(c.quench.peak == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("config round-trips bit-exactly for short decimals") {
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<long long> digits(1, 999999999);
    std::uniform_int_distribution<int> expo(-6, 4);
    for (int trial = 0; trial < 2000; ++trial) {
        auto number = [&] { return std::to_string(digits(gen)) + "e" + std::to_string(expo(gen)); };
        std::string text = "gamma_per_s = " + number() + "\nv_rec_cm_per_s = " + number() +
                           "\nhbar_over_m_um2_per_ms = " + number() + "\n";
        for (const char* l : {"stokes", "pump", "mirror", "quench"}) {
            text += std::string(l) + ".peak_per_s = " + number() + "\n";
            text += std::string(l) + ".sigma_um = " + number() + "\n";
        }
        const DiodeConfig a = diode_config_from(KeyValues::parse(text));
        const DiodeConfig b = diode_config_from(KeyValues::parse(format_diode_config(a)));
        CHECK(a.params.gamma == b.params.gamma);
        CHECK(a.params.v_rec == b.params.v_rec);
        CHECK(a.params.hbar_over_m == b.params.hbar_over_m);
        for (int i = 0; i < 4; ++i) {
            CHECK(a.lasers()[i]->peak == b.lasers()[i]->peak);
            CHECK(a.lasers()[i]->sigma == b.lasers()[i]->sigma);
            CHECK(a.lasers()[i]->center == b.lasers()[i]->center);
        }
        // and the printed text is stable
        CHECK(format_diode_config(a) == format_diode_config(b));
    }
}

TEST_CASE("every physics key is written") {
    const std::string text = format_diode_config(DiodeConfig::defaults());
    for (const auto& key : diode_config_keys()) CHECK(text.find(key + " = ") != std::string::npos);
    CHECK(diode_config_keys().size() == 15);
}

TEST_CASE("category names") {
    CHECK(category_name(ErrorCategory::BoundaryOverrun) == "BoundaryOverrun");
    CHECK(category_name(ErrorCategory::TraceDrift) == "TraceDrift");
    CHECK(category_name(ErrorCategory::EmptySourceChannel) == "EmptySourceChannel");
}
