// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/config_io.hpp"

#include "atomdiode/errors.hpp"
#include "atomdiode/units.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace atomdiode {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double identity(double x) { return x; }
double per_s_to_internal(double x) { return units::rate_from_per_s(x); }
double cm_per_s_to_internal(double x) { return units::velocity_from_cm_per_s(x); }

struct KeySpec {
    std::string name;
    std::function<double&(DiodeConfig&)> field;
    double (*to_printed)(double);    // internal -> printed unit
    double (*from_printed)(double);  // printed unit -> internal
};

double internal_to_per_s(double x) { return units::rate_to_per_s(x); }
double internal_to_cm_per_s(double x) { return units::velocity_to_cm_per_s(x); }

const std::vector<KeySpec>& key_specs() {
    static const std::vector<KeySpec> specs = [] {
        std::vector<KeySpec> s;
        s.push_back({"hbar_over_m_um2_per_ms", [](DiodeConfig& c) -> double& { return c.params.hbar_over_m; },
                     identity, identity});
        s.push_back({"gamma_per_s", [](DiodeConfig& c) -> double& { return c.params.gamma; }, internal_to_per_s,
                     per_s_to_internal});
        s.push_back({"v_rec_cm_per_s", [](DiodeConfig& c) -> double& { return c.params.v_rec; },
                     internal_to_cm_per_s, cm_per_s_to_internal});
        const std::pair<const char*, LaserProfile DiodeConfig::*> lasers[] = {
            {"stokes", &DiodeConfig::stokes},
            {"pump", &DiodeConfig::pump},
            {"mirror", &DiodeConfig::mirror},
            {"quench", &DiodeConfig::quench},
        };
        for (const auto& [name, member] : lasers) {
            const std::string prefix = name;
            s.push_back({prefix + ".peak_per_s", [member](DiodeConfig& c) -> double& { return (c.*member).peak; },
                         internal_to_per_s, per_s_to_internal});
            s.push_back({prefix + ".center_um", [member](DiodeConfig& c) -> double& { return (c.*member).center; },
                         identity, identity});
            s.push_back({prefix + ".sigma_um", [member](DiodeConfig& c) -> double& { return (c.*member).sigma; },
                         identity, identity});
        }
        return s;
    }();
    return specs;
}

}  // namespace

KeyValues KeyValues::parse(std::string_view text, const std::string& source) {
    KeyValues kv;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCategory::Config,
                        source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw Error(ErrorCategory::Config, source + ":" + std::to_string(line_no) + ": empty key");
        }
        if (kv.contains(key)) {
            throw Error(ErrorCategory::Config,
                        source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        kv.entries_.emplace_back(key, value);
    }
    return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::Io, "cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

bool KeyValues::contains(std::string_view key) const { return find(key) != nullptr; }

const std::string* KeyValues::find(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return &v;
    }
    return nullptr;
}

void KeyValues::set(std::string key, std::string value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(std::move(key), std::move(value));
}

void KeyValues::erase(std::string_view key) {
    std::erase_if(entries_, [&](const auto& e) { return e.first == key; });
}

std::string KeyValues::to_string() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

double parse_number(std::string_view text, std::string_view key) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw Error(ErrorCategory::Config,
                    "key '" + std::string(key) + "': cannot parse number '" + std::string(text) + "'");
    }
    return value;
}

std::string format_round_trip(double printed, double stored, double (*inverse)(double)) {
    char buf[64];
    for (int precision = 1; precision <= 17; ++precision) {
        const auto res = std::to_chars(buf, buf + sizeof buf, printed, std::chars_format::general, precision);
        const std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
        double back = 0.0;
        std::from_chars(text.data(), text.data() + text.size(), back);
        if (inverse(back) == stored) return std::string(text);
    }
    // Conversion is not invertible bit-exactly for this value; fall back to the
    // shortest exact representation of the printed quantity.
    const auto res = std::to_chars(buf, buf + sizeof buf, printed);
    return std::string(buf, res.ptr);
}

const std::vector<std::string>& diode_config_keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& s : key_specs()) n.push_back(s.name);
        return n;
    }();
    return names;
}

DiodeConfig diode_config_from(const KeyValues& kv) {
    DiodeConfig config = DiodeConfig::defaults();
    for (const auto& [key, value] : kv.entries()) {
        if (key.rfind("run.", 0) == 0) continue;
        const auto& specs = key_specs();
        const auto it = std::find_if(specs.begin(), specs.end(), [&](const KeySpec& s) { return s.name == key; });
        if (it == specs.end()) throw Error(ErrorCategory::Config, "unknown config key '" + key + "'");
        it->field(config) = it->from_printed(parse_number(value, key));
    }
    validate(config);
    return config;
}

void write_diode_config(const DiodeConfig& config, KeyValues& kv) {
    DiodeConfig copy = config;
    for (const auto& spec : key_specs()) {
        const double stored = spec.field(copy);
        kv.set(spec.name, format_round_trip(spec.to_printed(stored), stored, spec.from_printed));
    }
}

DiodeConfig load_diode_config(const std::filesystem::path& path) { return diode_config_from(KeyValues::load(path)); }

std::string format_diode_config(const DiodeConfig& config) {
    KeyValues kv;
    write_diode_config(config, kv);
    return kv.to_string();
}

}  // namespace atomdiode
