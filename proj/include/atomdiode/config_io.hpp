// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "atomdiode/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace atomdiode {

/// Ordered `key = value` pairs as read from a config file (comments stripped).
class KeyValues {
public:
    static KeyValues parse(std::string_view text, const std::string& source = "<string>");
    static KeyValues load(const std::filesystem::path& path);

    bool contains(std::string_view key) const;
    const std::string* find(std::string_view key) const;
    /// Inserts or replaces.
    void set(std::string key, std::string value);
    void erase(std::string_view key);

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string to_string() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Parses a double (C locale, no trailing garbage). Throws Error(Config) naming `key`.
double parse_number(std::string_view text, std::string_view key);

/// Shortest decimal representation (at least 9 significant digits unless
/// fewer suffice) that reproduces `value` exactly when fed back through
/// `from_text -> inverse`. `inverse` maps the printed quantity back to the stored one.
std::string format_round_trip(double printed, double stored, double (*inverse)(double));

/// Builds a DiodeConfig from the physics keys, starting from
/// DiodeConfig::defaults(). Keys with prefix `run.` are left for the
/// caller; any other unknown key is rejected. The result is validated.
DiodeConfig diode_config_from(const KeyValues& kv);

/// Writes every physics key (SI-suffixed where the key says so).
void write_diode_config(const DiodeConfig& config, KeyValues& kv);

DiodeConfig load_diode_config(const std::filesystem::path& path);
std::string format_diode_config(const DiodeConfig& config);

/// Names of all physics keys, in canonical output order.
const std::vector<std::string>& diode_config_keys();

}  // namespace atomdiode
