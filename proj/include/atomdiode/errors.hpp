// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace atomdiode {

/// Failure categories. The CLI prints the category name verbatim so that
/// wrapper scripts can dispatch on it.
enum class ErrorCategory {
    Config,
    NonConvergence,
    IllConditionedMatching,
    PacketOutsideGrid,
    BoundaryOverrun,
    EmptySourceChannel,
    MaxJumpsExceeded,
    TraceDrift,
    Io,
};

std::string_view category_name(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

}  // namespace atomdiode
