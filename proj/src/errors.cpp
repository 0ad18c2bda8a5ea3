// SPDX-License-Identifier: Apache-2.0
#include "atomdiode/errors.hpp"

namespace atomdiode {

std::string_view category_name(ErrorCategory category) noexcept {
    switch (category) {
        case ErrorCategory::Config: return "ConfigError";
        case ErrorCategory::NonConvergence: return "NonConvergence";
        case ErrorCategory::IllConditionedMatching: return "IllConditionedMatching";
        case ErrorCategory::PacketOutsideGrid: return "PacketOutsideGrid";
        case ErrorCategory::BoundaryOverrun: return "BoundaryOverrun";
        case ErrorCategory::EmptySourceChannel: return "EmptySourceChannel";
        case ErrorCategory::MaxJumpsExceeded: return "MaxJumpsExceeded";
        case ErrorCategory::TraceDrift: return "TraceDrift";
        case ErrorCategory::Io: return "IoError";
    }
    return "UnknownError";
}

}  // namespace atomdiode
