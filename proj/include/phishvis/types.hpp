#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "phishvis/error.hpp"

namespace phishvis {

/// Class index convention shared by the classifier and the metrics:
/// 0 = legitimate, 1 = phishing (the positive class).
enum class Label : std::uint8_t { Legitimate = 0, Phishing = 1 };

constexpr std::string_view to_string(Label l) noexcept {
    return l == Label::Phishing ? "phishing" : "legitimate";
}

inline Label parse_label(std::string_view s) {
    if (s == "phishing") return Label::Phishing;
    if (s == "legitimate") return Label::Legitimate;
    throw Error(ErrorKind::InvalidInput, "unknown label '" + std::string(s) + "'");
}

constexpr std::size_t class_index(Label l) noexcept { return static_cast<std::size_t>(l); }

} // namespace phishvis
