#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "semverml/error.hpp"

namespace semverml {

enum class ReleaseType { Major, Minor, Patch };

enum class Transition { Major, Minor, Patch, Backport, NoChange };

[[nodiscard]] inline std::string_view to_string(ReleaseType type) noexcept
{
    switch (type) {
    case ReleaseType::Major: return "major";
    case ReleaseType::Minor: return "minor";
    case ReleaseType::Patch: return "patch";
    }
    return "patch";
}

[[nodiscard]] inline std::string_view to_string(Transition t) noexcept
{
    switch (t) {
    case Transition::Major: return "major";
    case Transition::Minor: return "minor";
    case Transition::Patch: return "patch";
    case Transition::Backport: return "backport";
    case Transition::NoChange: return "nochange";
    }
    return "nochange";
}

[[nodiscard]] inline std::optional<ReleaseType> parse_release_type(std::string_view text) noexcept
{
    if (text == "major") return ReleaseType::Major;
    if (text == "minor") return ReleaseType::Minor;
    if (text == "patch") return ReleaseType::Patch;
    return std::nullopt;
}

[[nodiscard]] inline std::optional<ReleaseType> release_type_of(Transition t) noexcept
{
    switch (t) {
    case Transition::Major: return ReleaseType::Major;
    case Transition::Minor: return ReleaseType::Minor;
    case Transition::Patch: return ReleaseType::Patch;
    default: return std::nullopt;
    }
}

struct VersionNumber {
    std::uint64_t major = 0;
    std::uint64_t minor = 0;
    std::uint64_t patch = 0;
    std::optional<std::string> prerelease;
    std::string raw;
};

namespace detail {

inline bool take_number(std::string_view& text, std::uint64_t& out)
{
    std::size_t len = 0;
    while (len < text.size() && text[len] >= '0' && text[len] <= '9') {
        ++len;
    }
    if (len == 0) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + len, out);
    if (ec != std::errc{}) {
        return false;
    }
    text.remove_prefix(len);
    return true;
}

}  // namespace detail

/// Parses "[v]MAJOR.MINOR.PATCH[-tag]". Build metadata ("+...") is not
/// supported and is rejected.
[[nodiscard]] inline VersionNumber parse_version(std::string_view text)
{
    VersionNumber v;
    v.raw = std::string(text);
    std::string_view rest = text;
    if (!rest.empty() && (rest.front() == 'v' || rest.front() == 'V')) {
        rest.remove_prefix(1);
    }
    auto fail = [&] { return Error(ErrorKind::MalformedVersion, "'" + std::string(text) + "'"); };
    if (!detail::take_number(rest, v.major) || rest.empty() || rest.front() != '.') {
        throw fail();
    }
    rest.remove_prefix(1);
    if (!detail::take_number(rest, v.minor) || rest.empty() || rest.front() != '.') {
        throw fail();
    }
    rest.remove_prefix(1);
    if (!detail::take_number(rest, v.patch)) {
        throw fail();
    }
    if (!rest.empty()) {
        if (rest.front() != '-' || rest.size() == 1 || rest.find('+') != std::string_view::npos) {
            throw fail();
        }
        v.prerelease = std::string(rest.substr(1));
    }
    return v;
}

[[nodiscard]] inline std::optional<VersionNumber> try_parse_version(std::string_view text)
{
    try {
        return parse_version(text);
    } catch (const Error&) {
        return std::nullopt;
    }
}

/// Precedence: (major, minor, patch) lexicographically, then a tagged
/// version sorts below the bare triple. Distinct tags compare by byte order.
[[nodiscard]] inline std::strong_ordering compare(const VersionNumber& a, const VersionNumber& b) noexcept
{
    if (auto c = a.major <=> b.major; c != 0) return c;
    if (auto c = a.minor <=> b.minor; c != 0) return c;
    if (auto c = a.patch <=> b.patch; c != 0) return c;
    if (a.prerelease.has_value() != b.prerelease.has_value()) {
        return a.prerelease.has_value() ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    if (!a.prerelease) {
        return std::strong_ordering::equal;
    }
    const int c = a.prerelease->compare(*b.prerelease);
    return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

/// Labels `next` relative to its date-predecessor `prev`.
[[nodiscard]] inline Transition label_transition(const VersionNumber& prev, const VersionNumber& next) noexcept
{
    const auto order = compare(next, prev);
    if (order < 0) {
        return Transition::Backport;
    }
    if (next.major > prev.major) return Transition::Major;
    if (next.major == prev.major && next.minor > prev.minor) return Transition::Minor;
    if (next.major == prev.major && next.minor == prev.minor && next.patch > prev.patch) return Transition::Patch;
    // Equal, or the same triple promoted from a pre-release tag.
    return Transition::NoChange;
}

}  // namespace semverml
