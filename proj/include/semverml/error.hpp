#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semverml {

enum class ErrorKind {
    MalformedVersion,
    MissingRepo,
    MalformedMetadata,
    EmptyTimeline,
    MalformedManifest,
    IncompleteInputs,
    SchemaMismatch,
    SingleClassInput,
    DivisionByZeroBaseline,
    EmptySample,
    NoModel,
    NoPriorRelease,
    InvalidArgument,
    Io,
};

[[nodiscard]] inline std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::MalformedVersion: return "MalformedVersion";
    case ErrorKind::MissingRepo: return "MissingRepo";
    case ErrorKind::MalformedMetadata: return "MalformedMetadata";
    case ErrorKind::EmptyTimeline: return "EmptyTimeline";
    case ErrorKind::MalformedManifest: return "MalformedManifest";
    case ErrorKind::IncompleteInputs: return "IncompleteInputs";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::SingleClassInput: return "SingleClassInput";
    case ErrorKind::DivisionByZeroBaseline: return "DivisionByZeroBaseline";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::NoModel: return "NoModel";
    case ErrorKind::NoPriorRelease: return "NoPriorRelease";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Thrown by every fallible operation in the library. The kind selects the
/// CLI exit code: everything except IncompleteInputs is caused by user input.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    [[nodiscard]] bool is_input_error() const noexcept { return kind_ != ErrorKind::IncompleteInputs; }

private:
    ErrorKind kind_;
};

/// Collects non-fatal conditions (skipped releases, degraded features).
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }

    [[nodiscard]] bool contains(std::string_view needle) const
    {
        for (const auto& w : warnings) {
            if (w.find(needle) != std::string::npos) {
                return true;
            }
        }
        return false;
    }
};

}  // namespace semverml
