#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phishvis {

enum class ErrorKind {
    OutOfRange,
    EmptyContent,
    InvalidUrl,
    UnsupportedScheme,
    NameResolution,
    Connection,
    Timeout,
    HttpStatus,
    BodyTooLarge,
    TooManyRedirects,
    StoreCorrupt,
    StoreWriteFailed,
    ManifestParse,
    BadShape,
    ModelFormat,
    DegenerateDataset,
    Undefined,
    InvalidInput,
};

/// Process exit codes used by the command line tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 2;
inline constexpr int fetch = 10;
inline constexpr int store = 11;
inline constexpr int model = 12;
inline constexpr int degenerate = 13;
} // namespace exit_code

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::EmptyContent: return "EmptyContent";
    case ErrorKind::InvalidUrl: return "InvalidUrl";
    case ErrorKind::UnsupportedScheme: return "UnsupportedScheme";
    case ErrorKind::NameResolution: return "NameResolution";
    case ErrorKind::Connection: return "Connection";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::HttpStatus: return "HttpStatus";
    case ErrorKind::BodyTooLarge: return "BodyTooLarge";
    case ErrorKind::TooManyRedirects: return "TooManyRedirects";
    case ErrorKind::StoreCorrupt: return "StoreCorrupt";
    case ErrorKind::StoreWriteFailed: return "StoreWriteFailed";
    case ErrorKind::ManifestParse: return "ManifestParse";
    case ErrorKind::BadShape: return "BadShape";
    case ErrorKind::ModelFormat: return "ModelFormat";
    case ErrorKind::DegenerateDataset: return "DegenerateDataset";
    case ErrorKind::Undefined: return "Undefined";
    case ErrorKind::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

constexpr int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::EmptyContent:
    case ErrorKind::NameResolution:
    case ErrorKind::Connection:
    case ErrorKind::Timeout:
    case ErrorKind::HttpStatus:
    case ErrorKind::BodyTooLarge:
    case ErrorKind::TooManyRedirects:
        return exit_code::fetch;
    case ErrorKind::StoreCorrupt:
    case ErrorKind::StoreWriteFailed:
    case ErrorKind::ManifestParse:
        return exit_code::store;
    case ErrorKind::BadShape:
    case ErrorKind::ModelFormat:
        return exit_code::model;
    case ErrorKind::DegenerateDataset:
    case ErrorKind::Undefined:
        return exit_code::degenerate;
    case ErrorKind::OutOfRange:
    case ErrorKind::InvalidUrl:
    case ErrorKind::UnsupportedScheme:
    case ErrorKind::InvalidInput:
        return exit_code::usage;
    }
    return exit_code::usage;
}

/// Every failure raised by the library. `detail()` carries extra payload:
/// the HTTP status for HttpStatus and the 1-based line for ManifestParse.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, long detail = 0)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind), detail_(detail) {}

    ErrorKind kind() const noexcept { return kind_; }
    long detail() const noexcept { return detail_; }
    int exit_code() const noexcept { return exit_code_for(kind_); }

private:
    ErrorKind kind_;
    long detail_;
};

} // namespace phishvis
