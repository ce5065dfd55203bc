#pragma once

#include <stdexcept>
#include <string>

namespace pharmaharvest {

/// Base of every error the library raises. `code()` is a stable
/// machine-readable token used by the CLI exit-code map and by the HTTP
/// error bodies.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define PHARMAHARVEST_DEFINE_ERROR(Name, Code)                      \
    class Name : public Error {                                     \
    public:                                                         \
        explicit Name(const std::string& message) : Error(Code, message) {} \
    };

PHARMAHARVEST_DEFINE_ERROR(InvalidArgument, "invalid_argument")
PHARMAHARVEST_DEFINE_ERROR(ParseError, "parse_error")

// fetch
PHARMAHARVEST_DEFINE_ERROR(RobotsDisallowed, "robots_disallowed")
PHARMAHARVEST_DEFINE_ERROR(Timeout, "timeout")
PHARMAHARVEST_DEFINE_ERROR(TransportError, "transport_error")

class ExhaustedRetries : public Error {
public:
    ExhaustedRetries(const std::string& message, int last_status, int attempts)
        : Error("exhausted_retries", message), last_status_(last_status), attempts_(attempts) {}

    int last_status() const noexcept { return last_status_; }
    int attempts() const noexcept { return attempts_; }

private:
    int last_status_;
    int attempts_;
};

// adapters
PHARMAHARVEST_DEFINE_ERROR(DrugNotFound, "drug_not_found")
PHARMAHARVEST_DEFINE_ERROR(ExportTimeout, "export_timeout")
PHARMAHARVEST_DEFINE_ERROR(MalformedExport, "malformed_export")
PHARMAHARVEST_DEFINE_ERROR(EmptyFile, "empty_file")
PHARMAHARVEST_DEFINE_ERROR(NotAZip, "not_a_zip")
PHARMAHARVEST_DEFINE_ERROR(ChecksumMismatch, "checksum_mismatch")
PHARMAHARVEST_DEFINE_ERROR(ReplayMismatch, "replay_mismatch")
PHARMAHARVEST_DEFINE_ERROR(DriverError, "driver_error")

/// Raised when a selector the adapter depends on is absent from the page,
/// which usually means the source changed its markup.
class DomDrift : public Error {
public:
    DomDrift(const std::string& selector, const std::string& context)
        : Error("dom_drift", "expected element '" + selector + "' not found (" + context + ")"),
          selector_(selector) {}

    const std::string& selector() const noexcept { return selector_; }

private:
    std::string selector_;
};

// tabulate
PHARMAHARVEST_DEFINE_ERROR(UnknownLabel, "unknown_label")
PHARMAHARVEST_DEFINE_ERROR(ClassMissingTarget, "class_missing_target")

// store
PHARMAHARVEST_DEFINE_ERROR(NotWritable, "not_writable")
PHARMAHARVEST_DEFINE_ERROR(FormatMismatch, "format_mismatch")
PHARMAHARVEST_DEFINE_ERROR(NotFound, "not_found")

#undef PHARMAHARVEST_DEFINE_ERROR

}  // namespace pharmaharvest
