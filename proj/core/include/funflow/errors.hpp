#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace funflow {

enum class ErrorCode {
    invalid_argument,
    io,
    format,
    parse,
    dimension,
    rank,
    missing_response,
    empty_dataset,
    empty_neighborhood,
    degenerate_cdf,
    degenerate_bandwidth,
    zero_variance,
    divergence,
    snapshot_version,
    integrity,
    config,
};

/// Machine-parsable identifier, e.g. "empty_neighborhood".
std::string_view error_code_name(ErrorCode code) noexcept;

/// Process exit status used by the CLI for a given code (always nonzero).
int error_exit_status(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) fail(code, what);
}

}  // namespace funflow
