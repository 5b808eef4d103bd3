#include "funflow/errors.hpp"

namespace funflow {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::io: return "io";
        case ErrorCode::format: return "format";
        case ErrorCode::parse: return "parse";
        case ErrorCode::dimension: return "dimension";
        case ErrorCode::rank: return "rank";
        case ErrorCode::missing_response: return "missing_response";
        case ErrorCode::empty_dataset: return "empty_dataset";
        case ErrorCode::empty_neighborhood: return "empty_neighborhood";
        case ErrorCode::degenerate_cdf: return "degenerate_cdf";
        case ErrorCode::degenerate_bandwidth: return "degenerate_bandwidth";
        case ErrorCode::zero_variance: return "zero_variance";
        case ErrorCode::divergence: return "divergence";
        case ErrorCode::snapshot_version: return "snapshot_version";
        case ErrorCode::integrity: return "integrity";
        case ErrorCode::config: return "config";
    }
    return "unknown";
}

int error_exit_status(ErrorCode code) noexcept {
    // 1 is reserved for unexpected failures, 2 for usage errors.
    return 10 + static_cast<int>(code);
}

}  // namespace funflow
