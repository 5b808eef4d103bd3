#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "funflow/estimator.hpp"
#include "funflow/seminorms.hpp"

namespace funflow {

/// Snapshot files are JSON documents
///
///   {"format": "funflow.query_state" | "funflow.seminorm",
///    "version": 1,
///    "checksum": "<FNV-1a 64 of payload.dump(), hex>",
///    "payload": {...}}
///
/// A query-state payload holds the query curve, the fitted semi-norm (embedded),
/// kernel, l, bandwidth plan, CDF policy and reference, the ordered observation
/// history (distance, response, bandwidth), the sorted distances and every
/// accumulator sum. Numbers round-trip exactly.
inline constexpr int kSnapshotVersion = 1;

std::string serialize_seminorm(const FittedSemiNorm& s);
FittedSemiNorm deserialize_seminorm(std::string_view text);

std::string serialize_state(const QueryState& state);
QueryState deserialize_state(std::string_view text);

void save_state(const std::filesystem::path& path, const QueryState& state);
QueryState load_state(const std::filesystem::path& path);

}  // namespace funflow
