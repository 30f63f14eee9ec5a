#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "solembed/detectors.hpp"
#include "solembed/ingestion.hpp"

namespace solembed {

using Json = nlohmann::ordered_json;

Json to_json(const Span& span);
Json to_json(const Diagnostic& d);
Json to_json(const ClonePair& pair);
Json to_json(const CloneReport& report);
Json to_json(const BugHit& hit);
Json to_json(const BugScan& scan);
Json to_json(const CloneHit& hit);
Json to_json(const ValidationReport& report);
Json to_json(const IngestDelta& delta);
Json to_json(const ModelUpdate& update);

/// Per-granularity fragment counts plus bug, bug-row and source counts; the
/// same object the snapshot manifest records.
Json snapshot_counts(const Snapshot& snapshot);

/// Counts, version, dimension and thresholds of a snapshot.
Json stats_json(const Snapshot& snapshot, const Thresholds& thresholds);

/// The bug catalog without statement streams.
Json bugs_json(const Snapshot& snapshot);

/// {"code", "message", "details"?}
Json api_error(std::string code, std::string message, std::optional<Json> details = std::nullopt);

}  // namespace solembed
