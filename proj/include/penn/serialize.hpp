#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "penn/metrics.hpp"
#include "penn/mlp.hpp"
#include "penn/net_algebra.hpp"
#include "penn/penn_net.hpp"
#include "penn/training.hpp"

namespace penn {

using Json = nlohmann::json;

/// Self-describing documents; round trips are bit-exact for finite values.
Json to_json(const Mlp& net);
Mlp mlp_from_json(const Json& doc);

Json to_json(const Penn& net);
Penn penn_from_json(const Json& doc);

Json to_json(const SeparationCertificate& cert);
SeparationCertificate certificate_from_json(const Json& doc);

Json to_json(const PatternPartition& partition);
PatternPartition partition_from_json(const Json& doc);

Json to_json(const MetricsRecord& record);
Json to_json(const ComparisonSummary& summary);

template <typename Net>
Json train_report_to_json(const TrainReport<Net>& report);

void save_json(const std::filesystem::path& path, const Json& doc);
Json load_json(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double (what the CSV writer emits).
std::string format_double(double v);

}  // namespace penn
