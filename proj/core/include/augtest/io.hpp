#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "augtest/domain.hpp"
#include "augtest/estimators.hpp"
#include "augtest/flattening.hpp"
#include "augtest/hard_instances.hpp"
#include "augtest/testers.hpp"

namespace augtest {

using Json = nlohmann::json;

/// {"dims": [...], "probs": [...]}, row-major. Parsing rejects a total outside
/// 1 +- 1e-9 and a probs length that does not match the dims.
Json to_json(const JointDistribution& p);
JointDistribution distribution_from_json(const Json& j);

/// {"buckets_axis1": [...], "buckets_axis2": [...], ...}
Json to_json(const ProductFlattening& f);
ProductFlattening flattening_from_json(const Json& j);

Json to_json(const SampleAccount& a);
SampleAccount account_from_json(const Json& j);

/// {"outcome", "stage", "samples": {...}, "seed"}
Json to_json(const Verdict& v, std::uint64_t seed);

Json to_json(const ValidityReport& r);

/// gen-hard output: {"instance", "meta": {X, H, k, eps_meas, alpha_meas, seed}, "validity"}.
Json hard_instance_json(const HardInstance& inst, const ValidityReport& validity, std::uint64_t seed);

Json to_json(const EstimatorConfig& cfg);
EstimatorConfig estimator_config_from_json(const Json& j);

/// Whole-file helpers; throw std::runtime_error on IO or parse failure.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

JointDistribution load_distribution(const std::filesystem::path& path);

}  // namespace augtest
