#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lsqmamot/adversary.hpp"
#include "lsqmamot/metrics.hpp"
#include "lsqmamot/pipelines.hpp"
#include "lsqmamot/scenario.hpp"

namespace lsqmamot {

struct EvalConfig {
    double iou_min = kDefaultIouGate;
    int recall_points = kDefaultRecallPoints;
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    AttackConfig attack;
    TrackerConfig tracker;
    EvalConfig eval;
    std::vector<std::uint64_t> seeds = {0};
    std::vector<Method> methods = {Method::Arlot, Method::Single, Method::Merged, Method::Sequential};
};

/// Strict parse: unknown keys and ill-typed values raise ConfigError naming the key.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Applies KEY=VALUE overrides; KEY is a dotted path (array elements by index).
/// VALUE is parsed as JSON when possible and kept as a string otherwise.
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides);

/// Reads a JSON config file (empty path means all defaults) and applies overrides.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace lsqmamot
