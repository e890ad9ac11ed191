#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "lsqmamot/geometry.hpp"
#include "lsqmamot/pipelines.hpp"

namespace lsqmamot {

struct GtObject {
    int object_id = 0;
    DetectionBox box;

    bool operator==(const GtObject&) const = default;
};

struct ScenarioFrame {
    int frame_index = 0;
    std::vector<GtObject> gt;
    std::map<int, Pose2p5D> poses;
    // As recorded by each agent, in its own frame.
    std::map<int, std::vector<DetectionBox>> local_detections;
    // local_detections projected through the frame's poses.
    std::map<int, std::vector<DetectionBox>> detections;

    bool operator==(const ScenarioFrame&) const = default;
};

struct Scenario {
    std::vector<ScenarioFrame> frames;

    bool operator==(const Scenario&) const = default;

    std::vector<FrameInput> frame_inputs() const;
};

/// Recomputes every frame's common-frame detections from the local ones.
void project_detections(Scenario& scenario);

struct AgentConfig {
    int id = 0;
    Pose2p5D start;
    double vx = 0.0;  // world-frame m/frame
    double vy = 0.0;
    double range = 50.0;
    double fov = 6.283185307179586;  // full azimuth aperture (rad)
    double noise_std = 0.05;
    double miss_rate = 0.0;
};

struct ScenarioConfig {
    int num_objects = 8;
    int num_frames = 60;
    double extent_x = 30.0;  // objects start in [-extent_x, extent_x] x [-extent_y, extent_y]
    double extent_y = 15.0;
    double speed_min = 0.2;  // m/frame
    double speed_max = 0.8;
    double heading_drift_std = 0.01;  // rad/frame
    double min_separation = 6.0;  // between any two objects at every frame
    double score_min = 0.6;
    double score_max = 1.0;
    // Record a GT object only in frames where some agent can see it.
    bool gt_visible_only = true;
    std::vector<AgentConfig> agents = default_agents();
    std::uint64_t seed = 0;

    static std::vector<AgentConfig> default_agents();

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Synthetic constant-velocity scene observed by every configured agent.
Scenario generate(const ScenarioConfig& cfg);

/// Reads gt.jsonl, poses.jsonl and detections.jsonl from `dir`.
Scenario load_sequence(const std::filesystem::path& dir);
void save_sequence(const Scenario& scenario, const std::filesystem::path& dir);

void save_tracks(const TrackerOutput& output, const std::filesystem::path& path);
TrackerOutput load_tracks(const std::filesystem::path& path);

/// GT records of `scenario` grouped per frame.
std::vector<std::vector<GtObject>> ground_truth(const Scenario& scenario);
std::vector<std::vector<GtObject>> load_ground_truth(const std::filesystem::path& path);

}  // namespace lsqmamot
