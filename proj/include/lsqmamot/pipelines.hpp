#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsqmamot/association.hpp"
#include "lsqmamot/geometry.hpp"
#include "lsqmamot/lsq_graph.hpp"
#include "lsqmamot/tracking.hpp"

namespace lsqmamot {

enum class Method { Arlot, Single, Merged, Sequential };

std::string_view method_name(Method m);
/// Throws ConfigError for names outside arlot|single|merged|sequential.
Method parse_method(std::string_view name);

struct TrackerConfig {
    Method method = Method::Arlot;
    int hits = 3;
    int age = 2;
    double iou_gate = kDefaultIouGate;      // detection-to-track gate
    double overlap_gate = kDefaultIouGate;  // cross-agent gate (fusion and merge)
    int ego_agent = 0;
    // Report tentative tracks while the sequence is younger than `hits` frames.
    bool report_warmup = true;
    // Back-fill a track's tentative frames once it confirms.
    bool report_retroactive = false;
    KalmanConfig kalman = KalmanConfig::constant_velocity();
};

/// One frame of multi-agent detections, already in the common frame.
struct FrameInput {
    int frame_index = 0;
    std::map<int, std::vector<DetectionBox>> detections;
    std::map<int, Pose2p5D> poses;
};

struct TrackSet {
    std::vector<Track> tracks;
    int next_id = 1;
    int frames_seen = 0;
};

struct ReportedTrack {
    int track_id = 0;
    DetectionBox box;
    bool confirmed = false;

    bool operator==(const ReportedTrack&) const = default;
};

struct FrameOutput {
    int frame_index = 0;
    std::vector<ReportedTrack> tracks;
    // updated this frame but not reported (tentative); consumed by retroactive reporting
    std::vector<ReportedTrack> withheld;

    bool operator==(const FrameOutput&) const = default;
};

using TrackerOutput = std::vector<FrameOutput>;

/// Bookkeeping of which tracks each association stage touched.
struct StepTrace {
    std::vector<int> stage_one_tracks;
    std::vector<int> stage_two_tracks;
    std::vector<int> born_tracks;
};

struct StepResult {
    TrackSet tracks;  // survivors, predicted to the next frame
    FrameOutput output;
    StepTrace trace;
};

StepResult arlot_step(const FrameInput& input, TrackSet tracks, const TrackerConfig& cfg);
StepResult single_agent_step(const FrameInput& input, TrackSet tracks, const TrackerConfig& cfg);
StepResult merged_fusion_step(const FrameInput& input, TrackSet tracks, const TrackerConfig& cfg);
StepResult sequential_step(const FrameInput& input, TrackSet tracks, const TrackerConfig& cfg);

StepResult step(const FrameInput& input, TrackSet tracks, const TrackerConfig& cfg);

/// Detections of every agent fused into the two resilient sets. More than
/// two agents are folded pairwise in ascending id order (ego first).
FusedDetections fuse_agents(const FrameInput& input, const TrackerConfig& cfg);

/// Cross-agent duplicate suppression: greedy by descending score, dropping a
/// box that overlaps an already kept box of another agent at >= gate.
std::vector<DetectionBox> merge_agent_detections(const FrameInput& input, double gate);

TrackerOutput run_pipeline(const std::vector<FrameInput>& frames, const TrackerConfig& cfg);

}  // namespace lsqmamot
