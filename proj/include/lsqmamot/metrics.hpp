#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lsqmamot/pipelines.hpp"
#include "lsqmamot/scenario.hpp"

namespace lsqmamot {

struct FrameMatch {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int idsw = 0;
    std::vector<double> matched_ious;
    std::vector<std::pair<int, int>> matched;  // (object_id, track_id)
};

/// Hungarian matching of predictions to GT on -IoU, gated at iou_min.
///
/// `last_track` maps each GT object to the track it was last matched to and
/// is updated in place; a change of track id counts as an identity switch.
FrameMatch match_frame(std::span<const GtObject> gt, std::span<const ReportedTrack> preds, double iou_min,
                       std::map<int, int>& last_track);

struct RecallPoint {
    double recall = 0.0;  // nominal level
    bool reached = false;
    double threshold = 0.0;
    double smota = 0.0;
    double mota = 0.0;
    double motp = 0.0;
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int idsw = 0;
};

struct MetricsReport {
    std::string sequence;
    std::string method;
    double samota = 0.0;
    double amota = 0.0;
    double amotp = 0.0;
    double mt = 0.0;
    int num_gt = 0;       // GT boxes summed over frames
    int num_objects = 0;  // distinct GT object ids
    // totals at the loosest threshold (every reported track)
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int idsw = 0;
    std::vector<RecallPoint> curve;
};

inline constexpr int kDefaultRecallPoints = 40;

/// Recall-swept CLEAR-MOT evaluation.
///
/// Confidence thresholds realizing recall levels k/N (k = 1..N) are read off
/// the sorted scores of the true positives at the loosest threshold. Levels
/// that cannot be reached contribute zero to the averages. Throws DataError
/// on empty ground truth.
MetricsReport evaluate(std::span<const std::vector<GtObject>> gt, const TrackerOutput& tracks,
                       double iou_min = kDefaultIouGate, int num_recall_points = kDefaultRecallPoints);

/// GT-count weighted average of several sequences' headline metrics.
MetricsReport merge_reports(std::span<const MetricsReport> reports);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

}  // namespace lsqmamot
