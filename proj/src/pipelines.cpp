#include "lsqmamot/pipelines.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "lsqmamot/error.hpp"

namespace lsqmamot {

namespace {

std::vector<DetectionBox> track_boxes(const std::vector<Track>& tracks) {
    std::vector<DetectionBox> boxes;
    boxes.reserve(tracks.size());
    for (const Track& t : tracks) boxes.push_back(t.box());
    return boxes;
}

const std::vector<DetectionBox>& agent_detections(const FrameInput& input, int agent) {
    static const std::vector<DetectionBox> kEmpty;
    const auto it = input.detections.find(agent);
    return it == input.detections.end() ? kEmpty : it->second;
}

// Ego first, then the remaining agents by ascending id.
std::vector<int> agent_order(const FrameInput& input, int ego) {
    std::vector<int> order;
    if (input.detections.contains(ego)) order.push_back(ego);
    for (const auto& [id, dets] : input.detections) {
        if (id != ego) order.push_back(id);
    }
    return order;
}

int birth(TrackSet& set, const DetectionBox& det, const TrackerConfig& cfg) {
    const int id = set.next_id++;
    set.tracks.push_back(init_track(det, cfg.kalman, id));
    return id;
}

// Lifecycle, reporting and prediction shared by every pipeline.
StepResult finish_frame(const FrameInput& input, TrackSet set, std::vector<int> matched_ids, StepTrace trace,
                        const TrackerConfig& cfg) {
    std::sort(matched_ids.begin(), matched_ids.end());
    set.tracks = step_lifecycle(std::move(set.tracks), matched_ids, cfg.hits, cfg.age);

    StepResult result;
    result.output.frame_index = input.frame_index;
    const bool warmup = cfg.report_warmup && set.frames_seen < cfg.hits;
    for (const Track& t : set.tracks) {
        if (t.miss_streak != 0) continue;
        const bool confirmed = t.status == TrackStatus::Confirmed;
        ReportedTrack r{t.track_id, t.box(), confirmed};
        if (confirmed || warmup) {
            result.output.tracks.push_back(r);
        } else {
            result.output.withheld.push_back(r);
        }
    }

    for (Track& t : set.tracks) t = predict(t, cfg.kalman);
    set.frames_seen += 1;
    result.tracks = std::move(set);
    result.trace = std::move(trace);
    return result;
}

// Single association stage: update matches, birth the rest.
StepResult one_stage(const FrameInput& input, const std::vector<DetectionBox>& dets, TrackSet set,
                     const TrackerConfig& cfg) {
    const std::vector<DetectionBox> boxes = track_boxes(set.tracks);
    const Assignment a = associate_by_iou(dets, boxes, cfg.iou_gate);

    StepTrace trace;
    std::vector<int> matched_ids;
    for (const auto& [d, t] : a.matches) {
        set.tracks[t] = update(set.tracks[t], dets[d], cfg.kalman);
        matched_ids.push_back(set.tracks[t].track_id);
        trace.stage_one_tracks.push_back(set.tracks[t].track_id);
    }
    for (int d : a.unmatched_rows) {
        const int id = birth(set, dets[d], cfg);
        matched_ids.push_back(id);
        trace.born_tracks.push_back(id);
    }
    return finish_frame(input, std::move(set), std::move(matched_ids), std::move(trace), cfg);
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::Arlot: return "arlot";
        case Method::Single: return "single";
        case Method::Merged: return "merged";
        case Method::Sequential: return "sequential";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "arlot") return Method::Arlot;
    if (name == "single") return Method::Single;
    if (name == "merged") return Method::Merged;
    if (name == "sequential") return Method::Sequential;
    throw ConfigError("unknown tracking method '" + std::string(name) +
                      "' (expected arlot, single, merged or sequential)");
}

FusedDetections fuse_agents(const FrameInput& input, const TrackerConfig& cfg) {
    const std::vector<int> order = agent_order(input, cfg.ego_agent);
    if (order.empty()) return FusedDetections{};
    if (order.size() == 1) {
        const auto& dets = agent_detections(input, order[0]);
        return fuse_detections(dets, std::span<const DetectionBox>{}, {});
    }

    std::vector<DetectionBox> accumulated = agent_detections(input, order[0]);
    for (std::size_t k = 1; k + 1 < order.size(); ++k) {
        const auto& next = agent_detections(input, order[k]);
        const auto pairs = cross_agent_overlap(accumulated, next, cfg.overlap_gate);
        const FusedDetections f = fuse_detections(accumulated, next, pairs);
        // Intermediate folds keep the midpoint of the two resilient estimates.
        accumulated = f.j_ij;
        for (std::size_t n = 0; n < accumulated.size(); ++n) {
            accumulated[n].x = 0.5 * (f.j_ij[n].x + f.j_ji[n].x);
            accumulated[n].y = 0.5 * (f.j_ij[n].y + f.j_ji[n].y);
            accumulated[n].z = 0.5 * (f.j_ij[n].z + f.j_ji[n].z);
        }
    }
    const auto& last = agent_detections(input, order.back());
    const auto pairs = cross_agent_overlap(accumulated, last, cfg.overlap_gate);
    return fuse_detections(accumulated, last, pairs);
}

StepResult arlot_step(const FrameInput& input, TrackSet set, const TrackerConfig& cfg) {
    const FusedDetections fused = fuse_agents(input, cfg);
    const std::vector<DetectionBox> boxes = track_boxes(set.tracks);
    StepTrace trace;
    std::vector<int> matched_ids;

    // Stage one: J_ij against all predicted tracks.
    const Assignment first = associate_by_iou(fused.j_ij, boxes, cfg.iou_gate);
    for (const auto& [d, t] : first.matches) {
        set.tracks[t] = update(set.tracks[t], fused.j_ij[d], cfg.kalman);
        matched_ids.push_back(set.tracks[t].track_id);
        trace.stage_one_tracks.push_back(set.tracks[t].track_id);
    }

    // Stage two: J_ji boxes whose sibling went unmatched, against tracks left
    // unmatched by stage one.
    const std::vector<int>& candidates = first.unmatched_rows;
    const std::vector<int>& free_tracks = first.unmatched_cols;
    std::vector<DetectionBox> cand_boxes;
    std::vector<DetectionBox> free_boxes;
    for (int d : candidates) cand_boxes.push_back(fused.j_ji[d]);
    for (int t : free_tracks) free_boxes.push_back(boxes[t]);
    const Assignment second = associate_by_iou(cand_boxes, free_boxes, cfg.iou_gate);

    std::vector<bool> consumed(fused.j_ij.size(), false);
    for (const auto& [c, f] : second.matches) {
        const int d = candidates[c];
        const int t = free_tracks[f];
        set.tracks[t] = update(set.tracks[t], fused.j_ji[d], cfg.kalman);
        matched_ids.push_back(set.tracks[t].track_id);
        trace.stage_two_tracks.push_back(set.tracks[t].track_id);
        consumed[d] = true;
    }

    // Births from J_ij; a J_ji box never births because its sibling already did
    // or was matched.
    for (int d : candidates) {
        if (consumed[d]) continue;
        const int id = birth(set, fused.j_ij[d], cfg);
        matched_ids.push_back(id);
        trace.born_tracks.push_back(id);
    }
    return finish_frame(input, std::move(set), std::move(matched_ids), std::move(trace), cfg);
}

StepResult single_agent_step(const FrameInput& input, TrackSet set, const TrackerConfig& cfg) {
    return one_stage(input, agent_detections(input, cfg.ego_agent), std::move(set), cfg);
}

std::vector<DetectionBox> merge_agent_detections(const FrameInput& input, double gate) {
    std::vector<DetectionBox> all;
    for (const auto& [agent, dets] : input.detections) all.insert(all.end(), dets.begin(), dets.end());
    std::stable_sort(all.begin(), all.end(), [](const DetectionBox& a, const DetectionBox& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.agent_id != b.agent_id) return a.agent_id < b.agent_id;
        return a.det_id < b.det_id;
    });
    std::vector<DetectionBox> kept;
    for (const DetectionBox& d : all) {
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const DetectionBox& k) {
            return k.agent_id != d.agent_id && iou3d(k, d) >= gate;
        });
        if (!duplicate) kept.push_back(d);
    }
    return kept;
}

StepResult merged_fusion_step(const FrameInput& input, TrackSet set, const TrackerConfig& cfg) {
    return one_stage(input, merge_agent_detections(input, cfg.overlap_gate), std::move(set), cfg);
}

StepResult sequential_step(const FrameInput& input, TrackSet set, const TrackerConfig& cfg) {
    const std::vector<int> order = agent_order(input, cfg.ego_agent);
    StepTrace trace;
    std::vector<int> matched_ids;
    std::vector<bool> track_matched(set.tracks.size(), false);
    const std::size_t existing = set.tracks.size();

    bool first_stage = true;
    for (int agent : order) {
        const auto& dets = agent_detections(input, agent);
        std::vector<int> free_tracks;
        std::vector<DetectionBox> free_boxes;
        for (std::size_t t = 0; t < existing; ++t) {
            if (track_matched[t]) continue;
            free_tracks.push_back(static_cast<int>(t));
            free_boxes.push_back(set.tracks[t].box());
        }
        const Assignment a = associate_by_iou(dets, free_boxes, cfg.iou_gate);
        for (const auto& [d, f] : a.matches) {
            const int t = free_tracks[f];
            set.tracks[t] = update(set.tracks[t], dets[d], cfg.kalman);
            track_matched[t] = true;
            matched_ids.push_back(set.tracks[t].track_id);
            (first_stage ? trace.stage_one_tracks : trace.stage_two_tracks).push_back(set.tracks[t].track_id);
        }
        for (int d : a.unmatched_rows) {
            if (!first_stage) {
                // Another agent's copy of an object already tracked this frame.
                const bool covered = std::any_of(set.tracks.begin(), set.tracks.end(), [&](const Track& t) {
                    return iou3d(t.box(), dets[d]) >= cfg.iou_gate;
                });
                if (covered) continue;
            }
            const int id = birth(set, dets[d], cfg);
            matched_ids.push_back(id);
            trace.born_tracks.push_back(id);
        }
        first_stage = false;
    }
    return finish_frame(input, std::move(set), std::move(matched_ids), std::move(trace), cfg);
}

StepResult step(const FrameInput& input, TrackSet tracks, const TrackerConfig& cfg) {
    switch (cfg.method) {
        case Method::Arlot: return arlot_step(input, std::move(tracks), cfg);
        case Method::Single: return single_agent_step(input, std::move(tracks), cfg);
        case Method::Merged: return merged_fusion_step(input, std::move(tracks), cfg);
        case Method::Sequential: return sequential_step(input, std::move(tracks), cfg);
    }
    throw InvalidInput("unknown method");
}

TrackerOutput run_pipeline(const std::vector<FrameInput>& frames, const TrackerConfig& cfg) {
    TrackerOutput out;
    out.reserve(frames.size());
    TrackSet set;
    for (const FrameInput& frame : frames) {
        StepResult r = step(frame, std::move(set), cfg);
        set = std::move(r.tracks);
        out.push_back(std::move(r.output));
    }

    if (cfg.report_retroactive) {
        std::set<int> confirmed;
        for (const FrameOutput& f : out) {
            for (const ReportedTrack& r : f.tracks) {
                if (r.confirmed) confirmed.insert(r.track_id);
            }
        }
        for (FrameOutput& f : out) {
            for (const ReportedTrack& r : f.withheld) {
                if (confirmed.contains(r.track_id)) f.tracks.push_back(r);
            }
            std::erase_if(f.withheld, [&](const ReportedTrack& r) { return confirmed.contains(r.track_id); });
            std::sort(f.tracks.begin(), f.tracks.end(),
                      [](const ReportedTrack& a, const ReportedTrack& b) { return a.track_id < b.track_id; });
        }
    }
    return out;
}

}  // namespace lsqmamot
