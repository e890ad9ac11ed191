#include "lsqmamot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lsqmamot/association.hpp"
#include "lsqmamot/error.hpp"

namespace lsqmamot {

FrameMatch match_frame(std::span<const GtObject> gt, std::span<const ReportedTrack> preds, double iou_min,
                       std::map<int, int>& last_track) {
    std::vector<DetectionBox> gt_boxes, pred_boxes;
    gt_boxes.reserve(gt.size());
    pred_boxes.reserve(preds.size());
    for (const GtObject& o : gt) gt_boxes.push_back(o.box);
    for (const ReportedTrack& p : preds) pred_boxes.push_back(p.box);

    const Assignment a = associate_by_iou(gt_boxes, pred_boxes, iou_min);
    FrameMatch m;
    m.tp = static_cast<int>(a.matches.size());
    m.fn = static_cast<int>(a.unmatched_rows.size());
    m.fp = static_cast<int>(a.unmatched_cols.size());
    for (const auto& [g, p] : a.matches) {
        const int obj = gt[g].object_id;
        const int trk = preds[p].track_id;
        m.matched_ious.push_back(iou3d(gt_boxes[g], pred_boxes[p]));
        m.matched.emplace_back(obj, trk);
        const auto it = last_track.find(obj);
        if (it != last_track.end() && it->second != trk) ++m.idsw;
        last_track[obj] = trk;
    }
    return m;
}

namespace {

struct SweepResult {
    int tp = 0, fp = 0, fn = 0, idsw = 0;
    double iou_sum = 0.0;
    std::vector<double> tp_scores;
    std::map<int, int> frames_present;
    std::map<int, int> frames_matched;
};

SweepResult sweep(std::span<const std::vector<GtObject>> gt, const TrackerOutput& tracks, double iou_min,
                  double threshold) {
    SweepResult r;
    std::map<int, int> last_track;
    const std::size_t frames = std::max(gt.size(), tracks.size());
    // Tracks are indexed by frame_index rather than position.
    std::map<int, const FrameOutput*> by_index;
    for (const FrameOutput& f : tracks) by_index[f.frame_index] = &f;

    static const std::vector<GtObject> kNoGt;
    for (std::size_t t = 0; t < frames; ++t) {
        const auto& g = t < gt.size() ? gt[t] : kNoGt;
        std::vector<ReportedTrack> preds;
        if (const auto it = by_index.find(static_cast<int>(t)); it != by_index.end()) {
            for (const ReportedTrack& p : it->second->tracks) {
                if (p.box.score >= threshold) preds.push_back(p);
            }
        }
        const FrameMatch m = match_frame(g, preds, iou_min, last_track);
        r.tp += m.tp;
        r.fp += m.fp;
        r.fn += m.fn;
        r.idsw += m.idsw;
        for (double v : m.matched_ious) r.iou_sum += v;
        for (const GtObject& o : g) r.frames_present[o.object_id] += 1;
        for (const auto& [obj, trk] : m.matched) {
            r.frames_matched[obj] += 1;
            const auto p = std::find_if(preds.begin(), preds.end(),
                                        [&](const ReportedTrack& x) { return x.track_id == trk; });
            r.tp_scores.push_back(p->box.score);
        }
    }
    return r;
}

}  // namespace

MetricsReport evaluate(std::span<const std::vector<GtObject>> gt, const TrackerOutput& tracks, double iou_min,
                       int num_recall_points) {
    if (num_recall_points <= 0) throw InvalidInput("num_recall_points must be positive");
    MetricsReport report;
    for (const auto& frame : gt) report.num_gt += static_cast<int>(frame.size());
    if (report.num_gt == 0) throw DataError("metrics are undefined for empty ground truth");
    const double num_gt = report.num_gt;

    const double loosest = -std::numeric_limits<double>::infinity();
    const SweepResult all = sweep(gt, tracks, iou_min, loosest);
    report.tp = all.tp;
    report.fp = all.fp;
    report.fn = all.fn;
    report.idsw = all.idsw;
    report.num_objects = static_cast<int>(all.frames_present.size());

    int mostly_tracked = 0;
    for (const auto& [obj, present] : all.frames_present) {
        const auto it = all.frames_matched.find(obj);
        const int matched = it == all.frames_matched.end() ? 0 : it->second;
        if (matched >= 0.8 * present) ++mostly_tracked;
    }
    report.mt = report.num_objects > 0 ? static_cast<double>(mostly_tracked) / report.num_objects : 0.0;

    std::vector<double> scores = all.tp_scores;
    std::sort(scores.begin(), scores.end(), std::greater<>());

    std::map<double, SweepResult> cache;
    double smota_sum = 0.0, mota_sum = 0.0, motp_sum = 0.0;
    for (int k = 1; k <= num_recall_points; ++k) {
        RecallPoint p;
        p.recall = static_cast<double>(k) / num_recall_points;
        const auto need = static_cast<std::size_t>(std::ceil(p.recall * num_gt - 1e-9));
        if (need == 0 || need > scores.size()) {
            report.curve.push_back(p);
            continue;
        }
        p.reached = true;
        p.threshold = scores[need - 1];
        auto it = cache.find(p.threshold);
        if (it == cache.end()) it = cache.emplace(p.threshold, sweep(gt, tracks, iou_min, p.threshold)).first;
        const SweepResult& s = it->second;
        p.tp = s.tp;
        p.fp = s.fp;
        p.fn = s.fn;
        p.idsw = s.idsw;
        const double errors = s.fp + s.fn + s.idsw;
        p.mota = std::clamp(1.0 - errors / num_gt, 0.0, 1.0);
        p.smota = std::clamp(1.0 - (errors - (1.0 - p.recall) * num_gt) / (p.recall * num_gt), 0.0, 1.0);
        p.motp = s.tp > 0 ? s.iou_sum / s.tp : 0.0;
        smota_sum += p.smota;
        mota_sum += p.mota;
        motp_sum += p.motp;
        report.curve.push_back(p);
    }
    report.samota = smota_sum / num_recall_points;
    report.amota = mota_sum / num_recall_points;
    report.amotp = motp_sum / num_recall_points;
    return report;
}

MetricsReport merge_reports(std::span<const MetricsReport> reports) {
    MetricsReport out;
    if (reports.empty()) return out;
    double weight = 0.0;
    std::set<std::string> methods;
    for (const MetricsReport& r : reports) {
        const double w = r.num_gt;
        out.samota += w * r.samota;
        out.amota += w * r.amota;
        out.amotp += w * r.amotp;
        out.mt += w * r.mt;
        out.num_gt += r.num_gt;
        out.num_objects += r.num_objects;
        out.tp += r.tp;
        out.fp += r.fp;
        out.fn += r.fn;
        out.idsw += r.idsw;
        weight += w;
        methods.insert(r.method);
    }
    if (weight > 0.0) {
        out.samota /= weight;
        out.amota /= weight;
        out.amotp /= weight;
        out.mt /= weight;
    }
    out.sequence = "merged";
    if (methods.size() == 1) out.method = *methods.begin();
    return out;
}

nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json curve = nlohmann::json::array();
    for (const RecallPoint& p : r.curve) {
        curve.push_back({{"recall", p.recall},
                         {"reached", p.reached},
                         {"threshold", p.threshold},
                         {"smota", p.smota},
                         {"mota", p.mota},
                         {"motp", p.motp},
                         {"tp", p.tp},
                         {"fp", p.fp},
                         {"fn", p.fn},
                         {"idsw", p.idsw}});
    }
    return {{"sequence", r.sequence}, {"method", r.method}, {"samota", r.samota},   {"amota", r.amota},
            {"amotp", r.amotp},       {"mt", r.mt},         {"num_gt", r.num_gt},   {"num_objects", r.num_objects},
            {"tp", r.tp},             {"fp", r.fp},         {"fn", r.fn},           {"idsw", r.idsw},
            {"curve", curve}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
    try {
        MetricsReport r;
        r.sequence = j.value("sequence", "");
        r.method = j.value("method", "");
        r.samota = j.at("samota").get<double>();
        r.amota = j.at("amota").get<double>();
        r.amotp = j.at("amotp").get<double>();
        r.mt = j.at("mt").get<double>();
        r.num_gt = j.at("num_gt").get<int>();
        r.num_objects = j.value("num_objects", 0);
        r.tp = j.value("tp", 0);
        r.fp = j.value("fp", 0);
        r.fn = j.value("fn", 0);
        r.idsw = j.value("idsw", 0);
        if (j.contains("curve")) {
            for (const auto& c : j.at("curve")) {
                RecallPoint p;
                p.recall = c.at("recall").get<double>();
                p.reached = c.at("reached").get<bool>();
                p.threshold = c.at("threshold").get<double>();
                p.smota = c.at("smota").get<double>();
                p.mota = c.at("mota").get<double>();
                p.motp = c.at("motp").get<double>();
                p.tp = c.at("tp").get<int>();
                p.fp = c.at("fp").get<int>();
                p.fn = c.at("fn").get<int>();
                p.idsw = c.at("idsw").get<int>();
                r.curve.push_back(p);
            }
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
}

}  // namespace lsqmamot
