#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lsqmamot/error.hpp"
#include "lsqmamot/metrics.hpp"

using namespace lsqmamot;

namespace {

DetectionBox box(double x, double y = 0.0) {
    DetectionBox b;
    b.x = x;
    b.y = y;
    b.h = 1.5;
    b.w = 2;
    b.l = 4;
    return b;
}

GtObject obj(int id, double x, double y = 0.0) {
    GtObject o{id, box(x, y)};
    o.box.agent_id = -1;
    o.box.det_id = id;
    return o;
}

ReportedTrack trk(int id, double x, double score, double y = 0.0) {
    ReportedTrack r{id, box(x, y), true};
    r.box.score = score;
    return r;
}

// Perfect tracks for `gt`, one track id per object.
TrackerOutput perfect(const std::vector<std::vector<GtObject>>& gt) {
    TrackerOutput out;
    for (std::size_t f = 0; f < gt.size(); ++f) {
        FrameOutput fo{static_cast<int>(f), {}, {}};
        for (const GtObject& o : gt[f]) fo.tracks.push_back(trk(o.object_id + 100, o.box.x, 0.9, o.box.y));
        out.push_back(fo);
    }
    return out;
}

std::vector<std::vector<GtObject>> grid_gt(int frames, int objects) {
    std::vector<std::vector<GtObject>> gt(frames);
    for (int f = 0; f < frames; ++f) {
        for (int k = 0; k < objects; ++k) gt[f].push_back(obj(k, 10.0 * k + 0.3 * f, 2.0 * k));
    }
    return gt;
}

}  // namespace

TEST(MatchFrame, PerfectPredictions) {
    const std::vector<GtObject> gt{obj(0, 0), obj(1, 10)};
    const std::vector<ReportedTrack> preds{trk(1, 0, 1), trk(2, 10, 1)};
    std::map<int, int> last;
    const FrameMatch m = match_frame(gt, preds, 0.25, last);
    EXPECT_EQ(m.tp, 2);
    EXPECT_EQ(m.fp + m.fn + m.idsw, 0);
}

TEST(MatchFrame, NoPredictions) {
    const std::vector<GtObject> gt{obj(0, 0), obj(1, 10)};
    std::map<int, int> last;
    const FrameMatch m = match_frame(gt, {}, 0.25, last);
    EXPECT_EQ(m.fn, 2);
    EXPECT_EQ(m.tp, 0);
}

TEST(MatchFrame, IdentitySwitchCounted) {
    const std::vector<GtObject> gt{obj(0, 0)};
    std::map<int, int> last;
    const std::vector<ReportedTrack> first{trk(1, 0, 1)}, second{trk(2, 0, 1)};
    EXPECT_EQ(match_frame(gt, first, 0.25, last).idsw, 0);
    EXPECT_EQ(match_frame(gt, second, 0.25, last).idsw, 1);
    EXPECT_EQ(match_frame(gt, second, 0.25, last).idsw, 0);
}

TEST(MatchFrame, SwitchCountedAfterGap) {
    const std::vector<GtObject> gt{obj(0, 0)};
    std::map<int, int> last;
    const std::vector<ReportedTrack> a{trk(1, 0, 1)}, b{trk(2, 0, 1)};
    match_frame(gt, a, 0.25, last);
    match_frame(gt, {}, 0.25, last);
    EXPECT_EQ(match_frame(gt, b, 0.25, last).idsw, 1);
}

TEST(Evaluate, PerfectTracking) {
    const auto gt = grid_gt(10, 3);
    const MetricsReport r = evaluate(gt, perfect(gt));
    EXPECT_DOUBLE_EQ(r.samota, 1.0);
    EXPECT_DOUBLE_EQ(r.amota, 1.0);
    EXPECT_DOUBLE_EQ(r.amotp, 1.0);
    EXPECT_DOUBLE_EQ(r.mt, 1.0);
    EXPECT_EQ(r.num_gt, 30);
    EXPECT_EQ(r.num_objects, 3);
}

TEST(Evaluate, NoPredictionsIsZero) {
    const auto gt = grid_gt(10, 3);
    TrackerOutput none;
    for (int f = 0; f < 10; ++f) none.push_back(FrameOutput{f, {}, {}});
    const MetricsReport r = evaluate(gt, none);
    EXPECT_EQ(r.samota, 0.0);
    EXPECT_EQ(r.amota, 0.0);
    EXPECT_EQ(r.mt, 0.0);
    EXPECT_EQ(r.fn, 30);
    EXPECT_EQ(evaluate(gt, TrackerOutput{}).samota, 0.0);
}

TEST(Evaluate, HalfIouMatchesGiveHalfMotp) {
    const auto gt = grid_gt(5, 2);
    TrackerOutput out = perfect(gt);
    const double shift = 4.0 / 3.0;  // (4 - d) / (4 + d) = 1/2
    for (auto& f : out) {
        for (auto& t : f.tracks) t.box.x += shift;
    }
    const MetricsReport r = evaluate(gt, out);
    EXPECT_NEAR(r.amotp, 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(r.samota, 1.0);
}

TEST(Evaluate, EmptyGroundTruthRejected) {
    const std::vector<std::vector<GtObject>> gt(3);
    EXPECT_THROW(evaluate(gt, TrackerOutput{}), DataError);
}

// Two frames, two objects A (id 1) and B (id 2); tracks:
//   f0: t1 on A (0.9), t2 on B at IoU 1/2 (0.6)
//   f1: t4 on A (0.9), t3 far away (0.3); B missed
// With 4 recall levels the thresholds are 0.9, 0.9, 0.6 and level 1.0 is
// unreachable (3 TPs of 4 GT). Per level (errors = fp + fn + idsw):
//   r=.25 thr .9: tp2 fn2 idsw1 -> mota .25, smota clamp(1-(3-3)/1)=1,   motp 1
//   r=.50 thr .9: same counts    -> mota .25, smota 1-(3-2)/2 = .5,      motp 1
//   r=.75 thr .6: tp3 fn1 idsw1  -> mota .5,  smota 1-(2-1)/3 = 2/3,     motp 5/6
//   r=1.0 unreached              -> 0
TEST(Evaluate, HandEnumeratedTwoFrameOracle) {
    const std::vector<std::vector<GtObject>> gt{{obj(1, 0), obj(2, 10)}, {obj(1, 0), obj(2, 10)}};
    const TrackerOutput out{
        FrameOutput{0, {trk(1, 0, 0.9), trk(2, 10 + 4.0 / 3.0, 0.6)}, {}},
        FrameOutput{1, {trk(4, 0, 0.9), trk(3, 50, 0.3)}, {}},
    };
    const MetricsReport r = evaluate(gt, out, 0.25, 4);
    EXPECT_NEAR(r.samota, (1.0 + 0.5 + 2.0 / 3.0) / 4.0, 1e-12);
    EXPECT_NEAR(r.amota, (0.25 + 0.25 + 0.5) / 4.0, 1e-12);
    EXPECT_NEAR(r.amotp, (1.0 + 1.0 + 5.0 / 6.0) / 4.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.mt, 0.5);
    EXPECT_EQ(r.tp, 3);
    EXPECT_EQ(r.fp, 1);
    EXPECT_EQ(r.fn, 1);
    EXPECT_EQ(r.idsw, 1);
    ASSERT_EQ(r.curve.size(), 4u);
    EXPECT_FALSE(r.curve[3].reached);
    EXPECT_DOUBLE_EQ(r.curve[2].threshold, 0.6);
}

TEST(Evaluate, InvariantToPredictionOrder) {
    const auto gt = grid_gt(8, 4);
    TrackerOutput out = perfect(gt);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> s(0.1, 1.0), jitter(-0.5, 0.5);
    for (auto& f : out) {
        for (auto& t : f.tracks) {
            t.box.score = s(rng);
            t.box.x += jitter(rng);
        }
        f.tracks.push_back(trk(999, 300, s(rng)));
    }
    const MetricsReport a = evaluate(gt, out);
    for (auto& f : out) std::reverse(f.tracks.begin(), f.tracks.end());
    const MetricsReport b = evaluate(gt, out);
    EXPECT_DOUBLE_EQ(a.samota, b.samota);
    EXPECT_DOUBLE_EQ(a.amota, b.amota);
    EXPECT_DOUBLE_EQ(a.amotp, b.amotp);
}

TEST(Evaluate, MetricsBounded) {
    const auto gt = grid_gt(6, 3);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> s(0.0, 1.0), pos(-5, 25);
    for (int trial = 0; trial < 20; ++trial) {
        TrackerOutput out;
        for (int f = 0; f < 6; ++f) {
            FrameOutput fo{f, {}, {}};
            for (int k = 0; k < 5; ++k) fo.tracks.push_back(trk(k, pos(rng), s(rng), pos(rng) / 5));
            out.push_back(fo);
        }
        const MetricsReport r = evaluate(gt, out);
        for (double v : {r.samota, r.amota, r.amotp, r.mt}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        EXPECT_GE(r.samota, r.amota - 1e-12);
    }
}

TEST(Evaluate, LowConfidenceFalsePositivesNeverRaiseScores) {
    const auto gt = grid_gt(10, 3);
    const TrackerOutput clean = perfect(gt);
    TrackerOutput noisy = clean;
    for (auto& f : noisy) f.tracks.push_back(trk(500, 200, 0.05));
    const MetricsReport a = evaluate(gt, clean);
    const MetricsReport b = evaluate(gt, noisy);
    EXPECT_LE(b.samota, a.samota);
    EXPECT_LE(b.amota, a.amota);
}

TEST(Reports, JsonRoundTripAndMerge) {
    const auto gt = grid_gt(4, 2);
    MetricsReport r = evaluate(gt, perfect(gt));
    r.sequence = "s0";
    r.method = "arlot";
    const MetricsReport back = report_from_json(to_json(r));
    EXPECT_EQ(to_json(back), to_json(r));

    MetricsReport other = r;
    other.samota = 0.0;
    other.num_gt = 3 * r.num_gt;
    const std::vector<MetricsReport> both{r, other};
    EXPECT_NEAR(merge_reports(both).samota, 0.25, 1e-12);
    EXPECT_EQ(merge_reports(both).method, "arlot");
    EXPECT_THROW(report_from_json(nlohmann::json{{"samota", 1}}), DataError);
}
