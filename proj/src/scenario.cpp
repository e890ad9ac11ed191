#include "lsqmamot/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lsqmamot/error.hpp"

namespace lsqmamot {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<FrameInput> Scenario::frame_inputs() const {
    std::vector<FrameInput> out;
    out.reserve(frames.size());
    for (const ScenarioFrame& f : frames) out.push_back({f.frame_index, f.detections, f.poses});
    return out;
}

void project_detections(Scenario& scenario) {
    for (ScenarioFrame& f : scenario.frames) {
        f.detections.clear();
        for (const auto& [agent, dets] : f.local_detections) {
            const auto pose = f.poses.find(agent);
            if (pose == f.poses.end()) {
                throw ReferentialError("frame " + std::to_string(f.frame_index) + ": no pose for agent " +
                                       std::to_string(agent));
            }
            auto& common = f.detections[agent];
            common.reserve(dets.size());
            for (const DetectionBox& d : dets) common.push_back(to_common_frame(d, pose->second));
        }
    }
}

std::vector<AgentConfig> ScenarioConfig::default_agents() {
    AgentConfig ego;
    ego.id = 0;
    ego.start = {-20.0, 0.0, 0.0, 0.0};
    ego.range = 40.0;
    AgentConfig other;
    other.id = 1;
    other.start = {20.0, 0.0, 0.0, std::numbers::pi};
    other.range = 40.0;
    return {ego, other};
}

void ScenarioConfig::validate() const {
    if (num_objects <= 0) throw ConfigError("scenario.num_objects must be positive");
    if (num_frames <= 0) throw ConfigError("scenario.num_frames must be positive");
    if (!(extent_x > 0.0 && extent_y > 0.0)) throw ConfigError("scenario.extent_x/extent_y must be positive");
    if (!(speed_min >= 0.0 && speed_min <= speed_max)) throw ConfigError("scenario.speed_min/speed_max invalid");
    if (!(heading_drift_std >= 0.0)) throw ConfigError("scenario.heading_drift_std must be >= 0");
    if (!(min_separation >= 0.0)) throw ConfigError("scenario.min_separation must be >= 0");
    if (!(score_min >= 0.0 && score_min <= score_max && score_max <= 1.0)) {
        throw ConfigError("scenario.score_min/score_max must satisfy 0 <= min <= max <= 1");
    }
    if (agents.empty()) throw ConfigError("scenario.agents must not be empty");
    std::set<int> ids;
    for (const AgentConfig& a : agents) {
        if (!ids.insert(a.id).second) throw ConfigError("scenario.agents: duplicate id " + std::to_string(a.id));
        if (!(a.noise_std >= 0.0)) throw ConfigError("scenario.agents.noise_std must be >= 0");
        if (!(a.miss_rate >= 0.0 && a.miss_rate <= 1.0)) throw ConfigError("scenario.agents.miss_rate must lie in [0, 1]");
        if (!(a.range > 0.0)) throw ConfigError("scenario.agents.range must be positive");
        if (!(a.fov > 0.0)) throw ConfigError("scenario.agents.fov must be positive");
    }
}

namespace {

struct ObjectTrajectory {
    std::vector<DetectionBox> boxes;  // one per frame, world frame
};

Pose2p5D agent_pose(const AgentConfig& a, int frame) {
    Pose2p5D p = a.start;
    p.tx += a.vx * frame;
    p.ty += a.vy * frame;
    return p;
}

bool visible(const AgentConfig& a, const Pose2p5D& pose, const DetectionBox& box) {
    const double dx = box.x - pose.tx;
    const double dy = box.y - pose.ty;
    if (std::hypot(dx, dy) > a.range) return false;
    if (a.fov >= 2.0 * std::numbers::pi) return true;
    const double bearing = normalize_angle(std::atan2(dy, dx) - pose.heading);
    return std::abs(bearing) <= 0.5 * a.fov;
}

}  // namespace

Scenario generate(const ScenarioConfig& cfg) {
    cfg.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32), 0x7363656eu};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double two_pi = 2.0 * std::numbers::pi;

    std::vector<ObjectTrajectory> objects;
    constexpr int kMaxAttempts = 2000;
    for (int o = 0; o < cfg.num_objects; ++o) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            DetectionBox box;
            box.x = cfg.extent_x * (2.0 * unit(rng) - 1.0);
            box.y = cfg.extent_y * (2.0 * unit(rng) - 1.0);
            box.l = 3.8 + 1.2 * unit(rng);
            box.w = 1.7 + 0.4 * unit(rng);
            box.h = 1.4 + 0.4 * unit(rng);
            box.z = 0.5 * box.h;
            double heading = normalize_angle(two_pi * unit(rng));
            const double speed = cfg.speed_min + (cfg.speed_max - cfg.speed_min) * unit(rng);

            ObjectTrajectory traj;
            traj.boxes.reserve(cfg.num_frames);
            for (int t = 0; t < cfg.num_frames; ++t) {
                if (t > 0) {
                    heading = normalize_angle(heading + cfg.heading_drift_std * gauss(rng));
                    box.x += speed * std::cos(heading);
                    box.y += speed * std::sin(heading);
                }
                box.yaw = heading;
                traj.boxes.push_back(box);
            }
            placed = std::all_of(objects.begin(), objects.end(), [&](const ObjectTrajectory& other) {
                for (int t = 0; t < cfg.num_frames; ++t) {
                    const DetectionBox& a = traj.boxes[t];
                    const DetectionBox& b = other.boxes[t];
                    if (std::hypot(a.x - b.x, a.y - b.y) < cfg.min_separation) return false;
                }
                return true;
            });
            if (placed) objects.push_back(std::move(traj));
        }
        if (!placed) {
            throw ConfigError("scenario: could not place " + std::to_string(cfg.num_objects) +
                              " objects with min_separation " + std::to_string(cfg.min_separation));
        }
    }

    Scenario scenario;
    scenario.frames.resize(cfg.num_frames);
    for (int t = 0; t < cfg.num_frames; ++t) {
        ScenarioFrame& frame = scenario.frames[t];
        frame.frame_index = t;
        for (const AgentConfig& a : cfg.agents) frame.poses[a.id] = agent_pose(a, t);

        for (std::size_t o = 0; o < objects.size(); ++o) {
            const DetectionBox& box = objects[o].boxes[t];
            const bool seen = std::any_of(cfg.agents.begin(), cfg.agents.end(), [&](const AgentConfig& a) {
                return visible(a, frame.poses[a.id], box);
            });
            if (seen || !cfg.gt_visible_only) {
                DetectionBox gt_box = box;
                gt_box.agent_id = -1;
                gt_box.det_id = static_cast<int>(o);
                frame.gt.push_back({static_cast<int>(o), gt_box});
            }
        }

        for (const AgentConfig& a : cfg.agents) {
            const Pose2p5D& pose = frame.poses[a.id];
            auto& dets = frame.local_detections[a.id];
            int det_id = 0;
            for (const ObjectTrajectory& obj : objects) {
                const DetectionBox& truth = obj.boxes[t];
                // fixed draw count per opportunity keeps streams aligned across configs
                const double miss_draw = unit(rng);
                const double nx = gauss(rng), ny = gauss(rng), nz = gauss(rng);
                const double score_draw = unit(rng);
                if (!visible(a, pose, truth)) continue;
                if (miss_draw < a.miss_rate) continue;
                DetectionBox world = truth;
                world.x += a.noise_std * nx;
                world.y += a.noise_std * ny;
                world.z += a.noise_std * nz;
                world.score = cfg.score_min + (cfg.score_max - cfg.score_min) * score_draw;
                world.agent_id = a.id;
                world.det_id = det_id++;
                dets.push_back(to_agent_frame(world, pose));
            }
        }
    }
    project_detections(scenario);
    return scenario;
}

// ---------------------------------------------------------------------------
// JSONL I/O

namespace {

void write_line(std::ofstream& out, const json& j) { out << j.dump() << '\n'; }

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

json header(const char* schema) { return json{{"schema", schema}, {"version", 1}}; }

json box_fields(const DetectionBox& b) {
    return json{{"x", b.x}, {"y", b.y}, {"z", b.z}, {"yaw", b.yaw}, {"h", b.h}, {"w", b.w}, {"l", b.l}};
}

template <typename T>
T field(const json& j, const char* key, const fs::path& path, std::size_t line) {
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(path.string(), line, std::string("missing field '") + key + "'");
    try {
        if constexpr (std::is_same_v<T, int>) {
            if (!it->is_number_integer()) throw ParseError(path.string(), line, std::string("field '") + key + "' must be an integer");
        } else if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number()) throw ParseError(path.string(), line, std::string("field '") + key + "' must be a number");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ParseError(path.string(), line, std::string("field '") + key + "' must be a boolean");
        }
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ParseError(path.string(), line, std::string("field '") + key + "': " + e.what());
    }
}

DetectionBox read_box(const json& j, const fs::path& path, std::size_t line) {
    DetectionBox b;
    b.x = field<double>(j, "x", path, line);
    b.y = field<double>(j, "y", path, line);
    b.z = field<double>(j, "z", path, line);
    b.yaw = field<double>(j, "yaw", path, line);
    b.h = field<double>(j, "h", path, line);
    b.w = field<double>(j, "w", path, line);
    b.l = field<double>(j, "l", path, line);
    if (!(b.h > 0.0 && b.w > 0.0 && b.l > 0.0)) throw ParseError(path.string(), line, "box dimensions must be positive");
    return b;
}

// Calls fn(record, line) for every non-header record of a JSONL file.
template <typename Fn>
void for_each_record(const fs::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(path.string(), line, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) throw ParseError(path.string(), line, "record must be a JSON object");
        if (j.contains("schema")) continue;
        fn(j, line);
    }
}

int frame_of(const json& j, const fs::path& path, std::size_t line) {
    const int f = field<int>(j, "frame", path, line);
    if (f < 0) throw ParseError(path.string(), line, "frame index must be >= 0");
    return f;
}

}  // namespace

void save_sequence(const Scenario& scenario, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory '" + dir.string() + "': " + ec.message());

    const fs::path gt_path = dir / "gt.jsonl";
    const fs::path pose_path = dir / "poses.jsonl";
    const fs::path det_path = dir / "detections.jsonl";
    std::ofstream gt = open_out(gt_path);
    std::ofstream poses = open_out(pose_path);
    std::ofstream dets = open_out(det_path);
    write_line(gt, header("gt"));
    write_line(poses, header("poses"));
    write_line(dets, header("detections"));

    for (const ScenarioFrame& f : scenario.frames) {
        for (const GtObject& o : f.gt) {
            json j = {{"frame", f.frame_index}, {"obj", o.object_id}};
            j.update(box_fields(o.box));
            write_line(gt, j);
        }
        for (const auto& [agent, p] : f.poses) {
            write_line(poses, json{{"frame", f.frame_index}, {"agent", agent}, {"tx", p.tx}, {"ty", p.ty},
                                   {"tz", p.tz}, {"heading", p.heading}});
        }
        for (const auto& [agent, list] : f.local_detections) {
            for (const DetectionBox& d : list) {
                json j = {{"frame", f.frame_index}, {"agent", agent}, {"det_id", d.det_id}};
                j.update(box_fields(d));
                j["score"] = d.score;
                write_line(dets, j);
            }
        }
    }
    close_out(gt, gt_path);
    close_out(poses, pose_path);
    close_out(dets, det_path);
}

Scenario load_sequence(const fs::path& dir) {
    const fs::path gt_path = dir / "gt.jsonl";
    const fs::path pose_path = dir / "poses.jsonl";
    const fs::path det_path = dir / "detections.jsonl";

    std::map<int, ScenarioFrame> frames;
    auto frame_at = [&](int index) -> ScenarioFrame& {
        ScenarioFrame& f = frames[index];
        f.frame_index = index;
        return f;
    };

    for_each_record(gt_path, [&](const json& j, std::size_t line) {
        GtObject o;
        const int frame = frame_of(j, gt_path, line);
        o.object_id = field<int>(j, "obj", gt_path, line);
        o.box = read_box(j, gt_path, line);
        o.box.agent_id = -1;
        o.box.det_id = o.object_id;
        frame_at(frame).gt.push_back(o);
    });
    for_each_record(pose_path, [&](const json& j, std::size_t line) {
        const int frame = frame_of(j, pose_path, line);
        const int agent = field<int>(j, "agent", pose_path, line);
        Pose2p5D p;
        p.tx = field<double>(j, "tx", pose_path, line);
        p.ty = field<double>(j, "ty", pose_path, line);
        p.tz = field<double>(j, "tz", pose_path, line);
        p.heading = field<double>(j, "heading", pose_path, line);
        if (!frame_at(frame).poses.emplace(agent, p).second) {
            throw ParseError(pose_path.string(), line, "duplicate pose for agent " + std::to_string(agent));
        }
    });
    for_each_record(det_path, [&](const json& j, std::size_t line) {
        const int frame = frame_of(j, det_path, line);
        DetectionBox d = read_box(j, det_path, line);
        d.agent_id = field<int>(j, "agent", det_path, line);
        d.det_id = field<int>(j, "det_id", det_path, line);
        d.score = field<double>(j, "score", det_path, line);
        frame_at(frame).local_detections[d.agent_id].push_back(d);
    });

    Scenario scenario;
    int expected = 0;
    for (auto& [index, frame] : frames) {
        if (index != expected) {
            throw DataError("'" + dir.string() + "': frame indices must be contiguous from 0 (missing frame " +
                            std::to_string(expected) + ")");
        }
        for (const auto& [agent, dets] : frame.local_detections) {
            if (!frame.poses.contains(agent)) {
                throw ReferentialError("'" + det_path.string() + "': frame " + std::to_string(index) +
                                       " references agent " + std::to_string(agent) + " with no pose record");
            }
        }
        scenario.frames.push_back(std::move(frame));
        ++expected;
    }
    project_detections(scenario);
    return scenario;
}

void save_tracks(const TrackerOutput& output, const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw DataError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out = open_out(path);
    json h = header("tracks");
    h["frames"] = output.size();
    write_line(out, h);
    for (std::size_t k = 0; k < output.size(); ++k) {
        const FrameOutput& f = output[k];
        if (f.frame_index != static_cast<int>(k)) {
            throw InvalidInput("save_tracks: frame indices must be contiguous from 0");
        }
        for (const ReportedTrack& r : f.tracks) {
            json j = {{"frame", f.frame_index}, {"track", r.track_id}};
            j.update(box_fields(r.box));
            j["score"] = r.box.score;
            j["confirmed"] = r.confirmed;
            write_line(out, j);
        }
    }
    close_out(out, path);
}

TrackerOutput load_tracks(const fs::path& path) {
    TrackerOutput out;
    std::size_t declared = 0;
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot open '" + path.string() + "'");
        std::string first;
        if (std::getline(in, first)) {
            try {
                const json h = json::parse(first);
                if (h.is_object() && h.contains("schema") && h.contains("frames")) {
                    declared = h.at("frames").get<std::size_t>();
                }
            } catch (const json::exception&) {
                // no header; records are validated below
            }
        }
    }
    auto frame_at = [&](int index) -> FrameOutput& {
        while (out.size() <= static_cast<std::size_t>(index)) {
            out.push_back(FrameOutput{static_cast<int>(out.size()), {}, {}});
        }
        return out[index];
    };
    if (declared > 0) frame_at(static_cast<int>(declared) - 1);

    for_each_record(path, [&](const json& j, std::size_t line) {
        const int frame = frame_of(j, path, line);
        ReportedTrack r;
        r.track_id = field<int>(j, "track", path, line);
        r.box = read_box(j, path, line);
        r.box.score = j.contains("score") ? field<double>(j, "score", path, line) : 1.0;
        r.box.agent_id = -1;
        r.box.det_id = r.track_id;
        r.confirmed = field<bool>(j, "confirmed", path, line);
        frame_at(frame).tracks.push_back(r);
    });
    return out;
}

std::vector<std::vector<GtObject>> ground_truth(const Scenario& scenario) {
    std::vector<std::vector<GtObject>> out;
    out.reserve(scenario.frames.size());
    for (const ScenarioFrame& f : scenario.frames) out.push_back(f.gt);
    return out;
}

std::vector<std::vector<GtObject>> load_ground_truth(const fs::path& path) {
    std::map<int, std::vector<GtObject>> frames;
    for_each_record(path, [&](const json& j, std::size_t line) {
        GtObject o;
        const int frame = frame_of(j, path, line);
        o.object_id = field<int>(j, "obj", path, line);
        o.box = read_box(j, path, line);
        o.box.agent_id = -1;
        o.box.det_id = o.object_id;
        frames[frame].push_back(o);
    });
    std::vector<std::vector<GtObject>> out;
    if (!frames.empty()) out.resize(frames.rbegin()->first + 1);
    for (auto& [k, v] : frames) out[k] = std::move(v);
    return out;
}

}  // namespace lsqmamot
