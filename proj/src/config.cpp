#include "lsqmamot/config.hpp"

#include <fstream>
#include <set>

#include "lsqmamot/error.hpp"

namespace lsqmamot {

using nlohmann::json;

namespace {

// Reads the members of one JSON object, remembering which keys were consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError("'" + display() + "' must be a JSON object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        known_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        const std::string name = qualified(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ConfigError("'" + name + "' must be a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ConfigError("'" + name + "' must be an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (it->is_number_integer() && !it->is_number_unsigned() && it->get<long long>() < 0) {
                    throw ConfigError("'" + name + "' must be non-negative");
                }
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw ConfigError("'" + name + "' must be a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw ConfigError("'" + name + "' must be a string");
        }
        out = it->get<T>();
    }

    const json* child(const char* key) {
        known_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!known_.contains(key)) throw ConfigError("unknown config key '" + qualified(key) + "'");
        }
    }

private:
    std::string display() const { return path_.empty() ? "<root>" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> known_;
};

void parse_agent(const json& j, const std::string& path, AgentConfig& a) {
    Section s(j, path);
    s.read("id", a.id);
    s.read("x", a.start.tx);
    s.read("y", a.start.ty);
    s.read("z", a.start.tz);
    s.read("heading", a.start.heading);
    a.start.heading = normalize_angle(a.start.heading);
    s.read("vx", a.vx);
    s.read("vy", a.vy);
    s.read("range", a.range);
    s.read("fov", a.fov);
    s.read("noise_std", a.noise_std);
    s.read("miss_rate", a.miss_rate);
    s.finish();
}

void parse_scenario(const json& j, ScenarioConfig& c) {
    Section s(j, "scenario");
    s.read("num_objects", c.num_objects);
    s.read("num_frames", c.num_frames);
    s.read("extent_x", c.extent_x);
    s.read("extent_y", c.extent_y);
    s.read("speed_min", c.speed_min);
    s.read("speed_max", c.speed_max);
    s.read("heading_drift_std", c.heading_drift_std);
    s.read("min_separation", c.min_separation);
    s.read("score_min", c.score_min);
    s.read("score_max", c.score_max);
    s.read("gt_visible_only", c.gt_visible_only);
    s.read("seed", c.seed);
    if (const json* agents = s.child("agents")) {
        if (!agents->is_array()) throw ConfigError("'scenario.agents' must be an array");
        c.agents.clear();
        for (std::size_t k = 0; k < agents->size(); ++k) {
            AgentConfig a;
            a.id = static_cast<int>(k);
            parse_agent((*agents)[k], "scenario.agents." + std::to_string(k), a);
            c.agents.push_back(a);
        }
    }
    s.finish();
    c.validate();
}

void parse_attack(const json& j, AttackConfig& c) {
    Section s(j, "attack");
    s.read("epsilon", c.epsilon);
    s.read("drop_rate", c.drop_rate);
    s.read("fp_rate", c.fp_rate);
    s.read("yaw_jitter", c.yaw_jitter);
    s.read("seed", c.seed);
    s.read("magnitude_min_fraction", c.magnitude_min_fraction);
    s.read("fp_x_min", c.fp_x_min);
    s.read("fp_x_max", c.fp_x_max);
    s.read("fp_y_min", c.fp_y_min);
    s.read("fp_y_max", c.fp_y_max);
    s.read("fp_score_min", c.fp_score_min);
    s.read("fp_score_max", c.fp_score_max);
    if (const json* t = s.child("targets")) {
        if (!t->is_array()) throw ConfigError("'attack.targets' must be an array of agent ids");
        c.targets.clear();
        for (const json& v : *t) {
            if (!v.is_number_integer()) throw ConfigError("'attack.targets' must contain integers");
            c.targets.insert(v.get<int>());
        }
    }
    s.finish();
    c.validate();
}

void parse_tracker(const json& j, TrackerConfig& c) {
    Section s(j, "tracker");
    std::string method(method_name(c.method));
    s.read("method", method);
    c.method = parse_method(method);
    s.read("hits", c.hits);
    s.read("age", c.age);
    s.read("iou_gate", c.iou_gate);
    s.read("overlap_gate", c.overlap_gate);
    s.read("ego_agent", c.ego_agent);
    s.read("report_warmup", c.report_warmup);
    s.read("report_retroactive", c.report_retroactive);
    if (const json* k = s.child("kalman")) {
        Section ks(*k, "tracker.kalman");
        double dt = 1.0, p0_pos = 10.0, p0_vel = 1000.0, q_vel = 0.01, r = 1.0;
        ks.read("dt", dt);
        ks.read("p0_pos", p0_pos);
        ks.read("p0_vel", p0_vel);
        ks.read("q_vel", q_vel);
        ks.read("r", r);
        ks.finish();
        if (!(dt > 0.0 && p0_pos > 0.0 && p0_vel > 0.0 && q_vel >= 0.0 && r > 0.0)) {
            throw ConfigError("'tracker.kalman' requires dt, p0_pos, p0_vel, r > 0 and q_vel >= 0");
        }
        c.kalman = KalmanConfig::constant_velocity(dt, p0_pos, p0_vel, q_vel, r);
    }
    s.finish();
    if (c.hits < 1) throw ConfigError("'tracker.hits' must be >= 1");
    if (c.age < 1) throw ConfigError("'tracker.age' must be >= 1");
    if (!(c.iou_gate >= 0.0 && c.iou_gate <= 1.0)) throw ConfigError("'tracker.iou_gate' must lie in [0, 1]");
    if (!(c.overlap_gate >= 0.0 && c.overlap_gate <= 1.0)) {
        throw ConfigError("'tracker.overlap_gate' must lie in [0, 1]");
    }
}

void parse_eval(const json& j, EvalConfig& c) {
    Section s(j, "eval");
    s.read("iou_min", c.iou_min);
    s.read("recall_points", c.recall_points);
    s.finish();
    if (!(c.iou_min >= 0.0 && c.iou_min <= 1.0)) throw ConfigError("'eval.iou_min' must lie in [0, 1]");
    if (c.recall_points < 1) throw ConfigError("'eval.recall_points' must be >= 1");
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    Section root(doc, "");
    if (const json* j = root.child("scenario")) parse_scenario(*j, cfg.scenario);
    if (const json* j = root.child("attack")) parse_attack(*j, cfg.attack);
    if (const json* j = root.child("tracker")) parse_tracker(*j, cfg.tracker);
    if (const json* j = root.child("eval")) parse_eval(*j, cfg.eval);
    if (const json* j = root.child("seeds")) {
        if (!j->is_array() || j->empty()) throw ConfigError("'seeds' must be a non-empty array of integers");
        cfg.seeds.clear();
        for (const json& v : *j) {
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
                throw ConfigError("'seeds' must contain non-negative integers");
            }
            cfg.seeds.push_back(v.get<std::uint64_t>());
        }
    }
    if (const json* j = root.child("methods")) {
        if (!j->is_array() || j->empty()) throw ConfigError("'methods' must be a non-empty array of method names");
        cfg.methods.clear();
        for (const json& v : *j) {
            if (!v.is_string()) throw ConfigError("'methods' must contain strings");
            cfg.methods.push_back(parse_method(v.get<std::string>()));
        }
    }
    root.finish();
    return cfg;
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
    if (doc.is_null()) doc = json::object();
    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + item + "' is not KEY=VALUE");
        const std::string key = item.substr(0, eq);
        const std::string raw = item.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }

        json* node = &doc;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (part.empty()) throw ConfigError("override key '" + key + "' has an empty path component");
            const bool last = dot == std::string::npos;
            if (node->is_array()) {
                std::size_t index = 0;
                try {
                    index = std::stoul(part);
                } catch (const std::exception&) {
                    throw ConfigError("override key '" + key + "': '" + part + "' is not an array index");
                }
                if (index >= node->size()) throw ConfigError("override key '" + key + "': index out of range");
                node = &(*node)[index];
            } else {
                if (node->is_null()) *node = json::object();
                if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a scalar");
                node = &(*node)[part];
            }
            if (last) {
                *node = value;
                break;
            }
            start = dot + 1;
        }
    }
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
        }
    }
    apply_overrides(doc, overrides);
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json agents = json::array();
    for (const AgentConfig& a : cfg.scenario.agents) {
        agents.push_back({{"id", a.id},
                          {"x", a.start.tx},
                          {"y", a.start.ty},
                          {"z", a.start.tz},
                          {"heading", a.start.heading},
                          {"vx", a.vx},
                          {"vy", a.vy},
                          {"range", a.range},
                          {"fov", a.fov},
                          {"noise_std", a.noise_std},
                          {"miss_rate", a.miss_rate}});
    }
    const ScenarioConfig& s = cfg.scenario;
    const AttackConfig& a = cfg.attack;
    const TrackerConfig& t = cfg.tracker;
    json methods = json::array();
    for (Method m : cfg.methods) methods.push_back(std::string(method_name(m)));
    return {
        {"scenario",
         {{"num_objects", s.num_objects},
          {"num_frames", s.num_frames},
          {"extent_x", s.extent_x},
          {"extent_y", s.extent_y},
          {"speed_min", s.speed_min},
          {"speed_max", s.speed_max},
          {"heading_drift_std", s.heading_drift_std},
          {"min_separation", s.min_separation},
          {"score_min", s.score_min},
          {"score_max", s.score_max},
          {"gt_visible_only", s.gt_visible_only},
          {"seed", s.seed},
          {"agents", agents}}},
        {"attack",
         {{"epsilon", a.epsilon},
          {"drop_rate", a.drop_rate},
          {"fp_rate", a.fp_rate},
          {"yaw_jitter", a.yaw_jitter},
          {"targets", a.targets},
          {"seed", a.seed},
          {"magnitude_min_fraction", a.magnitude_min_fraction},
          {"fp_x_min", a.fp_x_min},
          {"fp_x_max", a.fp_x_max},
          {"fp_y_min", a.fp_y_min},
          {"fp_y_max", a.fp_y_max},
          {"fp_score_min", a.fp_score_min},
          {"fp_score_max", a.fp_score_max}}},
        {"tracker",
         {{"method", std::string(method_name(t.method))},
          {"hits", t.hits},
          {"age", t.age},
          {"iou_gate", t.iou_gate},
          {"overlap_gate", t.overlap_gate},
          {"ego_agent", t.ego_agent},
          {"report_warmup", t.report_warmup},
          {"report_retroactive", t.report_retroactive}}},
        {"eval", {{"iou_min", cfg.eval.iou_min}, {"recall_points", cfg.eval.recall_points}}},
        {"seeds", cfg.seeds},
        {"methods", methods},
    };
}

}  // namespace lsqmamot
