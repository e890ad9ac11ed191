#include "lsqmamot/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lsqmamot/error.hpp"

namespace lsqmamot {

void AttackConfig::validate() const {
    if (!(epsilon >= 0.0)) throw ConfigError("attack.epsilon must be >= 0");
    if (!(drop_rate >= 0.0 && drop_rate <= 1.0)) throw ConfigError("attack.drop_rate must lie in [0, 1]");
    if (!(fp_rate >= 0.0)) throw ConfigError("attack.fp_rate must be >= 0");
    if (!(yaw_jitter >= 0.0)) throw ConfigError("attack.yaw_jitter must be >= 0");
    if (!(magnitude_min_fraction >= 0.0 && magnitude_min_fraction <= 1.0)) {
        throw ConfigError("attack.magnitude_min_fraction must lie in [0, 1]");
    }
    if (!(fp_x_min <= fp_x_max && fp_y_min <= fp_y_max)) throw ConfigError("attack false-positive region is empty");
    if (!(fp_score_min <= fp_score_max)) throw ConfigError("attack.fp_score_min exceeds fp_score_max");
}

AttackConfig AttackConfig::preset(double epsilon) {
    AttackConfig cfg;
    cfg.epsilon = epsilon;
    if (epsilon >= 0.25) {
        cfg.drop_rate = 0.5;
        cfg.fp_rate = 4.0;
    } else {
        cfg.drop_rate = 0.3;
        cfg.fp_rate = 2.0;
    }
    return cfg;
}

Eigen::Vector3d clip_displacement(const Eigen::Vector3d& d, double epsilon) {
    if (epsilon < 0.0) throw InvalidInput("clip_displacement: epsilon must be >= 0");
    const double norm = d.norm();
    if (norm <= epsilon) return d;
    return d * (epsilon / norm);
}

namespace {

void perturb_agent(std::vector<DetectionBox>& dets, int agent, const AttackConfig& cfg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    int max_id = -1;
    for (const DetectionBox& d : dets) max_id = std::max(max_id, d.det_id);

    std::vector<DetectionBox> out;
    out.reserve(dets.size());
    for (DetectionBox d : dets) {
        // Draws happen in a fixed order per detection regardless of outcome.
        const double drop_draw = unit(rng);
        Eigen::Vector3d dir(gauss(rng), gauss(rng), gauss(rng));
        const double mag_draw = unit(rng);
        const double yaw_draw = gauss(rng);
        if (drop_draw < cfg.drop_rate) continue;

        if (cfg.epsilon > 0.0) {
            const double n = dir.norm();
            dir = n > 0.0 ? Eigen::Vector3d(dir / n) : Eigen::Vector3d::UnitX();
            const double lo = cfg.magnitude_min_fraction * cfg.epsilon;
            const double mag = lo + (cfg.epsilon - lo) * mag_draw;
            const Eigen::Vector3d delta = clip_displacement(dir * mag, cfg.epsilon);
            d.x += delta.x();
            d.y += delta.y();
            d.z += delta.z();
        }
        if (cfg.yaw_jitter > 0.0) d.yaw = normalize_angle(d.yaw + cfg.yaw_jitter * yaw_draw);
        out.push_back(d);
    }

    if (cfg.fp_rate > 0.0) {
        std::poisson_distribution<int> count(cfg.fp_rate);
        const int n_fp = count(rng);
        for (int k = 0; k < n_fp; ++k) {
            DetectionBox fp;
            fp.x = cfg.fp_x_min + (cfg.fp_x_max - cfg.fp_x_min) * unit(rng);
            fp.y = cfg.fp_y_min + (cfg.fp_y_max - cfg.fp_y_min) * unit(rng);
            fp.l = 3.5 + 1.5 * unit(rng);
            fp.w = 1.6 + 0.5 * unit(rng);
            fp.h = 1.4 + 0.4 * unit(rng);
            fp.z = 0.5 * fp.h;
            fp.yaw = normalize_angle(2.0 * std::numbers::pi * unit(rng));
            fp.score = cfg.fp_score_min + (cfg.fp_score_max - cfg.fp_score_min) * unit(rng);
            fp.agent_id = agent;
            fp.det_id = ++max_id;
            out.push_back(fp);
        }
    }
    dets = std::move(out);
}

}  // namespace

FrameInput perturb_frame(const FrameInput& frame, const AttackConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    FrameInput out = frame;
    for (auto& [agent, dets] : out.detections) {
        if (!cfg.targets.contains(agent)) continue;
        perturb_agent(dets, agent, cfg, rng);
    }
    return out;
}

FrameInput perturb_frame(const FrameInput& frame, const AttackConfig& cfg) {
    cfg.validate();
    FrameInput out = frame;
    for (auto& [agent, dets] : out.detections) {
        if (!cfg.targets.contains(agent)) continue;
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(frame.frame_index), static_cast<std::uint32_t>(agent),
                          0x61747461u};
        std::mt19937_64 rng(seq);
        perturb_agent(dets, agent, cfg, rng);
    }
    return out;
}

}  // namespace lsqmamot
