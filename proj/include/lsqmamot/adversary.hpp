#pragma once

#include <random>
#include <set>

#include <Eigen/Dense>

#include "lsqmamot/pipelines.hpp"

namespace lsqmamot {

/// Detection-level surrogate of a bounded point-cloud perturbation attack.
struct AttackConfig {
    double epsilon = 0.20;  // max centroid displacement (m)
    double drop_rate = 0.3;
    double fp_rate = 2.0;  // expected false positives per frame per targeted agent
    double yaw_jitter = 0.05;  // std (rad)
    std::set<int> targets = {0, 1};
    std::uint64_t seed = 0;
    // displacement magnitude is uniform in [magnitude_min_fraction * epsilon, epsilon]
    double magnitude_min_fraction = 0.5;
    // false positives are drawn in the detection lists' own frame
    double fp_x_min = -40.0, fp_x_max = 40.0;
    double fp_y_min = -40.0, fp_y_max = 40.0;
    double fp_score_min = 0.2, fp_score_max = 0.6;

    /// Throws ConfigError on negative epsilon, rates outside [0,1] and empty ranges.
    void validate() const;

    /// Surrogate knobs for the two documented attack strengths (0.20 m and 0.25 m).
    static AttackConfig preset(double epsilon);
};

/// d if ||d|| <= epsilon, else d scaled onto the epsilon ball.
Eigen::Vector3d clip_displacement(const Eigen::Vector3d& d, double epsilon);

/// Displaces, jitters, drops and injects detections of every targeted agent.
/// Untargeted agents pass through untouched. Surviving detections keep their
/// det_id; injected ones get fresh ids above the agent's largest input id.
FrameInput perturb_frame(const FrameInput& frame, const AttackConfig& cfg, std::mt19937_64& rng);

/// perturb_frame with an RNG derived from (cfg.seed, frame index, agent id),
/// so the result depends only on its arguments.
FrameInput perturb_frame(const FrameInput& frame, const AttackConfig& cfg);

}  // namespace lsqmamot
