#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lsqmamot/geometry.hpp"

namespace lsqmamot {

inline constexpr int kStateDim = 10;
inline constexpr int kMeasDim = 7;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVector = Eigen::Matrix<double, kMeasDim, 1>;
using MeasMatrix = Eigen::Matrix<double, kMeasDim, kMeasDim>;
using MeasModel = Eigen::Matrix<double, kMeasDim, kStateDim>;

/// Linear constant-velocity model over [x y z yaw h w l vx vy vz].
struct KalmanConfig {
    StateMatrix F;
    MeasModel H;
    StateMatrix Q;
    MeasMatrix R;
    StateMatrix P0;

    /// P0 = 10 I (velocity block 1000 I), Q = 0.01 I on velocity only, R = I.
    static KalmanConfig constant_velocity(double dt = 1.0, double p0_pos = 10.0, double p0_vel = 1000.0,
                                          double q_vel = 0.01, double r = 1.0);
};

enum class TrackStatus { Tentative, Confirmed, Dead };

struct Track {
    StateVector state = StateVector::Zero();
    StateMatrix covariance = StateMatrix::Identity();
    int track_id = 0;
    int hit_streak = 0;
    int miss_streak = 0;
    TrackStatus status = TrackStatus::Tentative;
    // running sum/count of contributing detection scores
    double score_sum = 0.0;
    int score_count = 0;

    double score() const { return score_count > 0 ? score_sum / score_count : 0.0; }
    DetectionBox box() const;
};

MeasVector measurement_of(const DetectionBox& det);

Track init_track(const DetectionBox& det, const KalmanConfig& cfg, int track_id);

Track predict(const Track& track, const KalmanConfig& cfg);

/// Kalman update with orientation correction: the measured yaw is flipped by
/// pi when that brings the innovation into (-pi/2, pi/2].
Track update(const Track& track, const MeasVector& z, const KalmanConfig& cfg);

/// Update from a detection and fold its score into the running track score.
Track update(const Track& track, const DetectionBox& det, const KalmanConfig& cfg);

/// Advances hit/miss streaks. Matched tracks confirm once hit_streak >= hits;
/// unmatched tracks die once miss_streak >= age and are removed.
std::vector<Track> step_lifecycle(std::vector<Track> tracks, std::span<const int> matched_ids, int hits, int age);

/// Max of |P - P^T| and of the negated smallest eigenvalue (0 when PSD).
double symmetry_defect(const StateMatrix& p);
double min_eigenvalue(const StateMatrix& p);

}  // namespace lsqmamot
