#include "lsqmamot/tracking.hpp"

#include <algorithm>
#include <cassert>
#include <numbers>

#include "lsqmamot/error.hpp"

namespace lsqmamot {

namespace {

constexpr int kYaw = 3;

void symmetrize(StateMatrix& p) { p = 0.5 * (p + p.transpose()).eval(); }

}  // namespace

KalmanConfig KalmanConfig::constant_velocity(double dt, double p0_pos, double p0_vel, double q_vel, double r) {
    KalmanConfig cfg;
    cfg.F.setIdentity();
    for (int k = 0; k < 3; ++k) cfg.F(k, 7 + k) = dt;
    cfg.H.setZero();
    cfg.H.leftCols<kMeasDim>().setIdentity();
    cfg.Q.setZero();
    cfg.Q.bottomRightCorner<3, 3>().diagonal().setConstant(q_vel);
    cfg.R = MeasMatrix::Identity() * r;
    cfg.P0 = StateMatrix::Identity() * p0_pos;
    cfg.P0.bottomRightCorner<3, 3>().diagonal().setConstant(p0_vel);
    return cfg;
}

DetectionBox Track::box() const {
    DetectionBox b;
    b.x = state[0];
    b.y = state[1];
    b.z = state[2];
    b.yaw = state[3];
    b.h = state[4];
    b.w = state[5];
    b.l = state[6];
    b.score = score();
    b.agent_id = -1;
    b.det_id = track_id;
    return b;
}

MeasVector measurement_of(const DetectionBox& det) {
    MeasVector z;
    z << det.x, det.y, det.z, normalize_angle(det.yaw), det.h, det.w, det.l;
    return z;
}

Track init_track(const DetectionBox& det, const KalmanConfig& cfg, int track_id) {
    Track t;
    t.state.head<kMeasDim>() = measurement_of(det);
    t.state.tail<3>().setZero();
    t.covariance = cfg.P0;
    t.track_id = track_id;
    t.score_sum = det.score;
    t.score_count = 1;
    return t;
}

Track predict(const Track& track, const KalmanConfig& cfg) {
    Track out = track;
    out.state = cfg.F * track.state;
    out.state[kYaw] = normalize_angle(out.state[kYaw]);
    out.covariance = cfg.F * track.covariance * cfg.F.transpose() + cfg.Q;
    symmetrize(out.covariance);
    return out;
}

Track update(const Track& track, const MeasVector& z, const KalmanConfig& cfg) {
    constexpr double kPi = std::numbers::pi;
    Track out = track;

    MeasVector innovation = z - cfg.H * track.state;
    double dyaw = normalize_angle(innovation[kYaw]);
    if (dyaw > 0.5 * kPi) {
        dyaw -= kPi;
    } else if (dyaw <= -0.5 * kPi) {
        dyaw += kPi;
    }
    innovation[kYaw] = dyaw;

    const MeasMatrix s = cfg.H * track.covariance * cfg.H.transpose() + cfg.R;
    const Eigen::LDLT<MeasMatrix> ldlt(s);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw InvalidInput("innovation covariance is not positive definite");
    }
    // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
    const Eigen::Matrix<double, kStateDim, kMeasDim> gain =
        ldlt.solve(cfg.H * track.covariance).transpose();

    out.state = track.state + gain * innovation;
    out.state[kYaw] = normalize_angle(out.state[kYaw]);
    out.covariance = track.covariance - gain * cfg.H * track.covariance;
    symmetrize(out.covariance);
    return out;
}

Track update(const Track& track, const DetectionBox& det, const KalmanConfig& cfg) {
    Track out = update(track, measurement_of(det), cfg);
    out.score_sum += det.score;
    out.score_count += 1;
    return out;
}

std::vector<Track> step_lifecycle(std::vector<Track> tracks, std::span<const int> matched_ids, int hits, int age) {
    std::vector<Track> alive;
    alive.reserve(tracks.size());
    for (Track& t : tracks) {
        const bool matched = std::find(matched_ids.begin(), matched_ids.end(), t.track_id) != matched_ids.end();
        if (matched) {
            t.hit_streak += 1;
            t.miss_streak = 0;
            if (t.status == TrackStatus::Tentative && t.hit_streak >= hits) t.status = TrackStatus::Confirmed;
        } else {
            t.hit_streak = 0;
            t.miss_streak += 1;
            if (t.miss_streak >= age) t.status = TrackStatus::Dead;
        }
        if (t.status != TrackStatus::Dead) alive.push_back(std::move(t));
    }
    return alive;
}

double symmetry_defect(const StateMatrix& p) { return (p - p.transpose()).cwiseAbs().maxCoeff(); }

double min_eigenvalue(const StateMatrix& p) {
    const Eigen::SelfAdjointEigenSolver<StateMatrix> es(0.5 * (p + p.transpose()));
    return es.eigenvalues().minCoeff();
}

}  // namespace lsqmamot
