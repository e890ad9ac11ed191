#pragma once

#include <array>

namespace lsqmamot {

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// One 7-DoF oriented 3D detection owned by an agent.
///
/// (x, y, z) is the box centroid, yaw the rotation about +z, and
/// (h, w, l) the extents along z, the box's lateral axis and its heading
/// axis respectively.
struct DetectionBox {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double yaw = 0.0;
    double h = 1.0;
    double w = 1.0;
    double l = 1.0;
    double score = 1.0;
    int agent_id = 0;
    int det_id = 0;

    bool operator==(const DetectionBox&) const = default;
};

/// Agent-to-world transform: translation plus a rotation about z.
struct Pose2p5D {
    double tx = 0.0;
    double ty = 0.0;
    double tz = 0.0;
    double heading = 0.0;

    bool operator==(const Pose2p5D&) const = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Throws InvalidInput when dims are not strictly positive or values are not finite.
void validate(const DetectionBox& box);

/// Counter-clockwise BEV corners of the yaw-rotated l x w rectangle,
/// starting at the front-left corner (+l/2, +w/2) in the box frame.
std::array<Point2, 4> bev_corners(const DetectionBox& box);

/// Area of the intersection of two convex counter-clockwise polygons.
double convex_intersection_area(const std::array<Point2, 4>& a, const std::array<Point2, 4>& b);

/// 3D IoU: BEV polygon overlap times z-extent overlap, over the union volume.
double iou3d(const DetectionBox& a, const DetectionBox& b);

DetectionBox to_common_frame(const DetectionBox& box, const Pose2p5D& pose);

/// Inverse of to_common_frame.
DetectionBox to_agent_frame(const DetectionBox& box, const Pose2p5D& pose);

}  // namespace lsqmamot
