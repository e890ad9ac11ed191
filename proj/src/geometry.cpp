#include "lsqmamot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lsqmamot/error.hpp"

namespace lsqmamot {

namespace {

constexpr double kPi = std::numbers::pi;

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double polygon_area(const std::vector<Point2>& poly) {
    if (poly.size() < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2& p = poly[i];
        const Point2& q = poly[(i + 1) % poly.size()];
        acc += p.x * q.y - q.x * p.y;
    }
    return 0.5 * std::abs(acc);
}

Point2 segment_line_intersection(const Point2& p, const Point2& q, const Point2& a, const Point2& b) {
    // Intersection of segment pq with the infinite line through ab.
    const double dp = cross(a, b, p);
    const double dq = cross(a, b, q);
    const double t = dp / (dp - dq);
    return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

}  // namespace

double normalize_angle(double angle) {
    double a = std::fmod(angle, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

void validate(const DetectionBox& box) {
    for (double v : {box.x, box.y, box.z, box.yaw, box.h, box.w, box.l, box.score}) {
        if (!std::isfinite(v)) throw InvalidInput("detection box has a non-finite field");
    }
    if (box.h <= 0.0 || box.w <= 0.0 || box.l <= 0.0) {
        throw InvalidInput("detection box dimensions must be strictly positive");
    }
}

std::array<Point2, 4> bev_corners(const DetectionBox& box) {
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    const double hl = 0.5 * box.l;
    const double hw = 0.5 * box.w;
    const std::array<Point2, 4> local = {{{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}}};
    std::array<Point2, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = {box.x + c * local[i].x - s * local[i].y, box.y + s * local[i].x + c * local[i].y};
    }
    return out;
}

// Sutherland-Hodgman: clip `a` successively against each edge of `b`.
double convex_intersection_area(const std::array<Point2, 4>& a, const std::array<Point2, 4>& b) {
    std::vector<Point2> poly(a.begin(), a.end());
    for (std::size_t e = 0; e < b.size() && !poly.empty(); ++e) {
        const Point2& ea = b[e];
        const Point2& eb = b[(e + 1) % b.size()];
        std::vector<Point2> clipped;
        clipped.reserve(poly.size() + 1);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Point2& cur = poly[i];
            const Point2& nxt = poly[(i + 1) % poly.size()];
            const bool cur_in = cross(ea, eb, cur) >= 0.0;
            const bool nxt_in = cross(ea, eb, nxt) >= 0.0;
            if (cur_in) {
                clipped.push_back(cur);
                if (!nxt_in) clipped.push_back(segment_line_intersection(cur, nxt, ea, eb));
            } else if (nxt_in) {
                clipped.push_back(segment_line_intersection(cur, nxt, ea, eb));
            }
        }
        poly = std::move(clipped);
    }
    return polygon_area(poly);
}

double iou3d(const DetectionBox& a, const DetectionBox& b) {
    const double z_lo = std::max(a.z - 0.5 * a.h, b.z - 0.5 * b.h);
    const double z_hi = std::min(a.z + 0.5 * a.h, b.z + 0.5 * b.h);
    const double z_overlap = z_hi - z_lo;
    if (z_overlap <= 0.0) return 0.0;

    // Cheap reject on circumscribed circles.
    const double ra = 0.5 * std::hypot(a.l, a.w);
    const double rb = 0.5 * std::hypot(b.l, b.w);
    if (std::hypot(a.x - b.x, a.y - b.y) >= ra + rb) return 0.0;

    const double area = convex_intersection_area(bev_corners(a), bev_corners(b));
    if (area <= 0.0) return 0.0;

    const double inter = area * z_overlap;
    const double vol_a = a.l * a.w * a.h;
    const double vol_b = b.l * b.w * b.h;
    const double uni = vol_a + vol_b - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

DetectionBox to_common_frame(const DetectionBox& box, const Pose2p5D& pose) {
    const double c = std::cos(pose.heading);
    const double s = std::sin(pose.heading);
    DetectionBox out = box;
    out.x = c * box.x - s * box.y + pose.tx;
    out.y = s * box.x + c * box.y + pose.ty;
    out.z = box.z + pose.tz;
    out.yaw = normalize_angle(box.yaw + pose.heading);
    return out;
}

DetectionBox to_agent_frame(const DetectionBox& box, const Pose2p5D& pose) {
    const double c = std::cos(pose.heading);
    const double s = std::sin(pose.heading);
    const double dx = box.x - pose.tx;
    const double dy = box.y - pose.ty;
    DetectionBox out = box;
    out.x = c * dx + s * dy;
    out.y = -s * dx + c * dy;
    out.z = box.z - pose.tz;
    out.yaw = normalize_angle(box.yaw - pose.heading);
    return out;
}

}  // namespace lsqmamot
