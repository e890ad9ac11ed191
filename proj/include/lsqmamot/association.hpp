#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lsqmamot/geometry.hpp"

namespace lsqmamot {

/// Result of a (possibly gated) assignment between rows and columns.
struct Assignment {
    std::vector<std::pair<int, int>> matches;  // (row, col), sorted by row
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
};

inline constexpr double kDefaultIouGate = 0.25;

/// Minimum-cost assignment (Kuhn-Munkres with potentials, O(n^2 m)).
///
/// Rectangular inputs assign min(rows, cols) pairs. Costs must be finite.
Assignment hungarian(const Eigen::MatrixXd& cost);

/// Total cost of the matches in `a` under `cost`.
double assignment_cost(const Eigen::MatrixXd& cost, const Assignment& a);

/// Pairwise 3D IoU, rows from `a`, columns from `b`.
Eigen::MatrixXd iou_matrix(std::span<const DetectionBox> a, std::span<const DetectionBox> b);

/// Hungarian on -IoU, then any match below `iou_min` is demoted to unmatched.
Assignment associate_by_iou(std::span<const DetectionBox> a, std::span<const DetectionBox> b,
                            double iou_min = kDefaultIouGate);

/// Gated cross-agent matching that defines the overlapped partition for fusion.
std::vector<std::pair<int, int>> cross_agent_overlap(std::span<const DetectionBox> dets_i,
                                                     std::span<const DetectionBox> dets_j,
                                                     double iou_min = kDefaultIouGate);

}  // namespace lsqmamot
