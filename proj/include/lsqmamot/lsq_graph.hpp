#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lsqmamot/geometry.hpp"

namespace lsqmamot {

enum class Axis { X = 0, Y = 1, Z = 2 };

double coordinate(const DetectionBox& box, Axis axis);

/// Which of the two fused agents a graph node came from.
enum class NodeSource { AgentI, AgentJ };

using IndexPair = std::pair<int, int>;

/// Fully connected detection graph for one fusion step.
///
/// Node layout is canonical: the i-side members of the overlapped pairs,
/// then the j-side members (node k and k + pair_count describe the same
/// object), then agent i's unique detections, then agent j's.
struct DetectionGraph {
    std::vector<DetectionBox> nodes;
    std::vector<NodeSource> source;
    int pair_count = 0;
    int unique_i = 0;
    int unique_j = 0;
    Eigen::MatrixXd laplacian;

    int size() const { return static_cast<int>(nodes.size()); }
    Eigen::VectorXd coordinates(Axis axis) const;
};

/// Per-axis anchor vectors for the two solves.
struct AnchorPair {
    Eigen::VectorXd c_ij;  // overlapped slots carry agent j's coordinate
    Eigen::VectorXd c_ji;  // overlapped slots carry agent i's coordinate
};

/// The two resilient detection sets, one box per physical object.
///
/// Entries [0, pair_count) are fused overlapped pairs and appear in the same
/// order in both sets; entry k of j_ij and entry k of j_ji always describe
/// the same physical object ("siblings").
struct FusedDetections {
    std::vector<DetectionBox> j_ij;
    std::vector<DetectionBox> j_ji;
    int pair_count = 0;
    /// Raw per-node solutions before deduplication, n x 3 (columns x, y, z).
    Eigen::MatrixXd raw_ij;
    Eigen::MatrixXd raw_ji;
};

/// Builds the complete graph over both agents' detections; every edge has weight 1.
/// Throws InvalidInput on out-of-range or repeated pair indices.
DetectionGraph build_graph(std::span<const DetectionBox> dets_i, std::span<const DetectionBox> dets_j,
                           std::span<const IndexPair> pairs);

/// delta = L u for the node coordinates along `axis`.
Eigen::VectorXd differential_coordinates(const DetectionGraph& graph, Axis axis);

AnchorPair build_anchor_vectors(const DetectionGraph& graph, Axis axis);

/// Minimizer of ||L u - delta||^2 + ||u - anchors||^2.
///
/// Solved through a Cholesky factorization of L^T L + I, which is symmetric
/// positive definite for every Laplacian.
Eigen::VectorXd solve_lsq(const DetectionGraph& graph, const Eigen::VectorXd& delta,
                          const Eigen::VectorXd& anchors);

/// Reusable factorization of L^T L + I for multiple right-hand sides.
class LsqSolver {
public:
    explicit LsqSolver(const Eigen::MatrixXd& laplacian);

    Eigen::VectorXd solve(const Eigen::VectorXd& delta, const Eigen::VectorXd& anchors) const;
    int size() const { return static_cast<int>(laplacian_.rows()); }

private:
    Eigen::MatrixXd laplacian_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Least-squares graph fusion of two agents' common-frame detections.
FusedDetections fuse_detections(std::span<const DetectionBox> dets_i, std::span<const DetectionBox> dets_j,
                                std::span<const IndexPair> pairs);

}  // namespace lsqmamot
