#include "lsqmamot/lsq_graph.hpp"

#include <algorithm>
#include <string>

#include "lsqmamot/error.hpp"

namespace lsqmamot {

double coordinate(const DetectionBox& box, Axis axis) {
    switch (axis) {
        case Axis::X: return box.x;
        case Axis::Y: return box.y;
        case Axis::Z: return box.z;
    }
    return 0.0;
}

namespace {

void set_coordinate(DetectionBox& box, Axis axis, double value) {
    switch (axis) {
        case Axis::X: box.x = value; break;
        case Axis::Y: box.y = value; break;
        case Axis::Z: box.z = value; break;
    }
}

constexpr Axis kAxes[] = {Axis::X, Axis::Y, Axis::Z};

}  // namespace

Eigen::VectorXd DetectionGraph::coordinates(Axis axis) const {
    Eigen::VectorXd u(size());
    for (int k = 0; k < size(); ++k) u[k] = coordinate(nodes[k], axis);
    return u;
}

DetectionGraph build_graph(std::span<const DetectionBox> dets_i, std::span<const DetectionBox> dets_j,
                           std::span<const IndexPair> pairs) {
    const int ni = static_cast<int>(dets_i.size());
    const int nj = static_cast<int>(dets_j.size());
    std::vector<bool> used_i(ni, false);
    std::vector<bool> used_j(nj, false);
    for (const auto& [a, b] : pairs) {
        if (a < 0 || a >= ni || b < 0 || b >= nj) {
            throw InvalidInput("pair index out of range: (" + std::to_string(a) + ", " + std::to_string(b) + ")");
        }
        if (used_i[a] || used_j[b]) {
            throw InvalidInput("duplicate index in overlap pairs: (" + std::to_string(a) + ", " +
                               std::to_string(b) + ")");
        }
        used_i[a] = true;
        used_j[b] = true;
    }

    DetectionGraph g;
    g.pair_count = static_cast<int>(pairs.size());
    const std::size_t total = dets_i.size() + dets_j.size();
    g.nodes.reserve(total);
    g.source.reserve(total);
    for (const auto& p : pairs) {
        g.nodes.push_back(dets_i[p.first]);
        g.source.push_back(NodeSource::AgentI);
    }
    for (const auto& p : pairs) {
        g.nodes.push_back(dets_j[p.second]);
        g.source.push_back(NodeSource::AgentJ);
    }
    for (int k = 0; k < ni; ++k) {
        if (used_i[k]) continue;
        g.nodes.push_back(dets_i[k]);
        g.source.push_back(NodeSource::AgentI);
        ++g.unique_i;
    }
    for (int k = 0; k < nj; ++k) {
        if (used_j[k]) continue;
        g.nodes.push_back(dets_j[k]);
        g.source.push_back(NodeSource::AgentJ);
        ++g.unique_j;
    }

    const int n = g.size();
    g.laplacian = Eigen::MatrixXd::Constant(n, n, -1.0);
    g.laplacian.diagonal().setConstant(static_cast<double>(n - 1));
    return g;
}

Eigen::VectorXd differential_coordinates(const DetectionGraph& graph, Axis axis) {
    return graph.laplacian * graph.coordinates(axis);
}

AnchorPair build_anchor_vectors(const DetectionGraph& graph, Axis axis) {
    AnchorPair a;
    a.c_ij = graph.coordinates(axis);
    a.c_ji = a.c_ij;
    const int m = graph.pair_count;
    for (int k = 0; k < m; ++k) {
        const double xi = coordinate(graph.nodes[k], axis);
        const double xj = coordinate(graph.nodes[k + m], axis);
        a.c_ij[k] = xj;
        a.c_ij[k + m] = xj;
        a.c_ji[k] = xi;
        a.c_ji[k + m] = xi;
    }
    return a;
}

LsqSolver::LsqSolver(const Eigen::MatrixXd& laplacian) : laplacian_(laplacian) {
    if (laplacian.rows() != laplacian.cols()) throw InvalidInput("laplacian must be square");
    Eigen::MatrixXd normal = laplacian.transpose() * laplacian;
    normal.diagonal().array() += 1.0;
    llt_.compute(normal);
}

Eigen::VectorXd LsqSolver::solve(const Eigen::VectorXd& delta, const Eigen::VectorXd& anchors) const {
    if (delta.size() != laplacian_.rows() || anchors.size() != laplacian_.rows()) {
        throw InvalidInput("solve_lsq: expected vectors of length " + std::to_string(laplacian_.rows()) +
                           ", got " + std::to_string(delta.size()) + " and " + std::to_string(anchors.size()));
    }
    if (laplacian_.rows() == 0) return Eigen::VectorXd();
    const Eigen::VectorXd rhs = laplacian_.transpose() * delta + anchors;
    return llt_.solve(rhs);
}

Eigen::VectorXd solve_lsq(const DetectionGraph& graph, const Eigen::VectorXd& delta, const Eigen::VectorXd& anchors) {
    return LsqSolver(graph.laplacian).solve(delta, anchors);
}

FusedDetections fuse_detections(std::span<const DetectionBox> dets_i, std::span<const DetectionBox> dets_j,
                                std::span<const IndexPair> pairs) {
    const DetectionGraph graph = build_graph(dets_i, dets_j, pairs);
    const int n = graph.size();
    const int m = graph.pair_count;

    FusedDetections out;
    out.pair_count = m;
    out.raw_ij.resize(n, 3);
    out.raw_ji.resize(n, 3);
    if (n == 0) return out;

    const LsqSolver solver(graph.laplacian);
    for (Axis axis : kAxes) {
        const int col = static_cast<int>(axis);
        const Eigen::VectorXd delta = differential_coordinates(graph, axis);
        const AnchorPair anchors = build_anchor_vectors(graph, axis);
        out.raw_ij.col(col) = solver.solve(delta, anchors.c_ij);
        out.raw_ji.col(col) = solver.solve(delta, anchors.c_ji);
    }

    const auto emit = [&](const Eigen::MatrixXd& raw, bool anchor_is_j) {
        std::vector<DetectionBox> set;
        set.reserve(n - m);
        for (int k = 0; k < m; ++k) {
            const DetectionBox& bi = graph.nodes[k];
            const DetectionBox& bj = graph.nodes[k + m];
            DetectionBox fused = anchor_is_j ? bj : bi;
            fused.score = std::max(bi.score, bj.score);
            for (Axis axis : kAxes) {
                const int col = static_cast<int>(axis);
                set_coordinate(fused, axis, 0.5 * (raw(k, col) + raw(k + m, col)));
            }
            set.push_back(fused);
        }
        for (int k = 2 * m; k < n; ++k) {
            DetectionBox box = graph.nodes[k];
            for (Axis axis : kAxes) set_coordinate(box, axis, raw(k, static_cast<int>(axis)));
            set.push_back(box);
        }
        return set;
    };
    out.j_ij = emit(out.raw_ij, true);
    out.j_ji = emit(out.raw_ji, false);
    return out;
}

}  // namespace lsqmamot
