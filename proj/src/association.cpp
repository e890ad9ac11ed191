#include "lsqmamot/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsqmamot/error.hpp"

namespace lsqmamot {

namespace {

// Shortest augmenting path Hungarian for rows <= cols. Returns col index per row.
std::vector<int> solve_wide(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // 1-based potentials; column 0 is the virtual source.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> row_of_col(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        row_of_col[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const int i0 = row_of_col[j0];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                // strict '<' keeps the lowest column on ties
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of_col[j0] != 0);
        do {
            const int j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> col_of_row(n, -1);
    for (int j = 1; j <= m; ++j) {
        if (row_of_col[j] != 0) col_of_row[row_of_col[j] - 1] = j - 1;
    }
    return col_of_row;
}

}  // namespace

Assignment hungarian(const Eigen::MatrixXd& cost) {
    Assignment out;
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (!cost.allFinite()) throw InvalidInput("hungarian: cost matrix has non-finite entries");

    std::vector<int> col_of_row(rows, -1);
    if (rows > 0 && cols > 0) {
        if (rows <= cols) {
            col_of_row = solve_wide(cost);
        } else {
            const std::vector<int> row_of_col = solve_wide(cost.transpose());
            for (int c = 0; c < cols; ++c) col_of_row[row_of_col[c]] = c;
        }
    }

    std::vector<bool> col_used(cols, false);
    for (int r = 0; r < rows; ++r) {
        if (col_of_row[r] >= 0) {
            out.matches.emplace_back(r, col_of_row[r]);
            col_used[col_of_row[r]] = true;
        } else {
            out.unmatched_rows.push_back(r);
        }
    }
    for (int c = 0; c < cols; ++c) {
        if (!col_used[c]) out.unmatched_cols.push_back(c);
    }
    return out;
}

double assignment_cost(const Eigen::MatrixXd& cost, const Assignment& a) {
    double total = 0.0;
    for (const auto& [r, c] : a.matches) total += cost(r, c);
    return total;
}

Eigen::MatrixXd iou_matrix(std::span<const DetectionBox> a, std::span<const DetectionBox> b) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t r = 0; r < a.size(); ++r) {
        for (std::size_t c = 0; c < b.size(); ++c) m(r, c) = iou3d(a[r], b[c]);
    }
    return m;
}

Assignment associate_by_iou(std::span<const DetectionBox> a, std::span<const DetectionBox> b, double iou_min) {
    if (!(iou_min >= 0.0 && iou_min <= 1.0)) throw InvalidInput("iou_min must lie in [0, 1]");
    const Eigen::MatrixXd iou = iou_matrix(a, b);
    const Assignment raw = hungarian(-iou);

    Assignment out;
    std::vector<bool> row_matched(a.size(), false), col_matched(b.size(), false);
    for (const auto& [r, c] : raw.matches) {
        if (iou(r, c) < iou_min || iou(r, c) <= 0.0) continue;
        out.matches.emplace_back(r, c);
        row_matched[r] = true;
        col_matched[c] = true;
    }
    for (std::size_t r = 0; r < a.size(); ++r) {
        if (!row_matched[r]) out.unmatched_rows.push_back(static_cast<int>(r));
    }
    for (std::size_t c = 0; c < b.size(); ++c) {
        if (!col_matched[c]) out.unmatched_cols.push_back(static_cast<int>(c));
    }
    return out;
}

std::vector<std::pair<int, int>> cross_agent_overlap(std::span<const DetectionBox> dets_i,
                                                     std::span<const DetectionBox> dets_j, double iou_min) {
    return associate_by_iou(dets_i, dets_j, iou_min).matches;
}

}  // namespace lsqmamot
