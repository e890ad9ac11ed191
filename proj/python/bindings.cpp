#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "lsqmamot/adversary.hpp"
#include "lsqmamot/association.hpp"
#include "lsqmamot/cli.hpp"
#include "lsqmamot/config.hpp"
#include "lsqmamot/error.hpp"
#include "lsqmamot/geometry.hpp"
#include "lsqmamot/lsq_graph.hpp"
#include "lsqmamot/metrics.hpp"
#include "lsqmamot/tracking.hpp"

namespace py = pybind11;
using namespace lsqmamot;

namespace {

Axis parse_axis(const std::string& name) {
    if (name == "x") return Axis::X;
    if (name == "y") return Axis::Y;
    if (name == "z") return Axis::Z;
    throw InvalidInput("axis must be 'x', 'y' or 'z'");
}

ExperimentConfig config_from(const std::string& json_text) {
    nlohmann::json doc = json_text.empty() ? nlohmann::json::object() : nlohmann::json::parse(json_text);
    return parse_config(doc);
}

py::object to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Least-squares graph fusion and two-stage Kalman tracking of multi-agent 3D detections";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);

    py::class_<DetectionBox>(m, "DetectionBox")
        .def(py::init([](double x, double y, double z, double yaw, double h, double w, double l, double score,
                         int agent_id, int det_id) {
                 DetectionBox b{x, y, z, normalize_angle(yaw), h, w, l, score, agent_id, det_id};
                 validate(b);
                 return b;
             }),
             py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0, py::arg("yaw") = 0.0, py::arg("h") = 1.0,
             py::arg("w") = 1.0, py::arg("l") = 1.0, py::arg("score") = 1.0, py::arg("agent_id") = 0,
             py::arg("det_id") = 0)
        .def_readwrite("x", &DetectionBox::x)
        .def_readwrite("y", &DetectionBox::y)
        .def_readwrite("z", &DetectionBox::z)
        .def_readwrite("yaw", &DetectionBox::yaw)
        .def_readwrite("h", &DetectionBox::h)
        .def_readwrite("w", &DetectionBox::w)
        .def_readwrite("l", &DetectionBox::l)
        .def_readwrite("score", &DetectionBox::score)
        .def_readwrite("agent_id", &DetectionBox::agent_id)
        .def_readwrite("det_id", &DetectionBox::det_id)
        .def("__eq__", [](const DetectionBox& a, const DetectionBox& b) { return a == b; })
        .def("__repr__", [](const DetectionBox& b) {
            return "DetectionBox(x=" + std::to_string(b.x) + ", y=" + std::to_string(b.y) +
                   ", z=" + std::to_string(b.z) + ", yaw=" + std::to_string(b.yaw) + ")";
        });

    py::class_<Pose2p5D>(m, "Pose2p5D")
        .def(py::init([](double tx, double ty, double tz, double heading) {
                 return Pose2p5D{tx, ty, tz, normalize_angle(heading)};
             }),
             py::arg("tx") = 0.0, py::arg("ty") = 0.0, py::arg("tz") = 0.0, py::arg("heading") = 0.0)
        .def_readwrite("tx", &Pose2p5D::tx)
        .def_readwrite("ty", &Pose2p5D::ty)
        .def_readwrite("tz", &Pose2p5D::tz)
        .def_readwrite("heading", &Pose2p5D::heading);

    m.def("normalize_angle", &normalize_angle);
    m.def("bev_corners", [](const DetectionBox& b) {
        std::vector<std::pair<double, double>> out;
        for (const Point2& p : bev_corners(b)) out.emplace_back(p.x, p.y);
        return out;
    });
    m.def("iou3d", &iou3d);
    m.def("to_common_frame", &to_common_frame);

    py::class_<DetectionGraph>(m, "DetectionGraph")
        .def_readonly("nodes", &DetectionGraph::nodes)
        .def_readonly("pair_count", &DetectionGraph::pair_count)
        .def_readonly("laplacian", &DetectionGraph::laplacian)
        .def_property_readonly("n", &DetectionGraph::size);

    py::class_<FusedDetections>(m, "FusedDetections")
        .def_readonly("j_ij", &FusedDetections::j_ij)
        .def_readonly("j_ji", &FusedDetections::j_ji)
        .def_readonly("pair_count", &FusedDetections::pair_count)
        .def_readonly("raw_ij", &FusedDetections::raw_ij)
        .def_readonly("raw_ji", &FusedDetections::raw_ji);

    m.def("build_graph",
          [](const std::vector<DetectionBox>& a, const std::vector<DetectionBox>& b,
             const std::vector<IndexPair>& pairs) { return build_graph(a, b, pairs); });
    m.def("differential_coordinates", [](const DetectionGraph& g, const std::string& axis) {
        return Eigen::VectorXd(differential_coordinates(g, parse_axis(axis)));
    });
    m.def("build_anchor_vectors", [](const DetectionGraph& g, const std::string& axis) {
        const AnchorPair a = build_anchor_vectors(g, parse_axis(axis));
        return std::make_pair(a.c_ij, a.c_ji);
    });
    m.def("solve_lsq", &solve_lsq, py::arg("graph"), py::arg("delta"), py::arg("anchors"));
    m.def("fuse_detections",
          [](const std::vector<DetectionBox>& a, const std::vector<DetectionBox>& b,
             const std::vector<IndexPair>& pairs) { return fuse_detections(a, b, pairs); });

    m.def("hungarian", [](const Eigen::MatrixXd& cost) {
        const Assignment a = hungarian(cost);
        return py::make_tuple(a.matches, a.unmatched_rows, a.unmatched_cols);
    });
    m.def(
        "associate_by_iou",
        [](const std::vector<DetectionBox>& a, const std::vector<DetectionBox>& b, double iou_min) {
            const Assignment r = associate_by_iou(a, b, iou_min);
            return py::make_tuple(r.matches, r.unmatched_rows, r.unmatched_cols);
        },
        py::arg("a"), py::arg("b"), py::arg("iou_min") = kDefaultIouGate);
    m.def(
        "cross_agent_overlap",
        [](const std::vector<DetectionBox>& a, const std::vector<DetectionBox>& b, double iou_min) {
            return cross_agent_overlap(a, b, iou_min);
        },
        py::arg("dets_i"), py::arg("dets_j"), py::arg("iou_min") = kDefaultIouGate);

    m.def("clip_displacement", [](const Eigen::Vector3d& d, double eps) { return Eigen::Vector3d(clip_displacement(d, eps)); });

    // Experiment-level entry points take the config as a JSON string.
    m.def(
        "simulate",
        [](const std::string& config_json, const std::filesystem::path& out_dir) {
            return cli::cmd_simulate(config_from(config_json), out_dir);
        },
        py::arg("config_json"), py::arg("out_dir"));
    m.def(
        "attack",
        [](const std::filesystem::path& in_dir, const std::string& config_json, const std::filesystem::path& out_dir) {
            cli::cmd_attack(in_dir, config_from(config_json), out_dir);
        },
        py::arg("in_dir"), py::arg("config_json"), py::arg("out_dir"));
    m.def(
        "track",
        [](const std::filesystem::path& in_dir, const std::string& method, const std::filesystem::path& out_path,
           const std::string& config_json) {
            ExperimentConfig cfg = config_from(config_json);
            cfg.tracker.method = parse_method(method);
            cli::cmd_track(in_dir, cfg, out_path);
        },
        py::arg("in_dir"), py::arg("method"), py::arg("out_path"), py::arg("config_json") = "");
    m.def(
        "evaluate",
        [](const std::filesystem::path& gt, const std::filesystem::path& tracks, const std::filesystem::path& out,
           const std::string& config_json, const std::string& label) {
            return to_python(to_json(cli::cmd_eval(gt, tracks, config_from(config_json), out, label)));
        },
        py::arg("gt_path"), py::arg("tracks_path"), py::arg("out_path"), py::arg("config_json") = "",
        py::arg("method") = "");
    m.def(
        "experiment",
        [](const std::string& config_json, const std::filesystem::path& out_dir) {
            return cli::cmd_experiment(config_from(config_json), out_dir).text();
        },
        py::arg("config_json"), py::arg("out_dir"));

    m.attr("__version__") = "0.1.0";
}
