"""Python bindings for the lsqmamot tracking library."""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    DataError,
    DetectionBox,
    DetectionGraph,
    FusedDetections,
    InvalidInput,
    Pose2p5D,
    __version__,
    associate_by_iou,
    bev_corners,
    build_anchor_vectors,
    build_graph,
    clip_displacement,
    cross_agent_overlap,
    differential_coordinates,
    fuse_detections,
    hungarian,
    iou3d,
    normalize_angle,
    solve_lsq,
    to_common_frame,
)
from . import _core


def _config_text(config):
    if config is None:
        return ""
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def simulate(config, out_dir):
    """Write one synthetic sequence directory per configured seed."""
    return _core.simulate(_config_text(config), str(out_dir))


def attack(in_dir, config, out_dir):
    _core.attack(str(in_dir), _config_text(config), str(out_dir))


def track(in_dir, method, out_path, config=None):
    _core.track(str(in_dir), method, str(out_path), _config_text(config))


def evaluate(gt_path, tracks_path, out_path, config=None, method=""):
    """Evaluate a tracks file; returns the report as a dict."""
    return _core.evaluate(str(gt_path), str(tracks_path), str(out_path), _config_text(config), method)


def experiment(config, out_dir):
    """Run the full comparison and return the summary table as text."""
    return _core.experiment(_config_text(config), str(out_dir))
