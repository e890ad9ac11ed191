import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np
import pytest

import lsqmamot


@pytest.fixture
def workdir():
    base = os.environ.get("LSQMAMOT_TEST_TMP")
    if base:
        Path(base).mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=base) as d:
        yield Path(d)


def box(x, y=0.0, agent=0, det_id=0, score=0.9):
    return lsqmamot.DetectionBox(x=x, y=y, h=1.5, w=2.0, l=4.0, score=score, agent_id=agent, det_id=det_id)


def test_iou_and_corners():
    a, b = box(0.0), box(2.0)
    assert lsqmamot.iou3d(a, b) == pytest.approx(1.0 / 3.0)
    corners = lsqmamot.bev_corners(a)
    assert corners[0] == pytest.approx((2.0, 1.0))
    assert len(corners) == 4


def test_invalid_box_raises():
    with pytest.raises(ValueError):
        lsqmamot.DetectionBox(h=0.0)


def test_frame_transform():
    out = lsqmamot.to_common_frame(box(1.0), lsqmamot.Pose2p5D(heading=math.pi / 2))
    assert (out.x, out.y) == pytest.approx((0.0, 1.0))


def test_k2_fusion():
    fused = lsqmamot.fuse_detections([box(1.0)], [box(0.0, agent=1)], [(0, 0)])
    assert fused.pair_count == 1
    assert fused.j_ij[0].x == pytest.approx(0.0)
    assert fused.j_ji[0].x == pytest.approx(1.0)
    assert np.allclose(fused.raw_ij[:, 0], [0.4, -0.4])


def test_solver_matches_numpy():
    rng = np.random.default_rng(0)
    dets = [box(float(x), float(y)) for x, y in rng.uniform(-20, 20, size=(6, 2))]
    graph = lsqmamot.build_graph(dets[:4], dets[4:], [])
    lap = np.asarray(graph.laplacian)
    delta = lsqmamot.differential_coordinates(graph, "x")
    anchors = rng.normal(size=graph.n)
    got = lsqmamot.solve_lsq(graph, delta, anchors)
    want = np.linalg.solve(lap.T @ lap + np.eye(graph.n), lap.T @ delta + anchors)
    assert np.allclose(got, want, atol=1e-9)


def test_hungarian():
    matches, rows, cols = lsqmamot.hungarian(np.array([[4.0, 1.0], [2.0, 3.0]]))
    assert matches == [(0, 1), (1, 0)]
    assert rows == [] and cols == []


def test_association_and_overlap():
    a = [box(0.0), box(10.0)]
    b = [box(10.2, agent=1), box(80.0, agent=1)]
    matches, rows, cols = lsqmamot.associate_by_iou(a, b)
    assert matches == [(1, 0)]
    assert lsqmamot.cross_agent_overlap(a, b) == [(1, 0)]


def test_clip_displacement():
    assert np.allclose(lsqmamot.clip_displacement([0.3, 0.4, 0.0], 0.25), [0.15, 0.2, 0.0])


def test_end_to_end(workdir):
    config = {"scenario": {"num_frames": 15, "num_objects": 3}, "seeds": [0]}
    seq = Path(lsqmamot.simulate(config, workdir / "sim")[0])
    lsqmamot.attack(seq, config, workdir / "attacked")
    lsqmamot.track(workdir / "attacked", "arlot", workdir / "tracks.jsonl", config)
    report = lsqmamot.evaluate(seq / "gt.jsonl", workdir / "tracks.jsonl", workdir / "report.json", config, "arlot")
    assert 0.0 <= report["samota"] <= 1.0
    assert report["method"] == "arlot"
    assert json.loads((workdir / "report.json").read_text())["num_gt"] == report["num_gt"]


def test_experiment_table(workdir):
    text = lsqmamot.experiment({"scenario": {"num_frames": 10}, "seeds": [0, 1]}, workdir / "exp")
    assert "arlot" in text and "sAMOTA" in text
    assert (workdir / "exp" / "summary.csv").exists()


def test_config_errors(workdir):
    with pytest.raises(lsqmamot.ConfigError, match="bogus"):
        lsqmamot.simulate({"bogus": 1}, workdir)
    with pytest.raises(lsqmamot.ConfigError):
        lsqmamot.track(workdir, "mamot", workdir / "t.jsonl")
