import json
import math
import pathlib

import numpy as np
import pytest

import dtfusion as dt

ROOT = pathlib.Path(__file__).resolve().parents[2]


def forward_pose(x=0.0, y=0.0, z=1.5):
    # camera X right, Y down, Z forward; world x forward, z up
    r = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
    return dt.CameraPose(r, np.array([x, y, z]))


def intrinsics():
    return dt.CameraIntrinsics(0.01, 1e-5, 1e-5, 320.0, 320.0, 640, 640)


def test_projection_round_trip():
    pose, k = forward_pose(), intrinsics()
    p = dt.WorldPoint(20.0, 1.0, 1.0)
    px = dt.project_anchor(p, pose, k)
    back = dt.back_project(px, dt.gnss_range(dt.WorldPoint(0.0, 0.0, 1.5), p), k, pose)
    assert math.isclose(back.x, p.x, rel_tol=1e-9)
    assert math.isclose(back.y, p.y, abs_tol=1e-9)
    assert math.isclose(back.z, p.z, abs_tol=1e-9)


def test_behind_camera_raises():
    with pytest.raises(dt.BehindCamera):
        dt.project_anchor(dt.WorldPoint(-5.0, 0.0, 1.5), forward_pose(), intrinsics())


def test_depth_evaluate_uniform_and_bands():
    flat = dt.DepthImage(np.full((100, 100), 12.5))
    box = dt.BoundingBox(10, 10, 90, 90)
    assert dt.depth_evaluate(flat, [box], dt.DepthParams(0.1, 25, 7)) == [12.5]

    arr = np.full((100, 100), np.inf)
    arr[50:, :] = 20.0
    got = dt.depth_evaluate(dt.DepthImage(arr), [box], dt.DepthParams(0.1, 40, 1))
    assert got == [20.0]


def test_match_picks_closest_distance():
    boxes = [dt.BoundingBox(0, 0, 100, 100), dt.BoundingBox(20, 20, 80, 80)]
    out = dt.match_target(dt.PixelPoint(50, 50), boxes, [30.0, 18.0], 17.0)
    assert isinstance(out, dt.Matched)
    assert out.box_index == 1
    assert out.delta_d == pytest.approx(1.0)
    miss = dt.match_target(dt.PixelPoint(500, 500), boxes, [30.0, 18.0], 17.0)
    assert isinstance(miss, dt.NoMatch)
    assert miss.reason == dt.NoMatchReason.anchor_outside_all
    with pytest.raises(dt.LengthMismatch):
        dt.match_target(dt.PixelPoint(50, 50), boxes, [1.0], 1.0)


def test_iou_and_accuracy():
    a = dt.BoundingBox(0, 0, 2, 2)
    b = dt.BoundingBox(1, 1, 3, 3)
    assert dt.iou(a, b) == pytest.approx(1.0 / 7.0)
    assert dt.accuracy_at([0.9, 0.4, None, 0.75], 0.7) == pytest.approx(0.5)
    curve = dt.accuracy_curve([0.9, 0.4, None, 0.75], [0.5, 0.8])
    assert curve == [(0.5, 0.5), (0.8, 0.25)]


def test_scenario_and_fusion():
    cfg = (ROOT / "configs" / "zero_noise.json").read_text()
    sc = dt.Scenario(cfg)
    assert sc.num_frames > 0
    frame = sc.frame(0)
    assert frame.depth is not None
    target = [i for i in frame.twin_ids if i != 0][0]
    outcome, iou = dt.evaluate_frame(frame, target, dt.Mode.fused)
    if isinstance(outcome, dt.Matched):
        assert iou is not None and iou > 0.99


def test_detections_round_trip(tmp_path):
    dets = {0: [dt.BoundingBox(1, 2, 3, 4)], 5: [dt.BoundingBox(0.5, 0.5, 9, 9, 7)]}
    path = tmp_path / "d.jsonl"
    dt.save_detections(dets, path)
    assert dt.load_detections(path) == dets


def test_safety_experiment_improves_ttc():
    cfg = (ROOT / "configs" / "cutin.json").read_text()
    base, adv = dt.scripted_reaction_experiment(cfg, 1.0)
    def min_ttc(rows):
        vals = [v for _, v in dt.ttc_series(rows) if v is not None]
        return min(vals)
    assert min_ttc(adv) > min_ttc(base)
    assert dt.speed_variance(adv) <= dt.speed_variance(base)


def test_bad_config_raises():
    with pytest.raises(dt.ConfigError):
        dt.Scenario(json.dumps({"frame_rate": -1}))
