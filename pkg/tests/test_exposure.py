import math

import numpy as np
import pytest

import oracles
from radvis.exposure import (
    TrajectoryLog,
    clean_trajectory,
    compute_metrics,
    path_side,
    read_metrics_csv,
    read_sidecar,
    read_trajectory_csv,
    write_metrics_csv,
    write_trajectory_csv,
)
from radvis.field import RadiationSource
from radvis.scenes import Room, Scene


def scene_with(sources, table=(2.25, 0.8, 6.6), side=None):
    return Scene(
        name="test",
        room=Room(),
        sources=tuple(sources),
        table_anchor=table,
        higher_exposure_side=side,
    )


def straight_log(p0, p1, duration, steps, y=1.6):
    times = np.linspace(0.0, duration, steps + 1)
    xs = np.linspace(p0[0], p1[0], steps + 1)
    zs = np.linspace(p0[1], p1[1], steps + 1)
    return TrajectoryLog(times, np.column_stack([xs, np.full_like(xs, y), zs]))


class TestTrajectoryLog:
    def test_validation(self):
        with pytest.raises(ValueError):
            TrajectoryLog(np.array([0.0, 0.0]), np.zeros((2, 3)))
        with pytest.raises(ValueError):
            TrajectoryLog(np.array([-1.0, 1.0]), np.zeros((2, 3)))

    def test_csv_round_trip(self, tmp_path):
        log = straight_log((0.3, 0.8), (2.0, 6.0), 10.0, 50)
        path = tmp_path / "t.csv"
        write_trajectory_csv(log, path, sidecar={"participant": "P01", "scene": "scene_01"})
        back = read_trajectory_csv(path)
        assert np.allclose(back.times, log.times)
        assert np.allclose(back.positions, log.positions)
        assert read_sidecar(path)["participant"] == "P01"

    def test_metrics_csv_round_trip(self, tmp_path):
        rows = [
            {
                "participant": "P01",
                "block": 1,
                "trial": 2,
                "scene": "scene_01",
                "encoding": "hex",
                "cumulative_dose_sv": 1e-6,
                "mean_dose_rate_sv_h": 3e-4,
                "mean_nearest_dist_m": 2.0,
                "max_dose_rate_sv_h": 1e-3,
                "table_proximity_s": 3.5,
                "path_side": "left",
                "took_higher_exposure": True,
                "scene_designates_side": True,
            }
        ]
        path = tmp_path / "m.csv"
        write_metrics_csv(rows, path)
        back = read_metrics_csv(path)
        assert back[0]["cumulative_dose_sv"] == pytest.approx(1e-6)
        assert back[0]["took_higher_exposure"] is True
        assert back[0]["block"] == 1


class TestCleanTrajectory:
    def test_inside_unchanged_rebased(self):
        log = TrajectoryLog(
            np.array([5.0, 6.0, 7.0]),
            np.array([[1, 1.6, 1], [2, 1.6, 2], [3, 1.6, 3]], dtype=float),
        )
        out = clean_trajectory(log, Room())
        assert out.times[0] == 0.0
        assert len(out) == 3

    def test_leading_outside_dropped(self):
        log = TrajectoryLog(
            np.array([0.0, 1.0, 2.0]),
            np.array([[-0.5, 1.6, 0.8], [1.0, 1.6, 1.0], [2.0, 1.6, 2.0]]),
        )
        out = clean_trajectory(log, Room())
        assert len(out) == 2
        assert out.times[0] == 0.0
        assert out.positions[0][0] == 1.0

    def test_mixed_crossings_keep_interior(self):
        # oracle: polygon containment per sample
        rng = np.random.default_rng(3)
        xs = rng.uniform(-1, 5.5, 40)
        zs = rng.uniform(-1, 9.5, 40)
        times = np.arange(40, dtype=float)
        log = TrajectoryLog(times, np.column_stack([xs, np.full(40, 1.6), zs]))
        room = Room()
        expected = [
            i for i in range(40) if 0 <= xs[i] <= room.width and 0 <= zs[i] <= room.length
        ]
        out = clean_trajectory(log, room)
        assert len(out) == len(expected)
        assert np.allclose(out.positions[:, 0], xs[expected])

    def test_all_outside_errors(self):
        log = TrajectoryLog(np.array([0.0, 1.0]), np.array([[-1, 1.6, -1], [-2, 1.6, -2.0]]))
        with pytest.raises(ValueError, match="empty after cleaning"):
            clean_trajectory(log, Room())


class TestComputeMetrics:
    def test_stationary_analytic(self):
        src = RadiationSource((0.0, 1.6, 0.0), 0.001)
        scene = scene_with([src], table=(50.0, 0.0, 50.0))
        times = np.arange(0.0, 3601.0, 60.0)
        pos = np.tile([1.0, 1.6, 0.0], (len(times), 1))
        m = compute_metrics(TrajectoryLog(times, pos), scene)
        assert m.cumulative_dose_sv == pytest.approx(0.001, rel=1e-12)
        assert m.mean_dose_rate_sv_h == pytest.approx(0.001, rel=1e-12)
        assert m.max_dose_rate_sv_h == pytest.approx(0.001, rel=1e-12)
        assert m.mean_nearest_dist_m == pytest.approx(1.0, rel=1e-12)
        assert m.table_proximity_s == 0.0

    def test_two_sample_trapezoid(self):
        # rates 1 and 3 mSv/h over 1 s -> (2 mSv * s) / 3600
        src = RadiationSource((0.0, 1.6, 0.0), 0.001)
        scene = scene_with([src], table=(50.0, 0.0, 50.0))
        d1, d2 = 1.0, math.sqrt(1.0 / 3.0)
        log = TrajectoryLog(
            np.array([0.0, 1.0]),
            np.array([[d1, 1.6, 0.0], [d2, 1.6, 0.0]]),
        )
        m = compute_metrics(log, scene)
        assert m.cumulative_dose_sv == pytest.approx(0.002 / 3600.0, rel=1e-9)

    def test_walk_past_source_matches_fine_oracle(self):
        src = RadiationSource((0.0, 1.6, 1.0), 0.001)
        scene = scene_with([src], table=(0.0, 0.0, 50.0))
        log = straight_log((-5.0, 0.0), (5.0, 0.0), 8.0, 1000)
        m = compute_metrics(log, scene)
        want = oracles.fine_metrics(
            list(log.times),
            [tuple(p) for p in log.positions],
            [(src.position, src.rate_at_1m)],
            (0.0, 0.0, 50.0),
            substeps=10_000,
        )
        assert m.cumulative_dose_sv == pytest.approx(want["cumulative_dose_sv"], rel=1e-4)
        assert m.mean_dose_rate_sv_h == pytest.approx(want["mean_dose_rate_sv_h"], rel=1e-4)
        assert m.mean_nearest_dist_m == pytest.approx(want["mean_nearest_dist_m"], rel=1e-4)
        assert m.max_dose_rate_sv_h == pytest.approx(want["max_dose_rate_sv_h"], rel=1e-4)

    def test_table_proximity_half_credit(self):
        src = RadiationSource((50.0, 0.0, 50.0), 0.001)
        scene = scene_with([src], table=(0.0, 0.8, 0.0))
        # samples at distances 1.0, 1.4, 1.6: interval 1 fully in, interval 2 half
        log = TrajectoryLog(
            np.array([0.0, 2.0, 3.0]),
            np.array([[1.0, 1.6, 0.0], [1.4, 1.6, 0.0], [1.6, 1.6, 0.0]]),
        )
        m = compute_metrics(log, scene)
        assert m.table_proximity_s == pytest.approx(2.0 + 0.5)

    def test_table_proximity_is_horizontal(self):
        src = RadiationSource((50.0, 0.0, 50.0), 0.001)
        scene = scene_with([src], table=(0.0, 0.0, 0.0))  # anchor on the floor
        log = TrajectoryLog(
            np.array([0.0, 1.0]),
            np.array([[1.0, 1.6, 0.0], [1.0, 1.6, 0.0 + 0.1]]),
        )
        # 3D distance would exceed 1.5 (height 1.6); horizontal is 1.0
        assert compute_metrics(log, scene).table_proximity_s == pytest.approx(1.0)

    def test_fewer_than_two_samples_rejected(self):
        scene = scene_with([RadiationSource((0, 0, 0), 0.001)])
        with pytest.raises(ValueError):
            compute_metrics(TrajectoryLog(np.array([0.0]), np.zeros((1, 3))), scene)

    def test_rate_scaling_property(self):
        rng = np.random.default_rng(4)
        pts = rng.uniform(0.5, 4.0, (20, 2))
        times = np.linspace(0, 19, 20)
        log = TrajectoryLog(times, np.column_stack([pts[:, 0], np.full(20, 1.6), pts[:, 1]]))
        s1 = [RadiationSource((2.0, 1.0, 2.0), 0.001), RadiationSource((3.0, 0.5, 1.0), 0.002)]
        c = 3.7
        s2 = [RadiationSource(s.position, s.rate_at_1m * c) for s in s1]
        m1 = compute_metrics(log, scene_with(s1))
        m2 = compute_metrics(log, scene_with(s2))
        assert m2.cumulative_dose_sv == pytest.approx(c * m1.cumulative_dose_sv, rel=1e-12)
        assert m2.mean_dose_rate_sv_h == pytest.approx(c * m1.mean_dose_rate_sv_h, rel=1e-12)
        assert m2.max_dose_rate_sv_h == pytest.approx(c * m1.max_dose_rate_sv_h, rel=1e-12)
        assert m2.mean_nearest_dist_m == pytest.approx(m1.mean_nearest_dist_m, rel=1e-12)

    def test_time_reversal_invariance(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(0.5, 4.0, (30, 2))
        times = np.sort(rng.uniform(0, 30, 30))
        times[0] = 0.0
        log = TrajectoryLog(times, np.column_stack([pts[:, 0], np.full(30, 1.6), pts[:, 1]]))
        rev_times = times[-1] - times[::-1]
        rev = TrajectoryLog(rev_times, log.positions[::-1])
        scene = scene_with([RadiationSource((2.0, 1.0, 2.0), 0.001)])
        a = compute_metrics(log, scene)
        b = compute_metrics(rev, scene)
        for key in a.as_dict():
            assert a.as_dict()[key] == pytest.approx(b.as_dict()[key], rel=1e-12)

    def test_midpoint_refinement_stability(self):
        # linear motion: inserting midpoints barely changes trapezoid results
        src = RadiationSource((0.0, 1.6, 1.0), 0.001)
        scene = scene_with([src], table=(50.0, 0, 50.0))
        coarse = straight_log((-4.0, 0.0), (4.0, 0.0), 6.0, 2000)
        fine = straight_log((-4.0, 0.0), (4.0, 0.0), 6.0, 4000)
        a = compute_metrics(coarse, scene)
        b = compute_metrics(fine, scene)
        assert a.cumulative_dose_sv == pytest.approx(b.cumulative_dose_sv, rel=1e-6)
        assert a.mean_nearest_dist_m == pytest.approx(b.mean_nearest_dist_m, rel=1e-6)

    def test_invariant_mean_rate_times_duration(self):
        rng = np.random.default_rng(6)
        pts = rng.uniform(0.5, 4.0, (25, 2))
        times = np.linspace(0, 40, 25)
        log = TrajectoryLog(times, np.column_stack([pts[:, 0], np.full(25, 1.6), pts[:, 1]]))
        m = compute_metrics(log, scene_with([RadiationSource((2, 1, 2), 0.001)]))
        assert m.mean_dose_rate_sv_h * log.duration / 3600.0 == pytest.approx(
            m.cumulative_dose_sv, abs=1e-9
        )


class TestPathSide:
    def test_left_crossing_in_left_worse_scene(self):
        scene = scene_with([RadiationSource((1, 1, 1), 0.001)], side="left")
        log = straight_log((0.45, 0.8), (0.45, 7.7), 10.0, 50)
        side, took = path_side(log, scene)
        assert side == "left"
        assert took is True

    def test_right_gap_in_right_safer_scene(self):
        scene = scene_with([RadiationSource((1, 1, 1), 0.001)], side="left")
        log = straight_log((4.05, 0.8), (4.05, 7.7), 10.0, 50)
        side, took = path_side(log, scene)
        assert side == "right"
        assert took is False

    def test_no_crossing_errors(self):
        scene = scene_with([RadiationSource((1, 1, 1), 0.001)])
        log = straight_log((1.0, 0.5), (1.0, 3.0), 5.0, 20)
        with pytest.raises(ValueError, match="no crossing"):
            path_side(log, scene)

    def test_counter_aggregation_synthetic(self):
        # 10 synthetic trials, 4 take the designated worse side
        scene_l = scene_with([RadiationSource((1, 1, 1), 0.001)], side="left")
        count = 0
        for i in range(10):
            x = 0.45 if i < 4 else 4.05
            log = straight_log((x, 0.8), (x, 7.7), 10.0, 30)
            _, took = path_side(log, scene_l)
            count += took
        assert count == 4
