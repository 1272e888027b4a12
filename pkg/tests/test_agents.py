import numpy as np
import pytest

from radvis.agents import (
    GradientAvoiderPolicy,
    WaypointPolicy,
    default_route,
    simulate_agent,
)
from radvis.exposure import clean_trajectory, compute_metrics


class TestWaypointAgent:
    def test_endpoints_on_door_segments(self, scenes_by_name):
        scene = scenes_by_name["scene_01"]
        waypoints, dwells = default_route(scene)
        log = simulate_agent(scene, WaypointPolicy(waypoints, dwells))
        room = scene.room
        first, last = log.positions[0], log.positions[-1]
        assert first[0] == 0.0 and room.entrance_z[0] <= first[2] <= room.entrance_z[1]
        assert last[0] == pytest.approx(0.0, abs=1e-9)
        assert room.exit_z[0] <= last[2] <= room.exit_z[1]

    def test_stays_in_room(self, scenes_by_name):
        for name, scene in scenes_by_name.items():
            for side in ("left", "right"):
                waypoints, dwells = default_route(scene, side=side)
                log = simulate_agent(scene, WaypointPolicy(waypoints, dwells), step_s=0.1)
                assert all(scene.room.contains(p[0], p[2]) for p in log.positions), name

    def test_walk_speed_bounded(self, scenes_by_name):
        scene = scenes_by_name["scene_02"]
        waypoints, dwells = default_route(scene)
        log = simulate_agent(scene, WaypointPolicy(waypoints, dwells), step_s=0.1)
        steps = np.diff(log.positions[:, [0, 2]], axis=0)
        speeds = np.linalg.norm(steps, axis=1) / np.diff(log.times)
        assert speeds.max() <= 1.4 + 1e-6

    def test_dwell_accrues_table_time(self, scenes_by_name):
        scene = scenes_by_name["scene_03"]
        waypoints, _ = default_route(scene)
        short = simulate_agent(scene, WaypointPolicy(waypoints, {2: 1.0}))
        long = simulate_agent(scene, WaypointPolicy(waypoints, {2: 5.0}))
        m_short = compute_metrics(clean_trajectory(short, scene.room), scene)
        m_long = compute_metrics(clean_trajectory(long, scene.room), scene)
        assert m_long.table_proximity_s >= m_short.table_proximity_s + 3.5

    def test_step_bounds_enforced(self, scenes_by_name):
        scene = scenes_by_name["scene_01"]
        waypoints, dwells = default_route(scene)
        with pytest.raises(ValueError):
            simulate_agent(scene, WaypointPolicy(waypoints, dwells), step_s=0.01)
        with pytest.raises(ValueError):
            simulate_agent(scene, WaypointPolicy(waypoints, dwells), step_s=0.6)

    def test_blocked_target_times_out(self, scenes_by_name):
        scene = scenes_by_name["scene_01"]
        room = scene.room
        mid = (room.partition_x0 + room.partition_x1) / 2
        policy = WaypointPolicy(((0.0, 0.8), (mid, room.partition_z)))
        with pytest.raises(RuntimeError, match="timed out"):
            simulate_agent(scene, policy, timeout_s=20.0)


class TestGradientAvoider:
    def test_lower_dose_than_straight_path(self, scenes_by_name):
        scene = scenes_by_name["scene_01"]
        waypoints, dwells = default_route(scene, side="left")  # hot side on purpose
        straight = simulate_agent(scene, WaypointPolicy(waypoints, dwells))
        avoider = simulate_agent(
            scene, GradientAvoiderPolicy(waypoints, dwells, repulsion_gain=0.4)
        )
        m_s = compute_metrics(clean_trajectory(straight, scene.room), scene)
        m_a = compute_metrics(clean_trajectory(avoider, scene.room), scene)
        assert m_a.cumulative_dose_sv < m_s.cumulative_dose_sv

    def test_refinement_stability(self, scenes_by_name):
        scene = scenes_by_name["scene_04"]
        waypoints, dwells = default_route(scene)
        a = simulate_agent(scene, WaypointPolicy(waypoints, dwells), step_s=0.1)
        b = simulate_agent(scene, WaypointPolicy(waypoints, dwells), step_s=0.05)
        m_a = compute_metrics(clean_trajectory(a, scene.room), scene)
        m_b = compute_metrics(clean_trajectory(b, scene.room), scene)
        assert m_a.cumulative_dose_sv == pytest.approx(m_b.cumulative_dose_sv, rel=1e-3)

    def test_avoider_stays_in_room(self, scenes_by_name):
        for name in ("scene_01", "scene_05"):
            scene = scenes_by_name[name]
            waypoints, dwells = default_route(scene)
            log = simulate_agent(scene, GradientAvoiderPolicy(waypoints, dwells))
            assert all(scene.room.contains(p[0], p[2]) for p in log.positions)

    def test_bad_policy_type(self, scenes_by_name):
        with pytest.raises(TypeError):
            simulate_agent(scenes_by_name["scene_01"], object())
