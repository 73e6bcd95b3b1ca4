import numpy as np
import pytest

from coopsim.errors import DomainError
from coopsim.perception import (
    BoundingBox2D,
    DetectionFrame,
    PerceptionConfig,
    PerceptionMode,
    perceive,
    sense_traffic_control,
)
from coopsim.sensing import SensorConfig
from coopsim.world import ControlPoint, Height, LightState, Obstacle, Pose2D, Role, WorldState, spawn_by_location
from conftest import straight_graph


def _scene(n_targets=3):
    w = WorldState(straight_graph())
    ego = spawn_by_location(w, Role.EGO, Pose2D(0, 0, 0))
    for k in range(n_targets):
        spawn_by_location(w, Role.BACKGROUND, Pose2D(15, -6 + 6 * k, 0))
    return w, w.agents[ego]


def test_box_validation():
    with pytest.raises(DomainError):
        BoundingBox2D((0, 0), (0.0, 1.0))
    assert BoundingBox2D((0, 0), (1, 1), 4.0).yaw == pytest.approx(4.0 - 2 * np.pi)


def test_frame_stamp_non_negative():
    with pytest.raises(DomainError):
        DetectionFrame(0, -0.1)


def test_config_validation():
    with pytest.raises(DomainError):
        PerceptionConfig(PerceptionMode.ORACLE, p_detect=0.5)
    with pytest.raises(DomainError):
        PerceptionConfig.noisy(p_detect=1.5)
    with pytest.raises(DomainError):
        PerceptionConfig.noisy(sigma_pos=-1.0)


def test_oracle_frame_is_exact():
    w, ego = _scene(3)
    frame = perceive(ego, SensorConfig(), PerceptionConfig.oracle(), w)
    assert len(frame) == 3
    ids = [d.truth_id for d in frame.detections]
    assert sorted(ids) == [1, 2, 3] and len(set(ids)) == 3
    for d in frame.detections:
        a = w.agents[d.truth_id]
        assert d.box == BoundingBox2D.of_agent(a)
    assert frame.source_id == ego.id and frame.stamp == w.time


def test_noisy_needs_rng():
    w, ego = _scene(1)
    with pytest.raises(DomainError):
        perceive(ego, SensorConfig(), PerceptionConfig.noisy(), w)


def test_zero_detection_probability():
    w, ego = _scene(3)
    rng = np.random.default_rng(0)
    cfg = PerceptionConfig.noisy(p_detect=0.0)
    assert all(len(perceive(ego, SensorConfig(), cfg, w, rng)) == 0 for _ in range(200))


def test_detection_rate_matches_p_detect():
    w, ego = _scene(1)
    rng = np.random.default_rng(42)
    cfg = PerceptionConfig.noisy(p_detect=0.7)
    hits = sum(len(perceive(ego, SensorConfig(), cfg, w, rng)) for _ in range(10_000))
    assert abs(hits / 10_000 - 0.7) <= 0.01


def test_noisy_jitter_scale():
    w, ego = _scene(1)
    rng = np.random.default_rng(1)
    cfg = PerceptionConfig.noisy(p_detect=1.0, sigma_pos=0.3, sigma_ext=0.0)
    dx = [perceive(ego, SensorConfig(), cfg, w, rng).detections[0].box.center[0] - 15.0 for _ in range(4000)]
    assert np.std(dx) == pytest.approx(0.3, rel=0.05)


def test_noisy_same_seed_same_frames():
    w, ego = _scene(3)
    cfg = PerceptionConfig.noisy()
    a = perceive(ego, SensorConfig(), cfg, w, np.random.default_rng(9))
    b = perceive(ego, SensorConfig(), cfg, w, np.random.default_rng(9))
    assert a == b


class TestTrafficControl:
    def _world(self, kind="light", s=20.0):
        sched = ((LightState.RED, None),) if kind == "light" else ()
        graph = straight_graph().with_controls([ControlPoint(kind, "A", s, s, 0.0, sched)])
        w = WorldState(graph)
        ego = spawn_by_location(w, Role.EGO, Pose2D(0, 0, 0))
        return w, w.agents[ego]

    def test_red_light_ahead(self):
        w, ego = self._world()
        r = sense_traffic_control(ego, w)
        assert (r.state, r.distance) == (LightState.RED, pytest.approx(20.0))

    def test_control_behind_is_ignored(self):
        graph = straight_graph().with_controls([ControlPoint("stop", "A", 5.0, 5.0, 0.0)])
        w = WorldState(graph)
        ego = spawn_by_location(w, Role.EGO, Pose2D(30, 0, 0))
        assert sense_traffic_control(w.agents[ego], w) is None

    def test_occluded_stop_sign(self):
        w, ego = self._world("stop")
        w.static_obstacles.append(Obstacle(Pose2D(10, 0, 0), (3.0, 1.5), Height.GROUND))
        assert sense_traffic_control(ego, w) is None
        high = SensorConfig(fov=360, mount_height=Height.ELEVATED)
        r = sense_traffic_control(ego, w, high)
        assert r.kind == "stop" and r.state is None

    def test_out_of_range(self):
        w, ego = self._world(s=120.0)
        assert sense_traffic_control(ego, w, SensorConfig(fov=360, range=50)) is None
