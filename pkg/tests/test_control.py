import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopsim.control import (
    A_MAX,
    Controller,
    Override,
    PidGains,
    PidState,
    control_step,
    pid_step,
)
from coopsim.errors import DomainError
from coopsim.planning import Trajectory
from coopsim.world import AgentState, Pose2D, Role, step_kinematics

DT = 0.05


def straight(speed=10.0, n=40):
    return Trajectory(tuple((float(x), 0.0) for x in range(n)), (speed,) * n)


def fresh():
    return PidState.longitudinal(), PidState.lateral()


class TestPid:
    def test_pure_proportional(self):
        out, _ = pid_step(PidState(PidGains(0.5), 10.0), 2.0, DT)
        assert out == 1.0

    def test_zero_error_stays_zero(self):
        s = PidState.longitudinal()
        for _ in range(100):
            out, s = pid_step(s, 0.0, DT)
            assert out == 0.0

    def test_integral_is_clamped(self):
        s = PidState(PidGains(0.0, 2.0), 4.0)
        for _ in range(1000):
            _, s = pid_step(s, 5.0, DT)
        assert s.gains.ki * s.integral <= s.limit + 1e-12

    def test_bad_dt(self):
        with pytest.raises(DomainError):
            pid_step(PidState.longitudinal(), 1.0, 0.0)

    @staticmethod
    def _settle_time(target, drag, horizon=20.0):
        # v' = u - drag * v; returns the time after which v stays within 5%
        s = PidState.longitudinal()
        v, settled_at = 0.0, None
        for k in range(int(horizon / DT)):
            u, s = pid_step(s, target - v, DT)
            v += (u - drag * v) * DT
            if abs(v - target) <= 0.05 * target:
                settled_at = settled_at if settled_at is not None else (k + 1) * DT
            else:
                settled_at = None
        return settled_at, v

    @pytest.mark.parametrize("target", [2.0, 5.0, 8.0])
    def test_first_order_plant_settles(self, target):
        t, _ = self._settle_time(target, drag=0.1)
        assert t is not None and t <= 4.0

    def test_pure_integrator_has_no_steady_state_error(self):
        _, v = self._settle_time(8.0, drag=0.0, horizon=40.0)
        assert v == pytest.approx(8.0, abs=0.01)


class TestControlStep:
    def test_equilibrium(self):
        ego = AgentState(0, Role.EGO, Pose2D(5, 0, 0), 10.0)
        a, s, _ = control_step(ego, straight(), Override(), fresh(), DT)
        assert abs(a) < 1e-6 and abs(s) < 1e-6

    def test_stop_mode(self):
        ego = AgentState(0, Role.EGO, Pose2D(5, 2, 0.4), 7.0)
        a, s, _ = control_step(ego, straight(), Override.stop(), fresh(), DT)
        assert (a, s) == (-A_MAX, 0.0)

    def test_left_offset_steers_right(self):
        ego = AgentState(0, Role.EGO, Pose2D(5, 1.0, 0), 10.0)
        _, s, _ = control_step(ego, straight(), Override(), fresh(), DT)
        assert s < 0

    def test_steer_limit_override(self):
        ego = AgentState(0, Role.EGO, Pose2D(5, 5.0, 0), 10.0)
        _, s, _ = control_step(ego, straight(), Override.steer_limit(0.05), fresh(), DT)
        assert s == pytest.approx(-0.05)

    def test_commands_within_limits(self):
        ego = AgentState(0, Role.EGO, Pose2D(5, -30, 2.0), 0.0)
        a, s, _ = control_step(ego, straight(speed=25.0), Override(), fresh(), DT)
        assert abs(a) <= A_MAX and abs(s) <= 0.6

    def test_empty_trajectory_rejected(self):
        with pytest.raises(DomainError):
            Trajectory((), ())

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-1.5, 1.5), st.floats(-0.3, 0.3), st.floats(4.0, 12.0))
    def test_closed_loop_tracks_line(self, y0, yaw0, v0):
        traj = Trajectory(tuple((float(x), 0.0) for x in range(0, 400, 2)), (10.0,) * 200)
        ego = AgentState(0, Role.EGO, Pose2D(0, y0, yaw0), v0)
        ctl = Controller()
        for _ in range(int(12 / DT)):
            ego = step_kinematics(ego, ctl.step(ego, traj, DT), DT)
        assert abs(ego.pose.y) < 0.2
        assert abs(ego.speed - 10.0) < 0.5
        assert abs(ego.pose.yaw) < 0.05


def test_stop_override_brings_vehicle_to_rest():
    ego = AgentState(0, Role.EGO, Pose2D(0, 0, 0), 10.0)
    ctl = Controller()
    ctl.override = Override.stop()
    for _ in range(100):
        ego = step_kinematics(ego, ctl.step(ego, straight(n=400), DT), DT)
    assert ego.speed == 0.0
    assert ego.pose.x == pytest.approx(10.0**2 / (2 * A_MAX), abs=0.5)
    assert ego.pose.yaw == 0.0 and not math.isnan(ego.pose.x)
