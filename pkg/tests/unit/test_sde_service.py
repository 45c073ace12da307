"""Unit tests for the jump-adapted Euler engine and its monitors"""

import math

import numpy as np
import pytest

from src.models import SamplingConfig, SchemeSettings, Trajectory
from src.models.errors import ConfigurationError, StableDomainError
from src.models.trajectory import JumpMark
from src.services.coefficient_service import ConstantField
from src.services.geometry_service import BoxUnion, contains
from src.services.sde_service import (
    ExitMonitor,
    HitMonitor,
    JumpEventMonitor,
    SDEEngine,
    TerminalMonitor,
    TrajectoryRecorder,
    TransitionMonitor,
    TubeMonitor,
    characteristic_time,
    count_transitions,
    first_exit,
    first_hit,
    resolve_settings,
    simulate_ensemble,
    simulate_path,
    time_scale_note,
)


@pytest.fixture
def settings():
    return SchemeSettings(horizon=1.0, grid=0.05, threshold=0.05)


class TestSettings:
    """Test default horizon, grid and threshold"""

    def test_defaults_from_box(self, unit_box):
        """Test defaults derived from the unit box"""
        assert characteristic_time(unit_box) == pytest.approx(1.0)
        resolved = resolve_settings(SamplingConfig(), unit_box)
        assert resolved.horizon == pytest.approx(20.0)
        assert resolved.grid == pytest.approx(0.02)
        assert resolved.threshold == pytest.approx(0.1)

    def test_explicit_values_win(self, unit_box):
        """Test configured values override the defaults"""
        resolved = resolve_settings(SamplingConfig(horizon=2.0, grid=5.0, jump_threshold=0.3), unit_box)
        assert resolved.horizon == 2.0
        assert resolved.grid == 2.0
        assert resolved.threshold == 0.3

    def test_with_horizon_clamps_grid(self, settings):
        """Test shrinking the horizon below the grid clamps the grid"""
        short = settings.with_horizon(0.01)
        assert short.grid == 0.01
        assert settings.with_horizon(4.0).grid == settings.grid

    @pytest.mark.parametrize("kwargs", [
        {"horizon": 0.0, "grid": 0.1, "threshold": 0.1},
        {"horizon": 1.0, "grid": 2.0, "threshold": 0.1},
        {"horizon": 1.0, "grid": 0.1, "threshold": 0.0},
    ])
    def test_invalid(self, kwargs):
        """Test invalid settings"""
        with pytest.raises(StableDomainError):
            SchemeSettings(**kwargs)

    def test_trajectory_times_must_increase(self):
        """Test a skeleton refuses a time that does not follow the last one"""
        traj = Trajectory()
        traj.append(0.0, [0.0, 0.0])
        with pytest.raises(StableDomainError, match="does not follow"):
            traj.append(0.0, [1.0, 0.0])

    def test_note(self, settings):
        """Test the human readable summary"""
        assert "20 steps" in time_scale_note(settings)


class TestEngine:
    """Test path simulation"""

    def test_dimension_mismatch(self, settings, indices_3d):
        """Test coefficient and index dimensions must agree"""
        with pytest.raises(ConfigurationError):
            SDEEngine(ConstantField(np.eye(2)), indices_3d, settings)

    def test_jumps_use_left_limit(self, rotation, indices):
        """Test every jump moves by h times the column of A at the pre-jump state"""
        settings = SchemeSettings(horizon=2.0, grid=0.1, threshold=0.02)
        traj = simulate_path([0.0, 0.0], rotation, indices, settings, seed=5)
        assert traj.jump_marks
        for mark in traj.jump_marks:
            column = rotation.column(mark.pre_state, mark.axis)
            assert mark.post_state == pytest.approx(mark.pre_state + mark.size * column)

    def test_trajectory_times_increase(self, identity, indices, settings):
        """Test skeleton times increase strictly and end at the horizon"""
        traj = simulate_path([0.0, 0.0], identity, indices, settings, seed=6)
        times, states = traj.as_arrays()
        assert np.all(np.diff(times) > 0)
        assert times[-1] == pytest.approx(1.0)
        assert states.shape == (len(traj), 2)

    def test_same_seed_same_path(self, identity, indices, settings):
        """Test a path is a function of (seed, path index)"""
        a = simulate_path([0.0, 0.0], identity, indices, settings, seed=9, path_index=3)
        b = simulate_path([0.0, 0.0], identity, indices, settings, seed=9, path_index=3)
        c = simulate_path([0.0, 0.0], identity, indices, settings, seed=9, path_index=4)
        assert np.array_equal(a.as_arrays()[1], b.as_arrays()[1])
        assert not np.array_equal(a.final_state, c.final_state)

    def test_marginal_law(self, identity, indices):
        """Test E cos(ξ X^i_1) ≈ exp(-|ξ|^α_i) with identity coefficients"""
        settings = SchemeSettings(horizon=1.0, grid=0.1, threshold=0.05)
        result = simulate_ensemble([0.0, 0.0], 20_000, identity, indices, [TerminalMonitor(1.0)], settings, seed=3)
        state = result[0]["state"]
        assert result[0]["reached"].all()
        for i in range(indices.dim):
            values = np.cos(state[:, i])
            se = values.std(ddof=1) / math.sqrt(values.size)
            assert abs(values.mean() - math.exp(-1.0)) <= 4 * se + 0.01


class TestEnsemble:
    """Test chunked ensembles"""

    def test_thread_count_does_not_matter(self, rotation, indices, unit_box):
        """Test one and two workers give identical results for the same chunks"""
        settings = SchemeSettings(horizon=5.0, grid=0.05, threshold=0.1)
        box = unit_box.with_dilation(0.5)
        one = simulate_ensemble([0.0, 0.0], 300, rotation, indices, [ExitMonitor(box)], settings, seed=21,
                                threads=1, chunk_size=100)
        two = simulate_ensemble([0.0, 0.0], 300, rotation, indices, [ExitMonitor(box)], settings, seed=21,
                                threads=2, chunk_size=100)
        assert one.chunks == 3
        for key in ("exit_time", "exit_state", "censored"):
            assert np.array_equal(one[0][key], two[0][key])

    def test_exit_records(self, identity, indices, unit_box):
        """Test exit states lie outside and pre-exit states inside the box"""
        box = unit_box.with_dilation(0.3)
        settings = resolve_settings(SamplingConfig(), box)
        result = simulate_ensemble([0.0, 0.0], 500, identity, indices, [ExitMonitor(box)], settings, seed=4)
        out = result[0]
        done = ~out["censored"]
        assert done.mean() > 0.99
        assert not contains(box, out["exit_state"][done]).any()
        assert contains(box, out["pre_exit_state"][done]).all()
        assert np.all(out["exit_time"] <= settings.horizon)

    def test_start_outside_exits_at_zero(self, identity, indices, unit_box, settings):
        """Test a start outside the box is an exit at time 0"""
        result = simulate_ensemble([2.0, 0.0], 10, identity, indices, [ExitMonitor(unit_box)], settings, seed=1)
        assert np.all(result[0]["exit_time"] == 0.0)

    def test_per_path_starts(self, identity, indices, unit_box, settings):
        """Test an (n, d) array of starting points, one of them outside the box"""
        starts = np.array([[0.0, 0.0], [2.0, 0.0], [-0.5, 0.0]])
        result = simulate_ensemble(starts, 3, identity, indices, [ExitMonitor(unit_box)], settings, seed=2)
        times = result[0]["exit_time"]
        assert times[1] == 0.0
        assert times[0] > 0.0 and times[2] > 0.0

    def test_invalid_requests(self, identity, indices, settings):
        """Test empty ensembles, missing monitors and wrong starting shapes"""
        with pytest.raises(ConfigurationError):
            simulate_ensemble([0.0, 0.0], 0, identity, indices, [TerminalMonitor(1.0)], settings, seed=1)
        with pytest.raises(ConfigurationError):
            simulate_ensemble([0.0, 0.0], 5, identity, indices, [], settings, seed=1)
        with pytest.raises(ConfigurationError):
            simulate_ensemble(np.zeros((4, 2)), 5, identity, indices, [TerminalMonitor(1.0)], settings, seed=1)


class TestMonitors:
    """Test monitors in isolation"""

    def test_exit_takes_precedence_over_hit(self, unit_box):
        """Test a state outside the box never counts as a hit"""
        monitor = HitMonitor(lambda y: y[:, 0] > 0.9, unit_box)
        monitor.start(np.zeros((1, 2)))
        monitor.observe(np.array([0]), np.array([0.1]), np.array([[1.5, 0.0]]))
        out = monitor.results()
        assert out["exit_time"][0] == 0.1
        assert not out["hit"][0]

    def test_hit_inside(self, unit_box):
        """Test a hit inside the box is recorded with its time and state"""
        monitor = HitMonitor(lambda y: y[:, 0] > 0.9, unit_box)
        monitor.start(np.zeros((1, 2)))
        monitor.observe(np.array([0]), np.array([0.2]), np.array([[0.95, 0.0]]))
        assert monitor.finished()[0]
        out = monitor.results()
        assert out["hit"][0] and out["hit_time"][0] == 0.2
        assert out["hit_state"][0] == pytest.approx([0.95, 0.0])

    def test_hit_then_exit_at_one_jump(self, unit_box):
        """Test a pre-jump hit followed by a jump out of the box is ordered before the exit"""
        monitor = HitMonitor(lambda y: y[:, 0] > 0.9, unit_box, stop_at_hit=False)
        monitor.start(np.zeros((1, 2)))
        idx = np.array([0])
        monitor.on_jump(idx, np.array([0.4]), np.array([0]), np.array([1.0]),
                        np.array([[0.95, 0.0]]), np.array([[1.95, 0.0]]))
        out = monitor.results()
        assert out["hit"][0]
        assert out["hit_time"][0] < out["exit_time"][0] == 0.4
        assert out["hit_state"][0] == pytest.approx([0.95, 0.0])

    def test_recorder_keeps_jump_marks(self):
        """Test recorded skeletons carry every jump and keep strictly increasing times"""
        monitor = TrajectoryRecorder()
        monitor.start(np.zeros((2, 2)))
        idx = np.array([0, 1])
        monitor.observe(idx, np.array([0.1, 0.1]), np.array([[0.1, 0.0], [0.0, 0.1]]))
        monitor.on_jump(np.array([0]), np.array([0.1]), np.array([1]), np.array([0.5]),
                        np.array([[0.1, 0.0]]), np.array([[0.1, 0.5]]))
        paths = monitor.results()["trajectory"]
        times, states = paths[0].as_arrays()
        assert np.all(np.diff(times) > 0)
        assert states[-1] == pytest.approx([0.1, 0.5])
        assert len(paths[0].jump_marks) == 1 and not paths[1].jump_marks
        mark = paths[0].jump_marks[0]
        assert (mark.axis, mark.size) == (1, 0.5)
        assert len(paths[1]) == 2

    def test_tube(self):
        """Test leaving the tube fails the path even if it comes back"""
        monitor = TubeMonitor(lambda t: np.zeros((np.size(t), 2)), 0.5, 1.0)
        monitor.start(np.zeros((2, 2)))
        idx = np.array([0, 1])
        monitor.observe(idx, np.array([0.5, 0.5]), np.array([[0.1, 0.0], [0.7, 0.0]]))
        monitor.observe(idx, np.array([1.0, 1.0]), np.array([[0.1, 0.0], [0.1, 0.0]]))
        assert monitor.results()["inside"].tolist() == [True, False]

    def test_transition_counts_and_integral(self):
        """Test D -> E jumps are counted and intensity integrated over D only"""
        source = lambda y: np.abs(y[:, 0]) < 1.0  # noqa: E731
        target = lambda y: y[:, 0] > 2.0  # noqa: E731
        monitor = TransitionMonitor(source, target, lambda y: np.full(len(y), 3.0))
        monitor.start(np.zeros((2, 2)))
        idx = np.array([0, 1])
        monitor.on_interval(idx, np.zeros(2), np.array([0.5, 0.5]), np.array([[0.0, 0.0], [1.5, 0.0]]))
        monitor.on_jump(idx, np.array([0.5, 0.5]), np.zeros(2, dtype=int), np.array([2.5, 2.5]),
                        np.array([[0.0, 0.0], [1.5, 0.0]]), np.array([[2.5, 0.0], [4.0, 0.0]]))
        out = monitor.results()
        assert out["count"].tolist() == [1, 0]
        assert out["integral"] == pytest.approx([1.5, 0.0])

    def test_targeted_jump_without_jump(self):
        """Test ξ = 0 reduces to staying γ-close"""
        monitor = JumpEventMonitor([0.0, 0.0], 0, 0.0, 0.2, 1.0, [1.0, 0.0])
        monitor.start(np.zeros((1, 2)))
        monitor.observe(np.array([0]), np.array([1.0]), np.array([[0.1, 0.0]]))
        out = monitor.results()
        assert out["success"][0]
        assert out["jump_time"][0] == 0.0

    def test_targeted_jump_landing(self):
        """Test the jump of the chosen driver switches the anchor to the landing point"""
        monitor = JumpEventMonitor([0.0, 0.0], 1, 0.5, 0.2, 1.0, [0.0, 1.0])
        monitor.start(np.zeros((1, 2)))
        idx = np.array([0])
        monitor.on_jump(idx, np.array([0.3]), np.array([1]), np.array([0.5]),
                        np.array([[0.0, 0.0]]), np.array([[0.0, 0.55]]))
        monitor.observe(idx, np.array([1.0]), np.array([[0.05, 0.5]]))
        out = monitor.results()
        assert out["success"][0]
        assert out["jump_time"][0] == 0.3


class TestSinglePaths:
    """Test first_exit, first_hit and transition counting"""

    def test_first_exit(self, identity, indices, unit_box):
        """Test the exit record of a single path"""
        box = unit_box.with_dilation(0.2)
        record = first_exit([0.0, 0.0], identity, indices, box, resolve_settings(SamplingConfig(), box), seed=8)
        assert not record.censored
        assert not contains(box, record.exit_state)
        assert record.elapsed == record.exit_time
        assert not record.hit_before_exit

    def test_first_hit_at_start(self, identity, indices, unit_box, settings):
        """Test a start inside the target is a hit at time 0"""
        target = BoxUnion([unit_box.with_dilation(0.1)])
        record = first_hit([0.0, 0.0], identity, indices, target, unit_box, settings, seed=8)
        assert record.hit_before_exit
        assert record.hit_time == 0.0

    def test_count_transitions(self):
        """Test counting marks whose pre-state is in D and post-state in E"""
        traj = Trajectory()
        traj.append(0.0, np.zeros(2))
        traj.jump_marks.append(JumpMark(0.1, 0, 3.0, np.zeros(2), np.array([3.0, 0.0])))
        traj.jump_marks.append(JumpMark(0.2, 0, 3.0, np.array([3.0, 0.0]), np.array([6.0, 0.0])))
        source = lambda y: np.abs(y[:, 0]) < 1.0  # noqa: E731
        target = lambda y: y[:, 0] > 2.0  # noqa: E731
        assert count_transitions(traj, source, target) == 1
        assert count_transitions(Trajectory(), source, target) == 0
