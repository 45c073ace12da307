"""Jump-adapted Euler scheme for dX^i = Σ_j A_ij(X_-) dZ^j.

Big jumps of each driver are placed at their exact event times and use A at
the left limit. Between two skeleton times the small-jump component moves the
path as a Gaussian with A frozen at the start of the sub-interval. Exit and
hit events are only checked at skeleton times (grid points, and both sides of
every big jump), so exit times are biased upwards.

The engine advances a whole batch of paths at once and reports to monitor
objects; every estimator in the lab is a set of monitors.
"""

import copy
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.lab.config import config
from src.models.box import AnisotropicBox
from src.models.errors import ConfigurationError
from src.models.experiment import SamplingConfig
from src.models.indices import StableIndexSet
from src.models.trajectory import ExitRecord, JumpMark, SchemeSettings, Trajectory
from src.services.coefficient_service import CoefficientField
from src.services.driver_service import _grid_steps, big_jump_rate, small_jump_variance_rate
from src.services.geometry_service import box_halfwidths, contains
from src.utils.parallel import map_chunks
from src.utils.rng import chunk_bounds, chunk_rng, path_rng

logger = logging.getLogger(__name__)

Predicate = Callable[[np.ndarray], np.ndarray]

# Multiples of the box time scale used when the config leaves them open
HORIZON_FACTOR = 20.0
GRID_DIVISOR = 50.0
THRESHOLD_FRACTION = 0.1


def characteristic_time(box: AnisotropicBox) -> float:
    """min_i w_i^{α_i}: time for the fastest axis to cross its halfwidth w_i"""
    widths = box_halfwidths(box)
    return float(np.min(widths ** box.indices.as_array()))


def default_threshold(box: AnisotropicBox) -> float:
    return THRESHOLD_FRACTION * float(np.min(box_halfwidths(box)))


def default_horizon(box: AnisotropicBox) -> float:
    return HORIZON_FACTOR * characteristic_time(box)


def default_grid(box: AnisotropicBox) -> float:
    return characteristic_time(box) / GRID_DIVISOR


def resolve_settings(sampling: SamplingConfig, box: AnisotropicBox,
                     horizon: Optional[float] = None) -> SchemeSettings:
    """Fill unset sampling fields from the monitored box"""
    resolved_horizon = horizon or sampling.horizon or default_horizon(box)
    grid = sampling.grid or default_grid(box)
    threshold = sampling.jump_threshold or default_threshold(box)
    return SchemeSettings(horizon=resolved_horizon, grid=min(grid, resolved_horizon), threshold=threshold)


class PathMonitor:
    """Observer of a batch of paths.

    The engine calls observe() at grid points, on_jump() at every big jump and
    on_interval() for every small-motion sub-interval (with the state at its
    start). A path stops being simulated once every monitor reports it finished.
    """

    def start(self, x0: np.ndarray) -> None:
        self.n = x0.shape[0]

    def finished(self) -> np.ndarray:
        return np.zeros(self.n, dtype=bool)

    def observe(self, idx: np.ndarray, t: np.ndarray, x: np.ndarray) -> None:
        pass

    def on_jump(self, idx: np.ndarray, t: np.ndarray, axis: np.ndarray, h: np.ndarray,
                pre: np.ndarray, post: np.ndarray) -> None:
        self.observe(idx, t, pre)
        self.observe(idx, t, post)

    def on_interval(self, idx: np.ndarray, t: np.ndarray, dt: np.ndarray, x: np.ndarray) -> None:
        pass

    def close(self, horizon: float) -> None:
        pass

    def results(self) -> Dict[str, np.ndarray]:
        raise NotImplementedError


class ExitMonitor(PathMonitor):
    """First monitored time outside an open box"""

    def __init__(self, box: AnisotropicBox):
        self.box = box

    def start(self, x0: np.ndarray) -> None:
        super().start(x0)
        self.exited = ~contains(self.box, x0)
        self.exit_time = np.where(self.exited, 0.0, np.nan)
        self.exit_state = x0.copy()
        self.pre_exit_state = x0.copy()
        self.last = x0.copy()
        self.censored = np.zeros(self.n, dtype=bool)

    def finished(self) -> np.ndarray:
        return self.exited

    def _check_exit(self, idx: np.ndarray, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Record exits among live paths; returns the mask of paths still inside"""
        live = ~self.exited[idx]
        out = live & ~contains(self.box, x)
        sel = idx[out]
        self.exit_time[sel] = t[out]
        self.exit_state[sel] = x[out]
        self.pre_exit_state[sel] = self.last[sel]
        self.exited[sel] = True
        still = live & ~out
        self.last[idx[still]] = x[still]
        return still

    def observe(self, idx, t, x):
        self._check_exit(idx, t, x)

    def close(self, horizon: float) -> None:
        self.censored = ~self.exited
        self.exit_time[self.censored] = horizon
        self.exit_state[self.censored] = self.last[self.censored]
        self.pre_exit_state[self.censored] = self.last[self.censored]

    def results(self) -> Dict[str, np.ndarray]:
        return {
            "exit_time": self.exit_time,
            "exit_state": self.exit_state,
            "pre_exit_state": self.pre_exit_state,
            "censored": self.censored,
        }


class HitMonitor(ExitMonitor):
    """First monitored time in a target set, watched until exit of an enclosing box.

    A state outside the box counts as an exit even if it also lies in the
    target, since the hit must come strictly before the exit.
    """

    def __init__(self, target: Predicate, box: AnisotropicBox, stop_at_hit: bool = True):
        super().__init__(box)
        self.target = target
        self.stop_at_hit = stop_at_hit

    def start(self, x0: np.ndarray) -> None:
        super().start(x0)
        self.hit = ~self.exited & self.target(x0)
        self.hit_time = np.where(self.hit, 0.0, np.nan)
        self.hit_state = np.where(self.hit[:, None], x0, np.nan)

    def finished(self) -> np.ndarray:
        if self.stop_at_hit:
            return self.exited | self.hit
        return self.exited

    def observe(self, idx, t, x):
        inside = self._check_exit(idx, t, x)
        fresh = inside & ~self.hit[idx]
        if np.any(fresh):
            fresh[fresh] = self.target(x[fresh])
            sel = idx[fresh]
            self.hit[sel] = True
            self.hit_time[sel] = t[fresh]
            self.hit_state[sel] = x[fresh]

    def on_jump(self, idx, t, axis, h, pre, post):
        # pre-jump state is seen an instant earlier so that hit_time < exit_time
        self.observe(idx, np.nextafter(t, -np.inf), pre)
        self.observe(idx, t, post)

    def close(self, horizon: float) -> None:
        super().close(horizon)
        if self.stop_at_hit:
            self.censored &= ~self.hit

    def results(self) -> Dict[str, np.ndarray]:
        out = super().results()
        out.update(hit=self.hit, hit_time=self.hit_time, hit_state=self.hit_state)
        return out


class TubeMonitor(PathMonitor):
    """Whether |X_s - φ(s)| < ε at every monitored s ≤ t_end"""

    def __init__(self, curve: Callable[[np.ndarray], np.ndarray], epsilon: float, t_end: float):
        self.curve = curve
        self.epsilon = float(epsilon)
        self.t_end = float(t_end)

    def start(self, x0: np.ndarray) -> None:
        super().start(x0)
        dist = np.linalg.norm(x0 - self.curve(np.zeros(self.n)), axis=1)
        self.failed = dist >= self.epsilon
        self.reached = np.zeros(self.n, dtype=bool)

    def finished(self) -> np.ndarray:
        return self.failed | self.reached

    def observe(self, idx, t, x):
        live = ~self.failed[idx] & ~self.reached[idx]
        in_window = live & (t <= self.t_end)
        if np.any(in_window):
            dist = np.linalg.norm(x[in_window] - self.curve(t[in_window]), axis=1)
            self.failed[idx[in_window][dist >= self.epsilon]] = True
        self.reached[idx[live & (t >= self.t_end * (1.0 - 1e-12))]] = True

    def results(self) -> Dict[str, np.ndarray]:
        return {"inside": ~self.failed & self.reached}


class TerminalMonitor(PathMonitor):
    """State at a fixed time, which must be the horizon or a grid point"""

    def __init__(self, t_end: float):
        self.t_end = float(t_end)

    def start(self, x0: np.ndarray) -> None:
        super().start(x0)
        self.state = x0.copy()
        self.reached = np.zeros(self.n, dtype=bool)

    def finished(self) -> np.ndarray:
        return self.reached

    def observe(self, idx, t, x):
        live = ~self.reached[idx] & (t <= self.t_end * (1.0 + 1e-12))
        self.state[idx[live]] = x[live]
        self.reached[idx[live & (t >= self.t_end * (1.0 - 1e-12))]] = True

    def results(self) -> Dict[str, np.ndarray]:
        return {"state": self.state, "reached": self.reached}


class TransitionMonitor(PathMonitor):
    """Jumps from D into E, and the integrated intensity ∫ 1_D(X_s) κ(X_s, E) ds"""

    def __init__(self, source: Predicate, target: Predicate, intensity: Callable[[np.ndarray], np.ndarray]):
        self.source = source
        self.target = target
        self.intensity = intensity

    def start(self, x0: np.ndarray) -> None:
        super().start(x0)
        self.count = np.zeros(self.n, dtype=np.int64)
        self.integral = np.zeros(self.n)

    def on_jump(self, idx, t, axis, h, pre, post):
        moved = self.source(pre) & self.target(post)
        np.add.at(self.count, idx[moved], 1)

    def on_interval(self, idx, t, dt, x):
        in_source = self.source(x)
        if np.any(in_source):
            rate = self.intensity(x[in_source])
            self.integral[idx[in_source]] += dt[in_source] * rate

    def results(self) -> Dict[str, np.ndarray]:
        return {"count": self.count, "integral": self.integral}


class JumpEventMonitor(PathMonitor):
    """Stay γ-close to x0 until the first big jump of one driver, then γ-close
    to x0 + ξ v until t_end.

    With ξ = 0 the jump time is taken as 0 and the event is staying γ-close to
    x0 on [0, t_end].
    """

    def __init__(self, x0: Sequence[float], axis: int, xi: float, gamma: float,
                 t_end: float, direction: Sequence[float]):
        self.origin = np.asarray(x0, dtype=float)
        self.axis = int(axis)
        self.xi = float(xi)
        self.gamma = float(gamma)
        self.t_end = float(t_end)
        self.landing = self.origin + self.xi * np.asarray(direction, dtype=float)

    def start(self, x0: np.ndarray) -> None:
        super().start(x0)
        self.jumped = np.full(self.n, self.xi == 0.0)
        self.jump_time = np.where(self.jumped, 0.0, np.nan)
        self.failed = np.linalg.norm(x0 - self.origin, axis=1) >= self.gamma
        self.reached = np.zeros(self.n, dtype=bool)

    def finished(self) -> np.ndarray:
        return self.failed | self.reached

    def observe(self, idx, t, x):
        live = ~self.failed[idx] & ~self.reached[idx]
        if not np.any(live):
            return
        anchor = np.where(self.jumped[idx][:, None], self.landing, self.origin)
        far = np.linalg.norm(x - anchor, axis=1) >= self.gamma
        self.failed[idx[live & far]] = True
        self.reached[idx[live & ~far & (t >= self.t_end * (1.0 - 1e-12))]] = True

    def on_jump(self, idx, t, axis, h, pre, post):
        self.observe(idx, t, pre)
        first = (axis == self.axis) & ~self.jumped[idx] & ~self.failed[idx]
        sel = idx[first]
        self.jumped[sel] = True
        self.jump_time[sel] = t[first]
        self.observe(idx, t, post)

    def results(self) -> Dict[str, np.ndarray]:
        return {"success": self.reached & self.jumped & ~self.failed, "jump_time": self.jump_time}


class TrajectoryRecorder(PathMonitor):
    """Keeps the full skeleton of every path; meant for small batches"""

    def start(self, x0: np.ndarray) -> None:
        super().start(x0)
        self.trajectories = [Trajectory() for _ in range(self.n)]
        for traj, state in zip(self.trajectories, x0):
            traj.append(0.0, state)

    @staticmethod
    def _stamp(traj: Trajectory, t: float) -> float:
        # float ties between events are kept in processing order
        last = traj.times[-1]
        return float(t) if t > last else float(np.nextafter(last, np.inf))

    def observe(self, idx, t, x):
        for p, tp, xp in zip(idx, t, x):
            traj = self.trajectories[p]
            traj.append(self._stamp(traj, tp), xp)

    def on_jump(self, idx, t, axis, h, pre, post):
        for p, tp, j, hp, xa, xb in zip(idx, t, axis, h, pre, post):
            traj = self.trajectories[p]
            stamp = self._stamp(traj, tp)
            traj.jump_marks.append(JumpMark(stamp, int(j), float(hp), xa.copy(), xb.copy()))
            traj.append(stamp, xb)

    def results(self) -> Dict[str, np.ndarray]:
        paths = np.empty(self.n, dtype=object)
        for i, traj in enumerate(self.trajectories):
            paths[i] = traj
        return {"trajectory": paths}


class SDEEngine:
    """Batch simulator for one coefficient field and index set"""

    def __init__(self, coefficients: CoefficientField, indices: StableIndexSet, settings: SchemeSettings):
        if coefficients.dim != indices.dim:
            raise ConfigurationError(
                f"coefficient field has d={coefficients.dim}, indices have d={indices.dim}"
            )
        if settings.threshold >= config.MAX_JUMP_THRESHOLD:
            raise ConfigurationError(f"jump threshold {settings.threshold} is too large")
        self.coefficients = coefficients
        self.indices = indices
        self.settings = settings
        self.alphas = indices.as_array()
        self.rates = np.array([big_jump_rate(a, settings.threshold) for a in self.alphas])
        self.sigmas = np.sqrt([small_jump_variance_rate(a, settings.threshold) for a in self.alphas])

    def run_batch(self, x0: np.ndarray, monitors: Sequence[PathMonitor], rng: np.random.Generator) -> None:
        x = np.array(x0, dtype=float, copy=True)
        for monitor in monitors:
            monitor.start(x)
        active = np.flatnonzero(~self._all_finished(monitors))

        steps = _grid_steps(self.settings.horizon, self.settings.grid)
        t = 0.0
        for k, dt in enumerate(steps):
            if active.size == 0:
                break
            t_next = self.settings.horizon if k == steps.size - 1 else (k + 1) * self.settings.grid
            self._advance(x, active, t, t_next, monitors, rng)
            t = t_next
            active = active[~self._all_finished(monitors)[active]]

        for monitor in monitors:
            monitor.close(self.settings.horizon)

    @staticmethod
    def _all_finished(monitors: Sequence[PathMonitor]) -> np.ndarray:
        done = monitors[0].finished().copy()
        for monitor in monitors[1:]:
            done &= monitor.finished()
        return done

    def _small_move(self, x, idx, t_start, t_end, monitors, rng) -> None:
        span = t_end - t_start
        noise = rng.standard_normal((idx.size, self.indices.dim)) * self.sigmas * np.sqrt(span)[:, None]
        start = x[idx]
        for monitor in monitors:
            monitor.on_interval(idx, t_start, span, start)
        mats = self.coefficients.checked_evaluate(start)
        x[idx] = start + np.einsum("nij,nj->ni", mats, noise)

    def _advance(self, x, active, t0, t1, monitors, rng) -> None:
        n_active, dim = active.size, self.indices.dim
        dt = t1 - t0
        current = np.full(n_active, t0)

        counts = rng.poisson(self.rates * dt, size=(n_active, dim))
        total = int(counts.sum())
        if total:
            rows, axes = np.nonzero(counts)
            reps = counts[rows, axes]
            ev_row = np.repeat(rows, reps)
            ev_axis = np.repeat(axes, reps)
            ev_time = t0 + dt * rng.random(total)
            u = 1.0 - rng.random(total)
            sign = np.where(rng.random(total) < 0.5, -1.0, 1.0)
            ev_size = sign * self.settings.threshold * u ** (-1.0 / self.alphas[ev_axis])

            # path, then time, then axis for float ties
            order = np.lexsort((ev_axis, ev_time, ev_row))
            ev_row, ev_axis, ev_time, ev_size = ev_row[order], ev_axis[order], ev_time[order], ev_size[order]
            rank = np.arange(total) - np.searchsorted(ev_row, ev_row, side="left")

            for m in range(int(rank.max()) + 1):
                sel = rank == m
                rows_m = ev_row[sel]
                idx = active[rows_m]
                t_event = ev_time[sel]
                self._small_move(x, idx, current[rows_m], t_event, monitors, rng)

                pre = x[idx]
                mats = self.coefficients.checked_evaluate(pre)
                columns = mats[np.arange(idx.size), :, ev_axis[sel]]
                post = pre + ev_size[sel, None] * columns
                x[idx] = post
                for monitor in monitors:
                    monitor.on_jump(idx, t_event, ev_axis[sel], ev_size[sel], pre, post)
                current[rows_m] = t_event

        self._small_move(x, active, current, np.full(n_active, t1), monitors, rng)
        t_grid = np.full(n_active, t1)
        states = x[active]
        for monitor in monitors:
            monitor.observe(active, t_grid, states)


@dataclass
class EnsembleResult:
    """Concatenated monitor results of an ensemble, in path order"""

    n_paths: int
    settings: SchemeSettings
    results: List[Dict[str, np.ndarray]]
    wall_time: float = 0.0
    chunks: int = 0
    notes: List[str] = field(default_factory=list)

    def __getitem__(self, i: int) -> Dict[str, np.ndarray]:
        return self.results[i]


def _starting_points(x0, n: int, dim: int) -> np.ndarray:
    pts = np.asarray(x0, dtype=float)
    if pts.ndim == 1:
        if pts.size != dim:
            raise ConfigurationError(f"x0 has dimension {pts.size}, expected {dim}")
        return np.broadcast_to(pts, (n, dim)).copy()
    if pts.shape != (n, dim):
        raise ConfigurationError(f"starting points have shape {pts.shape}, expected {(n, dim)}")
    return pts


def _simulate_chunk(task) -> List[Dict[str, np.ndarray]]:
    coefficients, indices, settings, x0, monitors, seed, chunk_index = task
    engine = SDEEngine(coefficients, indices, settings)
    own = copy.deepcopy(list(monitors))
    engine.run_batch(x0, own, chunk_rng(seed, chunk_index))
    return [monitor.results() for monitor in own]


def simulate_ensemble(x0, n: int, coefficients: CoefficientField, indices: StableIndexSet,
                      monitors: Sequence[PathMonitor], settings: SchemeSettings, seed: int,
                      threads: int = 1, chunk_size: Optional[int] = None) -> EnsembleResult:
    """Run n paths in fixed-size chunks and merge monitor results in path order.

    Chunk c always draws from the stream (seed, c), so the outcome is the same
    for any number of threads.
    """
    if n <= 0:
        raise ConfigurationError(f"number of paths must be positive, got {n}")
    if not monitors:
        raise ConfigurationError("simulate_ensemble needs at least one monitor")
    chunk_size = chunk_size or config.CHUNK_SIZE
    starts = _starting_points(x0, n, indices.dim)

    bounds = chunk_bounds(n, chunk_size)
    tasks = [
        (coefficients, indices, settings, starts[lo:hi], list(monitors), seed, c)
        for c, lo, hi in bounds
    ]
    began = time.perf_counter()
    parts = map_chunks(_simulate_chunk, tasks, threads)
    merged = [
        {key: np.concatenate([part[m][key] for part in parts]) for key in parts[0][m]}
        for m in range(len(monitors))
    ]
    elapsed = time.perf_counter() - began
    logger.debug(f"Simulated {n} paths in {len(bounds)} chunks ({elapsed:.2f}s)")
    return EnsembleResult(n_paths=n, settings=settings, results=merged, wall_time=elapsed, chunks=len(bounds))


def _single(x0, coefficients, indices, settings, monitors, seed, path_index) -> None:
    engine = SDEEngine(coefficients, indices, settings)
    start = _starting_points(x0, 1, indices.dim)
    engine.run_batch(start, monitors, path_rng(seed, path_index))


def simulate_path(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
                  settings: SchemeSettings, seed: int, path_index: int = 0) -> Trajectory:
    """One skeleton path on [0, settings.horizon]"""
    recorder = TrajectoryRecorder()
    _single(x0, coefficients, indices, settings, [recorder], seed, path_index)
    return recorder.trajectories[0]


def _record(monitor: ExitMonitor, elapsed: float, hit: bool = False) -> ExitRecord:
    out = monitor.results()
    record = dict(
        exit_time=float(out["exit_time"][0]),
        exit_state=out["exit_state"][0].copy(),
        pre_exit_state=out["pre_exit_state"][0].copy(),
        censored=bool(out["censored"][0]),
        elapsed=elapsed,
    )
    if hit and out["hit"][0]:
        record.update(hit_time=float(out["hit_time"][0]), hit_state=out["hit_state"][0].copy())
    return ExitRecord(**record)


def first_exit(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
               box: AnisotropicBox, settings: SchemeSettings, seed: int, path_index: int = 0) -> ExitRecord:
    """First monitored exit from the box; censored at the horizon"""
    monitor = ExitMonitor(box)
    _single(x0, coefficients, indices, settings, [monitor], seed, path_index)
    elapsed = float(monitor.exit_time[0]) if monitor.exited[0] else settings.horizon
    return _record(monitor, elapsed)


def first_hit(x0: Sequence[float], coefficients: CoefficientField, indices: StableIndexSet,
              target: Predicate, box: AnisotropicBox, settings: SchemeSettings, seed: int,
              path_index: int = 0) -> ExitRecord:
    """First monitored hit of the target, followed until exit of the enclosing box"""
    monitor = HitMonitor(target, box, stop_at_hit=False)
    _single(x0, coefficients, indices, settings, [monitor], seed, path_index)
    elapsed = float(monitor.exit_time[0]) if monitor.exited[0] else settings.horizon
    return _record(monitor, elapsed, hit=True)


def count_transitions(trajectory: Trajectory, source: Predicate, target: Predicate) -> int:
    """Number of jump marks with pre-state in source and post-state in target"""
    if not trajectory.jump_marks:
        return 0
    pre = np.vstack([mark.pre_state for mark in trajectory.jump_marks])
    post = np.vstack([mark.post_state for mark in trajectory.jump_marks])
    return int(np.count_nonzero(source(pre) & target(post)))


def time_scale_note(settings: SchemeSettings) -> str:
    steps = int(math.ceil(settings.horizon / settings.grid - 1e-12))
    return f"horizon={settings.horizon:.4g}, grid={settings.grid:.4g} ({steps} steps), threshold={settings.threshold:.4g}"
