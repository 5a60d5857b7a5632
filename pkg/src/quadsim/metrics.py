"""Step-response performance metrics computed from logged trajectories."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import QuadSimError

TRAJECTORY_COLUMNS = (
    "t",
    "phi",
    "phi_dot",
    "theta",
    "theta_dot",
    "psi",
    "psi_dot",
    "u1",
    "u2",
    "u3",
    "reward",
)

AXIS_ANGLE_INDEX = {"roll": 0, "pitch": 2, "yaw": 4}

# Human-readable metric labels, in reporting order, mapped to field names.
METRIC_ROWS = (
    ("Computation Time (sec)", "computation_time"),
    ("Rise Time (sec)", "rise_time"),
    ("Settling Time (sec)", "settling_time"),
    ("Overshoot Percentage (%)", "overshoot_pct"),
    ("Peak Time (sec)", "peak_time"),
    ("Steady State Error (rad)", "steady_state_error"),
    ("Total Reward (unitless)", "total_reward"),
)


@dataclass(eq=False)
class Trajectory:
    """One logged episode at the control rate.

    ``observations`` may be None when a trajectory is rebuilt from CSV,
    which stores only the true state, torque and reward series.
    """

    t: np.ndarray
    states: np.ndarray
    torques: np.ndarray
    rewards: np.ndarray
    observations: np.ndarray | None = None
    wall_time: float = 0.0

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        self.torques = np.asarray(self.torques, dtype=float)
        self.rewards = np.asarray(self.rewards, dtype=float)
        n = self.t.shape[0]
        if n == 0:
            raise QuadSimError("trajectory is empty")
        if np.any(np.diff(self.t) <= 0.0):
            raise QuadSimError("trajectory time grid must be strictly increasing")
        if self.states.shape != (n, 6) or self.torques.shape != (n, 3) or self.rewards.shape != (n,):
            raise QuadSimError("trajectory series must have equal lengths")
        if self.observations is not None:
            self.observations = np.asarray(self.observations, dtype=float)
            if self.observations.shape != (n, 6):
                raise QuadSimError("trajectory series must have equal lengths")

    def __len__(self) -> int:
        return self.t.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRAJECTORY_COLUMNS)
            for i in range(len(self)):
                row = [self.t[i], *self.states[i], *self.torques[i], self.rewards[i]]
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != TRAJECTORY_COLUMNS:
                raise QuadSimError(f"unexpected trajectory CSV header: {header}")
            rows = [[float(v) for v in row] for row in reader]
        if not rows:
            raise QuadSimError("trajectory is empty")
        data = np.asarray(rows)
        return cls(t=data[:, 0], states=data[:, 1:7], torques=data[:, 7:10], rewards=data[:, 10])


@dataclass(frozen=True)
class MetricThresholds:
    """Conventions used by compute_metrics; the defaults are the textbook ones."""

    rise_low: float = 0.1
    rise_high: float = 0.9
    settling_band: float = 0.02
    steady_state_tail: float = 0.1


@dataclass(frozen=True)
class StepResponseMetrics:
    computation_time: float
    rise_time: float
    settling_time: float
    overshoot_pct: float
    peak_time: float
    steady_state_error: float
    total_reward: float
    did_not_rise: bool = False

    def as_dict(self) -> dict:
        return {
            "computation_time": self.computation_time,
            "rise_time": self.rise_time,
            "settling_time": self.settling_time,
            "overshoot_pct": self.overshoot_pct,
            "peak_time": self.peak_time,
            "steady_state_error": self.steady_state_error,
            "total_reward": self.total_reward,
            "did_not_rise": self.did_not_rise,
        }


def compute_metrics(
    traj: Trajectory,
    axis: str,
    step_ref: float,
    thresholds: MetricThresholds = MetricThresholds(),
) -> StepResponseMetrics:
    """Step-response metrics for one axis of a trajectory.

    Assumes the reference is a constant step of amplitude ``step_ref`` and the
    plant started at rest. Rise time is the 10-90% definition, settling time
    the earliest time after which the response stays inside the +-2% band,
    and the steady-state error is measured against the mean of the final 10%
    of the episode. Peak time is the argmax of the raw response even when
    there is no overshoot.
    """
    if axis not in AXIS_ANGLE_INDEX:
        raise ValueError(f"axis must be one of {tuple(AXIS_ANGLE_INDEX)}, got {axis!r}")
    if not (math.isfinite(step_ref) and step_ref != 0.0):
        raise ValueError(f"step_ref must be finite and nonzero, got {step_ref!r}")

    t = traj.t
    y = traj.states[:, AXIS_ANGLE_INDEX[axis]]
    t_end = float(t[-1])
    yn = y / step_ref  # normalized: target value 1, same sign conventions

    crossed_low = np.flatnonzero(yn >= thresholds.rise_low)
    crossed_high = np.flatnonzero(yn >= thresholds.rise_high)
    did_not_rise = crossed_low.size == 0
    if did_not_rise or crossed_high.size == 0:
        rise_time = t_end
        settling_time = t_end
    else:
        rise_time = float(t[crossed_high[0]] - t[crossed_low[0]])
        settling_time = _settling_time(t, yn, thresholds.settling_band, t_end)

    peak_idx = int(np.argmax(yn))
    peak_time = float(t[peak_idx])
    overshoot_pct = max(0.0, (float(yn[peak_idx]) - 1.0) * 100.0)

    tail = max(1, math.ceil(thresholds.steady_state_tail * len(traj)))
    steady_state_error = abs(step_ref - float(np.mean(y[-tail:])))

    return StepResponseMetrics(
        computation_time=traj.wall_time,
        rise_time=rise_time,
        settling_time=settling_time,
        overshoot_pct=overshoot_pct,
        peak_time=peak_time,
        steady_state_error=steady_state_error,
        total_reward=float(np.sum(traj.rewards)),
        did_not_rise=did_not_rise,
    )


def _settling_time(t, yn, band, t_end) -> float:
    outside = np.flatnonzero(np.abs(yn - 1.0) > band)
    if outside.size == 0:
        return 0.0
    last_out = outside[-1]
    if last_out == len(yn) - 1:
        return t_end  # never settles within the episode
    return float(t[last_out + 1])


@dataclass(eq=False)
class MetricsTable:
    """Named metric rows for several controllers, in fixed reporting order."""

    labels: list[str] = field(default_factory=list)
    results: dict = field(default_factory=dict)

    def add(self, label: str, metrics: StepResponseMetrics) -> None:
        self.labels.append(label)
        self.results[label] = metrics

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", *self.labels])
            for title, attr in METRIC_ROWS:
                writer.writerow([title, *(repr(float(getattr(self.results[lb], attr))) for lb in self.labels)])

    def to_json(self, path) -> None:
        payload = {
            "metric_order": [title for title, _ in METRIC_ROWS],
            "results": {label: self.results[label].as_dict() for label in self.labels},
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")

    def render_text(self) -> str:
        width = max(len(title) for title, _ in METRIC_ROWS)
        col = max(12, *(len(lb) + 2 for lb in self.labels)) if self.labels else 12
        lines = [" " * width + "".join(lb.rjust(col) for lb in self.labels)]
        for title, attr in METRIC_ROWS:
            cells = "".join(f"{getattr(self.results[lb], attr):{col}.4g}" for lb in self.labels)
            lines.append(title.ljust(width) + cells)
        return "\n".join(lines)


def metrics_table(rows) -> MetricsTable:
    """Build a MetricsTable from (label, StepResponseMetrics) pairs."""
    table = MetricsTable()
    for label, metrics in rows:
        table.add(label, metrics)
    return table
