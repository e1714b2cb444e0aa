"""Benchmark plants, sample generation, cost functions and closed-loop simulation.

Random draws use ``numpy.random.default_rng(seed)`` (PCG64). The draw order
is fixed:

* ``draw_sample_set``: all ``M`` states, then all ``M`` controls, then all
  ``M`` noise vectors, each as a single ``(M, dim)`` block.
* ``simulate_closed_loop``: one ``(N, n)`` block of noise before the first
  step, with row ``t`` used for the transition ``x_t -> x_{t+1}``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from .boxes import Box
from .embedding import SampleSet


def _check_model(sampling_time, noise_std):
    if not (sampling_time > 0 and math.isfinite(sampling_time)):
        raise ValueError(f"sampling_time must be positive, got {sampling_time!r}")
    if not (noise_std >= 0 and math.isfinite(noise_std)):
        raise ValueError(f"noise_std must be non-negative, got {noise_std!r}")


@dataclass(frozen=True)
class IntegratorModel:
    """Double integrator ``x+ = [[1, T], [0, 1]] x + [T^2/2, T] u + w``."""

    sampling_time: float = 0.1
    noise_std: float = 0.1
    box: Box = field(default_factory=lambda: Box([-1.0], [1.0]))

    state_dim = 2
    control_dim = 1

    def __post_init__(self):
        _check_model(self.sampling_time, self.noise_std)
        if self.box.dim != 1:
            raise ValueError("integrator control box must be 1-D")

    @property
    def A(self) -> np.ndarray:
        return np.array([[1.0, self.sampling_time], [0.0, 1.0]])

    @property
    def B(self) -> np.ndarray:
        return np.array([self.sampling_time**2 / 2.0, self.sampling_time])

    def step(self, x, u, w=None) -> np.ndarray:
        """One transition; broadcasts over leading batch dimensions."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)[..., 0]
        ts = self.sampling_time
        y = np.stack(
            [x[..., 0] + ts * x[..., 1] + (ts * ts / 2.0) * u, x[..., 1] + ts * u],
            axis=-1,
        )
        return y if w is None else y + w


@dataclass(frozen=True)
class UnicycleModel:
    """Unicycle ``(x1', x2', x3') = (u1 sin x3, u1 cos x3, u2)`` sampled at ``T``.

    ``discretization="euler"`` holds the heading fixed over the step.
    ``"exact"`` integrates the constant-input flow exactly, so the turn rate
    also bends the position update within the step. With ``wrap_heading``
    the heading (after noise) is mapped back into ``[-pi, pi)``.
    """

    sampling_time: float = 0.1
    noise_std: float = 0.1
    box: Box = field(default_factory=lambda: Box([0.5, -10.1], [1.2, 10.1]))
    discretization: str = "euler"
    wrap_heading: bool = False

    state_dim = 3
    control_dim = 2

    def __post_init__(self):
        _check_model(self.sampling_time, self.noise_std)
        if self.box.dim != 2:
            raise ValueError("unicycle control box must be 2-D")
        if self.discretization not in ("euler", "exact"):
            raise ValueError(f"unknown discretization {self.discretization!r}")

    def step(self, x, u, w=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        ts = self.sampling_time
        speed, rate = u[..., 0], u[..., 1]
        heading = x[..., 2]
        if self.discretization == "euler":
            dx1 = ts * speed * np.sin(heading)
            dx2 = ts * speed * np.cos(heading)
        else:
            half = 0.5 * ts * rate
            # chord of the arc: (u1/u2)(cos h - cos(h + u2 T)) = u1 T sin(h + u2 T/2) sinc(u2 T/2)
            chord = ts * speed * np.sinc(half / np.pi)
            dx1 = chord * np.sin(heading + half)
            dx2 = chord * np.cos(heading + half)
        y = np.stack([x[..., 0] + dx1, x[..., 1] + dx2, heading + ts * rate], axis=-1)
        if w is not None:
            y = y + w
        if self.wrap_heading:
            y[..., 2] = wrap_angle(y[..., 2])
        return y


def wrap_angle(theta):
    """Map angles into ``[-pi, pi)``."""
    return np.mod(np.asarray(theta, dtype=float) + math.pi, 2.0 * math.pi) - math.pi


def step_integrator(model: IntegratorModel, x, u, noise_draw) -> np.ndarray:
    return model.step(np.asarray(x, dtype=float), np.atleast_1d(u), np.asarray(noise_draw, dtype=float))


def step_unicycle(model: UnicycleModel, x, u, noise_draw) -> np.ndarray:
    return model.step(x, u, np.asarray(noise_draw, dtype=float))


INTEGRATOR_REGION = Box([-1.0, -1.0], [1.0, 1.0])
UNICYCLE_REGION = Box([-1.2, -1.2, -math.pi], [1.2, 1.2, math.pi])


def draw_sample_set(model, state_region: Box, control_box: Box, size: int, seed: int) -> SampleSet:
    """Draw ``size`` i.i.d. transitions with uniform states and controls."""
    if int(size) != size or size < 1:
        raise ValueError(f"sample size must be a positive integer, got {size!r}")
    if not isinstance(state_region, Box):
        state_region = Box(*state_region)
    if not isinstance(control_box, Box):
        control_box = Box(*control_box)
    if state_region.dim != model.state_dim:
        raise ValueError(f"state region is {state_region.dim}-D, model state is {model.state_dim}-D")
    if control_box.dim != model.control_dim:
        raise ValueError(f"control box is {control_box.dim}-D, model control is {model.control_dim}-D")
    rng = np.random.default_rng(seed)
    size = int(size)
    xs = rng.uniform(state_region.lower, state_region.upper, size=(size, model.state_dim))
    us = rng.uniform(control_box.lower, control_box.upper, size=(size, model.control_dim))
    ws = model.noise_std * rng.standard_normal((size, model.state_dim))
    return SampleSet(xs, us, model.step(xs, us, ws))


def regulation_cost(x) -> float:
    """Euclidean norm of the full state."""
    x = np.asarray(x, dtype=float)
    return float(math.sqrt(np.sum(x * x)))


def tracking_cost(x, target) -> float:
    """Squared distance from the position ``x[:2]`` to ``target``; heading is ignored."""
    x = np.asarray(x, dtype=float)
    d = x[:2] - np.asarray(target, dtype=float)
    return float(d[0] * d[0] + d[1] * d[1])


def oracle_integrator_control(x, sampling_time: float, box: Box) -> float:
    """Exact minimizer over the box of the deterministic next-state norm.

    ``||A x + B u||`` is the square root of a convex quadratic in scalar
    ``u``, so the clamped stationary point is the constrained minimizer.
    """
    model = IntegratorModel(sampling_time, 0.0, box)
    ax = model.A @ np.asarray(x, dtype=float)
    b = model.B
    u = -float(b @ ax) / float(b @ b)
    return float(box.clamp([u])[0])


class TargetTrajectory:
    """Time-indexed reference positions ``waypoints[t]`` for ``t = 0..N``."""

    def __init__(self, waypoints):
        wp = np.asarray(waypoints, dtype=float)
        if wp.ndim != 2 or wp.shape[1] != 2 or wp.shape[0] < 1:
            raise ValueError(f"waypoints must be an (N+1, 2) array, got shape {wp.shape}")
        if not np.all(np.isfinite(wp)):
            raise ValueError("waypoints must be finite")
        wp = wp.copy()
        wp.setflags(write=False)
        self.waypoints = wp

    @property
    def horizon(self) -> int:
        return self.waypoints.shape[0] - 1

    def __getitem__(self, t):
        return self.waypoints[t]

    def __len__(self):
        return self.waypoints.shape[0]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "px", "py"])
            for t, (px, py) in enumerate(self.waypoints):
                writer.writerow([t, repr(float(px)), repr(float(py))])

    @classmethod
    def from_csv(cls, path) -> "TargetTrajectory":
        path = Path(path)
        try:
            fh = open(path, newline="")
        except OSError as exc:
            raise ValueError(f"{path}: cannot open target file: {exc.strerror}") from None
        with fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["t", "px", "py"]:
                raise ValueError(f"{path}:1: expected header 't,px,py', got {header!r}")
            points = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
                try:
                    t = int(row[0])
                    px, py = float(row[1]), float(row[2])
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
                if t != len(points):
                    raise ValueError(f"{path}:{lineno}: time index {t}, expected {len(points)}")
                if not (math.isfinite(px) and math.isfinite(py)):
                    raise ValueError(f"{path}:{lineno}: non-finite position")
                points.append((px, py))
        if not points:
            raise ValueError(f"{path}: no waypoints")
        return cls(points)


def default_target() -> TargetTrajectory:
    """Bundled 21-waypoint arc starting at the default vehicle position."""
    with resources.as_file(resources.files("socgrad") / "data" / "target.csv") as path:
        return TargetTrajectory.from_csv(path)


@dataclass
class Trajectory:
    """Closed-loop run: ``N + 1`` states, ``N`` controls and ``N + 1`` stage costs."""

    states: np.ndarray
    controls: np.ndarray
    stage_costs: np.ndarray
    total_cost: float

    def __post_init__(self):
        if self.states.shape[0] != self.controls.shape[0] + 1:
            raise ValueError("trajectory needs exactly one more state than controls")
        if self.stage_costs.shape[0] != self.states.shape[0]:
            raise ValueError("trajectory needs one stage cost per state")

    @property
    def horizon(self) -> int:
        return self.controls.shape[0]

    def header(self) -> list[str]:
        return (
            ["t"]
            + [f"x{i}" for i in range(self.states.shape[1])]
            + [f"u{i}" for i in range(self.controls.shape[1])]
            + ["stage_cost"]
        )

    def rows(self) -> list[list]:
        """CSV rows; the final state has no control, so its control cells are empty."""
        m = self.controls.shape[1]
        out = []
        for t, (x, c) in enumerate(zip(self.states, self.stage_costs)):
            u = self.controls[t] if t < self.horizon else [None] * m
            out.append([t, *x.tolist(), *[None if v is None else float(v) for v in u], float(c)])
        return out

    @classmethod
    def from_rows(cls, header: list[str], rows: list[list]) -> "Trajectory":
        n = sum(1 for h in header if h.startswith("x"))
        m = sum(1 for h in header if h.startswith("u"))
        states = np.array([r[1 : 1 + n] for r in rows], dtype=float)
        controls = np.array([r[1 + n : 1 + n + m] for r in rows[:-1]], dtype=float).reshape(-1, m)
        costs = np.array([r[-1] for r in rows], dtype=float)
        return cls(states, controls, costs, float(np.sum(costs)))


def simulate_closed_loop(
    model,
    controller: Callable[[int, np.ndarray], np.ndarray],
    x0,
    horizon: int,
    seed: int,
    stage_cost: Callable[[int, np.ndarray], float] | None = None,
) -> Trajectory:
    """Run ``controller(t, x_t)`` for ``horizon`` steps with seeded noise.

    ``stage_cost(t, x_t)`` is recorded for ``t = 0..N``; it defaults to the
    regulation cost.

    Raises
    ------
    ValueError
        If the controller returns a control outside ``model.box``.
    """
    if int(horizon) != horizon or horizon < 1:
        raise ValueError(f"horizon must be a positive integer, got {horizon!r}")
    horizon = int(horizon)
    if stage_cost is None:
        stage_cost = lambda t, x: regulation_cost(x)  # noqa: E731
    rng = np.random.default_rng(seed)
    noise = model.noise_std * rng.standard_normal((horizon, model.state_dim))
    x = np.asarray(x0, dtype=float).copy()
    states, controls, costs = [x], [], [stage_cost(0, x)]
    for t in range(horizon):
        u = np.atleast_1d(np.asarray(controller(t, x), dtype=float))
        if not model.box.contains(u):
            raise ValueError(f"controller returned {u.tolist()} at t={t}, outside {model.box!r}")
        x = model.step(x, u, noise[t])
        states.append(x)
        controls.append(u)
        costs.append(stage_cost(t + 1, x))
    costs = np.array(costs, dtype=float)
    return Trajectory(np.array(states), np.array(controls), costs, float(np.sum(costs)))
