"""Minimization of the empirical cost over a control box.

The initial guess is the admissible action with the least empirical cost.
This is the dual solution of the linear program over finitely supported
policies, which puts all of its mass on a single action. Projected gradient
descent then refines that guess. Every iterate is kept inside the box, and
the best iterate seen is returned, so the result is never worse than the
initial guess.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .boxes import Box
from .embedding import CostSurface, EmbeddingEstimate

ControlBox = Box


class AdmissibleSet:
    """Finite set of candidate controls, one per row of ``actions``."""

    def __init__(self, actions, box: Box | None = None):
        arr = np.asarray(actions, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("admissible set must contain at least one action")
        if box is not None:
            for j, a in enumerate(arr):
                if not box.contains(a):
                    raise ValueError(f"admissible action {j} = {a.tolist()} lies outside {box!r}")
        arr = arr.copy()
        arr.setflags(write=False)
        self.actions = arr

    @classmethod
    def grid(cls, box: Box, counts) -> "AdmissibleSet":
        return cls(box.grid(counts), box)

    def __len__(self):
        return self.actions.shape[0]

    def __iter__(self):
        return iter(self.actions)

    def __repr__(self):
        return f"AdmissibleSet(P={len(self)}, dim={self.actions.shape[1]})"


@dataclass(frozen=True)
class DescentConfig:
    box: Box
    step_size: float = 0.01
    max_iters: int = 100
    grad_tol: float = 1e-6

    def __post_init__(self):
        if not (self.step_size > 0 and math.isfinite(self.step_size)):
            raise ValueError(f"step_size must be positive and finite, got {self.step_size!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if not self.grad_tol >= 0:
            raise ValueError(f"grad_tol must be non-negative, got {self.grad_tol!r}")


class Termination(enum.Enum):
    MAX_ITERS = "MaxIters"
    GRAD_TOL = "GradTol"


@dataclass
class DescentTrace:
    """Full iterate history of one descent run.

    ``iterates[0]`` is the starting control. ``grad_norms[k]`` is the
    gradient norm at ``iterates[k]``.
    """

    iterates: np.ndarray
    costs: np.ndarray
    grad_norms: np.ndarray
    best_index: int
    termination: Termination

    @property
    def steps(self) -> int:
        return len(self.costs) - 1

    @property
    def best(self) -> np.ndarray:
        return self.iterates[self.best_index]

    def header(self) -> list[str]:
        return ["iter"] + [f"u{d}" for d in range(self.iterates.shape[1])] + ["cost", "grad_norm"]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.header())
            for k, (u, c, gn) in enumerate(zip(self.iterates, self.costs, self.grad_norms)):
                writer.writerow([k] + [repr(float(v)) for v in u] + [repr(float(c)), repr(float(gn))])


def project_box(u, box: Box) -> np.ndarray:
    """Componentwise clamp onto ``box``."""
    return box.clamp(u)


def lp_select(est: EmbeddingEstimate, x, admissible: AdmissibleSet) -> int:
    """Index of the admissible action with the least empirical cost (lowest index on ties)."""
    if len(admissible) == 0:
        raise ValueError("admissible set is empty")
    surface = est.surface(x)
    costs = [surface.cost(a) for a in admissible.actions]
    return int(np.argmin(costs))


def lp_initialize(est: EmbeddingEstimate, x, admissible: AdmissibleSet) -> np.ndarray:
    return admissible.actions[lp_select(est, x, admissible)].copy()


def _descend_surface(surface: CostSurface, u0, config: DescentConfig):
    box = config.box
    u = np.atleast_1d(np.asarray(u0, dtype=float)).copy()
    if not box.contains(u):
        raise ValueError(f"initial control {u.tolist()} lies outside {box!r}")
    iterates, costs, norms = [], [], []
    for n in range(config.max_iters + 1):
        cost, grad = surface.cost_and_gradient(u)
        if not np.all(np.isfinite(grad)) or not math.isfinite(cost):
            raise FloatingPointError(f"non-finite cost or gradient at iterate {n}, u={u.tolist()}")
        gnorm = float(np.linalg.norm(grad))
        iterates.append(u)
        costs.append(cost)
        norms.append(gnorm)
        if gnorm <= config.grad_tol:
            termination = Termination.GRAD_TOL
            break
        if n == config.max_iters:
            termination = Termination.MAX_ITERS
            break
        u = box.clamp(u - config.step_size * grad)
    costs = np.array(costs)
    best = int(np.argmin(costs))
    trace = DescentTrace(np.array(iterates), costs, np.array(norms), best, termination)
    return trace.iterates[best].copy(), trace


def descend(est: EmbeddingEstimate, x, u0, config: DescentConfig):
    """Projected gradient descent on the empirical cost from ``u0``.

    Returns ``(u_best, trace)`` where ``u_best`` has the least cost among all
    iterates, including ``u0``.

    Raises
    ------
    ValueError
        If ``u0`` is outside ``config.box``.
    FloatingPointError
        If a gradient evaluates to a non-finite value.
    """
    return _descend_surface(est.surface(x), u0, config)


def solve(est: EmbeddingEstimate, x, admissible: AdmissibleSet, config: DescentConfig):
    """LP initialization followed by projected descent; returns ``(u, trace)``."""
    for j, a in enumerate(admissible.actions):
        if not config.box.contains(a):
            raise ValueError(f"admissible action {j} = {a.tolist()} lies outside {config.box!r}")
    u0 = lp_initialize(est, x, admissible)
    return _descend_surface(est.surface(x), u0, config)
