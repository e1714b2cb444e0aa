"""Empirical conditional distribution embeddings and the cost surfaces they induce.

Given transitions ``(x_i, u_i, y_i)`` and a cost ``g`` evaluated at the
successors, the empirical expected cost of taking control ``u`` in state
``x`` is

    J(u) = g^T (G + lam M I)^{-1} (k_x * l_u)

with ``G`` the product-kernel Gram matrix of the sampled ``(x_i, u_i)``,
``(k_x)_i = k(x_i, x)`` and ``(l_u)_i = l(u_i, u)``. The Gram matrix is
Cholesky-factored once; ``z = (G + lam M I)^{-1} g`` is precomputed per cost
so a query costs one pass over the sample.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import linalg

from .kernel import KernelParams, gram_product, kernel_vector, squared_distances


def _as_matrix(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array of points, got shape {arr.shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Observed transitions: ``states[i]`` under ``controls[i]`` led to ``successors[i]``."""

    states: np.ndarray
    controls: np.ndarray
    successors: np.ndarray

    def __post_init__(self):
        xs = _as_matrix(self.states, "states")
        us = _as_matrix(self.controls, "controls")
        ys = _as_matrix(self.successors, "successors")
        if not (xs.shape[0] == us.shape[0] == ys.shape[0]):
            raise ValueError(
                f"sample lists differ in length: {xs.shape[0]} states, "
                f"{us.shape[0]} controls, {ys.shape[0]} successors"
            )
        if xs.shape[0] < 1:
            raise ValueError("sample must contain at least one transition")
        if xs.shape[1] != ys.shape[1]:
            raise ValueError(
                f"states have dimension {xs.shape[1]} but successors have {ys.shape[1]}"
            )
        object.__setattr__(self, "states", xs)
        object.__setattr__(self, "controls", us)
        object.__setattr__(self, "successors", ys)

    def __len__(self):
        return self.states.shape[0]

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def control_dim(self) -> int:
        return self.controls.shape[1]

    def header(self) -> list[str]:
        n, m = self.state_dim, self.control_dim
        return (
            [f"x{i}" for i in range(n)]
            + [f"u{i}" for i in range(m)]
            + [f"y{i}" for i in range(n)]
        )

    def to_csv(self, path):
        rows = np.hstack([self.states, self.controls, self.successors])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.header())
            for row in rows:
                writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path) -> "SampleSet":
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty file") from None
            xcols = [h for h in header if h.startswith("x")]
            ucols = [h for h in header if h.startswith("u")]
            n, m = len(xcols), len(ucols)
            expected = (
                [f"x{i}" for i in range(n)] + [f"u{i}" for i in range(m)] + [f"y{i}" for i in range(n)]
            )
            if header != expected or n < 1 or m < 1:
                raise ValueError(f"{path}:1: bad sample header {header!r}")
            data = []
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
                try:
                    data.append([float(v) for v in row])
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
        if not data:
            raise ValueError(f"{path}: no observations")
        arr = np.array(data)
        return cls(arr[:, :n], arr[:, n : n + m], arr[:, n + m :])


def default_regularization(sample_size: int) -> float:
    """``1 / M**2``."""
    return 1.0 / float(sample_size) ** 2


def cost_vector(sample: SampleSet, cost: Callable[[np.ndarray], float]) -> np.ndarray:
    """Evaluate ``cost`` at every successor, giving ``g_i = cost(y_i)``."""
    return np.array([float(cost(y)) for y in sample.successors])


@dataclass(frozen=True, eq=False)
class CostSurface:
    """Empirical cost as a function of the control alone, for one fixed state.

    ``weights`` folds the state kernel into the cost weights, ``z * k_x``.
    """

    weights: np.ndarray
    controls: np.ndarray
    control_kernel: KernelParams

    def _check(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if u.ndim != 1 or u.shape[0] != self.controls.shape[1]:
            raise ValueError(
                f"control has shape {u.shape}, expected ({self.controls.shape[1]},)"
            )
        return u

    def _terms(self, u: np.ndarray) -> np.ndarray:
        lu = np.exp(-squared_distances(u, self.controls) * self.control_kernel.inv_two_sigma_sq)
        return self.weights * lu

    def cost(self, u) -> float:
        u = self._check(u)
        return float(np.sum(self._terms(u)))

    def gradient(self, u) -> np.ndarray:
        u = self._check(u)
        terms = self._terms(u)
        # d/du_d l(u_i, u) = -(u_d - u_{i,d}) / sigma^2 * l(u_i, u)
        return terms @ (self.controls - u) / self.control_kernel.bandwidth**2

    def cost_and_gradient(self, u) -> tuple[float, np.ndarray]:
        u = self._check(u)
        terms = self._terms(u)
        grad = terms @ (self.controls - u) / self.control_kernel.bandwidth**2
        return float(np.sum(terms)), grad


class EmbeddingEstimate:
    """Fitted empirical embedding with its cost weights baked in.

    Build with :func:`fit`. The object is immutable; :meth:`with_cost` returns
    a new estimate that shares the Cholesky factor and only re-solves for the
    cost weights.
    """

    def __init__(self, sample, state_kernel, control_kernel, regularization, factor, cost_weights, cost):
        self.sample = sample
        self.state_kernel = state_kernel
        self.control_kernel = control_kernel
        self.regularization = regularization
        self.solver_factor = factor
        cost_weights.setflags(write=False)
        cost.setflags(write=False)
        self.cost_weights = cost_weights
        self.cost = cost

    def __len__(self):
        return len(self.sample)

    def solve(self, v) -> np.ndarray:
        """``(G + lam M I)^{-1} v`` through the stored factor."""
        return linalg.cho_solve(self.solver_factor, np.asarray(v, dtype=float), check_finite=False)

    def with_cost(self, cost) -> "EmbeddingEstimate":
        g = _check_cost(cost, len(self.sample))
        return EmbeddingEstimate(
            self.sample,
            self.state_kernel,
            self.control_kernel,
            self.regularization,
            self.solver_factor,
            self.solve(g),
            g,
        )

    def _state(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.ndim != 1 or x.shape[0] != self.sample.state_dim:
            raise ValueError(f"state has shape {x.shape}, expected ({self.sample.state_dim},)")
        return x

    def surface(self, x) -> CostSurface:
        """Freeze the state and return the cost surface over controls."""
        x = self._state(x)
        kx = kernel_vector(x, self.sample.states, self.state_kernel)
        return CostSurface(self.cost_weights * kx, self.sample.controls, self.control_kernel)

    def cost_at(self, x, u) -> float:
        return self.surface(x).cost(u)

    def cost_gradient(self, x, u) -> np.ndarray:
        return self.surface(x).gradient(u)

    def __repr__(self):
        return (
            f"EmbeddingEstimate(M={len(self.sample)}, state_sigma={self.state_kernel.bandwidth}, "
            f"control_sigma={self.control_kernel.bandwidth}, lam={self.regularization:g})"
        )


def _check_cost(cost, size: int) -> np.ndarray:
    g = np.array(cost, dtype=float).ravel()
    if g.shape[0] != size:
        raise ValueError(f"cost vector has length {g.shape[0]}, sample has {size} transitions")
    if not np.all(np.isfinite(g)):
        raise ValueError(f"cost vector has non-finite entry at index {int(np.argmin(np.isfinite(g)))}")
    return g


def fit(sample: SampleSet, state_kernel, control_kernel, regularization=None, cost=None) -> EmbeddingEstimate:
    """Fit the empirical embedding of ``sample``.

    Parameters
    ----------
    sample
        Observed transitions.
    state_kernel, control_kernel
        Gaussian bandwidths (``KernelParams`` or positive floats).
    regularization
        Ridge parameter ``lam > 0``; ``None`` selects ``1 / M**2``.
    cost
        Cost values at the successors, length ``M``. ``None`` means all zeros,
        to be replaced later with :meth:`EmbeddingEstimate.with_cost`.

    Raises
    ------
    ValueError
        On ``lam <= 0``, non-finite data, or a failed factorization.
    """
    if not isinstance(state_kernel, KernelParams):
        state_kernel = KernelParams(state_kernel)
    if not isinstance(control_kernel, KernelParams):
        control_kernel = KernelParams(control_kernel)
    m = len(sample)
    lam = default_regularization(m) if regularization is None else float(regularization)
    if not math.isfinite(lam) or lam <= 0.0:
        raise ValueError(f"regularization must be positive and finite, got {regularization!r}")
    for name in ("states", "controls", "successors"):
        arr = getattr(sample, name)
        if not np.all(np.isfinite(arr)):
            row = int(np.argwhere(~np.isfinite(arr))[0, 0])
            raise ValueError(f"sample {name} contains a non-finite value in row {row}")
    g = np.zeros(m) if cost is None else _check_cost(cost, m)

    gram = gram_product(sample.states, sample.controls, state_kernel, control_kernel)
    system = gram + (lam * m) * np.eye(m)
    try:
        factor = linalg.cho_factor(system, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise ValueError(
            f"Gram system is not positive definite with regularization={lam!r}: {exc}"
        ) from None
    est = EmbeddingEstimate(sample, state_kernel, control_kernel, lam, factor, np.zeros(m), np.zeros(m))
    return est.with_cost(g)
