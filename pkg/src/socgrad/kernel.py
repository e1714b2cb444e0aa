r"""Gaussian kernels, kernel vectors, product Gram matrices and first-order partials.

The Gaussian kernel with bandwidth :math:`\sigma` is

.. math::
    k(a, b) = \exp\left(-\frac{\lVert a - b \rVert_2^2}{2 \sigma^2}\right)

and its partial derivative in the first argument is
:math:`-\frac{a - b}{\sigma^2} k(a, b)` (signed difference, one entry per
coordinate).

Squared distances are always formed as an explicit difference-and-sum so
that ``k(a, b) == k(b, a)`` bit for bit and distances are never negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelParams:
    """Bandwidth of a Gaussian kernel, in the units of its input space."""

    bandwidth: float

    def __post_init__(self):
        bw = float(self.bandwidth)
        if not math.isfinite(bw) or bw <= 0.0:
            raise ValueError(f"kernel bandwidth must be positive and finite, got {self.bandwidth!r}")
        object.__setattr__(self, "bandwidth", bw)

    @property
    def inv_two_sigma_sq(self) -> float:
        return 1.0 / (2.0 * self.bandwidth * self.bandwidth)


def _as_point(p, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise ValueError(f"{name} must be a point in R^d with d >= 1, got shape {arr.shape}")
    return arr


def _as_points(ps, name: str) -> np.ndarray:
    arr = np.asarray(ps, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty list of points, got shape {arr.shape}")
    return arr


def _check_same_dim(a: np.ndarray, b: np.ndarray, what: str):
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"{what}: dimension mismatch ({a.shape[-1]} vs {b.shape[-1]})")


def _resolve(params) -> KernelParams:
    return params if isinstance(params, KernelParams) else KernelParams(params)


def eval_kernel(a, b, params) -> float:
    """Gaussian kernel value ``exp(-||a - b||^2 / (2 sigma^2))``, in (0, 1]."""
    params = _resolve(params)
    a = _as_point(a, "a")
    b = _as_point(b, "b")
    _check_same_dim(a, b, "eval_kernel")
    diff = a - b
    return float(np.exp(-np.sum(diff * diff) * params.inv_two_sigma_sq))


def eval_kernel_partial(a, b, params) -> np.ndarray:
    """Gradient of ``eval_kernel(a, b)`` with respect to ``a``."""
    params = _resolve(params)
    a = _as_point(a, "a")
    b = _as_point(b, "b")
    _check_same_dim(a, b, "eval_kernel_partial")
    diff = a - b
    k = np.exp(-np.sum(diff * diff) * params.inv_two_sigma_sq)
    return -(diff / params.bandwidth**2) * k


def squared_distances(query, anchors) -> np.ndarray:
    """``||anchors[i] - query||^2`` for each anchor, summed coordinate by coordinate."""
    diff = anchors - query
    sq = diff[:, 0] * diff[:, 0]
    for d in range(1, diff.shape[1]):
        sq = sq + diff[:, d] * diff[:, d]
    return sq


def kernel_vector(query, anchors, params) -> np.ndarray:
    """Vector with entries ``eval_kernel(anchors[i], query)``.

    Parameters
    ----------
    query
        Point of dimension ``d``.
    anchors
        ``(M, d)`` array of points, ``M >= 1``. A 1-D array is read as ``M``
        scalar points.
    params
        Kernel bandwidth.
    """
    params = _resolve(params)
    query = _as_point(query, "query")
    anchors = _as_points(anchors, "anchors")
    _check_same_dim(anchors, query, "kernel_vector")
    return np.exp(-squared_distances(query, anchors) * params.inv_two_sigma_sq)


def pairwise_squared_distances(points: np.ndarray) -> np.ndarray:
    """Symmetric ``(M, M)`` matrix of squared distances with an exactly zero diagonal."""
    m = points.shape[0]
    sq = np.zeros((m, m))
    for d in range(points.shape[1]):
        col = points[:, d]
        diff = col[:, None] - col[None, :]
        sq += diff * diff
    return sq


def gram_product(xs, us, kx, ku) -> np.ndarray:
    """Product-kernel Gram matrix ``G[i, j] = k(x_i, x_j) * l(u_i, u_j)``.

    The result is symmetric with a unit diagonal and lies in (0, 1].
    """
    kx = _resolve(kx)
    ku = _resolve(ku)
    xs = _as_points(xs, "xs")
    us = _as_points(us, "us")
    if xs.shape[0] != us.shape[0]:
        raise ValueError(f"gram_product: {xs.shape[0]} states but {us.shape[0]} controls")
    gx = np.exp(-pairwise_squared_distances(xs) * kx.inv_two_sigma_sq)
    gu = np.exp(-pairwise_squared_distances(us) * ku.inv_two_sigma_sq)
    gram = gx * gu
    # elementwise ops on an exactly symmetric input are exactly symmetric
    return gram
