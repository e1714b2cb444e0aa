"""Benchmark experiments: integrator regulation, sample-size sweep, vehicle tracking.

Each ``run_*`` function takes a resolved :class:`ExperimentConfig`, writes
its CSV and SVG reports into ``config.out`` and returns a summary dict (also
written as ``summary.json``). CSV contents depend only on the config, so
reruns produce identical files. Timings appear only in the summary.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import svg
from .boxes import Box
from .config import ExperimentConfig
from .csvio import write_csv
from .embedding import cost_vector, fit
from .optimizer import AdmissibleSet, DescentConfig, lp_initialize, solve
from .systems import (
    INTEGRATOR_REGION,
    UNICYCLE_REGION,
    IntegratorModel,
    TargetTrajectory,
    Trajectory,
    UnicycleModel,
    default_target,
    draw_sample_set,
    oracle_integrator_control,
    regulation_cost,
    simulate_closed_loop,
    tracking_cost,
)

CONTROLS_SCHEMA = ["x0", "x1", "u_grad", "u_oracle", "abs_err", "J_init", "J_final"]
SWEEP_SCHEMA = ["M", "repeat", "mean_err", "max_err"]
VEHICLE_X0 = (-1.0, -0.2, math.pi / 2)
INTEGRATOR_BOX = Box([-1.0], [1.0])
UNICYCLE_BOX = Box([0.5, -10.1], [1.2, 10.1])


def worker_count() -> int:
    """Pool size: ``SOCGRAD_THREADS`` if set, else the CPU count."""
    env = os.environ.get("SOCGRAD_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"SOCGRAD_THREADS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"SOCGRAD_THREADS must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


def parallel_map(fn, items):
    """Ordered map over an optional thread pool; results follow input order."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def derive_seed(*keys: int) -> int:
    """Independent child seed for a tuple of non-negative integer keys."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, dtype=np.uint64)[0])


def _write_summary(out: Path, summary: dict):
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


# -- integrator -------------------------------------------------------------


@dataclass
class IntegratorResult:
    points: np.ndarray
    u_grad: np.ndarray
    u_oracle: np.ndarray
    j_init: np.ndarray
    j_final: np.ndarray
    j_admissible_min: np.ndarray
    traces: list

    @property
    def abs_err(self) -> np.ndarray:
        return np.abs(self.u_grad - self.u_oracle)


def integrator_model(cfg: ExperimentConfig) -> IntegratorModel:
    return IntegratorModel(cfg.sampling_time, cfg.noise_std, INTEGRATOR_BOX)


def integrator_study(cfg: ExperimentConfig, sample_size: int, seed: int, parallel: bool = True) -> IntegratorResult:
    """Fit on a fresh sample and solve at every evaluation point."""
    model = integrator_model(cfg)
    sample = draw_sample_set(model, INTEGRATOR_REGION, model.box, sample_size, seed)
    est = fit(sample, cfg.state_sigma, cfg.control_sigma, cfg.regularization, cost_vector(sample, regulation_cost))
    admissible = AdmissibleSet.grid(model.box, cfg.admissible)
    descent = DescentConfig(model.box, cfg.step_size, cfg.max_iters, cfg.grad_tol)
    points = INTEGRATOR_REGION.grid(cfg.eval_grid)

    def at(x):
        u, trace = solve(est, x, admissible, descent)
        surface = est.surface(x)
        j_min = min(surface.cost(a) for a in admissible.actions)
        return u[0], trace, j_min

    solved = parallel_map(at, points) if parallel else [at(x) for x in points]
    return IntegratorResult(
        points=points,
        u_grad=np.array([s[0] for s in solved]),
        u_oracle=np.array([oracle_integrator_control(x, cfg.sampling_time, model.box) for x in points]),
        j_init=np.array([s[1].costs[0] for s in solved]),
        j_final=np.array([s[1].costs[s[1].best_index] for s in solved]),
        j_admissible_min=np.array([s[2] for s in solved]),
        traces=[s[1] for s in solved],
    )


def one_step_norms(cfg: ExperimentConfig, points, controls) -> np.ndarray:
    """Deterministic next-state norms ``||A x + B u||`` for paired points and controls."""
    model = integrator_model(cfg)
    nxt = model.step(np.asarray(points), np.asarray(controls, dtype=float)[:, None])
    return np.sqrt(np.sum(nxt * nxt, axis=1))


def _vector_field_svg(cfg, res: IntegratorResult, path: Path):
    model = integrator_model(cfg)
    fig = svg.Figure(520, 500)
    ax = fig.add_axes(
        70, 40, 420, 400, (-1.15, 1.15), (-1.15, 1.15),
        title="Closed-loop one-step displacement", xlabel="position x0", ylabel="velocity x1", equal=True,
    )
    for controls, color in ((res.u_oracle, "#1f77b4"), (res.u_grad, "#ff7f0e")):
        nxt = model.step(res.points, controls[:, None])
        for x, y in zip(res.points, nxt):
            ax.arrow(x[0], x[1], y[0] - x[0], y[1] - x[1], color=color)
    ax.add_legend("oracle (deterministic)", "#1f77b4")
    ax.add_legend("kernel gradient", "#ff7f0e")
    fig.save(path)


def run_integrator(cfg: ExperimentConfig) -> dict:
    out = Path(cfg.out)
    t0 = time.perf_counter()
    res = integrator_study(cfg, cfg.sample_size, derive_seed(cfg.seed, 0))
    elapsed = time.perf_counter() - t0
    rows = [
        [float(x[0]), float(x[1]), float(ug), float(uo), float(e), float(ji), float(jf)]
        for x, ug, uo, e, ji, jf in zip(res.points, res.u_grad, res.u_oracle, res.abs_err, res.j_init, res.j_final)
    ]
    write_csv(out / "controls.csv", CONTROLS_SCHEMA, rows, schema=CONTROLS_SCHEMA)
    _vector_field_svg(cfg, res, out / "vector_field.svg")
    norm_grad = one_step_norms(cfg, res.points, res.u_grad)
    norm_oracle = one_step_norms(cfg, res.points, res.u_oracle)
    within = np.abs(norm_grad - norm_oracle) <= 0.05 * norm_oracle
    summary = {
        "experiment": "integrator",
        "sample_size": cfg.sample_size,
        "points": int(len(res.points)),
        "mean_abs_err": float(res.abs_err.mean()),
        "max_abs_err": float(res.abs_err.max()),
        "frac_norm_within_5pct": float(within.mean()),
        "all_improved": bool(np.all(res.j_final <= res.j_init)),
        "seconds": elapsed,
    }
    _write_summary(out, summary)
    return summary


# -- sample-size sweep ------------------------------------------------------


def run_error_sweep(cfg: ExperimentConfig) -> dict:
    out = Path(cfg.out)
    cells = [(m, r) for m in cfg.sweep_sizes for r in range(cfg.repeats)]
    t0 = time.perf_counter()

    def cell(key):
        m, r = key
        res = integrator_study(cfg, m, derive_seed(cfg.seed, m, r), parallel=False)
        return key, (float(res.abs_err.mean()), float(res.abs_err.max()))

    results = dict(parallel_map(cell, cells))
    elapsed = time.perf_counter() - t0
    rows = [[m, r, *results[(m, r)]] for m, r in sorted(results)]
    write_csv(out / "sweep.csv", SWEEP_SCHEMA, rows, schema=SWEEP_SCHEMA)

    sizes = sorted(set(cfg.sweep_sizes))
    stats = {}
    for m in sizes:
        mean_errs = np.array([results[(m, r)][0] for r in range(cfg.repeats)])
        max_errs = np.array([results[(m, r)][1] for r in range(cfg.repeats)])
        stats[m] = {
            "median_mean_err": float(np.median(mean_errs)),
            "median_max_err": float(np.median(max_errs)),
            "mad_max_err": float(np.median(np.abs(max_errs - np.median(max_errs)))),
            "avg_mean_err": float(mean_errs.mean()),
            "avg_max_err": float(max_errs.mean()),
        }
    _sweep_svg(sizes, cfg.repeats, results, out / "sweep.svg")
    summary = {
        "experiment": "sweep",
        "sizes": sizes,
        "repeats": cfg.repeats,
        "by_size": {str(m): stats[m] for m in sizes},
        "seconds": elapsed,
    }
    _write_summary(out, summary)
    return summary


def _sweep_svg(sizes, repeats, results, path: Path):
    fig = svg.Figure(860, 380)
    xpad = 0.05 * (max(sizes) - min(sizes) or 1.0)
    for k, (col, title) in enumerate(((1, "Maximum control error"), (0, "Mean control error"))):
        vals = np.array([[results[(m, r)][col] for r in range(repeats)] for m in sizes])
        hi = float(vals.max()) * 1.1 or 1.0
        ax = fig.add_axes(
            70 + 420 * k, 40, 340, 280, (min(sizes) - xpad, max(sizes) + xpad), (0.0, hi),
            title=title, xlabel="sample size M", ylabel="|u - u*|",
        )
        ax.band(sizes, vals.min(axis=1), vals.max(axis=1), color="#ff7f0e", opacity=0.2)
        ax.line(sizes, vals.mean(axis=1), color="#ff7f0e", markers=True, label="mean over repeats")
    fig.save(path)


# -- vehicle tracking -------------------------------------------------------


def vehicle_model(cfg: ExperimentConfig) -> UnicycleModel:
    return UnicycleModel(
        cfg.sampling_time, cfg.noise_std, UNICYCLE_BOX, cfg.discretization, cfg.wrap_heading
    )


def load_target(cfg: ExperimentConfig) -> TargetTrajectory:
    target = default_target() if cfg.target is None else TargetTrajectory.from_csv(cfg.target)
    if target.horizon < cfg.horizon:
        src = cfg.target or "bundled target"
        raise ValueError(f"{src}: target has {len(target)} waypoints, horizon {cfg.horizon} needs {cfg.horizon + 1}")
    return target


@dataclass
class VehicleResult:
    lp: Trajectory
    grad: Trajectory
    target: TargetTrajectory
    seconds_fit: float
    seconds_lp: float
    seconds_grad: float


def vehicle_study(cfg: ExperimentConfig) -> VehicleResult:
    """Closed-loop LP-only and LP+descent runs sharing sample, weights and noise.

    The control at time ``t`` minimizes the empirical expected distance of the
    next state to waypoint ``t + 1``; stage ``t`` is scored against waypoint ``t``.
    """
    model = vehicle_model(cfg)
    target = load_target(cfg)
    t0 = time.perf_counter()
    sample = draw_sample_set(model, UNICYCLE_REGION, model.box, cfg.sample_size, derive_seed(cfg.seed, 0))
    base = fit(sample, cfg.state_sigma, cfg.control_sigma, cfg.regularization)
    seconds_fit = time.perf_counter() - t0
    admissible = AdmissibleSet.grid(model.box, cfg.admissible)
    descent = DescentConfig(model.box, cfg.step_size, cfg.max_iters, cfg.grad_tol)
    noise_seed = derive_seed(cfg.seed, 1)

    def stage(t, x):
        return tracking_cost(x, target[t])

    def run(select):
        cache = {}

        def estimate(t):
            if t not in cache:
                cache[t] = base.with_cost(cost_vector(sample, lambda y: tracking_cost(y, target[t + 1])))
            return cache[t]

        start = time.perf_counter()
        traj = simulate_closed_loop(model, lambda t, x: select(estimate(t), x), VEHICLE_X0, cfg.horizon, noise_seed, stage)
        return traj, time.perf_counter() - start

    lp, seconds_lp = run(lambda est, x: lp_initialize(est, x, admissible))
    grad, seconds_grad = run(lambda est, x: solve(est, x, admissible, descent)[0])
    return VehicleResult(lp, grad, target, seconds_fit, seconds_lp, seconds_grad)


def trajectory_schema(state_dim: int, control_dim: int) -> list[str]:
    return ["t", *(f"x{i}" for i in range(state_dim)), *(f"u{i}" for i in range(control_dim)), "stage_cost"]


def _tracking_svg(res: VehicleResult, horizon: int, path: Path):
    wp = res.target.waypoints[: horizon + 1]
    allpts = np.vstack([wp, res.lp.states[:, :2], res.grad.states[:, :2]])
    lo, hi = allpts.min(axis=0) - 0.1, allpts.max(axis=0) + 0.1
    fig = svg.Figure(520, 500)
    ax = fig.add_axes(70, 40, 420, 400, (lo[0], hi[0]), (lo[1], hi[1]),
                      title="Target tracking", xlabel="x1", ylabel="x2", equal=True)
    ax.line(wp[:, 0], wp[:, 1], color="#1f77b4", markers=True, label="target")
    ax.line(res.lp.states[:, 0], res.lp.states[:, 1], color="#2ca02c", markers=True,
            label=f"LP only (cost {res.lp.total_cost:.3f})")
    ax.line(res.grad.states[:, 0], res.grad.states[:, 1], color="#ff7f0e", markers=True,
            label=f"LP + gradient (cost {res.grad.total_cost:.3f})")
    fig.save(path)


def run_vehicle(cfg: ExperimentConfig) -> dict:
    out = Path(cfg.out)
    res = vehicle_study(cfg)
    for name, traj in (("trajectory_lp.csv", res.lp), ("trajectory_grad.csv", res.grad)):
        write_csv(out / name, traj.header(), traj.rows(), schema=trajectory_schema(3, 2))
    _tracking_svg(res, cfg.horizon, out / "tracking.svg")
    summary = {
        "experiment": "vehicle",
        "sample_size": cfg.sample_size,
        "horizon": cfg.horizon,
        "total_cost_lp": res.lp.total_cost,
        "total_cost_grad": res.grad.total_cost,
        "improvement": 1.0 - res.grad.total_cost / res.lp.total_cost if res.lp.total_cost > 0 else 0.0,
        "seconds_fit": res.seconds_fit,
        "seconds_lp": res.seconds_lp,
        "seconds_grad": res.seconds_grad,
    }
    _write_summary(out, summary)
    return summary


RUNNERS = {"integrator": run_integrator, "sweep": run_error_sweep, "vehicle": run_vehicle}
