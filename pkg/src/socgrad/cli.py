"""``socgrad integrator|sweep|vehicle --config PATH [--seed S] [--out DIR] [--key value ...]``.

Exit status is 0 on success. On failure a single line
``socgrad: error: <message>`` goes to stderr and the status is 1 (bad
configuration or arguments) or 2 (runtime failure).
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import EXPERIMENTS, FIELD_TYPES, ConfigError, load_config, parse_value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"arguments: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="socgrad", description="Kernel-gradient stochastic optimal control benchmarks.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", default=None, help="TOML file of flat key = value settings")
    parser.add_argument("--json", action="store_true", help="print the summary as JSON")
    for name in FIELD_TYPES:
        if name == "experiment":
            continue
        flags = sorted({f"--{name}", f"--{name.replace('_', '-')}"})
        parser.add_argument(*flags, dest=name, default=None, metavar="VALUE")
    return parser


def _format_summary(summary: dict) -> str:
    kind = summary["experiment"]
    if kind == "integrator":
        return (
            f"integrator M={summary['sample_size']} points={summary['points']} "
            f"mean_err={summary['mean_abs_err']:.4f} max_err={summary['max_abs_err']:.4f} "
            f"norm_within_5pct={summary['frac_norm_within_5pct']:.3f} time={summary['seconds']:.2f}s"
        )
    if kind == "sweep":
        parts = [
            f"M={m}: median_mean_err={s['median_mean_err']:.4f} median_max_err={s['median_max_err']:.4f}"
            for m, s in summary["by_size"].items()
        ]
        return f"sweep repeats={summary['repeats']} " + "; ".join(parts)
    return (
        f"vehicle M={summary['sample_size']} N={summary['horizon']} "
        f"total_cost_lp={summary['total_cost_lp']:.4f} total_cost_grad={summary['total_cost_grad']:.4f} "
        f"time_lp={summary['seconds_lp']:.2f}s time_grad={summary['seconds_grad']:.2f}s"
    )


def main(argv=None) -> int:
    from .benchmarks import RUNNERS

    try:
        args = build_parser().parse_args(argv)
        overrides = {
            name: parse_value(name, getattr(args, name))
            for name in FIELD_TYPES
            if name != "experiment" and getattr(args, name) is not None
        }
        cfg = load_config(args.config, overrides, experiment=args.experiment)
    except ConfigError as exc:
        print(f"socgrad: error: {_one_line(exc)}", file=sys.stderr)
        return 1
    try:
        summary = RUNNERS[cfg.experiment](cfg)
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"socgrad: error: {cfg.experiment}: {_one_line(exc)}", file=sys.stderr)
        return 2
    print(json.dumps(summary, sort_keys=True) if args.json else _format_summary(summary))
    return 0


def _one_line(exc: Exception) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
