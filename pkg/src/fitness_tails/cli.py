"""Command-line entry point: ``bound``, ``simulate``, ``verify`` and ``exact``.

Exit codes: 0 success, 1 a verification verdict failed, 2 bad configuration,
3 a simulation hit its iteration cap.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass
from typing import Any, Optional, Sequence

from . import reports
from .exact_oracle import OracleTooLarge, exact_cdf, exact_lower_tail, exact_pmf, exact_upper_tail
from .fitness_levels import LevelPartition, lower_time_bound, upper_time_bound
from .onemax import onemax_partition
from .simulator import DEFAULT_CAP, IterationCapExceeded, ProcessConfig, replicate
from .tail_bounds import (
    GeometricSumSpec,
    chernoff_lower_bound,
    chernoff_upper_bound,
    lower_tail_bound,
    upper_tail_bound,
)
from .verification import Target, verify_grid

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3
PROCESSES = ("rls-onemax", "level-chain", "coupon-collector")


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# spec sources and config files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpecSource:
    """A geometric sum, plus the OneMax parameters when it came from the generator."""

    spec: GeometricSumSpec
    onemax: Optional[tuple[int, int]] = None


def _line_of(text: str, key: str) -> int:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def _load_json(path: str) -> tuple[dict, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1: top level must be a JSON object")
    schema = data.get("schema", 1)
    if schema != reports.SCHEMA_VERSION:
        raise ConfigError(f"{path}:{_line_of(text, 'schema')}: unsupported schema {schema!r}")
    return data, text


def onemax_source(n: int, k: int) -> SpecSource:
    return SpecSource(onemax_partition(n, k).spec(), (n, k))


def _spec_from_mapping(data: dict, text: str, path: str) -> SpecSource:
    try:
        if "probs" in data:
            return SpecSource(GeometricSumSpec(data["probs"]))
        if data.get("generator") == "onemax":
            return onemax_source(int(data["n"]), int(data.get("k", 0)))
    except KeyError as exc:
        raise ConfigError(f"{path}:1: missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        key = "probs" if "probs" in data else "n"
        raise ConfigError(f"{path}:{_line_of(text, key)}: {exc}") from None
    raise ConfigError(f"{path}:1: expected a 'probs' list or 'generator': 'onemax'")


def parse_spec_source(arg: str) -> SpecSource:
    """``onemax:n:k`` or a JSON file path."""
    if arg.startswith("onemax:"):
        parts = arg.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"bad generator {arg!r}; expected onemax:n[:k]")
        try:
            n = int(parts[1])
            k = int(parts[2]) if len(parts) == 3 else 0
            return onemax_source(n, k)
        except ValueError as exc:
            raise ConfigError(f"bad generator {arg!r}: {exc}") from None
    data, text = _load_json(arg)
    return _spec_from_mapping(data, text, arg)


def parse_probs(arg: str) -> SpecSource:
    try:
        return SpecSource(GeometricSumSpec([float(x) for x in arg.split(",") if x.strip()]))
    except ValueError as exc:
        raise ConfigError(f"--probs: {exc}") from None


def parse_grid(arg: str, name: str = "--delta") -> list[float]:
    try:
        grid = [float(x) for x in arg.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{name}: not a comma-separated list of numbers: {arg!r}") from None
    if not grid:
        raise ConfigError(f"{name}: empty grid")
    if any(not math.isfinite(g) or g < 0 for g in grid):
        raise ConfigError(f"{name}: grid values must be finite and >= 0")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"{name}: grid must be strictly increasing")
    return grid


# ---------------------------------------------------------------------------
# experiment configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    process: ProcessConfig
    replications: int
    master_seed: Optional[int]
    source: Optional[SpecSource] = None


_CONFIG_KEYS = (
    "process", "n", "k", "init", "probs", "spec", "replications", "seed",
    "grid", "grid_kind", "format", "workers", "cap",
)


def _merge_config(args: argparse.Namespace) -> dict:
    """Values from ``--config`` with explicitly given flags taking precedence."""
    merged: dict[str, Any] = {}
    if getattr(args, "config", None):
        data, text = _load_json(args.config)
        unknown = sorted(set(data) - set(_CONFIG_KEYS) - {"schema"})
        if unknown:
            raise ConfigError(f"{args.config}:{_line_of(text, unknown[0])}: unknown key {unknown[0]!r}")
        merged.update(data)
        if isinstance(data.get("spec"), dict):
            merged["spec"] = _spec_from_mapping(data["spec"], text, args.config)
        elif isinstance(data.get("spec"), str):
            merged["spec"] = parse_spec_source(data["spec"])
        if "probs" in data:
            merged["probs"] = _spec_from_mapping({"probs": data["probs"]}, text, args.config)
        if isinstance(data.get("init"), dict):
            merged["k"] = data["init"].get("level")
            merged.pop("init")
        if "grid" in data:
            grid = data["grid"]
            merged["grid"] = parse_grid(",".join(str(g) for g in grid), "grid")
    for key in ("process", "n", "k", "replications", "seed", "cap", "format", "workers"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if getattr(args, "probs", None):
        merged["probs"] = parse_probs(args.probs)
    if getattr(args, "spec", None):
        merged["spec"] = parse_spec_source(args.spec)
    for key, kind in (("delta", "delta"), ("r", "r")):
        val = getattr(args, key, None)
        if val is not None:
            merged["grid"] = parse_grid(val, f"--{key}")
            merged["grid_kind"] = kind
    return merged


def build_experiment(merged: dict, require_seed: bool) -> ExperimentConfig:
    source: Optional[SpecSource] = merged.get("probs") or merged.get("spec")
    process = merged.get("process")
    if process is None:
        if source is None:
            raise ConfigError("need --process, --probs or --spec")
        process = "level-chain"
    if process not in PROCESSES:
        raise ConfigError(f"unknown process {process!r}")
    n, k = merged.get("n"), merged.get("k")
    if process != "level-chain" and source is not None and source.onemax is not None:
        n = source.onemax[0] if n is None else n
        k = source.onemax[1] if k is None else k
    if merged.get("init") not in (None, "uniform"):
        raise ConfigError(f"init must be 'uniform' or {{'level': k}}, got {merged['init']!r}")
    replications = int(merged.get("replications", 0 if not require_seed else 1))
    if replications < 0 or (require_seed and replications < 1):
        raise ConfigError("replications must be >= 1")
    seed = merged.get("seed")
    if replications > 0 and seed is None:
        raise ConfigError("--seed is required whenever runs are simulated")
    cap = int(merged.get("cap", DEFAULT_CAP))
    try:
        if process == "level-chain":
            if source is None:
                raise ConfigError("level-chain needs --probs or --spec")
            pc = ProcessConfig(
                "level-chain", level_probs=source.spec.probs,
                init=source.onemax[1] if source.onemax else 0, cap=cap,
            )
        else:
            if n is None:
                raise ConfigError(f"{process} needs --n")
            init = "uniform" if k is None else int(k)
            if process == "coupon-collector" and init == "uniform":
                init = 0
            pc = ProcessConfig(process, n=int(n), init=init, cap=cap)
            # exact law is a single geometric sum only from a fixed start below n
            source = onemax_source(int(n), init) if isinstance(init, int) and init < int(n) else None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(pc, replications, None if seed is None else int(seed), source)


def config_echo(exp: ExperimentConfig) -> dict:
    pc = exp.process
    echo: dict[str, Any] = {
        "process": pc.process,
        "init": pc.init if pc.init == "uniform" else {"level": pc.init},
        "replications": exp.replications,
        "seed": exp.master_seed,
    }
    if pc.n is not None:
        echo["n"] = pc.n
    if pc.level_probs is not None:
        echo["probs"] = list(pc.level_probs)
    return echo


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(fmt: str, columns, rows, meta: dict) -> str:
    if fmt == "json":
        return reports.render_json({**meta, "rows": rows})
    return reports.render_csv(columns, rows)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _source_from_args(args) -> SpecSource:
    if args.probs and args.spec:
        raise ConfigError("give either --probs or --spec, not both")
    if args.probs:
        return parse_probs(args.probs)
    if args.spec:
        return parse_spec_source(args.spec)
    raise ConfigError("need --probs or --spec")


def cmd_bound(args) -> int:
    src = _source_from_args(args)
    grid = parse_grid(args.delta)
    spec = src.spec
    part = LevelPartition(spec.probs, no_skip=not args.skip)
    try:
        lower0 = lower_tail_bound(spec, 0.0, s_override=args.s)
        upper0 = upper_tail_bound(spec, 0.0, s_override=args.s, h_override=args.h)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = []
    for d in grid:
        lo = lower_tail_bound(spec, d, s_override=args.s)
        up = upper_tail_bound(spec, d, s_override=args.s, h_override=args.h)
        row = {
            "delta": d,
            "mean": spec.mean(),
            "s": lower0.s_used,
            "h": upper0.h_used,
            "lower_bound": lo.bound,
            "lower_regime": lo.regime,
            "upper_bound": up.bound,
            "upper_regime": up.regime,
            "chernoff_lower": chernoff_lower_bound(spec, d) if d > 0 else 1.0,
            "chernoff_upper": chernoff_upper_bound(spec, d) if d > 0 else 1.0,
        }
        if d > 0:
            ut = upper_time_bound(part, d, s=args.s, h=args.h)
            row.update(upper_time=ut.time_bound, upper_confidence=ut.confidence)
            if part.no_skip:
                lt = lower_time_bound(part, d, s=args.s)
                row.update(lower_time=lt.time_bound, lower_confidence=lt.confidence)
        else:
            row.update(upper_time=spec.mean(), upper_confidence=0.0)
            if part.no_skip:
                row.update(lower_time=spec.mean(), lower_confidence=0.0)
        rows.append(row)
    meta = {"command": "bound", "probs_count": spec.n}
    if src.onemax:
        meta["generator"] = {"name": "onemax", "n": src.onemax[0], "k": src.onemax[1]}
    _emit(_table(args.format, reports.BOUND_COLUMNS, rows, meta), args.out)
    if args.plot:
        from .plotting import plot_bound_curves

        plot_bound_curves(rows, args.plot)
    return EXIT_OK


def _simulate(exp: ExperimentConfig, workers: int):
    try:
        return replicate(exp.process, exp.replications, exp.master_seed, workers=workers)
    except IterationCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise


def cmd_simulate(args) -> int:
    merged = _merge_config(args)
    exp = build_experiment(merged, require_seed=True)
    fmt = merged.get("format", "csv")
    dist = _simulate(exp, int(merged.get("workers", 1)))
    if fmt == "json":
        text = reports.render_json(
            {
                "command": "simulate",
                "config": config_echo(exp),
                "summary": dist.summary,
                "counts": {str(t): c for t, c in dist.counts.items()},
            }
        )
    else:
        text = reports.render_csv(
            reports.SIMULATION_COLUMNS, reports.simulation_rows(dist.summary, dist.counts)
        )
    _emit(text, args.out)
    if args.plot:
        from .plotting import plot_hitting_times

        ref = None
        src = exp.source
        if src is not None and src.spec is not None:
            spec = src.spec
            ref = lambda grid: exact_cdf(spec, grid - 1)  # noqa: E731
        plot_hitting_times(dist.counts, args.plot, reference_cdf=ref)
    return EXIT_OK


def cmd_verify(args) -> int:
    merged = _merge_config(args)
    if "grid" not in merged:
        raise ConfigError("need --delta or --r")
    exp = build_experiment(merged, require_seed=False)
    grid_kind = merged.get("grid_kind", "delta")
    src = exp.source
    if exp.process.process == "level-chain":
        target = Target.geometric(src.spec)
        if grid_kind == "r":
            if not src.onemax:
                raise ConfigError("--r needs a OneMax process or the onemax generator")
            target = Target.onemax(src.onemax[0], src.spec)
    else:
        if exp.process.init == exp.process.n:
            raise ConfigError("start level equals n: the run is trivially T = 1")
        target = Target.onemax(exp.process.n, src.spec if src else None)
    dist = None
    if exp.replications > 0:
        dist = _simulate(exp, int(merged.get("workers", 1)))
    try:
        rows = verify_grid(target, merged["grid"], grid_kind, dist, corrupt=args.corrupt)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    meta = {"command": "verify", "config": config_echo(exp), "grid_kind": grid_kind}
    _emit(_table(merged.get("format", "csv"), reports.VERIFY_COLUMNS, rows, meta), args.out)
    if args.plot:
        from .plotting import plot_verification

        plot_verification(rows, args.plot, x_label=grid_kind)
    failed = [r for r in rows if r["verdict"] != "pass"]
    if failed:
        print(f"verification failed at {len(failed)} of {len(rows)} points", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_exact(args) -> int:
    src = _source_from_args(args)
    spec = src.spec
    try:
        if args.threshold is not None:
            fn = exact_upper_tail if args.tail == "upper" else exact_lower_tail
            value = fn(spec, args.threshold, inclusive=args.inclusive)
            rows = [{"tail": args.tail, "threshold": args.threshold, "probability": value}]
            text = _table(args.format, ("tail", "threshold", "probability"), rows, {"command": "exact"})
        else:
            if args.t_max is None:
                raise ConfigError("need --t-max or --threshold")
            pmf = exact_pmf(spec, args.t_max)
            cdf = pmf.cdf()
            rows = [
                {"t": int(t), "mass": float(m), "cdf": float(c)}
                for t, m, c in zip(pmf.support(), pmf.masses, cdf)
            ]
            meta = {"command": "exact", "residual": pmf.residual, "truncated": pmf.truncated}
            if args.format == "json":
                text = reports.render_json({**meta, "rows": rows})
            else:
                # last row carries the mass beyond t_max
                rows.append({"t": "residual", "mass": pmf.residual, "cdf": 1.0})
                text = reports.render_csv(("t", "mass", "cdf"), rows)
    except OracleTooLarge as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed for simulations")
    common.add_argument("--workers", type=int, help="worker processes (default 1)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--plot", help="also render a figure to this image file")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--probs", help="comma-separated success probabilities")
    source.add_argument("--spec", help="JSON spec file or generator onemax:n[:k]")

    process = argparse.ArgumentParser(add_help=False)
    process.add_argument("--config", help="JSON experiment config")
    process.add_argument("--process", choices=PROCESSES)
    process.add_argument("--n", type=int, help="problem size")
    process.add_argument("--k", type=int, help="fixed start level / prefilled coupons (default: uniform)")
    process.add_argument("--replications", "-R", type=int)
    process.add_argument("--cap", type=int, help=f"iteration cap per run (default {DEFAULT_CAP})")

    parser = argparse.ArgumentParser(
        prog="fitness-tails",
        description="Tail bounds for fitness levels, RLS on OneMax, and their verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common, source], help="evaluate tail bounds on a delta grid")
    p.add_argument("--delta", required=True, help="comma-separated increasing deviations")
    p.add_argument("--s", type=float, help="override s (must be >= sum 1/p_i^2)")
    p.add_argument("--h", type=float, help="override h (must be <= min p_i)")
    p.add_argument("--skip", action="store_true", help="process may skip levels: no lower time bound")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("simulate", parents=[common, source, process], help="sample hitting times")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common, source, process], help="check bounds against exact and empirical tails")
    p.add_argument("--delta", help="comma-separated deviations")
    p.add_argument("--r", help="comma-separated multiples of n (OneMax only)")
    p.add_argument("--corrupt", type=float, default=1.0, help="scale the closed-form bound (self-test)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("exact", parents=[common, source], help="exact distribution of the geometric sum")
    p.add_argument("--t-max", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--tail", choices=("upper", "lower"), default="upper")
    p.add_argument("--inclusive", action="store_true", help="use >= / <= instead of > / <")
    p.set_defaults(func=cmd_exact)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "format", None) is None and args.command in ("bound", "exact"):
        args.format = "csv"
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IterationCapExceeded:
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
