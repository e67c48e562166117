"""Command-line runner: ``greenqit run``, ``greenqit verify-all``, ``greenqit list``.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .experiments import EXPERIMENTS, ORDER, run_experiment

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_SEED = 1
CONFIG_KEYS = {"experiment", "seed", "params", "output_dir"}
REPORT_NAME = "report.json"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# config handling
# --------------------------------------------------------------------------


def _coerce(value, default, key):
    """Convert a config/override value to the type of its default."""
    try:
        if isinstance(default, bool):
            if isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0"):
                    raise ValueError
                return value.lower() in ("true", "1")
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, str):
                value = json.loads(value)
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, list):
            if isinstance(value, str):
                value = json.loads(value)
            if isinstance(value, (int, float)):
                value = [value]
            return [type(default[0])(v) for v in value]
    except (ValueError, TypeError, json.JSONDecodeError):
        raise UsageError(f"parameter {key!r}: cannot interpret {value!r} as {type(default).__name__}") from None
    return value


def resolve_config(config: dict, experiment=None, seed=None, out=None, overrides=()) -> dict:
    unknown = set(config) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    cfg = {"experiment": config.get("experiment"), "seed": config.get("seed", DEFAULT_SEED),
           "params": dict(config.get("params") or {}), "output_dir": config.get("output_dir")}
    if experiment is not None:
        cfg["experiment"] = experiment
    if seed is not None:
        cfg["seed"] = seed
    if out is not None:
        cfg["output_dir"] = out
    for item in overrides:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        cfg["params"][k.strip()] = v.strip()
    name = cfg["experiment"]
    if name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {name!r}; valid experiments: {', '.join(ORDER)}")
    try:
        cfg["seed"] = int(cfg["seed"])
    except (TypeError, ValueError):
        raise UsageError(f"seed must be an integer, got {cfg['seed']!r}") from None
    if not 0 <= cfg["seed"] < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    defaults = EXPERIMENTS[name].defaults
    bad = set(cfg["params"]) - set(defaults)
    if bad:
        raise UsageError(f"unknown parameters for {name}: {sorted(bad)}; accepted: {sorted(defaults)}")
    params = dict(defaults)
    for k, v in cfg["params"].items():
        params[k] = _coerce(v, defaults[k], k)
    cfg["params"] = params
    if not cfg["output_dir"]:
        raise UsageError("no output directory (set output_dir in the config or pass --out)")
    return cfg


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if x is None:
        return ""
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(c) for c in row])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _prepare_dir(out: Path, names: list[str], overwrite: bool) -> None:
    """Refuse to mix with a previous run unless ``overwrite``; then clear it."""
    if out.exists() and not out.is_dir():
        raise UsageError(f"{out} exists and is not a directory")
    if not out.exists():
        return
    existing = [p for p in out.iterdir()]
    if not existing:
        return
    if not overwrite:
        raise UsageError(f"{out} is not empty; pass --overwrite to replace its contents")
    previous = set(names)
    report = out / REPORT_NAME
    if report.exists():
        try:
            previous |= set(json.loads(report.read_text()).get("files", []))
        except (json.JSONDecodeError, OSError):
            pass
    foreign = [p.name for p in existing if p.name not in previous | {REPORT_NAME} and not p.is_dir()]
    if foreign:
        raise UsageError(f"{out} holds files not produced by this tool: {sorted(foreign)[:5]}")
    for p in existing:
        if p.is_file():
            p.unlink()


def execute(cfg: dict, overwrite: bool = False) -> dict:
    """Run one validated config and write its CSV tables and report."""
    out = Path(cfg["output_dir"])
    t0 = time.perf_counter()
    outcome, _ = run_experiment(cfg["experiment"], cfg["seed"], cfg["params"])
    wall = time.perf_counter() - t0
    files = sorted(f"{name}.csv" for name in outcome.tables)
    _prepare_dir(out, files, overwrite)
    out.mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in sorted(outcome.tables.items()):
        _atomic_write(out / f"{name}.csv", csv_text(header, rows))
    report = {
        "config": {"experiment": cfg["experiment"], "seed": cfg["seed"], "params": cfg["params"],
                   "output_dir": str(out)},
        "checks": [c.as_dict() for c in outcome.checks],
        "passed": outcome.passed,
        "wall_clock_seconds": wall,
        "files": files,
    }
    _atomic_write(out / REPORT_NAME, json.dumps(report, indent=2, sort_keys=False) + "\n")
    return report


def verify_all(seed: int = DEFAULT_SEED, out: str | Path = "verify-all-output", overwrite: bool = False,
               echo=print) -> dict:
    out = Path(out)
    cfgs = [resolve_config({"experiment": name, "seed": seed, "output_dir": str(out / name)}) for name in ORDER]
    if out.exists() and any(out.iterdir()) and not overwrite:
        raise UsageError(f"{out} is not empty; pass --overwrite to replace its contents")
    t0 = time.perf_counter()
    reports = []
    for cfg in cfgs:
        rep = execute(cfg, overwrite=overwrite)
        reports.append(rep)
        for c in rep["checks"]:
            echo(f"[{'PASS' if c['passed'] else 'FAIL'}] {cfg['experiment']}: {c['name']} = {c['value']} "
                 f"({c['comparison']} {c['threshold']})")
        echo(f"{cfg['experiment']}: {'pass' if rep['passed'] else 'FAIL'} in {rep['wall_clock_seconds']:.1f}s")
    summary = {
        "seed": seed,
        "order": ORDER,
        "experiments": {r["config"]["experiment"]: {"passed": r["passed"],
                                                    "wall_clock_seconds": r["wall_clock_seconds"],
                                                    "files": r["files"]} for r in reports},
        "passed": all(r["passed"] for r in reports),
        "wall_clock_seconds": time.perf_counter() - t0,
    }
    out.mkdir(parents=True, exist_ok=True)
    _atomic_write(out / "verify_all.json", json.dumps(summary, indent=2) + "\n")
    echo(f"overall: {'pass' if summary['passed'] else 'FAIL'} in {summary['wall_clock_seconds']:.1f}s")
    return summary


# --------------------------------------------------------------------------
# argparse front end
# --------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greenqit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--config", help="JSON config file")
    run.add_argument("--experiment")
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    run.add_argument("--overwrite", action="store_true", help="replace a previous run in the output directory")
    va = sub.add_parser("verify-all", help="run every experiment in a fixed order")
    va.add_argument("--seed", type=int, default=DEFAULT_SEED)
    va.add_argument("--out", default="verify-all-output")
    va.add_argument("--overwrite", action="store_true")
    sub.add_parser("list", help="list experiments and their parameters")
    return parser


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        if args.command == "list":
            for name in ORDER:
                exp = EXPERIMENTS[name]
                print(f"{name}: {exp.help}")
                for k, v in exp.defaults.items():
                    print(f"    {k} = {json.dumps(v)}")
            return EXIT_PASS
        if args.command == "run":
            config = {}
            if args.config:
                try:
                    config = json.loads(Path(args.config).read_text())
                except (OSError, json.JSONDecodeError) as exc:
                    raise UsageError(f"cannot read config {args.config}: {exc}") from None
                if not isinstance(config, dict):
                    raise UsageError("config must be a JSON object")
            cfg = resolve_config(config, args.experiment, args.seed, args.out, args.param)
            out = Path(cfg["output_dir"])
            if out.exists() and out.is_dir() and any(out.iterdir()) and not args.overwrite:
                raise UsageError(f"{out} is not empty; pass --overwrite to replace its contents")
            report = execute(cfg, overwrite=args.overwrite)
            for c in report["checks"]:
                print(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']} = {c['value']} "
                      f"({c['comparison']} {c['threshold']})")
            print(f"{cfg['experiment']}: {'pass' if report['passed'] else 'FAIL'}")
            return EXIT_PASS if report["passed"] else EXIT_FAIL
        if args.command == "verify-all":
            summary = verify_all(args.seed, args.out, args.overwrite)
            return EXIT_PASS if summary["passed"] else EXIT_FAIL
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
