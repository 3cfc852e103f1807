"""Command-line front end: ``covert-ra {bounds,simulate,sweep,verify}``."""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__, bounds, simulation, verify
from .params import ParameterError, channel_from_dict, load_config, scenario_from_dict

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2
DEFAULT_TRIALS = 1000


class UsageError(Exception):
    pass


def fmt(x: Any) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _jsonable(x: Any) -> Any:
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


def manifest(args: argparse.Namespace, seed: int | None, timestamp: bool = True) -> dict:
    doc = {
        "config": str(args.config) if getattr(args, "config", None) else None,
        "subcommand": args.command,
        "output_dir": str(args.out),
        "tool_version": __version__,
        "master_seed": seed,
    }
    if timestamp:
        doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return doc


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n")


def _write_csv(path: Path, rows: Sequence[dict], header: dict) -> None:
    """CSV with the time-independent manifest as leading ``#`` lines."""
    lines = [f"# {k}: {v}" for k, v in header.items()]
    lines.append(",".join(simulation.SWEEP_COLUMNS))
    lines += [",".join(fmt(row[c]) for c in simulation.SWEEP_COLUMNS) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _read_config(path) -> dict:
    if path is None:
        raise UsageError("--config is required")
    try:
        doc = load_config(path)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}")
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must be a JSON object")
    return doc


def _scenarios(doc: dict):
    docs = doc["scenarios"] if "scenarios" in doc else [doc]
    shared = {k: v for k, v in doc.items() if k != "scenarios"}
    return [scenario_from_dict({**shared, **d}) for d in docs]


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_bounds(args) -> int:
    sc = _scenarios(_read_config(args.config))[0]
    proto, channel = simulation.expand_multibit(sc.proto, sc.channel)
    report, flags = bounds.bound_report(proto, channel)
    seed = sc.seed if args.seed is None else args.seed
    doc = {"manifest": manifest(args, seed), "report": report.to_dict(), "flags": flags}
    _write_json(_out_dir(args) / "bounds.json", doc)
    for key, value in report.to_dict().items():
        print(f"{key}: {fmt(value)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc = _read_config(args.config)
    scenarios = _scenarios(doc)
    seed = int(doc.get("seed", 0)) if args.seed is None else args.seed
    trials = args.trials or int(doc.get("trials", DEFAULT_TRIALS))
    rows = []
    for sc in scenarios:
        proto, channel = simulation.expand_multibit(sc.proto, sc.channel)
        rows.append(simulation.sweep_row(proto, channel, trials, seed, args.threads))
    out = _out_dir(args)
    _write_csv(out / "simulate.csv", rows, manifest(args, seed, timestamp=False))
    _write_json(out / "manifest.json", manifest(args, seed))
    print(out / "simulate.csv")
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = _read_config(args.config)
    try:
        grid = [int(n) for n in doc["n_grid"]]
        c = float(doc["c"])
    except KeyError as exc:
        raise ParameterError(exc.args[0], "missing from sweep config")
    channel = channel_from_dict(doc)
    seed = int(doc.get("seed", 0)) if args.seed is None else args.seed
    trials = args.trials or int(doc.get("trials", DEFAULT_TRIALS))
    rows = simulation.run_sweep(grid, c, channel, trials, seed, m=doc.get("m"),
                                mode=doc.get("mode", "inverse_log"), threads=args.threads,
                                detection=bool(doc.get("detection", True)))
    out = _out_dir(args)
    _write_csv(out / "sweep.csv", rows, manifest(args, seed, timestamp=False))
    full = manifest(args, seed)
    _write_json(out / "sweep_rows.json", {"manifest": full, "rows": rows})
    _write_json(out / "manifest.json", full)
    print(out / "sweep.csv")
    return EXIT_OK


def _parse_perturb(items: Sequence[str]) -> dict[str, float]:
    out = {}
    for item in items or ():
        name, _, value = item.partition("=")
        try:
            out[name] = float(value)
        except ValueError:
            raise UsageError(f"--perturb expects NAME=VALUE, got {item!r}")
    return out


def cmd_verify(args) -> int:
    results = verify.run_checks(_parse_perturb(args.perturb), on_result=lambda r: print(r.line()))
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covert-ra", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_text in (
        ("bounds", cmd_bounds, "analytic reliability and covertness bounds as JSON"),
        ("simulate", cmd_simulate, "Monte Carlo for one or more scenarios as CSV"),
        ("sweep", cmd_sweep, "scaling-family sweep over an n grid as CSV and JSON"),
        ("verify", cmd_verify, "run the built-in oracle checks"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", type=Path)
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        if name == "verify":
            p.add_argument("--perturb", action="append", metavar="NAME=VALUE",
                           help="scale a closed form by (1 + VALUE); used to test the checks")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.trials is not None and args.trials < 1:
        print("error: --trials must be positive", file=sys.stderr)
        return EXIT_USAGE
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ParameterError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
