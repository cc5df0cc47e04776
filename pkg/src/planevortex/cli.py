"""Command line front end: ``planevortex run <config>`` and ``planevortex list-studies``.

A config is TOML (or JSON) with a ``study`` name, an optional ``seed`` and
``threads``, and a ``params`` table overriding the study defaults.  Artifacts
go to ``<out>/<study>/``: one CSV per table, field snapshots, and
``summary.json``.

Exit codes: 0 all checks pass, 1 some check failed, 2 malformed config,
3 unknown study, 4 invalid parameter values, 5 guard-band violation,
6 other solver failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import DomainTooSmallError, EnsembleMemberError, PlaneVortexError
from .snapshot import write_snapshot
from .studies import STUDIES, Context

EXIT_OK, EXIT_FAILED, EXIT_MALFORMED, EXIT_UNKNOWN, EXIT_INVALID, EXIT_GUARD, EXIT_SOLVER = range(7)
DEFAULT_OUT = "planevortex-out"
_TOP_KEYS = {"study", "seed", "threads", "params"}


class MalformedConfig(Exception):
    pass


class UnknownStudy(Exception):
    pass


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MalformedConfig(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".json":
        loaders = [json.loads]
    else:
        loaders = [tomllib.loads, json.loads]
    for load in loaders:
        try:
            cfg = load(text)
            break
        except (ValueError, tomllib.TOMLDecodeError):
            continue
    else:
        raise MalformedConfig(f"{path} is neither valid TOML nor JSON")
    if not isinstance(cfg, dict):
        raise MalformedConfig("config must be a table")
    return cfg


def _coerce(key, value, default):
    """Convert a config value to the type of its default, or raise MalformedConfig."""
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
    elif isinstance(default, int):
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif isinstance(default, str):
        if isinstance(value, str):
            return value
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif isinstance(default, list):
        if isinstance(value, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            proto = default[0] if default else 0.0
            return [int(v) if isinstance(proto, int) else float(v) for v in value]
    raise MalformedConfig(f"parameter {key!r} has the wrong type")


def resolve(cfg: dict, seed: int | None = None, threads: int | None = None):
    """Validate the config structure; return (study, params, context)."""
    extra = set(cfg) - _TOP_KEYS
    if extra:
        raise MalformedConfig(f"unknown top-level keys: {sorted(extra)}")
    name = cfg.get("study")
    if not isinstance(name, str):
        raise MalformedConfig("config needs a string 'study'")
    if name not in STUDIES:
        raise UnknownStudy(name)
    study = STUDIES[name]
    raw = cfg.get("params", {})
    if not isinstance(raw, dict):
        raise MalformedConfig("'params' must be a table")
    unknown = set(raw) - set(study.defaults)
    if unknown:
        raise MalformedConfig(f"unknown parameters for {name}: {sorted(unknown)}")
    params = dict(study.defaults)
    for k, v in raw.items():
        params[k] = _coerce(k, v, study.defaults[k])
    if seed is None:
        seed = cfg.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0 or seed >= 2**64):
        raise MalformedConfig("seed must be an unsigned 64-bit integer")
    if study.needs_seed and seed is None:
        raise MalformedConfig(f"study {name} samples randomly and needs a seed")
    if threads is None:
        threads = cfg.get("threads", os.cpu_count() or 1)
    if not isinstance(threads, int) or isinstance(threads, bool):
        raise MalformedConfig("threads must be an integer")
    if threads < 1:
        raise ValueError("threads must be at least 1")
    return study, params, Context(workers=threads, seed=seed)


def config_hash(study: str, params: dict, seed) -> str:
    blob = json.dumps({"study": study, "params": params, "seed": seed}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_table(path: Path, rows: list):
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(keys)
        for r in rows:
            w.writerow([_cell(r.get(k, "")) for k in keys])


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def run(config_path, out: str | None = None, threads: int | None = None, seed: int | None = None,
        stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        cfg = load_config(config_path)
        study, params, ctx = resolve(cfg, seed, threads)
    except MalformedConfig as exc:
        print(f"malformed config: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except UnknownStudy as exc:
        print(f"unknown study: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except ValueError as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        result = study.runner(params, ctx)
    except DomainTooSmallError as exc:
        print(f"guard band violated: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except EnsembleMemberError as exc:
        print(f"ensemble {exc}", file=sys.stderr)
        if isinstance(exc.cause, DomainTooSmallError):
            return EXIT_GUARD
        if isinstance(exc.cause, ValueError) and not isinstance(exc.cause, PlaneVortexError):
            return EXIT_INVALID
        return EXIT_SOLVER
    except PlaneVortexError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INVALID

    root = Path(out or os.environ.get("PLANEVORTEX_OUT") or DEFAULT_OUT) / study.name
    root.mkdir(parents=True, exist_ok=True)
    for name, rows in result.tables.items():
        write_table(root / f"{name}.csv", rows)
    snaps = []
    for name, fld, meta in result.snapshots:
        path = write_snapshot(root / f"{name}.pvf", fld, meta)
        snaps.append(path.name)
    summary = {
        "study": study.name,
        "anchor": study.anchor,
        "description": study.description,
        "params": params,
        "seed": ctx.seed,
        "config_hash": config_hash(study.name, params, ctx.seed),
        "pass": result.passed,
        "criteria": [c.as_dict() for c in result.checks],
        "tables": sorted(f"{n}.csv" for n in result.tables),
        "snapshots": snaps,
    }
    (root / "summary.json").write_text(json.dumps(summary, indent=2))
    for c in result.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {study.name}: {c.name} = {c.value} ({c.relation} {c.threshold})", file=stdout)
    print(f"{study.name}: {'pass' if result.passed else 'FAIL'} -> {root}", file=stdout)
    return EXIT_OK if result.passed else EXIT_FAILED


def list_studies(stdout=None) -> int:
    stdout = stdout or sys.stdout
    for s in STUDIES.values():
        print(f"{s.name:24s} {s.description} [{s.anchor}]", file=stdout)
    return EXIT_OK


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _common(default) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=default,
                        help="output root (default: $PLANEVORTEX_OUT or ./planevortex-out)")
    common.add_argument("--threads", type=int, default=default,
                        help="concurrent member solves (default: all cores)")
    common.add_argument("--seed", type=_seed, default=default,
                        help="seed for ensemble sampling, overrides the config")
    return common


def build_parser() -> argparse.ArgumentParser:
    # options may come before or after the subcommand; the subcommand copy
    # must not overwrite values given before it
    parser = argparse.ArgumentParser(prog="planevortex", parents=[_common(None)],
                                     description="Plane vortex dynamics studies.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", parents=[_common(argparse.SUPPRESS)],
                           help="run the study named in a config file")
    p_run.add_argument("config")
    sub.add_parser("list-studies", help="print the shipped studies")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-studies":
        return list_studies()
    return run(args.config, out=args.out, threads=args.threads, seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
