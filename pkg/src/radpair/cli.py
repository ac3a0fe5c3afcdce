"""Command-line front end: ``radpair run | list | check``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .checks import run_checks
from .experiments import SweepError, SweepSpec, builtin, builtin_experiments, run_sweep
from .model import ModelError
from .observables import ObservableError
from .output import FORMATS, write_results

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
CONFIG_KEYS = {"experiments", "output_dir", "format", "workers", "overrides"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    experiments: list = field(default_factory=list)
    output_dir: str = "results"
    format: str = "csv"
    workers: int | str = 1
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.experiments, list) or not self.experiments:
            raise ConfigError("'experiments' must be a non-empty list")
        if self.format not in FORMATS:
            raise ConfigError(f"'format' must be one of {FORMATS}, got {self.format!r}")
        if self.workers != "auto" and not (isinstance(self.workers, int) and self.workers >= 1):
            raise ConfigError(f"'workers' must be a positive integer or 'auto', got {self.workers!r}")
        if not isinstance(self.overrides, dict):
            raise ConfigError("'overrides' must be a mapping of key paths to values")

    @property
    def n_workers(self) -> int:
        return (os.cpu_count() or 1) if self.workers == "auto" else int(self.workers)

    def sweeps(self) -> list[SweepSpec]:
        """Resolve experiments and apply overrides; raises before any run starts."""
        out = []
        for entry in self.experiments:
            try:
                spec = builtin(entry) if isinstance(entry, str) else SweepSpec.from_dict(entry)
                for path, value in self.overrides.items():
                    spec = spec.with_override(path, value)
            except (SweepError, ModelError, ObservableError, TypeError) as exc:
                raise ConfigError(f"experiment {entry if isinstance(entry, str) else entry.get('name')!r}: {exc}") from None
            out.append(spec)
        return out


def load_config(path) -> RunConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    return RunConfig(**data)


def parse_set(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key.path=value, got {item!r}")
        out[key.strip()] = yaml.safe_load(value)
    return out


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.output_dir:
            cfg.output_dir = args.output_dir
        if args.format:
            cfg.format = args.format
        if args.workers:
            cfg.workers = args.workers if args.workers == "auto" else int(args.workers)
        cfg.overrides.update(parse_set(args.set))
        cfg.__post_init__()
        sweeps = cfg.sweeps()
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    failures = []
    for spec in sweeps:
        try:
            series = run_sweep(spec, workers=cfg.n_workers)
            paths = write_results(spec.name, spec.to_dict(), series, Path(cfg.output_dir),
                                  cfg.format, spec.output)
        except (SweepError, ArithmeticError, ValueError, RuntimeError) as exc:
            failures.append((spec.name, str(exc)))
            continue
        for p in paths:
            print(p)
    for name, msg in failures:
        print(f"FAILED {name}: {msg}", file=sys.stderr)
    return EXIT_FAILURE if failures else EXIT_OK


def cmd_list(args) -> int:
    specs = builtin_experiments()
    if args.json:
        print(json.dumps([
            {"name": s.name, "observable": s.observable, "description": s.description} for s in specs
        ], indent=1))
    else:
        width = max(len(s.name) for s in specs)
        for s in specs:
            print(f"{s.name:<{width}}  {s.description}")
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        overrides = parse_set(args.set)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    results = run_checks(overrides)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}" + (f" ({r.detail})" if r.detail else ""))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failing invariant(s): {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="radpair", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the experiments listed in a config file")
    r.add_argument("config")
    r.add_argument("--output-dir")
    r.add_argument("--format", choices=FORMATS)
    r.add_argument("--workers", help="positive integer or 'auto'")
    r.add_argument("--set", action="append", metavar="KEY.PATH=VALUE", help="override, repeatable")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list", help="list builtin experiments")
    ls.add_argument("--json", action="store_true")
    ls.set_defaults(func=cmd_list)

    c = sub.add_parser("check", help="run the invariant self-check")
    c.add_argument("--set", action="append", metavar="KEY.PATH=VALUE")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
