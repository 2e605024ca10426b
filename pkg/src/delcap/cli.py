"""Command-line front end: bound curves, improvement table, BAA runs, verification.

Exit codes: 0 success, 1 usage, 2 data format, 3 verification failure,
4 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import bounds
from .baa import BaaProblem, baa_capacity
from .channel import ChannelParams
from .errors import DataFormatError, InstanceTooLargeError, InvalidInputError, OutOfValidityRangeError
from .verify import run_verification, SUITES

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY, EXIT_BUDGET = 0, 1, 2, 3, 4

PRECISION = 9


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class DGrid:
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not 0.0 <= self.start <= self.stop <= 1.0:
            raise UsageError(f"d-grid needs 0 <= start <= stop <= 1, got {self.start}:{self.stop}")
        if not self.step > 0:
            raise UsageError(f"d-grid step must be positive, got {self.step}")

    @classmethod
    def parse(cls, text: str) -> "DGrid":
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"d-grid must look like start:stop:step, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError:
            raise UsageError(f"d-grid values must be numbers, got {text!r}") from None

    def values(self) -> list[float]:
        n = int((self.stop - self.start) / self.step + 1e-9)
        return [round(self.start + i * self.step, PRECISION) for i in range(n + 1)]


@dataclass
class RunConfig:
    k_list: list[int]
    d_grid: DGrid
    bound_kinds: list[str] = field(default_factory=lambda: ["erasure-ub", "theorem1-ub", "markov-lb"])
    table_path: Path | None = None
    output_path: Path | None = None
    search: bounds.SearchConfig = field(default_factory=bounds.SearchConfig)
    tolerance: float = 1e-7
    baa_l: int = 2
    seed: int = 0

    def __post_init__(self):
        for k in self.k_list:
            if k < 1:
                raise UsageError(f"k must be a positive integer, got {k}")
        if not self.bound_kinds:
            raise UsageError("no bound kinds requested")
        for kind in self.bound_kinds:
            if kind not in bounds.BOUND_KINDS:
                raise UsageError(f"unknown bound kind {kind!r}; choose from {', '.join(bounds.BOUND_KINDS)}")
        if not self.tolerance > 0:
            raise UsageError("--tol must be positive")

    def require_k(self) -> None:
        if not self.k_list:
            raise UsageError("at least one --k is required")

    def load_table(self) -> bounds.BinaryUbTable | None:
        return None if self.table_path is None else bounds.BinaryUbTable.load(self.table_path)


def _fmt(v: float) -> str:
    return f"{v:.{PRECISION}f}"


def _fmt_d(d: float) -> str:
    return format(d, f".{PRECISION}g")


def run_curves(config: RunConfig) -> str:
    """CSV of every requested bound for each (k, d), k-major."""
    config.require_k()
    table = config.load_table()
    ds = config.d_grid.values()
    if "smalld-ub" in config.bound_kinds and ds and ds[-1] > 0.1:
        raise UsageError("smalld-ub is only available for d <= 0.1")
    estimates = [kind for kind in config.bound_kinds if kind in bounds.ESTIMATE_KINDS]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["k", "d", *config.bound_kinds, "estimate"])
    for k in config.k_list:
        for d in ds:
            row = [str(k), _fmt_d(d)]
            for kind in config.bound_kinds:
                row.append(_fmt(bounds.bound_value(kind, k, d, table, config.search)))
            row.append(";".join(estimates) or "none")
            writer.writerow(row)
    return out.getvalue()


def improvement_table(k_list: Sequence[int], d_grid: DGrid, table: bounds.BinaryUbTable | None = None) -> str:
    """CSV of erasure_ub - theorem1_ub per (k, d); the gap does not depend on k."""
    ds = d_grid.values()
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["k", "d", "improvement"])
    reference: dict[float, float] = {}
    for k in k_list:
        for d in ds:
            gap = bounds.erasure_ub(k, d) - bounds.theorem1_ub(k, d, table)
            ref = reference.setdefault(d, gap)
            assert abs(gap - ref) <= 1e-12, f"improvement depends on k at d={d}"
            writer.writerow([str(k), _fmt_d(d), _fmt(gap)])
    return out.getvalue()


def run_baa(config: RunConfig) -> str:
    config.require_k()
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["k", "l", "d", "capacity_per_symbol", "final_gap", "iterations", "converged"])
    for k in config.k_list:
        for d in config.d_grid.values():
            res = baa_capacity(BaaProblem(config.baa_l, ChannelParams(k, d), tolerance=config.tolerance))
            writer.writerow([str(k), str(config.baa_l), _fmt_d(d), _fmt(res.capacity_per_symbol),
                             f"{res.final_gap:.3e}", str(res.iterations), str(res.converged).lower()])
    return out.getvalue()


def parse_curves(text: str) -> list[dict]:
    """Read a CSV produced by :func:`run_curves` or :func:`improvement_table`."""
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for key, value in rec.items():
            if key == "k":
                row[key] = int(value)
            elif key == "estimate":
                row[key] = value
            else:
                row[key] = float(value)
        rows.append(row)
    return rows


# -- argument handling --


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def read_config_file(path: str | Path) -> dict[str, str]:
    """key=value lines; blank lines and '#' comments ignored."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    values = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("_", "-")] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--k", action="append", type=int, help="alphabet half-size K (repeatable)")
    common.add_argument("--d-grid", help="deletion probabilities as start:stop:step")
    common.add_argument("--bounds", help="comma-separated bound kinds")
    common.add_argument("--binary-ub-table", help="CSV file of binary-channel upper bounds (header d,ub)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--tol", type=float, help="BAA stopping tolerance in bits")
    common.add_argument("--baa-L", type=int, dest="baa_l", help="BAA block length")
    common.add_argument("--seed", type=int, help="seed for randomized verification draws")
    common.add_argument("--config", help="key=value file supplying any of the above")

    parser = _Parser(prog="delcap", description="Capacity bounds for 2K-ary deletion channels.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("curves", parents=[common], help="bound curves over a d-grid")
    sub.add_parser("improvement", parents=[common], help="erasure_ub - theorem1_ub over a d-grid")
    sub.add_parser("baa", parents=[common], help="finite-length capacity by Blahut-Arimoto")
    verify = sub.add_parser("verify", parents=[common], help="run a property suite")
    verify.add_argument("suite", nargs="?", help=f"one of: {', '.join(SUITES)}")
    return parser


_CONFIG_KEYS = {"k", "d-grid", "bounds", "binary-ub-table", "out", "tol", "baa-L", "seed", "suite"}


def _merge(args: argparse.Namespace) -> dict:
    """Command-line values over config-file values over defaults."""
    file_values = read_config_file(args.config) if args.config else {}
    unknown = set(file_values) - _CONFIG_KEYS - {"baa-l"}
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def pick(attr, key, convert=str):
        value = getattr(args, attr, None)
        if value is not None:
            return value
        raw = file_values.get(key, file_values.get(key.lower()))
        if raw is None:
            return None
        try:
            return convert(raw)
        except ValueError:
            raise UsageError(f"config value {key}={raw!r} is malformed") from None

    return {
        "k": pick("k", "k", lambda s: [int(v) for v in s.split(",") if v.strip()]),
        "d_grid": pick("d_grid", "d-grid"),
        "bounds": pick("bounds", "bounds"),
        "table": pick("binary_ub_table", "binary-ub-table"),
        "out": pick("out", "out"),
        "tol": pick("tol", "tol", float),
        "baa_l": pick("baa_l", "baa-L", int),
        "seed": pick("seed", "seed", int),
        "suite": pick("suite", "suite"),
    }


def config_from_args(args: argparse.Namespace) -> tuple[RunConfig, dict]:
    merged = _merge(args)
    kinds = merged["bounds"]
    config = RunConfig(
        k_list=merged["k"] or [],
        d_grid=DGrid.parse(merged["d_grid"] or "0:1:0.01"),
        bound_kinds=[s.strip() for s in kinds.split(",") if s.strip()] if kinds is not None else
        ["erasure-ub", "theorem1-ub", "markov-lb"],
        table_path=Path(merged["table"]) if merged["table"] else None,
        output_path=Path(merged["out"]) if merged["out"] else None,
        tolerance=merged["tol"] if merged["tol"] is not None else 1e-7,
        baa_l=merged["baa_l"] if merged["baa_l"] is not None else 2,
        seed=merged["seed"] if merged["seed"] is not None else 0,
    )
    return config, merged


def _emit(text: str, path: Path | None, stdout) -> None:
    if path is None:
        stdout.write(text)
    else:
        path.write_text(text)


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        config, merged = config_from_args(args)
        if args.command == "curves":
            _emit(run_curves(config), config.output_path, stdout)
        elif args.command == "improvement":
            config.require_k()
            _emit(improvement_table(config.k_list, config.d_grid, config.load_table()), config.output_path, stdout)
        elif args.command == "baa":
            _emit(run_baa(config), config.output_path, stdout)
        elif args.command == "verify":
            suite = merged["suite"]
            if suite not in SUITES:
                raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
            report = run_verification(suite, seed=config.seed, tolerance=merged["tol"])
            _emit(json.dumps(report.as_dict(), indent=2) + "\n", config.output_path, stdout)
            if not report.passed:
                return EXIT_VERIFY
        return EXIT_OK
    except (UsageError, InvalidInputError, OutOfValidityRangeError) as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except DataFormatError as exc:
        print(f"data format error: {exc}", file=stderr)
        return EXIT_DATA
    except InstanceTooLargeError as exc:
        print(f"budget exceeded: {exc}", file=stderr)
        return EXIT_BUDGET
