"""Closed-form and optimized capacity bounds for the 2K-ary deletion channel.

Every value is in bits per channel use.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DataFormatError, DomainError, InvalidInputError, OutOfValidityRangeError

LOG2E = math.log2(math.e)

# Binary-channel slope bound C_2(d) <= QUASI_SLOPE (1 - d), valid from QUASI_FROM on.
QUASI_SLOPE = 0.4143
QUASI_FROM = 0.65

BOUND_KINDS = ("erasure-ub", "iid-lb", "markov-lb", "theorem1-ub", "smalld-ub")
ESTIMATE_KINDS = frozenset({"smalld-ub"})


@dataclass(frozen=True)
class ExpansionConstants:
    a1: float = 1.15416377
    a2: float = 1.78628364


EXPANSION = ExpansionConstants()


@dataclass(frozen=True)
class BoundPoint:
    d: float
    value: float
    kind: str
    k: int

    @property
    def is_estimate(self) -> bool:
        return self.kind in ESTIMATE_KINDS


def _check_prob(d: float, name: str = "d") -> None:
    if not 0.0 <= d <= 1.0:
        raise InvalidInputError(f"{name} must lie in [0, 1], got {d!r}")


def _check_k(k: int) -> None:
    if int(k) != k or k < 1:
        raise InvalidInputError(f"k must be a positive integer, got {k!r}")


def binary_entropy(d: float) -> float:
    _check_prob(d)
    if d == 0.0 or d == 1.0:
        return 0.0
    return -d * math.log2(d) - (1.0 - d) * math.log2(1.0 - d)


def erasure_ub(k: int, d: float) -> float:
    _check_k(k)
    _check_prob(d)
    return (1.0 - d) * math.log2(2 * k)


def iid_lb(k: int, d: float) -> float:
    """Rate of i.i.d. uniform codebooks under the unique-subsequence decoder.

    The expression reaches 0 with zero slope at d = 1 - 1/(2K) and grows
    again beyond it, where it no longer describes an achievable rate; the
    bound is 0 there.
    """
    _check_k(k)
    _check_prob(d)
    a = 2 * k
    if d >= 1.0 - 1.0 / a:
        return 0.0
    value = math.log2(a / (a - 1)) + (1.0 - d) * math.log2(a - 1) - binary_entropy(d)
    return max(0.0, value)


def markov_objective(k: int, d: float, gamma: float, p: float) -> float:
    """Bracketed term of the Markov-codebook rate, before the sup over (gamma, p).

    Raises :class:`DomainError` for points outside gamma > 0, 0 < p < 1, or
    where the logarithm's argument is not positive.
    """
    if not gamma > 0.0 or not 0.0 < p < 1.0:
        raise DomainError(f"need gamma > 0 and 0 < p < 1, got gamma={gamma!r}, p={p!r}")
    _check_prob(d)
    value = _markov_objective_array(k, d, np.asarray(gamma, float), np.asarray(p, float))
    if not np.isfinite(value):
        raise DomainError(f"log argument not positive at gamma={gamma!r}, p={p!r}")
    return float(value)


def _markov_objective_array(k: int, d: float, gamma: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Vectorised objective; invalid points come back as -inf."""
    a1 = 2 * k - 1
    s = 2 * k * p - 1
    q = (1.0 + (1.0 - d) * a1 * s / (a1 - d * s)) / (2 * k)
    e = np.exp(-gamma)
    big_a = e * (1.0 - p) / (a1 * (1.0 - e * (1.0 - (1.0 - p) / a1)))
    big_b = e * ((1.0 - p) * big_a + p)
    inner = (1.0 - q) * big_a + q * big_b
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -(1.0 - d) * np.log2(inner) - gamma * LOG2E
    return np.where((inner > 0) & np.isfinite(val), val, -np.inf)


@dataclass(frozen=True)
class SearchConfig:
    gamma_step: float = 0.05
    gamma_max: float = 5.0
    p_min: float = 0.01
    p_max: float = 0.99
    p_step: float = 0.01
    tol: float = 1e-9
    max_iter: int = 500

    def gamma_grid(self) -> np.ndarray:
        n = int(round(self.gamma_max / self.gamma_step))
        return self.gamma_step * np.arange(1, n + 1)

    def p_grid(self) -> np.ndarray:
        n = int(round((self.p_max - self.p_min) / self.p_step))
        return self.p_min + self.p_step * np.arange(n + 1)


@dataclass(frozen=True)
class MarkovSearchResult:
    """Outcome of the Markov-codebook sup.

    ``value`` is clamped at 0; ``objective`` is the unclamped objective at
    ``(gamma, p)``.
    """

    value: float
    objective: float
    gamma: float
    p: float
    evaluations: int
    converged: bool


_BOX_EDGE = 1e-6


def markov_lb(k: int, d: float, search: SearchConfig | None = None) -> MarkovSearchResult:
    """Grid search over (gamma, p) followed by Nelder-Mead refinement."""
    _check_k(k)
    _check_prob(d)
    search = search or SearchConfig()
    gammas, ps = search.gamma_grid(), search.p_grid()
    grid = _markov_objective_array(k, d, gammas[:, None], ps[None, :])
    evaluations = grid.size
    # argmax returns the first maximum: smallest gamma, then smallest p.
    gi, pi = np.unravel_index(int(np.argmax(grid)), grid.shape)
    best = (float(grid[gi, pi]), float(gammas[gi]), float(ps[pi]))

    lo = (0.0, 0.0)
    hi = (search.gamma_max, 1.0)

    def negated(v):
        g, p = v
        if not (lo[0] < g <= hi[0] and lo[1] < p < hi[1]):
            return np.inf
        return -float(_markov_objective_array(k, d, np.asarray(g), np.asarray(p)))

    res = minimize(
        negated,
        x0=np.array([best[1], best[2]]),
        method="Nelder-Mead",
        options={
            "xatol": search.tol,
            "fatol": search.tol,
            "maxiter": search.max_iter,
            "initial_simplex": np.array(
                [[best[1], best[2]], [best[1] + search.gamma_step / 2, best[2]], [best[1], best[2] + search.p_step / 2]]
            ),
        },
    )
    evaluations += int(res.nfev)
    refined_g, refined_p = float(res.x[0]), float(res.x[1])
    if np.isfinite(res.fun) and -res.fun > best[0]:
        best = (float(-res.fun), refined_g, refined_p)
    on_edge = (
        refined_g < _BOX_EDGE
        or refined_g > search.gamma_max - _BOX_EDGE
        or refined_p < _BOX_EDGE
        or refined_p > 1.0 - _BOX_EDGE
    )
    objective, gamma, p = best
    return MarkovSearchResult(
        value=max(0.0, objective),
        objective=objective,
        gamma=gamma,
        p=p,
        evaluations=evaluations,
        converged=bool(res.success) and not on_edge,
    )


@dataclass(frozen=True)
class BinaryUbTable:
    """Tabulated upper bounds on the binary deletion channel capacity."""

    rows: tuple[tuple[float, float], ...]
    provenance: str = ""

    def __post_init__(self):
        prev = None
        for i, (d, ub) in enumerate(self.rows):
            if not 0.0 <= d <= 1.0 or not 0.0 <= ub <= 1.0:
                raise DataFormatError(f"row {i}: values out of range (d={d}, ub={ub})")
            if prev is not None and d <= prev:
                raise DataFormatError(f"row {i}: d={d} is not strictly increasing")
            prev = d

    @property
    def d_range(self) -> tuple[float, float]:
        return self.rows[0][0], self.rows[-1][0]

    def interpolate(self, d: float) -> float | None:
        """Linear interpolation between rows; None outside the tabulated range."""
        if not self.rows:
            return None
        lo, hi = self.d_range
        if d < lo or d > hi:
            return None
        ds = [r[0] for r in self.rows]
        ubs = [r[1] for r in self.rows]
        return float(np.interp(d, ds, ubs))

    @classmethod
    def parse(cls, text: str, provenance: str = "") -> "BinaryUbTable":
        """Parse ``d,ub`` CSV text; errors name the 1-based line."""
        lines = text.splitlines()
        if not lines or [c.strip() for c in lines[0].split(",")] != ["d", "ub"]:
            raise DataFormatError("line 1: expected header 'd,ub'")
        rows = []
        prev = None
        for lineno, rec in enumerate(csv.reader(io.StringIO("\n".join(lines[1:]))), start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != 2:
                raise DataFormatError(f"line {lineno}: expected 2 fields, got {len(rec)}")
            try:
                d, ub = float(rec[0]), float(rec[1])
            except ValueError:
                raise DataFormatError(f"line {lineno}: not a decimal number: {','.join(rec)!r}") from None
            if not (math.isfinite(d) and math.isfinite(ub)):
                raise DataFormatError(f"line {lineno}: non-finite value")
            if not 0.0 <= d <= 1.0:
                raise DataFormatError(f"line {lineno}: d={d} outside [0, 1]")
            if not 0.0 <= ub <= 1.0:
                raise DataFormatError(f"line {lineno}: ub={ub} outside [0, 1]")
            if prev is not None and d <= prev:
                raise DataFormatError(f"line {lineno}: d={d} does not increase (previous {prev})")
            prev = d
            rows.append((d, ub))
        if not rows:
            raise DataFormatError("table has no data rows")
        return cls(tuple(rows), provenance)

    @classmethod
    def load(cls, path: str | Path) -> "BinaryUbTable":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise DataFormatError(f"cannot read {path}: {exc}") from exc
        return cls.parse(text, provenance=str(path))

    def to_csv(self) -> str:
        return "d,ub\n" + "".join(f"{d!r},{ub!r}\n" for d, ub in self.rows)


def binary_ub(d: float, table: BinaryUbTable | None = None) -> float:
    """Best available upper bound on the binary deletion channel capacity."""
    _check_prob(d)
    candidates = [1.0 - d]
    if d >= QUASI_FROM:
        candidates.append(QUASI_SLOPE * (1.0 - d))
    if table is not None:
        t = table.interpolate(d)
        if t is not None:
            candidates.append(t)
    return min(candidates)


def theorem1_ub(k: int, d: float, table: BinaryUbTable | None = None) -> float:
    """Binary-channel upper bound plus (1 - d) log2 K."""
    _check_k(k)
    return binary_ub(d, table) + (1.0 - d) * math.log2(k)


def smalld_ub(k: int, d: float, d_max: float = 0.1, constants: ExpansionConstants = EXPANSION) -> float:
    """Small-d expansion of the composite upper bound with the O(d^(3-eps)) tail dropped.

    An estimate, not a certified bound.
    """
    _check_k(k)
    _check_prob(d)
    if d > d_max:
        raise OutOfValidityRangeError(f"d={d} is above the expansion's validity limit {d_max}")
    log_k = math.log2(k)
    if d == 0.0:
        return 1.0 + log_k
    return 1.0 + d * math.log2(d) - (constants.a1 + log_k) * d + constants.a2 * d * d + log_k


def bound_value(kind: str, k: int, d: float, table: BinaryUbTable | None = None,
                search: SearchConfig | None = None) -> float:
    if kind == "erasure-ub":
        return erasure_ub(k, d)
    if kind == "iid-lb":
        return iid_lb(k, d)
    if kind == "markov-lb":
        return markov_lb(k, d, search).value
    if kind == "theorem1-ub":
        return theorem1_ub(k, d, table)
    if kind == "smalld-ub":
        return smalld_ub(k, d)
    raise InvalidInputError(f"unknown bound kind {kind!r}")


def bound_curve(kind: str, k: int, ds: Sequence[float], table: BinaryUbTable | None = None,
                search: SearchConfig | None = None) -> list[BoundPoint]:
    return [BoundPoint(d, bound_value(kind, k, d, table, search), kind, k) for d in ds]
