"""Property suites over exhaustive or randomized instance grids.

Each suite returns a :class:`Report`; a property fails when any instance
violates it by more than the property's tolerance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds, exact
from .baa import baa_capacity, BaaProblem, finite_length_theorem1_check, transition_matrix
from .channel import apply_pattern, channel_output_decomposition, ChannelParams, decompose

SUITES = ("decomposition", "lemmas", "appendices", "baa-consistency", "bound-ordering")

EXACT_DS = (0.1, 0.3, 0.5, 0.7, 0.9)
MARKOV_HOLD = 0.7


@dataclass
class PropertyResult:
    name: str
    tolerance: float
    instances: int = 0
    max_violation: float = 0.0

    def record(self, violation: float) -> None:
        self.instances += 1
        self.max_violation = max(self.max_violation, float(violation))

    def at_most(self, lhs: float, rhs: float) -> None:
        self.record(lhs - rhs)

    def close(self, a: float, b: float) -> None:
        self.record(abs(a - b))

    @property
    def passed(self) -> bool:
        return self.instances > 0 and self.max_violation <= self.tolerance

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "instances": self.instances,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class Report:
    suite: str
    properties: list[PropertyResult] = field(default_factory=list)

    def add(self, name: str, tolerance: float) -> PropertyResult:
        prop = PropertyResult(name, tolerance)
        self.properties.append(prop)
        return prop

    @property
    def passed(self) -> bool:
        return all(p.passed for p in self.properties)

    def as_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "properties": [p.as_dict() for p in self.properties]}


def exact_grid():
    """(process, N, params) triples: N <= 5 with K = 2 and N <= 4 with K = 3, both processes."""
    processes = (exact.InputProcess(), exact.InputProcess("symmetric-markov", MARKOV_HOLD))
    for proc in processes:
        for k, n_max in ((2, 5), (3, 4)):
            for n in range(n_max + 1):
                for d in EXACT_DS:
                    yield proc, n, ChannelParams(k, d)


def _decomposed_grid():
    for proc, n, params in exact_grid():
        j = exact.build_joint(proc, n, params)
        yield j, exact.decomposition_terms(j)


def decomposition_suite(seed: int = 0) -> Report:
    report = Report("decomposition")
    chain = report.add("I(X;Y) = sum_k I_k + I_F", 1e-9)
    nonneg = report.add("every decomposition term >= 0", 1e-12)
    alpha_sum = report.add("sum_k alpha_k = 1", 1e-12)
    for j, dec in _decomposed_grid():
        chain.record(abs(dec.residual))
        for term in (*dec.per_channel, dec.label_term):
            nonneg.record(-term)
        alpha_sum.close(sum(dec.alpha), 1.0)

    commute = report.add("decompose(channel(x)) = subchannel outputs", 0.0)
    rng = np.random.default_rng(seed)
    for _ in range(2000):
        k = int(rng.integers(1, 4))
        n = int(rng.integers(0, 9))
        x = tuple(int(s) for s in rng.integers(1, 2 * k + 1, size=n))
        pat = tuple(bool(f) for f in rng.random(n) < 0.5)
        commute.record(0.0 if channel_output_decomposition(x, pat, k) == decompose(apply_pattern(x, pat), k) else 1.0)
    return report


def lemmas_suite(seed: int = 0) -> Report:
    report = Report("lemmas")
    sub = report.add("I_k <= I(X_k;Y_k)", 1e-9)
    label = report.add("I_F <= N(1-d) log2 K", 1e-9)
    lemma1 = report.add("I_k <= E{N_k} C2ub(d) + 2 log2(N+1)", 1e-9)
    finite = report.add("I(X_k;Y_k|N_k) <= E{N_k} C2ub(d) + E{H(D_k|N_k)}", 1e-9)
    total = report.add("I(X;Y) <= N C2ub(d) + 2K log2(N+1) + N(1-d) log2 K", 1e-9)
    for j, dec in _decomposed_grid():
        n, k, d = j.n, j.k, j.params.d
        c2 = bounds.binary_ub(d)
        label.at_most(dec.label_term, n * (1 - d) * math.log2(k))
        total.at_most(dec.total, n * c2 + 2 * k * math.log2(n + 1) + n * (1 - d) * math.log2(k))
        for idx in range(1, k + 1):
            ik = dec.per_channel[idx - 1]
            sub.at_most(ik, dec.subchannel_mi[idx - 1])
            pn = exact.input_length_distribution(j, idx)
            mean_nk = float(np.dot(pn, np.arange(len(pn))))
            lemma1.at_most(ik, mean_nk * c2 + 2 * math.log2(n + 1))
            slack = sum(pn[m] * exact.deletion_count_entropy(m, d) for m in range(len(pn)))
            finite.at_most(exact.subchannel_mi_given_length(j, idx), mean_nk * c2 + slack)

    dce = report.add("H(D|N_k=n_k) <= log2(n_k+1)", 1e-12)
    for n_k in range(65):
        for i in range(101):
            dce.at_most(exact.deletion_count_entropy(n_k, i / 100), math.log2(n_k + 1))
    return report


def compositions(m: int, parts: int):
    """Ordered compositions of ``m`` into exactly ``parts`` positive integers."""
    for cuts in itertools.combinations(range(1, m), parts - 1):
        edges = (0, *cuts, m)
        yield tuple(b - a for a, b in zip(edges, edges[1:]))


def appendices_suite(seed: int = 0, draws: int = 10_000) -> Report:
    report = Report("appendices")
    multinom = report.add("log2 multinomial <= m log2 m - sum m_k log2 m_k", 1e-12)
    for m in range(1, 13):
        for parts in range(1, min(5, m) + 1):
            for comp in compositions(m, parts):
                lhs, rhs = exact.multinomial_log_bound(comp)
                multinom.at_most(lhs, rhs)
    hessian = report.add("a^T Hess(g) a <= 0", 1e-12)
    rng = np.random.default_rng(seed)
    for _ in range(draws):
        k = int(rng.integers(1, 9))
        m_vec = rng.uniform(0.05, 10.0, size=k)
        a_vec = rng.uniform(-5.0, 5.0, size=k)
        hessian.record(exact.g_quadratic_form(m_vec, a_vec))
    return report


def baa_consistency_suite(seed: int = 0, tolerance: float = 1e-7) -> Report:
    report = Report("baa-consistency")
    rows = report.add("sum_y P(y|x) = 1", 1e-12)
    for k in (1, 2):
        for l in range(1, 7):
            for d in (0.0, 0.3, 0.75, 1.0):
                w = transition_matrix(l, k, d).matrix
                rows.record(float(np.max(np.abs(np.asarray(w.sum(axis=1)).ravel() - 1.0))))

    erasure = report.add("L=1 capacity = (1-d) log2(2K)", 1e-6)
    for k in (1, 2, 4):
        for d in (0.0, 0.25, 0.5, 0.9):
            res = baa_capacity(BaaProblem(1, ChannelParams(k, d), tolerance=tolerance))
            erasure.close(res.capacity_per_symbol, (1 - d) * math.log2(2 * k))

    noiseless = report.add("d=0 capacity = log2(2K)", 1e-6)
    for k in (1, 2, 4):
        for l in range(1, 5):
            res = baa_capacity(BaaProblem(l, ChannelParams(k, 0.0), tolerance=tolerance))
            noiseless.close(res.capacity_per_symbol, math.log2(2 * k))

    thm = report.add("I(X^L;Y) <= L C2ub(d) + 2K log2(L+1) + L(1-d) log2 K", 0.0)
    for k in (1, 2):
        for l in range(1, 6):
            for d in (0.1, 0.3, 0.5, 0.7, 0.9):
                chk = finite_length_theorem1_check(l, k, d, tolerance=tolerance)
                thm.record(0.0 if chk.ok else chk.lhs - chk.rhs)
    return report


def d_grid_005() -> list[float]:
    return [round(i * 0.005, 10) for i in range(201)]


def bound_ordering_suite(seed: int = 0, ks=(1, 2, 4, 8, 32), search: bounds.SearchConfig | None = None) -> Report:
    report = Report("bound-ordering")
    iid = report.add("iid_lb <= erasure_ub", 1e-12)
    mk = report.add("markov_lb <= erasure_ub", 1e-12)
    thm = report.add("theorem1_ub <= erasure_ub", 1e-12)
    sandwich = report.add("iid_lb >= (1-d) log2(2K) - 1", 1e-12)
    improvement = report.add("erasure_ub - theorem1_ub = (1-d) - binary_ub(d)", 1e-12)
    binary = report.add("binary_ub(d) <= 1-d", 0.0)
    mono = report.add("erasure_ub and theorem1_ub nonincreasing in d", 1e-12)
    ends = report.add("endpoint values at d=0 and d=1", 1e-12)
    grid = d_grid_005()
    for k in ks:
        prev = None
        for d in grid:
            e = bounds.erasure_ub(k, d)
            i = bounds.iid_lb(k, d)
            t = bounds.theorem1_ub(k, d)
            m = bounds.markov_lb(k, d, search).value
            iid.at_most(i, e)
            mk.at_most(m, e)
            thm.at_most(t, e)
            sandwich.at_most((1 - d) * math.log2(2 * k) - 1, i)
            improvement.close(e - t, (1 - d) - bounds.binary_ub(d))
            binary.at_most(bounds.binary_ub(d), 1 - d)
            if prev is not None:
                mono.at_most(e, prev[0])
                mono.at_most(t, prev[1])
            prev = (e, t)
        for value, expected in (
            (bounds.erasure_ub(k, 1.0), 0.0),
            (bounds.theorem1_ub(k, 1.0), 0.0),
            (bounds.iid_lb(k, 1.0), 0.0),
            (bounds.markov_lb(k, 1.0, search).value, 0.0),
            (bounds.iid_lb(k, 0.0), math.log2(2 * k)),
            (bounds.erasure_ub(k, 0.0), math.log2(2 * k)),
        ):
            ends.close(value, expected)
    return report


def run_verification(suite: str, seed: int = 0, tolerance: float | None = None) -> Report:
    if suite == "decomposition":
        return decomposition_suite(seed)
    if suite == "lemmas":
        return lemmas_suite(seed)
    if suite == "appendices":
        return appendices_suite(seed)
    if suite == "baa-consistency":
        return baa_consistency_suite(seed, tolerance or 1e-7)
    if suite == "bound-ordering":
        return bound_ordering_suite(seed)
    raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
