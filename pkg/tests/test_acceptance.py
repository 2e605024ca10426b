"""Acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest
from scipy.optimize import minimize

from delcap import bounds
from delcap.baa import BaaProblem, baa_capacity, finite_length_theorem1_check, transition_matrix
from delcap.channel import ChannelParams
from delcap.cli import DGrid, RunConfig, parse_curves, run_curves
from delcap.exact import (
    InputProcess,
    build_joint,
    decomposition_terms,
    deletion_count_entropy,
    subchannel_mi,
)
from delcap.verify import appendices_suite, compositions

GRID_DS = (0.1, 0.3, 0.5, 0.7, 0.9)
PROCESSES = (InputProcess(), InputProcess("symmetric-markov", 0.7))


def exact_instances():
    for proc in PROCESSES:
        for k, n_max in ((2, 5), (3, 4)):
            for n in range(1, n_max + 1):
                for d in GRID_DS:
                    yield proc, n, k, d


@pytest.fixture(scope="module")
def decomposed():
    out = []
    for proc, n, k, d in exact_instances():
        joint = build_joint(proc, n, ChannelParams(k, d))
        out.append((joint, decomposition_terms(joint)))
    return out


def verdict(number, ok, detail, started):
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail}; {time.perf_counter() - started:.2f}s)")
    assert ok, f"criterion {number}: {detail}"


def test_criterion_1_slope_regime_constant():
    t0 = time.perf_counter()
    worst = 0.0
    ds = np.linspace(0.65, 1.0, 701)
    for k in (1, 2, 3, 4, 8, 32, 100):
        for d in ds:
            worst = max(worst, abs(bounds.theorem1_ub(k, float(d)) - (math.log2(k) + 0.4143) * (1 - d)))
    example = bounds.theorem1_ub(2, 0.65)
    ok = worst <= 1e-12 and abs(example - 0.495005) <= 1e-12
    verdict(1, ok, f"max deviation {worst:.2e}, K=2 d=0.65 -> {example:.9f}", t0)


def test_criterion_2_bound_ordering_sweep():
    t0 = time.perf_counter()
    ds = [i * 0.005 for i in range(201)]
    violations = 0
    for k in (1, 2, 4, 8, 32):
        for d in ds:
            er = bounds.erasure_ub(k, d)
            iid = bounds.iid_lb(k, d)
            violations += iid > er + 1e-12
            violations += bounds.markov_lb(k, d).value > er + 1e-12
            violations += bounds.theorem1_ub(k, d) > er + 1e-12
            violations += iid < (1 - d) * math.log2(2 * k) - 1 - 1e-12
    verdict(2, violations == 0, f"{violations} violations over {5 * len(ds)} points", t0)


def test_criterion_3_decomposition_identity(decomposed):
    t0 = time.perf_counter()
    worst = max(abs(dec.residual) for _, dec in decomposed)
    verdict(3, worst <= 1e-9, f"max |I - sum I_k - I_F| = {worst:.2e} over {len(decomposed)} instances", t0)


def test_criterion_4_lemma_checks(decomposed):
    t0 = time.perf_counter()
    worst = -np.inf
    for joint, dec in decomposed:
        k, d, n = joint.params.k, joint.params.d, joint.n
        for j in range(1, k + 1):
            worst = max(worst, dec.per_channel[j - 1] - subchannel_mi(joint, j))
        worst = max(worst, dec.label_term - n * (1 - d) * math.log2(k))
    dce = max(
        deletion_count_entropy(n_k, i / 100) - math.log2(n_k + 1) for n_k in range(65) for i in range(101)
    )
    ok = worst <= 1e-9 and dce <= 1e-12
    verdict(4, ok, f"max lemma excess {worst:.2e}, max entropy excess {dce:.2e}", t0)


def test_criterion_5_appendix_suites():
    t0 = time.perf_counter()
    n_comp = sum(1 for m in range(1, 13) for p in range(1, 6) for _ in compositions(m, p))
    report = appendices_suite(seed=0, draws=10_000)
    parts = ", ".join(f"{p.name}: {p.instances} cases, worst {p.max_violation:.1e}" for p in report.properties)
    ok = report.passed and n_comp > 0 and all(p.instances > 0 for p in report.properties)
    verdict(5, ok, parts, t0)


def _mutual_info_bits(r, w):
    q = r @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 0, w * np.log2(w / np.where(q > 0, q, 1.0)[..., None, :]), 0.0)
    return np.einsum("...x,...xy->...", r, terms)


def _simplex_oracle(w, steps=100):
    pts = np.array(
        [(a, b, c, steps - a - b - c) for a in range(steps + 1) for b in range(steps + 1 - a) for c in range(steps + 1 - a - b)]
    ) / steps
    vals = _mutual_info_bits(pts, w)
    start = pts[int(np.argmax(vals))]
    res = minimize(
        lambda z: -_mutual_info_bits(np.exp(z) / np.exp(z).sum(), w),
        np.log(np.maximum(start, 1e-6)),
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000},
    )
    return max(float(vals.max()), float(-res.fun))


def test_criterion_6_baa_anchors():
    t0 = time.perf_counter()
    erasure = max(
        abs(baa_capacity(BaaProblem(1, ChannelParams(k, d))).capacity_per_symbol - (1 - d) * math.log2(2 * k))
        for k in (1, 2, 4)
        for d in (0.0, 0.25, 0.5, 0.9)
    )
    noiseless = max(
        abs(baa_capacity(BaaProblem(l, ChannelParams(k, 0.0))).capacity_per_symbol - math.log2(2 * k))
        for k in (1, 2, 4)
        for l in range(1, 5)
        if (2 * k) ** l <= 2**13
    )
    dense = transition_matrix(2, 1, 0.5).matrix.toarray()
    oracle = _simplex_oracle(dense) / 2
    got = baa_capacity(BaaProblem(2, ChannelParams(1, 0.5))).capacity_per_symbol
    failures = [
        (l, k, d)
        for l in range(1, 6)
        for k in (1, 2)
        for d in np.round(np.arange(1, 10) / 10, 1)
        if not finite_length_theorem1_check(l, k, float(d)).ok
    ]
    ok = erasure <= 1e-6 and noiseless <= 1e-6 and abs(got - oracle) <= 1e-4 and not failures
    detail = (
        f"L=1 err {erasure:.1e}, d=0 err {noiseless:.1e}, oracle diff {abs(got - oracle):.1e}, "
        f"{len(failures)} finite-length failures"
    )
    verdict(6, ok, detail, t0)


def test_criterion_7_curve_datasets():
    t0 = time.perf_counter()
    wide = RunConfig([2, 4], DGrid(0.0, 1.0, 0.01), ["erasure-ub", "theorem1-ub", "markov-lb"])
    small = RunConfig([2], DGrid(0.001, 0.1, 0.001), ["smalld-ub", "markov-lb"])
    text2, text3 = run_curves(wide), run_curves(small)
    deterministic = text2 == run_curves(wide) and text3 == run_curves(small)
    strict = 0
    checked = 0
    for row in parse_curves(text2):
        if bounds.binary_ub(row["d"]) < 1 - row["d"]:
            checked += 1
            strict += not row["theorem1-ub"] < row["erasure-ub"]
    above = sum(not row["smalld-ub"] > row["markov-lb"] for row in parse_curves(text3))
    ok = deterministic and strict == 0 and above == 0 and checked > 0
    detail = f"deterministic={deterministic}, {strict} strictness failures of {checked}, {above} small-d failures"
    verdict(7, ok, detail, t0)


def _grid_objective(k, d, gamma, p):
    """Markov-codebook objective written out independently for the brute-force grid."""
    q = (1 + (1 - d) * (2 * k - 1) * (2 * k * p - 1) / (2 * k - 1 - d * (2 * k * p - 1))) / (2 * k)
    e = np.exp(-gamma)
    a = e * (1 - p) / ((2 * k - 1) * (1 - e * (1 - (1 - p) / (2 * k - 1))))
    b = e * ((1 - p) * a + p)
    return -(1 - d) * np.log2((1 - q) * a + q * b) - gamma / np.log(2)


def test_criterion_8_markov_oracle():
    t0 = time.perf_counter()
    gammas = 5.0 * np.arange(1, 401) / 400
    ps = np.arange(1, 401) / 401
    worst = 0.0
    for k in (1, 2, 4):
        for d in (0.1, 0.3, 0.5, 0.7):
            grid = _grid_objective(k, d, gammas[:, None], ps[None, :])
            oracle = max(0.0, float(np.max(grid)))
            worst = max(worst, abs(bounds.markov_lb(k, d).value - oracle))
    verdict(8, worst <= 1e-4, f"max |markov_lb - grid oracle| = {worst:.2e}", t0)
