"""Finite-block-length capacity of the deletion channel by Blahut-Arimoto.

A block of L input symbols produces an output of any length 0..L. The
transition law is P(y|x) = emb(x, y) d^(L-|y|) (1-d)^|y|, where emb counts
the ways y occurs as a subsequence of x.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from .bounds import binary_ub, BinaryUbTable
from .channel import ChannelParams
from .errors import InstanceTooLargeError, InvalidInputError

DEFAULT_INPUT_BUDGET = 2**13


def embedding_count(x: Sequence[int], y: Sequence[int]) -> int:
    """Number of index subsets of ``x`` whose subsequence equals ``y``."""
    m = len(y)
    if m > len(x):
        return 0
    # ways[j]: embeddings of y[:j] into the prefix of x scanned so far
    ways = [1] + [0] * m
    for s in x:
        for j in range(m, 0, -1):
            if y[j - 1] == s:
                ways[j] += ways[j - 1]
    return ways[m]


def subsequence_counts(x: Sequence[int]) -> dict[tuple[int, ...], int]:
    """All distinct subsequences of ``x`` with their embedding counts."""
    counts: dict[tuple[int, ...], int] = {(): 1}
    for s in x:
        for sub, c in list(counts.items()):
            ext = sub + (s,)
            counts[ext] = counts.get(ext, 0) + c
    return counts


def transition_prob(x: Sequence[int], y: Sequence[int], d: float) -> float:
    if not 0.0 <= d <= 1.0:
        raise InvalidInputError(f"deletion probability must lie in [0, 1], got {d!r}")
    n, m = len(x), len(y)
    count = embedding_count(x, y)
    if count == 0:
        return 0.0
    return count * d ** (n - m) * (1.0 - d) ** m


@dataclass(frozen=True)
class BaaProblem:
    l: int
    params: ChannelParams
    tolerance: float = 1e-7
    max_iterations: int = 100_000
    budget: int = DEFAULT_INPUT_BUDGET

    def __post_init__(self):
        if self.l < 1:
            raise InvalidInputError(f"block length must be at least 1, got {self.l}")
        if not self.tolerance > 0:
            raise InvalidInputError("tolerance must be positive")
        n_inputs = self.params.alphabet_size**self.l
        if n_inputs > self.budget:
            raise InstanceTooLargeError(
                f"(2K)^L = {self.params.alphabet_size}^{self.l} = {n_inputs} inputs exceeds the budget of {self.budget}"
            )


@dataclass(frozen=True)
class BaaResult:
    capacity_per_symbol: float
    input_distribution: np.ndarray
    iterations: int
    final_gap: float
    tolerance: float
    inputs: tuple[tuple[int, ...], ...] = ()

    @property
    def converged(self) -> bool:
        return self.final_gap <= self.tolerance


@dataclass(frozen=True)
class TransitionMatrix:
    inputs: tuple[tuple[int, ...], ...]
    outputs: tuple[tuple[int, ...], ...]
    matrix: sparse.csr_matrix


def transition_matrix(l: int, k: int, d: float) -> TransitionMatrix:
    """Sparse P(y|x) over all length-``l`` inputs and the outputs they can reach."""
    a = 2 * k
    inputs = tuple(itertools.product(range(1, a + 1), repeat=l))
    out_index: dict[tuple[int, ...], int] = {}
    rows, cols, vals = [], [], []
    for i, x in enumerate(inputs):
        for y, c in subsequence_counts(x).items():
            j = out_index.setdefault(y, len(out_index))
            p = c * d ** (l - len(y)) * (1.0 - d) ** len(y)
            if p > 0:
                rows.append(i)
                cols.append(j)
                vals.append(p)
    outputs = tuple(out_index)
    w = sparse.csr_matrix((vals, (rows, cols)), shape=(len(inputs), len(outputs)))
    return TransitionMatrix(inputs, outputs, w)


def blahut_arimoto(w: sparse.spmatrix, tolerance: float = 1e-7, max_iterations: int = 100_000,
                   r0: np.ndarray | None = None) -> tuple[float, np.ndarray, int, float]:
    """Capacity in bits of the channel with row-stochastic ``w``.

    Returns ``(capacity, r, iterations, gap)``. ``capacity`` is I(r) for the
    final input law ``r``; ``gap`` is max_x D(W_x || q) - I(r), an upper
    bound on how far I(r) sits below the true capacity.
    """
    w = sparse.csr_matrix(w)
    n_in = w.shape[0]
    r = np.full(n_in, 1.0 / n_in) if r0 is None else np.asarray(r0, float) / np.sum(r0)
    # sum_y W log W per row, the negative conditional output entropy in nats
    wlogw = w.copy()
    wlogw.data = w.data * np.log(w.data)
    self_info = np.asarray(wlogw.sum(axis=1)).ravel()

    def divergences(r):
        q = w.T @ r
        logq = np.zeros_like(q)
        live = q > 0
        logq[live] = np.log(q[live])
        return self_info - w @ logq

    lower = -np.inf
    it = 0
    while True:
        dv = divergences(r)
        current = float(np.dot(r, dv))
        assert current >= lower - 1e-12, "Blahut-Arimoto lower estimate decreased"
        lower = current
        gap = float(np.max(dv)) - current
        if gap <= tolerance * math.log(2) or it >= max_iterations:
            break
        # exponent shifted by its max to keep the weights finite
        weights = r * np.exp(dv - np.max(dv))
        r = weights / np.sum(weights)
        it += 1
    return max(lower, 0.0) / math.log(2), r, it, gap / math.log(2)


def baa_capacity(problem: BaaProblem) -> BaaResult:
    """(1/L) max I(X;Y) for the deletion channel at block length L, in bits."""
    tm = transition_matrix(problem.l, problem.params.k, problem.params.d)
    cap, r, it, gap = blahut_arimoto(tm.matrix, problem.tolerance, problem.max_iterations)
    return BaaResult(
        capacity_per_symbol=cap / problem.l,
        input_distribution=r,
        iterations=it,
        final_gap=gap,
        tolerance=problem.tolerance,
        inputs=tm.inputs,
    )


@dataclass(frozen=True)
class FiniteLengthCheck:
    lhs: float
    rhs: float
    ok: bool


def finite_length_theorem1_check(l: int, k: int, d: float, table: BinaryUbTable | None = None,
                                 tolerance: float = 1e-7, budget: int = DEFAULT_INPUT_BUDGET) -> FiniteLengthCheck:
    """Compare the block capacity with L C2ub(d) + 2K log2(L+1) + L (1-d) log2 K."""
    problem = BaaProblem(l, ChannelParams(k, d), tolerance=tolerance, budget=budget)
    res = baa_capacity(problem)
    lhs = res.capacity_per_symbol * l
    rhs = l * binary_ub(d, table) + 2 * k * math.log2(l + 1) + l * (1.0 - d) * math.log2(k)
    return FiniteLengthCheck(lhs, rhs, lhs <= rhs + tolerance)
