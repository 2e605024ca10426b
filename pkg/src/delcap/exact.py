"""Exact information quantities for short blocks by full enumeration.

A :class:`JointModel` lists every (input sequence, deletion pattern) pair with
its probability. Every other random variable in the parallel-subchannel
picture (Y, X_k, Y_k, F_x, F_y, N_k, M_k) is a deterministic function of an
atom, so entropies are obtained by grouping atoms and summing probability.
All quantities are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .channel import ChannelParams
from .errors import InstanceTooLargeError, InvalidInputError

DEFAULT_ATOM_BUDGET = 2**26


@dataclass(frozen=True)
class InputProcess:
    """Distribution of the input block.

    ``iid-uniform`` draws each symbol uniformly. ``symmetric-markov`` starts
    uniformly, keeps the previous symbol with probability ``p`` and otherwise
    moves to each of the other ``2K - 1`` symbols with equal probability.
    """

    kind: str = "iid-uniform"
    p: float | None = None

    def __post_init__(self):
        if self.kind == "iid-uniform":
            if self.p is not None:
                raise InvalidInputError("iid-uniform takes no hold probability")
        elif self.kind == "symmetric-markov":
            if self.p is None or not 0.0 < self.p < 1.0:
                raise InvalidInputError(f"hold probability must lie in (0, 1), got {self.p!r}")
        else:
            raise InvalidInputError(f"unknown input process {self.kind!r}")

    def transition_matrix(self, alphabet_size: int) -> np.ndarray:
        a = alphabet_size
        if self.kind == "iid-uniform":
            return np.full((a, a), 1.0 / a)
        if a == 1:
            return np.ones((1, 1))
        off = (1.0 - self.p) / (a - 1)
        t = np.full((a, a), off)
        np.fill_diagonal(t, self.p)
        return t

    def sequence_probabilities(self, xs: np.ndarray, alphabet_size: int) -> np.ndarray:
        """P(x) for each row of ``xs`` (symbols 1..alphabet_size)."""
        a = alphabet_size
        probs = np.full(xs.shape[0], 1.0 if xs.shape[1] == 0 else 1.0 / a)
        if self.kind == "iid-uniform":
            return probs * (1.0 / a) ** max(xs.shape[1] - 1, 0)
        t = self.transition_matrix(a)
        for i in range(1, xs.shape[1]):
            probs = probs * t[xs[:, i - 1] - 1, xs[:, i] - 1]
        return probs


def _compact(values: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Left-justify ``values[keep]`` in each row, zero padded."""
    order = np.argsort(~keep, axis=1, kind="stable")
    return np.take_along_axis(np.where(keep, values, 0), order, axis=1)


def _codes(rows: np.ndarray) -> np.ndarray:
    """Dense integer code per distinct row."""
    if rows.ndim == 1:
        rows = rows[:, None]
    if rows.shape[1] == 0:
        return np.zeros(rows.shape[0], dtype=np.int64)
    _, inverse = np.unique(rows, axis=0, return_inverse=True)
    return inverse.reshape(-1).astype(np.int64)


def _join(*codes: np.ndarray) -> np.ndarray:
    out = codes[0]
    for c in codes[1:]:
        _, out = np.unique(out * (int(c.max()) + 1) + c, return_inverse=True)
        out = out.reshape(-1)
    return out


def _entropy(code: np.ndarray, probs: np.ndarray) -> float:
    mass = np.bincount(code, weights=probs)
    mass = mass[mass > 0]
    return float(-np.sum(mass * np.log2(mass)))


@dataclass(frozen=True)
class InfoDecomposition:
    total: float
    per_channel: tuple[float, ...]
    label_term: float
    subchannel_mi: tuple[float, ...]
    alpha: tuple[float, ...]

    @property
    def residual(self) -> float:
        return self.total - (sum(self.per_channel) + self.label_term)


@dataclass(frozen=True, eq=False)
class JointModel:
    """All (x, pattern) atoms of one block with their probabilities.

    Arrays are stored column-per-position: ``xs[i]`` and ``patterns[i]`` form
    atom ``i``; ``input_index[i]`` identifies ``xs[i]`` among the ``(2K)^n``
    inputs.
    """

    n: int
    params: ChannelParams
    process: InputProcess
    xs: np.ndarray
    patterns: np.ndarray
    probs: np.ndarray
    input_index: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.params.k

    def __len__(self) -> int:
        return len(self.probs)

    @property
    def atoms(self) -> Iterator[tuple[tuple[int, ...], tuple[bool, ...], float]]:
        for x, pat, p in zip(self.xs, self.patterns, self.probs):
            yield tuple(int(s) for s in x), tuple(bool(f) for f in pat), float(p)

    # -- derived variables, each as a dense code per atom --

    @cached_property
    def _kept(self) -> np.ndarray:
        return ~self.patterns

    @cached_property
    def _labels(self) -> np.ndarray:
        return (self.xs + 1) // 2

    @cached_property
    def x_code(self) -> np.ndarray:
        return self.input_index

    @cached_property
    def y_code(self) -> np.ndarray:
        return _codes(_compact(self.xs, self._kept))

    @cached_property
    def fy_code(self) -> np.ndarray:
        return _codes(_compact(self._labels, self._kept))

    def _sub_rows(self, k: int, output: bool) -> np.ndarray:
        mask = self._labels == k
        if output:
            mask = mask & self._kept
        binary = 2 - self.xs % 2
        return _compact(binary, mask)

    @cached_property
    def xk_codes(self) -> list[np.ndarray]:
        return [_codes(self._sub_rows(k, False)) for k in range(1, self.k + 1)]

    @cached_property
    def yk_codes(self) -> list[np.ndarray]:
        return [_codes(self._sub_rows(k, True)) for k in range(1, self.k + 1)]

    def input_lengths(self, k: int) -> np.ndarray:
        return np.sum(self._labels == k, axis=1)

    def output_lengths(self, k: int) -> np.ndarray:
        return np.sum((self._labels == k) & self._kept, axis=1)

    def entropy(self, *codes: np.ndarray) -> float:
        """Joint entropy of the given derived variables (empty -> 0)."""
        if not codes:
            return 0.0
        return _entropy(_join(*codes), self.probs)

    def conditional_mi(self, a: Sequence[np.ndarray], b: Sequence[np.ndarray], c: Sequence[np.ndarray] = ()) -> float:
        """I(A; B | C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)."""
        a, b, c = list(a), list(b), list(c)
        return self.entropy(*a, *c) + self.entropy(*b, *c) - self.entropy(*a, *b, *c) - self.entropy(*c)


def atom_count(n: int, k: int) -> int:
    return (2 * k) ** n * 2**n


def build_joint(
    proc: InputProcess, n: int, params: ChannelParams, budget: int = DEFAULT_ATOM_BUDGET
) -> JointModel:
    if n < 0:
        raise InvalidInputError(f"block length must be nonnegative, got {n}")
    a = params.alphabet_size
    count = atom_count(n, params.k)
    if count > budget:
        raise InstanceTooLargeError(
            f"(2K)^N * 2^N = {a}^{n} * 2^{n} = {count} atoms exceeds the budget of {budget}"
        )
    if n == 0:
        inputs = np.zeros((1, 0), dtype=np.int64)
    else:
        inputs = np.indices((a,) * n).reshape(n, -1).T + 1
    patterns = ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
    n_in, n_pat = inputs.shape[0], patterns.shape[0]

    p_in = proc.sequence_probabilities(inputs, a)
    n_del = patterns.sum(axis=1)
    p_pat = params.d**n_del * (1.0 - params.d) ** (n - n_del)

    input_index = np.repeat(np.arange(n_in), n_pat)
    xs = inputs[input_index].astype(np.int64)
    pats = np.tile(patterns, (n_in, 1))
    probs = (p_in[:, None] * p_pat[None, :]).reshape(-1)
    for arr in (xs, pats, probs, input_index):
        arr.setflags(write=False)
    return JointModel(n, params, proc, xs, pats, probs, input_index)


def mutual_information(j: JointModel) -> float:
    """I(X;Y) as the expected log-ratio of P(y|x) to P(y)."""
    y = j.y_code
    xy = j.x_code * (int(y.max()) + 1) + y
    xy_keys, xy_inv = np.unique(xy, return_inverse=True)
    p_xy = np.bincount(xy_inv.reshape(-1), weights=j.probs)
    p_x = np.bincount(j.x_code, weights=j.probs)
    p_y = np.bincount(y, weights=j.probs)
    x_of = xy_keys // (int(y.max()) + 1)
    y_of = xy_keys % (int(y.max()) + 1)
    live = p_xy > 0
    ratio = p_xy[live] / (p_x[x_of[live]] * p_y[y_of[live]])
    return float(max(np.sum(p_xy[live] * np.log2(ratio)), 0.0))


def decomposition_terms(j: JointModel) -> InfoDecomposition:
    """Chain-rule split of I(X;Y) over the subchannel outputs and the output labels.

    ``per_channel[k-1] = I(X; Y_k | Y_1..Y_{k-1})`` and
    ``label_term = I(X; F_y | Y_1..Y_K)``; X stands in for (X_1..X_K, F_x),
    which it determines one-to-one.
    """
    x = [j.x_code]
    per = []
    for k in range(j.k):
        per.append(j.conditional_mi(x, [j.yk_codes[k]], j.yk_codes[:k]))
    label = j.conditional_mi(x, [j.fy_code], j.yk_codes)
    sub = [subchannel_mi(j, k) for k in range(1, j.k + 1)]
    return InfoDecomposition(
        total=mutual_information(j),
        per_channel=tuple(per),
        label_term=label,
        subchannel_mi=tuple(sub),
        alpha=tuple(alphas(j)),
    )


def subchannel_mi(j: JointModel, k: int) -> float:
    """I(X_k; Y_k) for the 1-based subchannel ``k``."""
    if not 1 <= k <= j.k:
        raise InvalidInputError(f"subchannel index {k} outside 1..{j.k}")
    return j.conditional_mi([j.xk_codes[k - 1]], [j.yk_codes[k - 1]])


def alphas(j: JointModel) -> list[float]:
    """Share of the expected output carried by each subchannel, E{M_k} / (N(1-d)).

    At d = 1 the ratio is taken in the limit, E{N_k} / N. For N = 0 each
    share is 1/K.
    """
    if j.n == 0:
        return [1.0 / j.k] * j.k
    d = j.params.d
    if d < 1.0:
        return [float(np.dot(j.probs, j.output_lengths(k))) / (j.n * (1.0 - d)) for k in range(1, j.k + 1)]
    return [float(np.dot(j.probs, j.input_lengths(k))) / j.n for k in range(1, j.k + 1)]


def subchannel_mi_given_length(j: JointModel, k: int) -> float:
    """I(X_k; Y_k | N_k)."""
    nk = j.input_lengths(k)
    return j.conditional_mi([j.xk_codes[k - 1]], [j.yk_codes[k - 1]], [nk])


def input_length_distribution(j: JointModel, k: int) -> np.ndarray:
    """P(N_k = n) for n = 0..N."""
    return np.bincount(j.input_lengths(k), weights=j.probs, minlength=j.n + 1)


def deletion_count_entropy(n_k: int, d: float) -> float:
    """H(D_k | N_k = n_k) for a Binomial(n_k, d) deletion count."""
    if n_k < 0:
        raise InvalidInputError(f"n_k must be nonnegative, got {n_k}")
    h = 0.0
    for n in range(n_k + 1):
        p = math.comb(n_k, n) * d**n * (1.0 - d) ** (n_k - n)
        if p > 0:
            h -= p * math.log2(p)
    return h


def multinomial_log_bound(m_vec: Sequence[int]) -> tuple[float, float]:
    """(log2 of the multinomial coefficient, m log2 m - sum m_k log2 m_k)."""
    if not m_vec or any(int(m) != m or m < 1 for m in m_vec):
        raise InvalidInputError(f"parts must be positive integers, got {m_vec!r}")
    m = sum(m_vec)
    coeff = math.factorial(m)
    for mk in m_vec:
        coeff //= math.factorial(mk)
    lhs = math.log2(coeff)
    rhs = m * math.log2(m) - math.fsum(mk * math.log2(mk) for mk in m_vec)
    return lhs, rhs


def g_quadratic_form(m_vec: Sequence[float], a_vec: Sequence[float]) -> float:
    """a^T H a for the Hessian H of g(m) = (sum m) log(sum m) - sum m_k log m_k.

    Up to the constant factor of the logarithm base,
    ``(sum a)^2 / sum m - sum a_k^2 / m_k``.
    """
    if len(m_vec) != len(a_vec):
        raise InvalidInputError("m_vec and a_vec must have equal length")
    if any(m <= 0 for m in m_vec):
        raise InvalidInputError("every m_k must be positive")
    total_a = math.fsum(a_vec)
    return total_a * total_a / math.fsum(m_vec) - math.fsum(a * a / m for a, m in zip(a_vec, m_vec))
