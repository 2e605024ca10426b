"""The 2K-ary i.i.d. deletion channel and its split into K binary subchannels.

Symbols are integers in ``1..2K``. Symbol ``s`` travels through subchannel
``ceil(s / 2)``; inside a subchannel it is relabelled to ``1`` (odd symbol)
or ``2`` (even symbol), so every subchannel looks like a plain binary
deletion channel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidDecompositionError, InvalidInputError

SymbolSequence = tuple[int, ...]
DeletionPattern = tuple[bool, ...]


@dataclass(frozen=True)
class ChannelParams:
    k: int
    d: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidInputError(f"k must be a positive integer, got {self.k!r}")
        if not 0.0 <= self.d <= 1.0:
            raise InvalidInputError(f"deletion probability must lie in [0, 1], got {self.d!r}")

    @property
    def alphabet_size(self) -> int:
        return 2 * self.k


@dataclass(frozen=True)
class Decomposition:
    """Per-subchannel subsequences plus the label vector that interleaves them.

    ``subsequences[i]`` holds the binary-relabelled symbols of subchannel
    ``i + 1``; ``labels[n]`` is the (1-based) subchannel of position ``n``.
    """

    subsequences: tuple[SymbolSequence, ...]
    labels: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.subsequences)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.subsequences)


def subchannel_of(symbol: int) -> int:
    return (symbol + 1) // 2


def _check_symbols(x: Sequence[int], k: int) -> None:
    for n, s in enumerate(x):
        if int(s) != s or not 1 <= s <= 2 * k:
            raise InvalidInputError(f"symbol {s!r} at position {n} is outside 1..{2 * k}")


def decompose(x: Sequence[int], k: int) -> Decomposition:
    _check_symbols(x, k)
    subs: list[list[int]] = [[] for _ in range(k)]
    labels = []
    for s in x:
        label = subchannel_of(s)
        labels.append(label)
        subs[label - 1].append(2 - s % 2)
    return Decomposition(tuple(tuple(s) for s in subs), tuple(labels))


def recombine(dec: Decomposition) -> SymbolSequence:
    """Inverse of :func:`decompose`."""
    k = dec.k
    counts = [0] * k
    for label in dec.labels:
        if not 1 <= label <= k:
            raise InvalidDecompositionError(f"label {label} outside 1..{k}")
        counts[label - 1] += 1
    for i, (count, sub) in enumerate(zip(counts, dec.subsequences)):
        if count != len(sub):
            raise InvalidDecompositionError(
                f"label {i + 1} appears {count} times but subsequence {i + 1} has length {len(sub)}"
            )
        for b in sub:
            if b not in (1, 2):
                raise InvalidDecompositionError(f"subsequence {i + 1} holds non-binary symbol {b!r}")
    cursor = [0] * k
    out = []
    for label in dec.labels:
        b = dec.subsequences[label - 1][cursor[label - 1]]
        cursor[label - 1] += 1
        out.append(2 * label - 2 + b)
    return tuple(out)


def apply_pattern(x: Sequence[int], pat: Sequence[bool]) -> SymbolSequence:
    if len(x) != len(pat):
        raise InvalidInputError(f"sequence length {len(x)} != pattern length {len(pat)}")
    return tuple(s for s, deleted in zip(x, pat) if not deleted)


def sample_pattern(n: int, d: float, seed: int) -> DeletionPattern:
    if not 0.0 <= d <= 1.0:
        raise InvalidInputError(f"deletion probability must lie in [0, 1], got {d!r}")
    rng = np.random.default_rng(seed)
    return tuple(bool(f) for f in rng.random(n) < d)


def transmit(x: Sequence[int], d: float, seed: int) -> SymbolSequence:
    """Send ``x`` through the deletion channel once, reproducibly for a given seed."""
    return apply_pattern(x, sample_pattern(len(x), d, seed))


def split_pattern(pat: Sequence[bool], labels: Sequence[int], k: int | None = None) -> list[DeletionPattern]:
    """Route deletion flags to the subchannel each position belongs to.

    ``k`` defaults to the largest label present.
    """
    if len(pat) != len(labels):
        raise InvalidInputError(f"pattern length {len(pat)} != label length {len(labels)}")
    if k is None:
        k = max(labels, default=1)
    parts: list[list[bool]] = [[] for _ in range(k)]
    for flag, label in zip(pat, labels):
        if not 1 <= label <= k:
            raise InvalidInputError(f"label {label} outside 1..{k}")
        parts[label - 1].append(bool(flag))
    return [tuple(p) for p in parts]


def channel_output_decomposition(x: Sequence[int], pat: Sequence[bool], k: int) -> Decomposition:
    """Decomposition of the output, assembled from the subchannels' own outputs.

    Each subchannel deletes from its own input using its share of ``pat``;
    the surviving labels give ``F_y``. Equals ``decompose(apply_pattern(x, pat), k)``.
    """
    dec = decompose(x, k)
    subpats = split_pattern(pat, dec.labels, k)
    outputs = tuple(apply_pattern(sub, sp) for sub, sp in zip(dec.subsequences, subpats))
    out_labels = apply_pattern(dec.labels, pat)
    return Decomposition(outputs, out_labels)
