"""Weighted graphs whose edge weights are integer multiples of a rational.

An instance stores a symmetric matrix of activation counts; the weight of
``(u, v)`` is ``counts[u, v] * delta``. Densities are therefore ratios of
integers times ``delta`` and every comparison is exact.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .rationals import decimal_string


@dataclass(frozen=True)
class VertexSet:
    """Sorted, duplicate-free collection of vertex indices."""

    members: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.members)
        if any(a >= b for a, b in zip(m, m[1:])):
            raise ValueError("vertex set members must be strictly increasing")
        if m and m[0] < 0:
            raise ValueError(f"negative vertex index {m[0]}")
        object.__setattr__(self, "members", m)

    @classmethod
    def of(cls, vertices: Iterable[int], n: int | None = None) -> "VertexSet":
        members = tuple(sorted({int(v) for v in vertices}))
        if n is not None and members and members[-1] >= n:
            raise ValueError(f"vertex {members[-1]} out of range [0, {n})")
        return cls(members)

    def size(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v) -> bool:
        return int(v) in set(self.members)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.members, dtype=np.intp)

    def intersection(self, other: Iterable[int]) -> "VertexSet":
        other = set(other)
        return VertexSet(tuple(v for v in self.members if v in other))


def as_vertex_set(vertices, n: int | None = None) -> VertexSet:
    if isinstance(vertices, VertexSet):
        if n is not None and vertices.members and vertices.members[-1] >= n:
            raise ValueError(f"vertex {vertices.members[-1]} out of range [0, {n})")
        return vertices
    return VertexSet.of(np.asarray(vertices, dtype=np.int64).ravel().tolist(), n)


@dataclass(frozen=True, eq=False)
class DensityValue:
    """Exact density ``delta * activation / pairs``."""

    activation: int
    pairs: int
    delta: Fraction

    @property
    def value(self) -> Fraction:
        return self.delta * Fraction(self.activation, self.pairs)

    def _cmp_key(self, other):
        if isinstance(other, DensityValue):
            return other.value
        return Fraction(other)

    def __eq__(self, other):
        try:
            return self.value == self._cmp_key(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return self.value < self._cmp_key(other)

    def __le__(self, other):
        return self.value <= self._cmp_key(other)

    def __gt__(self, other):
        return self.value > self._cmp_key(other)

    def __ge__(self, other):
        return self.value >= self._cmp_key(other)

    def __sub__(self, other):
        return self.value - self._cmp_key(other)

    def __hash__(self):
        return hash(self.value)

    def __float__(self):
        return float(self.value)

    def decimal(self, digits: int = 12) -> str:
        return decimal_string(self.value, digits)

    def to_json(self) -> dict:
        v = self.value
        return {
            "activation": self.activation,
            "pairs": self.pairs,
            "value": [v.numerator, v.denominator],
            "decimal": self.decimal(),
        }


@dataclass(frozen=True, eq=False)
class LevelWeightedGraph:
    """The summed instance ``G = G_1 + ... + G_s``.

    ``levels`` optionally keeps the per-level boolean activation matrices
    (shape ``(s, n, n)``) so that densities over partial level ranges can be
    evaluated. Graphs read back from a matrix file only carry ``counts``.
    """

    n: int
    s: int
    delta: Fraction
    counts: np.ndarray
    levels: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        delta = Fraction(self.delta)
        object.__setattr__(self, "delta", delta)
        counts = np.asarray(self.counts)
        if counts.shape != (self.n, self.n):
            raise ValueError(f"counts must be {self.n}x{self.n}, got {counts.shape}")
        if not np.issubdtype(counts.dtype, np.integer):
            raise ValueError("counts must be integers")
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.s < 0 or self.s * delta > 1:
            raise ValueError(f"s*delta = {self.s * delta} exceeds 1")
        if self.n and (counts.min() < 0 or counts.max() > self.s):
            raise ValueError(f"counts must lie in [0, {self.s}]")
        if not np.array_equal(counts, counts.T):
            raise ValueError("counts must be symmetric")
        counts = counts.astype(np.int32, copy=True)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if self.levels is not None:
            levels = np.asarray(self.levels, dtype=bool).copy()
            if levels.shape != (self.s, self.n, self.n):
                raise ValueError("levels must have shape (s, n, n)")
            if not np.array_equal(levels.sum(axis=0, dtype=np.int32), counts):
                raise ValueError("level matrices do not sum to counts")
            levels.setflags(write=False)
            object.__setattr__(self, "levels", levels)

    def weight(self, u: int, v: int) -> Fraction:
        return int(self.counts[u, v]) * self.delta

    def __eq__(self, other):
        if not isinstance(other, LevelWeightedGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.s == other.s
            and self.delta == other.delta
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None


def _resolve_levels(G: LevelWeightedGraph, levels) -> tuple[int, int] | None:
    """Return ``(lo, hi)`` (1-based, inclusive) or None for the full range."""
    if levels is None:
        return None
    lo, hi = (int(x) for x in levels)
    if lo == hi + 1 and 1 <= lo <= G.s + 1:
        return lo, hi  # empty range, e.g. the tail r+1..s at r = s
    if not (1 <= lo <= hi <= G.s):
        raise ValueError(f"level range {lo}..{hi} out of bounds for s={G.s}")
    if lo == 1 and hi == G.s:
        return None
    return lo, hi


def activation_sum(G: LevelWeightedGraph, levels, A, B) -> int:
    """Sum over ``x in A, y in B`` of the number of active levels in range.

    ``levels`` is an inclusive ``(lo, hi)`` pair of 1-based levels or None
    for all of ``1..s``. Diagonal terms are included when A and B overlap.
    """
    A = as_vertex_set(A, G.n)
    B = as_vertex_set(B, G.n)
    if not len(A) or not len(B):
        raise ValueError("empty operand")
    rng = _resolve_levels(G, levels)
    ia, ib = A.array, B.array
    if rng is None:
        return int(G.counts[np.ix_(ia, ib)].sum(dtype=np.int64))
    lo, hi = rng
    if lo > hi:
        return 0
    if G.levels is None:
        raise ValueError("graph carries no per-level decomposition; only the full range is available")
    block = G.levels[lo - 1 : hi][:, ia][:, :, ib]
    return int(block.sum(dtype=np.int64))


def density(G: LevelWeightedGraph, levels, A, B) -> DensityValue:
    A = as_vertex_set(A, G.n)
    B = as_vertex_set(B, G.n)
    act = activation_sum(G, levels, A, B)
    return DensityValue(act, len(A) * len(B), G.delta)


@dataclass(frozen=True, eq=False)
class Equipartition:
    """Assignment of each vertex in ``[0, n)`` to a part in ``[0, k)``.

    Balance is not enforced here; see :func:`check_equipartition`.
    """

    n: int
    k: int
    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).copy()
        if a.shape != (self.n,):
            raise ValueError(f"assignment must have length n={self.n}")
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.n and (a.min() < 0 or a.max() >= self.k):
            bad = a[(a < 0) | (a >= self.k)][0]
            raise ValueError(f"part index {bad} out of range [0, {self.k})")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @classmethod
    def from_parts(cls, parts: Sequence[Iterable[int]], n: int | None = None) -> "Equipartition":
        parts = [list(p) for p in parts]
        if n is None:
            n = sum(len(p) for p in parts)
        assignment = np.full(n, -1, dtype=np.int64)
        for idx, p in enumerate(parts):
            if (assignment[p] != -1).any():
                raise ValueError("parts overlap")
            assignment[p] = idx
        if (assignment == -1).any():
            raise ValueError("parts do not cover all vertices")
        return cls(n, len(parts), assignment)

    @classmethod
    def contiguous(cls, n: int, k: int) -> "Equipartition":
        """Split ``[0, n)`` into ``k`` contiguous blocks of near-equal size."""
        return cls(n, k, (np.arange(n) * k) // n)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def part(self, idx: int) -> VertexSet:
        return VertexSet(tuple(np.flatnonzero(self.assignment == idx).tolist()))

    def parts(self) -> list[VertexSet]:
        order = np.argsort(self.assignment, kind="stable")
        bounds = np.cumsum(self.sizes())[:-1]
        return [VertexSet(tuple(chunk.tolist())) for chunk in np.split(order, bounds)]

    def __eq__(self, other):
        if not isinstance(other, Equipartition):
            return NotImplemented
        return self.n == other.n and self.k == other.k and np.array_equal(self.assignment, other.assignment)

    __hash__ = None


def check_equipartition(P: Equipartition) -> tuple[bool, dict[int, int]]:
    """Return (balanced, histogram) where histogram maps part size -> count.

    Balanced means every part is nonempty and sizes differ by at most one.
    """
    sizes = P.sizes()
    hist = dict(sorted(Counter(sizes.tolist()).items()))
    ok = bool(sizes.min() >= 1 and sizes.max() - sizes.min() <= 1)
    return ok, hist
