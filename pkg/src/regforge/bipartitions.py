"""Balanced sequences of half-half bipartitions and the biased-mass check.

A sequence of ``m`` bipartitions of ``[M]`` is stored as an ``m x M``
boolean matrix; entry ``(i, t)`` is True when element ``t + 1`` lies in
``A_i``. Elements are 1-based in the public API and in files, 0-based in
the matrix.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .rationals import format_rational

PAPER_C = Fraction(1, 16)
RNG_ALGORITHM = "numpy.PCG64/SeedSequence"
DEFAULT_GRID_STEP = Fraction(1, 40)
MAX_GRID_POINTS = 2_000_000


class BalanceError(RuntimeError):
    """Raised when no c-balanced sequence was found within the retry budget.

    ``best`` holds the attempt with the smallest worst-pair co-occurrence.
    """

    def __init__(self, message: str, best: "BipartitionSequence | None" = None, worst_count: int | None = None):
        super().__init__(message)
        self.best = best
        self.worst_count = worst_count


@dataclass(frozen=True)
class Bipartition:
    M: int
    A: frozenset[int]

    def __post_init__(self):
        A = frozenset(int(t) for t in self.A)
        if self.M < 2 or self.M % 2:
            raise ValueError(f"M must be even and >= 2, got {self.M}")
        if len(A) != self.M // 2 or any(not 1 <= t <= self.M for t in A):
            raise ValueError(f"A must be an (M/2)-subset of [1..{self.M}]")
        object.__setattr__(self, "A", A)

    @property
    def B(self) -> frozenset[int]:
        return frozenset(range(1, self.M + 1)) - self.A

    def bits(self) -> np.ndarray:
        row = np.zeros(self.M, dtype=bool)
        row[[t - 1 for t in self.A]] = True
        return row


@dataclass(frozen=True, eq=False)
class BipartitionSequence:
    """``m`` bipartitions of ``[M]`` plus the balance parameter ``c``.

    ``verified`` is only True when :func:`is_balanced` passed at ``c``; use
    :meth:`verify` rather than setting it by hand.
    """

    bits: np.ndarray
    c: Fraction = PAPER_C
    verified: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool).copy()
        if bits.ndim != 2 or bits.shape[0] < 1:
            raise ValueError("bits must be a nonempty m x M matrix")
        M = bits.shape[1]
        if M < 2 or M % 2:
            raise ValueError(f"M must be even and >= 2, got {M}")
        half = bits.sum(axis=1)
        if (half != M // 2).any():
            i = int(np.flatnonzero(half != M // 2)[0])
            raise ValueError(f"bipartition {i + 1} is not half-half ({half[i]} of {M})")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "c", Fraction(self.c))

    @classmethod
    def from_parts(cls, parts: Sequence[Bipartition], c=PAPER_C) -> "BipartitionSequence":
        Ms = {p.M for p in parts}
        if len(Ms) != 1:
            raise ValueError(f"inconsistent M across parts: {sorted(Ms)}")
        return cls(np.stack([p.bits() for p in parts]), c)

    @classmethod
    def from_sets(cls, M: int, sets: Iterable[Iterable[int]], c=PAPER_C) -> "BipartitionSequence":
        return cls.from_parts([Bipartition(M, frozenset(a)) for a in sets], c)

    @property
    def m(self) -> int:
        return self.bits.shape[0]

    @property
    def M(self) -> int:
        return self.bits.shape[1]

    @property
    def parts(self) -> list[Bipartition]:
        return [Bipartition(self.M, frozenset((np.flatnonzero(row) + 1).tolist())) for row in self.bits]

    def verify(self, c=None) -> "BipartitionSequence":
        c = self.c if c is None else Fraction(c)
        ok, _ = is_balanced(self, c)
        return BipartitionSequence(self.bits, c, ok, dict(self.meta))

    def __eq__(self, other):
        if not isinstance(other, BipartitionSequence):
            return NotImplemented
        return self.c == other.c and np.array_equal(self.bits, other.bits)

    __hash__ = None

    def __repr__(self):
        return f"BipartitionSequence(m={self.m}, M={self.M}, c={format_rational(self.c)}, verified={self.verified})"


@dataclass(frozen=True)
class MassProfile:
    lam: tuple[Fraction, ...]

    def __post_init__(self):
        lam = tuple(Fraction(x) for x in self.lam)
        if any(x < 0 for x in lam):
            raise ValueError("masses must be nonnegative")
        object.__setattr__(self, "lam", lam)

    @property
    def l1(self) -> Fraction:
        return sum(self.lam, Fraction(0))

    @property
    def linf(self) -> Fraction:
        return max(self.lam)

    def __len__(self):
        return len(self.lam)


def cooccurrence(S: BipartitionSequence) -> np.ndarray:
    """``M x M`` matrix counting, for each element pair, how many
    bipartitions put both on the same side."""
    Y = np.where(S.bits, 1, -1).astype(np.int64)
    return (Y.T @ Y + S.m) // 2


def is_balanced(S: BipartitionSequence | Sequence[Bipartition], c) -> tuple[bool, tuple[int, int, int] | None]:
    """Check ``c``-balance exactly.

    Returns ``(ok, worst)`` where ``worst`` is ``(t, t', count)`` for the pair
    (1-based) with the highest co-occurrence, or None when ``M`` has no pair.
    """
    if not isinstance(S, BipartitionSequence):
        S = BipartitionSequence.from_parts(list(S))
    c = Fraction(c)
    co = cooccurrence(S)
    np.fill_diagonal(co, -1)
    flat = int(np.argmax(co))
    t, u = divmod(flat, S.M)
    count = int(co[t, u])
    worst = (min(t, u) + 1, max(t, u) + 1, count)
    # count <= (1/2 + c) m  <=>  2 * count * den <= (den + 2 num) * m
    ok = 2 * count * c.denominator <= (c.denominator + 2 * c.numerator) * S.m
    return ok, worst


def base_case(m: int, c=PAPER_C) -> BipartitionSequence:
    """``m`` identical copies of ({1}, {2})."""
    bits = np.zeros((m, 2), dtype=bool)
    bits[:, 0] = True
    return BipartitionSequence(bits, c, True, {"method": "base-case"})


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(key)))


def generate_balanced(
    m: int, M: int, c=PAPER_C, seed: int = 0, max_retries: int = 1000, stream: tuple[int, ...] = ()
) -> BipartitionSequence:
    """Draw ``m`` independent uniform half-half bipartitions of ``[M]`` until
    the sequence is ``c``-balanced.

    ``M = 2`` short-circuits to the deterministic base case. Attempt ``a``
    uses the substream ``SeedSequence(seed, spawn_key=stream + (a,))``.
    """
    if M % 2 or M < 2:
        raise ValueError(f"M must be even and >= 2, got {M}")
    if m < 1:
        raise ValueError("m must be positive")
    c = Fraction(c)
    if c < 0:
        raise ValueError("c must be nonnegative")
    if M == 2:
        return base_case(m, c)
    best, best_count = None, None
    for attempt in range(max_retries):
        rng = _rng(seed, *stream, attempt)
        perms = rng.permuted(np.tile(np.arange(M), (m, 1)), axis=1)
        bits = np.zeros((m, M), dtype=bool)
        np.put_along_axis(bits, perms[:, : M // 2], True, axis=1)
        S = BipartitionSequence(bits, c)
        ok, worst = is_balanced(S, c)
        if ok:
            meta = {"method": "random", "seed": seed, "stream": list(stream), "attempt": attempt, "rng": RNG_ALGORITHM}
            return BipartitionSequence(bits, c, True, meta)
        if best_count is None or worst[2] < best_count:
            best, best_count = S, worst[2]
    raise BalanceError(
        f"no {format_rational(c)}-balanced sequence (m={m}, M={M}) in {max_retries} attempts; "
        f"best worst-pair count {best_count}",
        best,
        best_count,
    )


def split_mass_count(S: BipartitionSequence, lam: MassProfile | Sequence, zeta) -> tuple[int, list[int]]:
    """Count bipartitions whose lighter side carries mass at least ``zeta``.

    Returns the count and the qualifying 1-based indices.
    """
    if not isinstance(lam, MassProfile):
        lam = MassProfile(tuple(lam))
    if len(lam) != S.M:
        raise ValueError(f"mass profile has length {len(lam)}, expected M={S.M}")
    zeta = Fraction(zeta)
    total = lam.l1
    hits = []
    for i, row in enumerate(S.bits):
        a = sum((x for x, inA in zip(lam.lam, row) if inA), Fraction(0))
        if min(a, total - a) >= zeta:
            hits.append(i + 1)
    return len(hits), hits


def simplex_grid(M: int, steps: int) -> np.ndarray:
    """All compositions of ``steps`` into ``M`` nonnegative parts (rows)."""
    count = math.comb(steps + M - 1, M - 1)
    if count > MAX_GRID_POINTS:
        raise ValueError(f"grid has {count} points (cap {MAX_GRID_POINTS}); use a coarser grid_step")
    out = np.empty((count, M), dtype=np.int64)
    for row, bars in enumerate(itertools.combinations(range(steps + M - 1), M - 1)):
        prev = -1
        for col, b in enumerate(bars):
            out[row, col] = b - prev - 1
            prev = b
        out[row, M - 1] = steps + M - 2 - prev
    return out


@dataclass
class OracleResult:
    holds: bool
    lemma_applies: bool
    points: int
    min_count: int | None
    failing_lambda: tuple[Fraction, ...] | None
    m: int
    zeta: Fraction
    grid_step: Fraction

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "lemma_applies": self.lemma_applies,
            "points": self.points,
            "min_count": self.min_count,
            "required": format_rational(Fraction(self.m, 6)),
            "failing_lambda": None if self.failing_lambda is None else [format_rational(x) for x in self.failing_lambda],
            "zeta": format_rational(self.zeta),
            "grid_step": format_rational(self.grid_step),
        }


def biased_lemma_oracle(S: BipartitionSequence, zeta, grid_step=DEFAULT_GRID_STEP) -> OracleResult:
    """Enumerate grid mass profiles and check the ``m/6`` split guarantee.

    Every ``lambda`` with coordinates in ``grid_step * Z``, unit mass and
    ``max(lambda) <= 1 - 8 zeta`` must split with lighter side ``>= zeta`` on
    at least ``m/6`` bipartitions. ``holds`` reports what the enumeration
    found; ``lemma_applies`` says whether the sequence is 1/16-balanced, i.e.
    whether a failure would contradict the guarantee.
    """
    zeta = Fraction(zeta)
    grid_step = Fraction(grid_step)
    if grid_step <= 0 or (1 / grid_step).denominator != 1:
        raise ValueError(f"grid_step {format_rational(grid_step)} does not divide 1")
    steps = int(1 / grid_step)
    applies = S.c == PAPER_C and is_balanced(S, PAPER_C)[0]

    grid = simplex_grid(S.M, steps)
    # max(lambda) <= 1 - 8 zeta, scaled by steps * zeta.den
    cap = (zeta.denominator - 8 * zeta.numerator) * steps
    grid = grid[grid.max(axis=1) * zeta.denominator <= cap]
    if not len(grid):
        return OracleResult(True, applies, 0, None, None, S.m, zeta, grid_step)

    mass_a = grid @ S.bits.T.astype(np.int64)
    lighter = np.minimum(mass_a, steps - mass_a)
    qualifies = lighter * zeta.denominator >= zeta.numerator * steps
    counts = qualifies.sum(axis=1)
    bad = np.flatnonzero(6 * counts < S.m)
    failing = None
    if len(bad):
        failing = tuple(Fraction(int(x), steps) for x in grid[bad[0]])
    return OracleResult(not len(bad), applies, len(grid), int(counts.min()), failing, S.m, zeta, grid_step)
