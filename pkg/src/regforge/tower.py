"""The refining partition tower and the weighted lower-bound instance.

Level ``r`` of the tower splits every cell of level ``r - 1`` into
``phi(m_{r-1}) = 2 ** ceil(m_{r-1} / kappa)`` equal child cells. Cells are
contiguous index blocks, so cell lookup is a single integer division.

Each level ``r >= 1`` carries one balanced bipartition sequence of length
``m_{r-1}`` over the ``M_r`` child slots. For a parent cell ``i`` and index
``j``, ``A_{i,j}`` is the union of the children of ``i`` whose slot lies in
the ``j``-th ``A`` side. An edge ``(u, v)`` with ``u`` in cell ``i`` and ``v``
in cell ``j`` is active at level ``r`` when ``u in A_{i,j}`` and
``v in A_{j,i}``, or the same with ``B``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .bipartitions import PAPER_C, BalanceError, BipartitionSequence, generate_balanced
from .graph import LevelWeightedGraph, VertexSet, activation_sum, as_vertex_set
from .rationals import exact_sqrt, format_rational

PAPER_KAPPA = 512
MAX_CELLS = 2**20
MAX_VERTICES = 10**5
MAX_DENSE_VERTICES = 10**4

# spawn-key prefixes for SeedSequence substreams
LEVEL_STREAM = 1
SAMPLE_STREAM = 2
TRIAL_STREAM = 3
Z_STREAM = 4


def phi(m: int, kappa: int = PAPER_KAPPA) -> int:
    return 2 ** (-(-m // kappa))


def tower_sizes(s: int, kappa: int = PAPER_KAPPA, max_bits: int | None = None) -> list[int]:
    """Cell counts ``m_0 .. m_s`` with ``m_r = m_{r-1} * phi(m_{r-1})``.

    Raises ``OverflowError`` if some ``m_r`` would need more than
    ``max_bits`` bits.
    """
    if s < 0 or kappa < 1:
        raise ValueError("need s >= 0 and kappa >= 1")
    sizes = [1]
    for _ in range(s):
        m = sizes[-1]
        exponent = -(-m // kappa)
        if max_bits is not None and m.bit_length() + exponent > max_bits:
            raise OverflowError(f"m_{len(sizes)} exceeds {max_bits} bits")
        sizes.append(m << exponent)
    return sizes


@dataclass(frozen=True)
class ConstructionParams:
    """Construction knobs.

    In ``paper`` mode ``delta = 30 * sqrt(epsilon)``, ``s = floor(1/delta)``
    and ``kappa = 512``. ``custom`` mode sets ``delta``, ``s`` and ``kappa``
    directly; ``epsilon`` is then only the audit parameter.
    """

    delta: Fraction
    s: int
    n: int
    kappa: int = PAPER_KAPPA
    epsilon: Fraction | None = None
    seed: int = 0
    mode: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        if self.epsilon is not None:
            object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if self.mode not in ("paper", "custom"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")
        if self.s * self.delta > 1:
            raise ValueError(f"s*delta = {format_rational(self.s * self.delta)} exceeds 1")
        if self.kappa < 1:
            raise ValueError("kappa must be positive")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.mode == "paper":
            expected = paper_delta(self.epsilon)
            if self.delta != expected or self.s != int(1 / expected) or self.kappa != PAPER_KAPPA:
                raise ValueError("paper mode requires delta = 30*sqrt(epsilon), s = floor(1/delta), kappa = 512")

    @classmethod
    def paper(cls, epsilon, n: int, seed: int = 0) -> "ConstructionParams":
        delta = paper_delta(epsilon)
        s = int(1 / delta)
        if s < 1:
            raise ValueError(f"epsilon too large: delta = {format_rational(delta)} gives s = 0")
        return cls(delta, s, n, PAPER_KAPPA, Fraction(epsilon), seed, "paper")

    @classmethod
    def custom(cls, delta, s: int, n: int, kappa: int = PAPER_KAPPA, epsilon=None, seed: int = 0) -> "ConstructionParams":
        return cls(Fraction(delta), s, n, kappa, None if epsilon is None else Fraction(epsilon), seed, "custom")

    def to_json(self) -> dict:
        return {
            "epsilon": None if self.epsilon is None else format_rational(self.epsilon),
            "delta": format_rational(self.delta),
            "s": self.s,
            "kappa": self.kappa,
            "n": self.n,
            "seed": self.seed,
            "mode": self.mode,
        }


def paper_delta(epsilon) -> Fraction:
    """``30 * sqrt(epsilon)`` as an exact rational; irrational roots raise."""
    if epsilon is None:
        raise ValueError("epsilon required")
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    root = exact_sqrt(epsilon)
    if root is None:
        raise ValueError(
            f"sqrt({format_rational(epsilon)}) is irrational; use custom mode with an explicit rational delta"
        )
    return 30 * root


@dataclass(frozen=True, eq=False)
class PartitionTower:
    """Nested contiguous equipartitions ``X_0 .. X_s`` with their bipartitions.

    ``level_bits[r - 1]`` is the ``m_{r-1} x M_r`` boolean matrix of the
    sequence used at level ``r``. The constructor does not validate; call
    :meth:`validate` (``build_tower`` does).
    """

    params: ConstructionParams
    sizes: tuple[int, ...]
    level_bits: tuple[np.ndarray, ...]
    c: Fraction = PAPER_C
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def s(self) -> int:
        return self.params.s

    def ground_size(self, r: int) -> int:
        """``M_r``, the number of children per level-``(r-1)`` cell."""
        return self.sizes[r] // self.sizes[r - 1]

    def cell_size(self, r: int) -> int:
        return self.n // self.sizes[r]

    def cells(self, r: int) -> np.ndarray:
        return np.arange(self.n) // self.cell_size(r)

    def cell_of(self, r: int, v: int) -> int:
        return int(v) // self.cell_size(r)

    def cell(self, r: int, i: int) -> VertexSet:
        w = self.cell_size(r)
        return VertexSet(tuple(range(i * w, (i + 1) * w)))

    def partition(self, r: int):
        from .graph import Equipartition

        return Equipartition(self.n, self.sizes[r], self.cells(r))

    def slots(self, r: int) -> np.ndarray:
        """Child slot ``t`` (0-based) of every vertex inside its level-``(r-1)`` cell."""
        return self.cells(r) % self.ground_size(r)

    def sequence(self, r: int) -> BipartitionSequence:
        return BipartitionSequence(self.level_bits[r - 1], self.c)

    def in_a_side(self, r: int, j) -> np.ndarray:
        """Boolean mask: vertex ``u`` lies in ``A_{cell(u), j}`` at level ``r``.

        ``j`` may be a scalar or an array aligned with the vertices.
        """
        return self.level_bits[r - 1][j, self.slots(r)]

    def half_set(self, r: int, i: int, j: int, side: str = "A") -> VertexSet:
        """``A_{i,j}`` (or ``B_{i,j}``) at level ``r``: part of level-``(r-1)`` cell ``i``."""
        w = self.cell_size(r - 1)
        lo = i * w
        bits = self.level_bits[r - 1][j]
        slots = self.slots(r)[lo : lo + w]
        want = side == "A"
        return VertexSet(tuple((lo + np.flatnonzero(bits[slots] == want)).tolist()))

    def level_matrix(self, r: int) -> np.ndarray:
        """``n x n`` boolean activation matrix of ``G_r``."""
        parent = self.cells(r - 1)
        slots = self.slots(r)
        # P[u, v] = [u in A_{cell(u), cell(v)}]
        P = self.level_bits[r - 1][parent[None, :], slots[:, None]]
        return P == P.T

    def validate(self) -> None:
        p = self.params
        expect = tower_sizes(p.s, p.kappa)
        if list(self.sizes) != expect:
            raise ValueError(f"sizes {self.sizes} disagree with recurrence {expect}")
        if p.n % self.sizes[-1]:
            raise ValueError(f"divisibility: n={p.n} is not a multiple of m_s={self.sizes[-1]}")
        if len(self.level_bits) != p.s:
            raise ValueError("need one bipartition sequence per level")
        for r in range(1, p.s + 1):
            bits = self.level_bits[r - 1]
            shape = (self.sizes[r - 1], self.ground_size(r))
            if bits.shape != shape:
                raise ValueError(f"level {r}: sequence shape {bits.shape}, expected {shape}")
            if (bits.sum(axis=1) != shape[1] // 2).any():
                raise ValueError(f"level {r}: bipartition not half-half")


def activation(T: PartitionTower, r: int, u: int, v: int) -> bool:
    """Whether edge ``(u, v)`` carries weight delta in ``G_r``."""
    i, j = T.cell_of(r - 1, u), T.cell_of(r - 1, v)
    bits = T.level_bits[r - 1]
    tu = T.cell_of(r, u) - i * T.ground_size(r)
    tv = T.cell_of(r, v) - j * T.ground_size(r)
    return bool(bits[j, tu] == bits[i, tv])


def build_tower(params: ConstructionParams, max_retries: int = 1000, c=PAPER_C) -> PartitionTower:
    try:
        sizes = tower_sizes(params.s, params.kappa, max_bits=64)
    except OverflowError:
        raise ValueError(f"tower too large: m_s exceeds {MAX_CELLS} cells") from None
    if sizes[-1] > MAX_CELLS:
        raise ValueError(f"tower too large: m_s={sizes[-1]} exceeds {MAX_CELLS} cells")
    if params.n > MAX_VERTICES:
        raise ValueError(f"tower too large: n={params.n} exceeds {MAX_VERTICES}")
    if params.n % sizes[-1]:
        raise ValueError(f"divisibility: n={params.n} is not a multiple of m_s={sizes[-1]}")
    level_bits = []
    for r in range(1, params.s + 1):
        m, M = sizes[r - 1], sizes[r] // sizes[r - 1]
        try:
            seq = generate_balanced(m, M, c, params.seed, max_retries, stream=(LEVEL_STREAM, r))
        except BalanceError as exc:
            raise BalanceError(f"level {r}: {exc}", exc.best, exc.worst_count) from exc
        level_bits.append(seq.bits)
    T = PartitionTower(params, tuple(sizes), tuple(level_bits), Fraction(c))
    T.validate()
    return T


def build_instance(T: PartitionTower) -> LevelWeightedGraph:
    if T.n > MAX_DENSE_VERTICES:
        raise ValueError(f"dense instance refused for n={T.n} > {MAX_DENSE_VERTICES}")
    levels = np.stack([T.level_matrix(r) for r in range(1, T.s + 1)])
    counts = levels.sum(axis=0, dtype=np.int32)
    return LevelWeightedGraph(T.n, T.s, T.params.delta, counts, levels)


@dataclass(frozen=True)
class IdentityVerdict:
    ok: bool
    lhs: int
    rhs: int
    where: tuple

    def __bool__(self):
        return self.ok


def half_density_check(T: PartitionTower, G: LevelWeightedGraph, r: int, v: int, j: int) -> IdentityVerdict:
    """Count ``w in X_j`` (level ``r-1``) with ``(v, w)`` active in ``G_r``;
    it must be exactly ``|X_j| / 2``."""
    Xj = T.cell(r - 1, j)
    active = activation_sum(G, (r, r), [v], Xj)
    return IdentityVerdict(2 * active == len(Xj), 2 * active, len(Xj), (r, v, j))


def half_density_suite(T: PartitionTower, G: LevelWeightedGraph) -> tuple[bool, int, IdentityVerdict | None]:
    """All ``(r, v, j)`` at once. Returns (ok, number checked, first failure)."""
    checked = 0
    for r in range(1, T.s + 1):
        w = T.cell_size(r - 1)
        L = G.levels[r - 1] if G.levels is not None else T.level_matrix(r)
        per_cell = np.add.reduceat(L.astype(np.int64), np.arange(0, T.n, w), axis=1)
        checked += per_cell.size
        bad = np.argwhere(2 * per_cell != w)
        if len(bad):
            v, j = (int(x) for x in bad[0])
            return False, checked, IdentityVerdict(False, 2 * int(per_cell[v, j]), w, (r, v, j))
    return True, checked, None


def eq1_check(T: PartitionTower, G: LevelWeightedGraph, r: int, Z, j: int, i: int) -> IdentityVerdict:
    """Tail identity ``2 * act(levels r+1..s; Z, A_{j,i}) = (s - r) |Z| |A_{j,i}|``."""
    Z = as_vertex_set(Z, T.n)
    A = T.half_set(r, j, i, "A")
    lhs = 2 * activation_sum(G, (r + 1, T.s), Z, A)
    rhs = (T.s - r) * len(Z) * len(A)
    return IdentityVerdict(lhs == rhs, lhs, rhs, (r, Z.members, j, i))


def eq1_suite(T: PartitionTower, G: LevelWeightedGraph, Zs: Iterable) -> tuple[bool, int, IdentityVerdict | None]:
    """Check the tail identity for every ``Z`` in ``Zs`` and all ``(r, j, i)``."""
    if G.levels is None:
        raise ValueError("graph carries no per-level decomposition")
    Zs = [as_vertex_set(Z, T.n) for Z in Zs]
    checked = 0
    for r in range(1, T.s + 1):
        F = G.levels[r:].sum(axis=0, dtype=np.int64)
        m, w = T.sizes[r - 1], T.cell_size(r - 1)
        cells = T.cells(r - 1)
        # masks[j, i, u] = u in A_{j,i}
        masks = np.zeros((m, m, T.n), dtype=np.int64)
        for i in range(m):
            masks[cells, i, np.arange(T.n)] = T.in_a_side(r, i)
        flat = masks.reshape(m * m, T.n)
        rhs_per_z = (T.s - r) * (w // 2)
        for Z in Zs:
            col = F[Z.array].sum(axis=0)
            lhs = 2 * (flat @ col)
            rhs = rhs_per_z * len(Z)
            checked += lhs.size
            bad = np.flatnonzero(lhs != rhs)
            if len(bad):
                j, i = divmod(int(bad[0]), m)
                return False, checked, IdentityVerdict(False, int(lhs[bad[0]]), rhs, (r, Z.members, j, i))
    return True, checked, None


def random_vertex_sets(n: int, count: int, seed: int) -> list[VertexSet]:
    """``count`` nonempty subsets of ``[0, n)`` of uniform random size."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(Z_STREAM,)))
    out = []
    for _ in range(count):
        size = int(rng.integers(1, n + 1))
        out.append(VertexSet.of(rng.choice(n, size=size, replace=False).tolist()))
    return out
