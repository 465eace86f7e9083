"""Randomized rounding of the weighted instance to a simple graph, and an
empirical audit of how far set-pair densities move under rounding."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import LevelWeightedGraph
from .rationals import decimal_string, format_rational
from .tower import SAMPLE_STREAM, TRIAL_STREAM

LOG_BASE = "natural"


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=key))


@dataclass(frozen=True, eq=False)
class SampledGraph:
    n: int
    adjacency: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool).copy()
        if adj.shape != (self.n, self.n):
            raise ValueError(f"adjacency must be {self.n}x{self.n}")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if adj.diagonal().any():
            raise ValueError("sampled graphs have no self-loops")
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @property
    def seed(self) -> int:
        return int(self.provenance.get("seed", 0))

    def edges(self) -> np.ndarray:
        u, v = np.nonzero(np.triu(self.adjacency, 1))
        return np.stack([u, v], axis=1)

    def __eq__(self, other):
        if not isinstance(other, SampledGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.adjacency, other.adjacency)

    __hash__ = None


def sample_graph(G: LevelWeightedGraph, seed: int) -> SampledGraph:
    """Keep each pair ``u < v`` independently with probability ``counts * delta``."""
    rng = _rng(seed, SAMPLE_STREAM)
    u, v = np.triu_indices(G.n, 1)
    prob = G.counts[u, v].astype(np.float64) * float(G.delta)
    keep = rng.random(len(u)) < prob
    adj = np.zeros((G.n, G.n), dtype=bool)
    adj[u[keep], v[keep]] = True
    adj |= adj.T
    return SampledGraph(G.n, adj, {"seed": int(seed), "rng": "numpy.PCG64/SeedSequence", "n": G.n, "s": G.s,
                                    "delta": format_rational(G.delta)})


def claim_threshold(n: int, zeta) -> int:
    """``ceil(20 * zeta**-2 * ln n)``."""
    zeta = Fraction(zeta)
    return math.ceil(20 * math.log(n) / float(zeta) ** 2)


@dataclass
class DeviationReport:
    max_deviation: Fraction
    passed: bool
    zeta: Fraction
    set_size: int
    trials: int
    worst_trial: int | None

    def to_json(self) -> dict:
        return {
            "max_deviation": format_rational(self.max_deviation),
            "max_deviation_decimal": decimal_string(self.max_deviation),
            "passed": self.passed,
            "zeta": format_rational(self.zeta),
            "set_size": self.set_size,
            "trials": self.trials,
            "worst_trial": self.worst_trial,
            "log": LOG_BASE,
        }


def deviation_audit(
    G: LevelWeightedGraph, Gp: SampledGraph, zeta, trials: int, seed: int, set_size: int | None = None
) -> DeviationReport:
    """Largest ``|d_{G'}(A, B) - d_G(A, B)|`` over random set pairs.

    ``A`` and ``B`` are uniform subsets of exactly ``set_size`` vertices
    (default: the claim threshold); diagonal pairs are dropped on both
    sides. Trial ``t`` draws from substream ``(TRIAL_STREAM, t)``.
    """
    zeta = Fraction(zeta)
    if G.n != Gp.n:
        raise ValueError("graphs differ in vertex count")
    size = claim_threshold(G.n, zeta) if set_size is None else int(set_size)
    if size > G.n:
        raise ValueError(f"n too small for zeta: set size {size} > n={G.n}")
    if size < 1:
        raise ValueError("set size must be positive")
    counts = G.counts
    adj = Gp.adjacency
    worst, worst_trial = Fraction(0), None
    for t in range(trials):
        rng = _rng(seed, TRIAL_STREAM, t)
        A = rng.choice(G.n, size=size, replace=False)
        B = rng.choice(G.n, size=size, replace=False)
        common = np.intersect1d(A, B)
        pairs = size * size - len(common)
        if pairs == 0:
            continue
        w = int(counts[np.ix_(A, B)].sum(dtype=np.int64)) - int(counts[common, common].sum(dtype=np.int64))
        e = int(adj[np.ix_(A, B)].sum(dtype=np.int64))
        dev = abs(G.delta * w - e) / pairs
        if worst_trial is None or dev > worst:
            worst, worst_trial = dev, t
    return DeviationReport(worst, worst <= zeta, zeta, size, trials, worst_trial)
