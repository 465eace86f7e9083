"""Refinement, pair regularity, niceness and the lower-bound bookkeeping.

Two routes decide pair regularity:

* :func:`exhaustive_pair_check` enumerates every admissible subset pair and is
  the ground truth on small sets (at most ``size_cap`` vertices per side).
* :func:`canonical_witness_search` only looks at the subset triples that the
  tower structure predicts to be unbalanced. It can prove irregularity, never
  regularity.

All verdicts come from integer cross-multiplication.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import DensityValue, Equipartition, LevelWeightedGraph, VertexSet, as_vertex_set, density
from .rationals import ceil_fraction, decimal_string, format_rational
from .tower import (
    PAPER_KAPPA,
    ConstructionParams,
    PartitionTower,
    build_instance,
    build_tower,
    eq1_suite,
    half_density_suite,
    paper_delta,
    random_vertex_sets,
)

DEFAULT_SIZE_CAP = 12
REGULAR, IRREGULAR, UNKNOWN = "regular", "irregular", "unknown"


@dataclass
class RefinementReport:
    beta_achieved: Fraction
    mapping: list[int]
    beta: Fraction
    passed: bool

    @property
    def unique(self) -> bool:
        return self.beta_achieved < Fraction(1, 2)

    def to_json(self) -> dict:
        return {
            "beta_achieved": format_rational(self.beta_achieved),
            "beta": format_rational(self.beta),
            "passed": self.passed,
            "mapping": self.mapping,
        }


def refinement_check(Z: Equipartition, X: Equipartition, beta) -> RefinementReport:
    """Is every part of ``Z`` contained, up to a ``beta`` fraction, in a part of ``X``?

    Each part of ``Z`` maps to the ``X`` part of largest overlap (lowest index
    on ties); ``beta_achieved`` is the worst uncovered fraction.
    """
    if Z.n != X.n:
        raise ValueError("partitions differ in n")
    beta = Fraction(beta)
    key = Z.assignment * X.k + X.assignment
    uniq, counts = np.unique(key, return_counts=True)
    zp, xp = np.divmod(uniq, X.k)
    # per Z part: largest count first, then lowest X index
    order = np.lexsort((xp, -counts, zp))
    zp, xp, counts = zp[order], xp[order], counts[order]
    first = np.concatenate(([True], zp[1:] != zp[:-1]))
    sizes = Z.sizes()
    mapping = [-1] * Z.k
    worst = Fraction(0)
    for z, x, c in zip(zp[first].tolist(), xp[first].tolist(), counts[first].tolist()):
        mapping[z] = x
        frac = Fraction(int(sizes[z]) - c, int(sizes[z]))
        worst = max(worst, frac)
    return RefinementReport(worst, mapping, beta, worst <= beta)


@dataclass
class PairVerdict:
    status: str
    method: str
    A_sub: VertexSet | None = None
    B_sub: VertexSet | None = None
    d_sub: DensityValue | None = None
    d_full: DensityValue | None = None
    details: dict = field(default_factory=dict)

    @property
    def deviation(self) -> Fraction | None:
        if self.d_sub is None:
            return None
        return abs(self.d_sub.value - self.d_full.value)

    @property
    def irregular(self) -> bool:
        return self.status == IRREGULAR

    def swapped(self) -> "PairVerdict":
        return PairVerdict(self.status, self.method, self.B_sub, self.A_sub, self.d_sub, self.d_full, dict(self.details))

    def to_json(self) -> dict:
        out = {"status": self.status, "method": self.method}
        if self.A_sub is not None:
            dev = self.deviation
            out["witness"] = {
                "A_sub": list(self.A_sub.members),
                "B_sub": list(self.B_sub.members),
                "d_sub": self.d_sub.to_json(),
                "d_full": self.d_full.to_json(),
                "deviation": [dev.numerator, dev.denominator],
                "deviation_decimal": decimal_string(dev),
            }
        if self.details:
            out["details"] = {k: (format_rational(v) if isinstance(v, Fraction) else v) for k, v in self.details.items()}
        return out


def _min_subset_size(eps: Fraction, size: int) -> int:
    return max(1, ceil_fraction(eps * size))


def _subset_table(size: int, min_size: int) -> np.ndarray:
    masks = np.arange(1 << size, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(size)) & 1).astype(np.int64)
    return bits[bits.sum(axis=1) >= min_size]


def exhaustive_pair_check(G: LevelWeightedGraph, A, B, eps, size_cap: int = DEFAULT_SIZE_CAP) -> PairVerdict:
    """Decide eps-regularity of ``(A, B)`` by enumerating all subset pairs.

    Returns the subset pair of largest deviation when some deviation
    exceeds ``eps``.
    """
    A = as_vertex_set(A, G.n)
    B = as_vertex_set(B, G.n)
    eps = Fraction(eps)
    if not len(A) or not len(B):
        raise ValueError("empty operand")
    if len(A) > size_cap or len(B) > size_cap:
        raise ValueError(
            f"set sizes ({len(A)}, {len(B)}) exceed size_cap={size_cap}; use canonical_witness_search"
        )
    a, b = len(A), len(B)
    W = G.counts[np.ix_(A.array, B.array)].astype(np.int64)
    act = int(W.sum())
    P = a * b
    SA = _subset_table(a, _min_subset_size(eps, a))
    SB = _subset_table(b, _min_subset_size(eps, b))
    szA, szB = SA.sum(axis=1), SB.sum(axis=1)
    dn, dd = G.delta.numerator, G.delta.denominator
    en, ed = eps.numerator, eps.denominator
    # irregular <=> delta * |S P - act P'| / (P P') > eps
    #           <=> dn * ed * |S P - act P'| > en * dd * P * P'
    lhs_bound = dn * ed * (G.s * P * P + act * P)
    rhs_bound = en * dd * P * P
    dtype = np.int64 if max(lhs_bound, rhs_bound) < 2**62 else object

    rows = SA @ W
    best = None  # (score, ia, ib)
    max_dev_score = -1.0
    chunk = 256
    for lo in range(0, len(SA), chunk):
        S = (rows[lo : lo + chunk] @ SB.T).astype(dtype)
        Pp = (szA[lo : lo + chunk, None] * szB[None, :]).astype(dtype)
        D = abs(S * P - act * Pp)
        irregular = dn * ed * D > en * dd * P * Pp
        score = np.asarray(D, dtype=np.float64) / np.asarray(Pp, dtype=np.float64)
        max_dev_score = max(max_dev_score, float(score.max()))
        if irregular.any():
            masked = np.where(irregular, score, -1.0)
            flat = int(np.argmax(masked))
            ia, ib = divmod(flat, masked.shape[1])
            if best is None or masked[ia, ib] > best[0]:
                best = (float(masked[ia, ib]), lo + ia, ib)
    d_full = DensityValue(act, P, G.delta)
    details = {"eps": eps, "subset_pairs": int(len(SA) * len(SB))}
    if best is None:
        details["max_deviation_approx"] = G.delta.numerator / G.delta.denominator * max_dev_score / P
        return PairVerdict(REGULAR, "exhaustive", d_full=None, details=details)
    _, ia, ib = best
    A_sub = VertexSet(tuple(v for v, bit in zip(A.members, SA[ia]) if bit))
    B_sub = VertexSet(tuple(v for v, bit in zip(B.members, SB[ib]) if bit))
    d_sub = density(G, None, A_sub, B_sub)
    verdict = PairVerdict(IRREGULAR, "exhaustive", A_sub, B_sub, d_sub, d_full, details)
    assert verdict.deviation > eps
    return verdict


def _majority_cell(T: PartitionTower, level: int, Z: VertexSet) -> int:
    return int(np.argmax(np.bincount(T.cells(level)[Z.array])))


@dataclass
class Candidate:
    level: int
    side: str
    i: int
    j: int
    Za: VertexSet
    Zb: VertexSet
    Zp: VertexSet
    gap: Fraction | None
    sizes_ok: bool


def canonical_candidates(G: LevelWeightedGraph, T: PartitionTower, Z0, Z1, eps, level: int) -> list[Candidate]:
    """The A-side and B-side candidate triples at one level.

    With ``i``, ``j`` the majority level-``(level-1)`` cells of ``Z0``, ``Z1``:
    ``Za = Z0 & A_{i,j}``, ``Zb = Z0 & B_{i,j}`` and ``Zp = Z1 & A_{j,i}``
    (A side) or ``Z1 & B_{j,i}`` (B side). ``gap`` is
    ``d(Zp, same side) - d(Zp, other side)``; it is None when a set is empty.
    """
    Z0 = as_vertex_set(Z0, G.n)
    Z1 = as_vertex_set(Z1, G.n)
    eps = Fraction(eps)
    i = _majority_cell(T, level - 1, Z0)
    j = _majority_cell(T, level - 1, Z1)
    in_a_0 = T.in_a_side(level, j)[Z0.array]
    in_a_1 = T.in_a_side(level, i)[Z1.array]
    cell0 = T.cells(level - 1)[Z0.array] == i
    cell1 = T.cells(level - 1)[Z1.array] == j
    Za = VertexSet(tuple(Z0.array[cell0 & in_a_0].tolist()))
    Zb = VertexSet(tuple(Z0.array[cell0 & ~in_a_0].tolist()))
    out = []
    for side, mask in (("A", in_a_1), ("B", ~in_a_1)):
        Zp = VertexSet(tuple(Z1.array[cell1 & mask].tolist()))
        near, far = (Za, Zb) if side == "A" else (Zb, Za)
        ok = (
            len(Za) * eps.denominator >= eps.numerator * len(Z0)
            and len(Zb) * eps.denominator >= eps.numerator * len(Z0)
            and len(Zp) * eps.denominator >= eps.numerator * len(Z1)
            and min(len(Za), len(Zb), len(Zp)) > 0
        )
        gap = None
        if min(len(Za), len(Zb), len(Zp)) > 0:
            gap = density(G, None, Zp, near).value - density(G, None, Zp, far).value
        out.append(Candidate(level, side, i, j, Za, Zb, Zp, gap, ok))
    return out


def canonical_witness_search(G: LevelWeightedGraph, T: PartitionTower, Z0, Z1, eps) -> PairVerdict:
    """Look for an irregularity witness among the tower's candidate triples.

    A candidate fires when its sets meet the ``eps`` size thresholds and
    ``|gap| > 2 eps``; then one of ``(Za, Zp)``, ``(Zb, Zp)`` deviates from
    ``d(Z0, Z1)`` by more than ``eps``. Returns ``unknown`` if nothing fires.
    """
    Z0 = as_vertex_set(Z0, G.n)
    Z1 = as_vertex_set(Z1, G.n)
    eps = Fraction(eps)
    if not len(Z0) or not len(Z1):
        raise ValueError("empty operand")
    d_full = density(G, None, Z0, Z1)
    for level in range(1, T.s + 1):
        for cand in canonical_candidates(G, T, Z0, Z1, eps, level):
            if not cand.sizes_ok or abs(cand.gap) <= 2 * eps:
                continue
            da = density(G, None, cand.Za, cand.Zp)
            db = density(G, None, cand.Zb, cand.Zp)
            A_sub, d_sub = (cand.Za, da) if abs(da.value - d_full.value) >= abs(db.value - d_full.value) else (cand.Zb, db)
            details = {"level": level, "side": cand.side, "i": cand.i, "j": cand.j, "gap": cand.gap, "eps": eps}
            verdict = PairVerdict(IRREGULAR, "canonical", A_sub, cand.Zp, d_sub, d_full, details)
            assert verdict.deviation > eps
            return verdict
    return PairVerdict(UNKNOWN, "canonical", details={"eps": eps})


@dataclass
class NicenessReport:
    k: int
    eps: Fraction
    strategy: str
    irregular_counts: list[int]
    verdict: str
    witnesses: dict = field(default_factory=dict)
    disagreements: list = field(default_factory=list)

    @property
    def failing_parts(self) -> list[int]:
        e = self.eps
        return [a for a, c in enumerate(self.irregular_counts) if c * e.denominator > e.numerator * self.k]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "eps": format_rational(self.eps),
            "strategy": self.strategy,
            "verdict": self.verdict,
            "irregular_counts": self.irregular_counts,
            "failing_parts": self.failing_parts,
            "witnesses": [
                {"pair": [a, b], **v.to_json()} for (a, b), v in sorted(self.witnesses.items())
            ],
            "disagreements": self.disagreements,
        }


def _canonical_either_way(G, T, P, Q, eps) -> PairVerdict:
    v = canonical_witness_search(G, T, P, Q, eps)
    if v.irregular:
        return v
    w = canonical_witness_search(G, T, Q, P, eps)
    return w.swapped() if w.irregular else v


def niceness_audit(
    G: LevelWeightedGraph,
    Z: Equipartition,
    eps,
    strategy: str = "canonical",
    T: PartitionTower | None = None,
    size_cap: int = DEFAULT_SIZE_CAP,
    max_witnesses: int | None = 64,
) -> NicenessReport:
    """Count, for every part, its irregular partners over all ``k`` parts
    (itself included, ordered pairs).

    A part fails when it has more than ``eps * k`` irregular partners. The
    canonical strategy can only report ``not-nice`` or ``unknown``.
    """
    if strategy not in ("exhaustive", "canonical", "both"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy in ("canonical", "both") and T is None:
        raise ValueError("canonical strategy requires a tower")
    if Z.n != G.n:
        raise ValueError("partition and graph differ in n")
    eps = Fraction(eps)
    parts = Z.parts()
    k = Z.k
    counts = [0] * k
    witnesses = {}
    disagreements = []
    for a in range(k):
        for b in range(a, k):
            if strategy == "canonical":
                v = _canonical_either_way(G, T, parts[a], parts[b], eps)
            else:
                v = exhaustive_pair_check(G, parts[a], parts[b], eps, size_cap)
                if strategy == "both":
                    c = _canonical_either_way(G, T, parts[a], parts[b], eps)
                    if c.irregular and not v.irregular:
                        disagreements.append([a, b])
            if v.irregular:
                counts[a] += 1
                if b != a:
                    counts[b] += 1
                if max_witnesses is None or len(witnesses) < max_witnesses:
                    witnesses[(a, b)] = v
    report = NicenessReport(k, eps, strategy, counts, "", witnesses, disagreements)
    if report.failing_parts:
        report.verdict = "not-nice"
    elif strategy == "canonical":
        report.verdict = UNKNOWN
    else:
        report.verdict = "nice"
    return report


def twr(h: int) -> int:
    """Tower of twos of height ``h`` (``twr(0) = 1``)."""
    x = 1
    for _ in range(h):
        x = 1 << x
    return x


def _max_height(m: int, scale: int = 1) -> int:
    """Largest ``h`` with ``scale * twr(h) <= m``, or -1 if none."""
    if scale > m:
        return -1
    h, t = 0, 1
    while True:
        if t >= m.bit_length():  # 2**t > m
            return h
        nxt = 1 << t
        if scale * nxt > m:
            return h
        h, t = h + 1, nxt


def tower_height_bound(s: int, kappa: int = PAPER_KAPPA, max_bits: int = 1 << 16) -> dict:
    """A height ``H`` with ``m_s >= twr(H)``, without materializing huge levels.

    Once ``m_R >= kappa * twr(h)`` (and ``m_R >= kappa``), every further
    level satisfies ``m_{r+1} >= 2 ** (m_r / kappa) >= twr(h + 1)`` and the
    invariant carries on, so ``H = h + (s - R)``.
    """
    sizes = [1]
    for _ in range(s):
        m = sizes[-1]
        exponent = -(-m // kappa)
        if m.bit_length() + exponent > max_bits:
            break
        sizes.append(m << exponent)
    R = len(sizes) - 1
    if R == s:
        return {"sizes": sizes, "exact_levels": R, "height": _max_height(sizes[-1])}
    h = _max_height(sizes[-1], kappa)
    return {"sizes": sizes, "exact_levels": R, "height": h + (s - R)}


def _int_json(x: int):
    return x if x.bit_length() <= 53 else str(x)


def bounds_calculator(epsilon) -> dict:
    """``delta``, ``s``, the cell counts and the resulting partition-order bounds."""
    epsilon = Fraction(epsilon)
    delta = paper_delta(epsilon)
    s = int(1 / delta)
    if s < 1:
        raise ValueError(f"epsilon too large: delta = {format_rational(delta)} > 1 gives s = 0")
    tb = tower_height_bound(s, PAPER_KAPPA)
    sizes = tb["sizes"]
    exact = tb["exact_levels"] == s
    m_s = sizes[-1] if exact else None
    half = None if m_s is None else -(-m_s // 2)
    eps3 = epsilon**3
    out = {
        "epsilon": format_rational(epsilon),
        "delta": format_rational(delta),
        "s": s,
        "kappa": PAPER_KAPPA,
        "tower_sizes": [_int_json(x) for x in sizes],
        "exact_levels": tb["exact_levels"],
        "m_s": None if m_s is None else _int_json(m_s),
        "m_s_bits": None if m_s is None else m_s.bit_length(),
        "tower_height_lower_bound": tb["height"],
        "epsilon_cubed": format_rational(eps3),
    }
    target = f"{_int_json(half)}" if half is not None else f"twr({tb['height']})/2"
    out["statements"] = [
        f"any {format_rational(epsilon)}-nice equipartition of the instance has at least m_s/2 = {target} parts",
        f"M'({format_rational(epsilon)}) >= {target}",
        f"M'(eps) <= M(eps^3), so M({format_rational(eps3)}) >= {target}",
        f"m_s >= twr({tb['height']})",
    ]
    return out


def lower_bound_demo(
    params: ConstructionParams,
    eps_audit=None,
    z_count: int = 200,
    max_retries: int = 1000,
) -> dict:
    """Build the instance, check its identities and show that the coarse
    tower levels ``X_0 .. X_{s-1}`` are not nice."""
    eps = eps_audit if eps_audit is not None else params.epsilon
    if eps is None:
        raise ValueError("eps_audit required")
    eps = Fraction(eps)
    T = build_tower(params, max_retries=max_retries)
    G = build_instance(T)
    half_ok, half_n, half_fail = half_density_suite(T, G)
    Zs = random_vertex_sets(T.n, z_count, params.seed)
    eq1_ok, eq1_n, eq1_fail = eq1_suite(T, G, Zs)
    levels = []
    for r in range(params.s):
        rep = niceness_audit(G, T.partition(r), eps, "canonical", T, max_witnesses=4)
        levels.append({"level": r, "k": T.sizes[r], "verdict": rep.verdict,
                       "irregular_counts": rep.irregular_counts,
                       "witnesses": rep.to_json()["witnesses"]})
    m_s = T.sizes[-1]
    all_not_nice = all(lv["verdict"] == "not-nice" for lv in levels)
    return {
        "params": params.to_json(),
        "eps_audit": format_rational(eps),
        "gap_condition": {"delta_gt_2eps": params.delta > 2 * eps},
        "tower_sizes": list(T.sizes),
        "identities": {
            "half_density": {"passed": half_ok, "checked": half_n,
                             "first_failure": None if half_fail is None else list(half_fail.where)},
            "eq1": {"passed": eq1_ok, "checked": eq1_n, "z_count": z_count,
                    "first_failure": None if eq1_fail is None else [eq1_fail.where[0], eq1_fail.where[2], eq1_fail.where[3]]},
        },
        "niceness": levels,
        "all_coarse_levels_not_nice": all_not_nice,
        "claim": {
            "m_s": m_s,
            "min_parts": -(-m_s // 2),
            "statement": (
                f"an {format_rational(eps)}-nice equipartition beta-refines X_{params.s} with beta < 1/2, "
                f"hence has at least m_s/2 = {-(-m_s // 2)} parts"
            ),
        },
        "passed": half_ok and eq1_ok and all_not_nice,
    }
