import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regforge.auditor import (
    bounds_calculator,
    canonical_candidates,
    canonical_witness_search,
    exhaustive_pair_check,
    lower_bound_demo,
    niceness_audit,
    refinement_check,
    tower_height_bound,
    twr,
)
from regforge.graph import Equipartition, LevelWeightedGraph, density
from regforge.tower import ConstructionParams, build_instance, build_tower


def uniform_graph(n, count=1, s=2, delta=Fraction(1, 4)):
    return LevelWeightedGraph(n, s, delta, np.full((n, n), count))


def brute_regular(G, A, B, eps):
    """Definition loop over all admissible subset pairs with Fractions."""
    def subsets(X):
        for k in range(1, len(X) + 1):
            if k >= eps * len(X):
                yield from itertools.combinations(X, k)

    full = density(G, None, A, B).value
    worst = Fraction(0)
    for As in subsets(list(A)):
        for Bs in subsets(list(B)):
            worst = max(worst, abs(density(G, None, As, Bs).value - full))
    return worst <= eps, worst


def test_refinement_examples(tower160):
    T = tower160
    for r in range(1, T.s + 1):
        fine, coarse = T.partition(r), T.partition(r - 1)
        assert refinement_check(fine, coarse, 0).beta_achieved == 0
        back = refinement_check(coarse, fine, Fraction(49, 100))
        assert back.beta_achieved == 1 - Fraction(1, T.ground_size(r))
        assert not back.passed


def test_refinement_one_vertex_moved():
    X = Equipartition.from_parts([range(0, 4), range(4, 7)])
    Z = Equipartition.from_parts([range(0, 3), range(3, 7)])
    rep = refinement_check(Z, X, Fraction(1, 4))
    assert rep.beta_achieved == Fraction(1, 4) and rep.passed
    assert rep.mapping == [0, 1]
    assert not refinement_check(Z, X, Fraction(1, 5)).passed


def test_refinement_tie_breaks_low():
    X = Equipartition.from_parts([[0, 2], [1, 3]])
    Z = Equipartition.from_parts([[0, 1], [2, 3]])
    rep = refinement_check(Z, X, Fraction(1, 2))
    assert rep.mapping == [0, 0] and rep.beta_achieved == Fraction(1, 2)


def test_exhaustive_uniform_is_regular():
    G = uniform_graph(8)
    for eps in (Fraction(1, 100), Fraction(1, 2)):
        assert exhaustive_pair_check(G, range(8), range(8), eps).status == "regular"


def test_exhaustive_two_cliques():
    T = build_tower(ConstructionParams.custom(Fraction(1, 3), 1, 8))
    G = build_instance(T)
    v = exhaustive_pair_check(G, range(8), range(8), Fraction(1, 10))
    assert v.irregular
    assert v.d_full == Fraction(1, 6)
    assert v.deviation == Fraction(1, 6)
    assert len(v.A_sub) >= 1 and len(v.B_sub) >= 1
    assert not exhaustive_pair_check(G, range(8), range(8), Fraction(1, 6)).irregular


def test_exhaustive_cap():
    G = uniform_graph(13)
    with pytest.raises(ValueError, match="canonical"):
        exhaustive_pair_check(G, range(13), range(5), Fraction(1, 10))


def test_exhaustive_matches_definition_loop():
    rng = np.random.default_rng(4)
    for _ in range(8):
        n, s = 6, 3
        upper = np.triu(rng.integers(0, s + 1, (n, n)))
        counts = upper + np.triu(upper, 1).T
        G = LevelWeightedGraph(n, s, Fraction(1, 4), counts)
        A = rng.choice(n, 4, replace=False).tolist()
        B = rng.choice(n, 5, replace=False).tolist()
        eps = Fraction(int(rng.integers(1, 6)), 20)
        regular, worst = brute_regular(G, A, B, eps)
        v = exhaustive_pair_check(G, A, B, eps)
        assert v.irregular == (not regular)
        if v.irregular:
            assert v.deviation == worst


def test_canonical_full_cells_gap_is_delta(tower160, graph160):
    T, G = tower160, graph160
    for r in range(1, T.s + 1):
        m = T.sizes[r - 1]
        for i in range(m):
            for j in range(m):
                cands = canonical_candidates(G, T, T.cell(r - 1, i), T.cell(r - 1, j), Fraction(1, 100), r)
                assert [c.gap for c in cands] == [G.delta, G.delta]
                assert all(c.sizes_ok for c in cands)
                v = canonical_witness_search(G, T, T.cell(r - 1, i), T.cell(r - 1, j), Fraction(1, 100))
                assert v.irregular and v.deviation > Fraction(1, 100)


def test_canonical_uniform_unknown(tower8):
    G = uniform_graph(8, count=2, s=3, delta=Fraction(1, 3))
    assert canonical_witness_search(G, tower8, range(8), range(8), Fraction(1, 10)).status == "unknown"


def test_canonical_inside_child_cell_unknown(tower160, graph160):
    child = tower160.cell(tower160.s, 5)
    v = canonical_witness_search(graph160, tower160, child, range(160), Fraction(1, 100))
    assert v.status == "unknown"
    for r in range(1, tower160.s + 1):
        for c in canonical_candidates(graph160, tower160, child, range(160), Fraction(1, 100), r):
            assert min(len(c.Za), len(c.Zb)) == 0


def test_niceness_examples(tower160, graph160):
    G = uniform_graph(6)
    assert niceness_audit(G, Equipartition.contiguous(6, 3), Fraction(1, 10), "exhaustive").verdict == "nice"
    assert niceness_audit(G, Equipartition.contiguous(6, 1), Fraction(1, 10), "exhaustive").verdict == "nice"
    for r in range(tower160.s):
        rep = niceness_audit(graph160, tower160.partition(r), Fraction(1, 100), "canonical", tower160)
        assert rep.verdict == "not-nice"
        assert rep.irregular_counts == [tower160.sizes[r]] * tower160.sizes[r]
    with pytest.raises(ValueError, match="tower"):
        niceness_audit(graph160, tower160.partition(1), Fraction(1, 100), "canonical")


def test_niceness_both_strategies_agree(tower8, graph8):
    rep = niceness_audit(graph8, tower8.partition(2), Fraction(1, 20), "both", tower8)
    assert rep.verdict == "not-nice" and rep.disagreements == []


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32), e1=st.integers(1, 10), e2=st.integers(1, 10))
def test_niceness_monotone_in_eps(seed, e1, e2):
    rng = np.random.default_rng(seed)
    n, s = 6, 2
    upper = np.triu(rng.integers(0, s + 1, (n, n)))
    G = LevelWeightedGraph(n, s, Fraction(1, 2), upper + np.triu(upper, 1).T)
    P = Equipartition.contiguous(n, 3)
    lo, hi = sorted((Fraction(e1, 20), Fraction(e2, 20)))
    if niceness_audit(G, P, lo, "exhaustive").verdict == "nice":
        assert niceness_audit(G, P, hi, "exhaustive").verdict == "nice"


def test_bounds_examples():
    b = bounds_calculator(Fraction(1, 3600))
    assert (b["delta"], b["s"]) == ("1/2", 2)
    b = bounds_calculator(Fraction(1, 8100))
    assert (b["delta"], b["s"], b["tower_sizes"]) == ("1/3", 3, [1, 2, 4, 8])
    with pytest.raises(ValueError, match="too large"):
        bounds_calculator(Fraction(1, 4))


def test_tower_height_bound_rigorous_when_exact():
    for s in range(0, 14):
        tb = tower_height_bound(s)
        if tb["exact_levels"] == s:
            h = tb["height"]
            assert twr(h) <= tb["sizes"][-1] < twr(h + 1)
    far = tower_height_bound(100)
    assert far["exact_levels"] < 100 and far["height"] > 80


def test_demo_report(params160):
    rep = lower_bound_demo(params160)
    assert rep["passed"]
    assert [lv["verdict"] for lv in rep["niceness"]] == ["not-nice"] * 3
    assert rep["claim"]["m_s"] == 8 and rep["claim"]["min_parts"] == 4
    one = lower_bound_demo(ConstructionParams.custom(Fraction(1, 3), 1, 10, epsilon=Fraction(1, 100)))
    assert [lv["level"] for lv in one["niceness"]] == [0]
    with pytest.raises(ValueError, match="divisibility"):
        lower_bound_demo(ConstructionParams.custom(Fraction(1, 3), 3, 161, epsilon=Fraction(1, 100)))
