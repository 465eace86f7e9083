import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regforge.bipartitions import (
    PAPER_C,
    BalanceError,
    Bipartition,
    BipartitionSequence,
    MassProfile,
    base_case,
    biased_lemma_oracle,
    generate_balanced,
    is_balanced,
    simplex_grid,
    split_mass_count,
)

THREE_SPLITS = BipartitionSequence.from_sets(4, [{1, 2}, {1, 3}, {1, 4}])


def brute_cooccurrence(S, t, u):
    return sum((t in p.A) == (u in p.A) for p in S.parts)


def test_base_case_is_balanced():
    ok, worst = is_balanced(base_case(9), PAPER_C)
    assert ok and worst == (1, 2, 0)


def test_identical_copies_unbalanced():
    S = BipartitionSequence.from_sets(4, [{1, 2}, {1, 2}])
    ok, worst = is_balanced(S, PAPER_C)
    assert brute_cooccurrence(S, 1, 2) == 2
    assert not ok and worst == (1, 2, 2)


def test_three_splits_of_four():
    for t, u in itertools.combinations(range(1, 5), 2):
        assert brute_cooccurrence(THREE_SPLITS, t, u) == 1
    ok, worst = is_balanced(THREE_SPLITS, PAPER_C)
    assert ok and worst[2] == 1


def test_is_balanced_rejects_mixed_ground_sets():
    with pytest.raises(ValueError, match="inconsistent M"):
        is_balanced([Bipartition(2, {1}), Bipartition(4, {1, 2})], PAPER_C)


def test_bipartition_validation():
    with pytest.raises(ValueError):
        Bipartition(4, {1})
    with pytest.raises(ValueError):
        Bipartition(3, {1})
    assert Bipartition(4, {1, 3}).B == {2, 4}


def test_generate_base_case_without_randomness():
    S = generate_balanced(7, 2, PAPER_C, seed=123)
    assert S.m == 7 and S.verified
    assert all(p.A == {1} for p in S.parts)
    assert S == generate_balanced(7, 2, PAPER_C, seed=999)


def test_generate_randomized_is_verified():
    S = generate_balanced(512, 16, PAPER_C, seed=1, max_retries=10**5)
    assert S.verified and is_balanced(S, PAPER_C)[0]
    # brute-force recount on a few pairs
    co = {(t, u): brute_cooccurrence(S, t, u) for t, u in [(1, 2), (3, 9), (15, 16)]}
    assert all(2 * c * 16 <= 18 * 512 for c in co.values())


def test_zero_balance_on_eight_is_impossible():
    halves = [frozenset(c) for c in itertools.combinations(range(1, 9), 4)]
    # any two half-half bipartitions leave some pair together twice
    for a, b in itertools.product(halves, repeat=2):
        S = BipartitionSequence.from_sets(8, [a, b])
        together = max(brute_cooccurrence(S, t, u) for t, u in itertools.combinations(range(1, 9), 2))
        assert together == 2
    with pytest.raises(BalanceError) as info:
        generate_balanced(2, 8, Fraction(0), seed=5, max_retries=50)
    assert info.value.best is not None and info.value.worst_count == 2


def test_generate_rejects_odd_ground_set():
    with pytest.raises(ValueError):
        generate_balanced(4, 5)


def test_split_mass_count_examples():
    assert split_mass_count(base_case(5), (Fraction(1, 2), Fraction(1, 2)), Fraction(1, 16)) == (5, [1, 2, 3, 4, 5])
    assert split_mass_count(THREE_SPLITS, (1, 0, 0, 0), Fraction(1, 100))[0] == 0
    lam = MassProfile((Fraction(7, 10), Fraction(1, 10), Fraction(1, 10), Fraction(1, 10)))
    assert split_mass_count(THREE_SPLITS, lam, Fraction(3, 80)) == (3, [1, 2, 3])
    with pytest.raises(ValueError, match="length"):
        split_mass_count(THREE_SPLITS, (1, 0), Fraction(1, 10))


def test_simplex_grid_counts():
    grid = simplex_grid(3, 4)
    assert len(grid) == 15
    assert (grid.sum(axis=1) == 4).all()
    assert len({tuple(r) for r in grid.tolist()}) == 15


def test_oracle_base_case_grid():
    assert len(simplex_grid(2, 20)) == 21
    res = biased_lemma_oracle(base_case(6), Fraction(1, 20), Fraction(1, 20))
    assert res.holds and res.lemma_applies
    # lambda_1 in [2/5, 3/5]
    assert res.points == 5


def test_oracle_reports_failures_for_unbalanced_sequence():
    S = BipartitionSequence.from_sets(4, [{1, 2}, {1, 2}])
    res = biased_lemma_oracle(S, Fraction(1, 20), Fraction(1, 20))
    assert not res.lemma_applies
    assert not res.holds
    lam = res.failing_lambda
    assert sum(lam) == 1 and max(lam) <= Fraction(3, 5)
    assert 6 * split_mass_count(S, lam, Fraction(1, 20))[0] < S.m


def test_oracle_vacuous_when_hypothesis_empty():
    res = biased_lemma_oracle(base_case(4), Fraction(1, 8), Fraction(1, 40))
    assert res.holds and res.points == 0


def test_oracle_rejects_bad_step():
    with pytest.raises(ValueError, match="divide"):
        biased_lemma_oracle(base_case(4), Fraction(1, 20), Fraction(3, 40))


def test_oracle_not_asserted_for_other_c():
    S = base_case(6, Fraction(1, 4))
    assert not biased_lemma_oracle(S, Fraction(1, 20), Fraction(1, 20)).lemma_applies


@settings(max_examples=40, deadline=None)
@given(
    M=st.sampled_from([2, 4, 6]),
    m=st.integers(1, 20),
    seed=st.integers(0, 2**32),
    data=st.data(),
)
def test_complementarity_and_determinism(M, m, seed, data):
    a = generate_balanced(m, M, Fraction(1, 2), seed=seed, max_retries=5)
    b = generate_balanced(m, M, Fraction(1, 2), seed=seed, max_retries=5)
    assert a == b
    weights = data.draw(st.lists(st.integers(0, 10), min_size=M, max_size=M).filter(lambda w: sum(w) > 0))
    lam = [Fraction(w, sum(weights)) for w in weights]
    for p in a.parts:
        assert sum(lam[t - 1] for t in p.A) + sum(lam[t - 1] for t in p.B) == 1


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 64), c=st.fractions(min_value=0, max_value=2))
def test_base_case_balanced_for_all_c(m, c):
    assert is_balanced(base_case(m), c)[0]


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 30), zeta=st.fractions(min_value=Fraction(1, 100), max_value=Fraction(1, 8)))
def test_two_element_lemma_every_split_qualifies(m, zeta):
    S = base_case(m)
    step = Fraction(1, 40)
    for x in range(41):
        lam = (x * step, 1 - x * step)
        if max(lam) <= 1 - 8 * zeta:
            assert split_mass_count(S, lam, zeta)[0] == m
