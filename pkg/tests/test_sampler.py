from fractions import Fraction

import numpy as np
import pytest

from regforge.graph import LevelWeightedGraph
from regforge.sampler import claim_threshold, deviation_audit, sample_graph
from regforge.tower import ConstructionParams, build_instance, build_tower


def small_graph(counts, s=3, delta=Fraction(1, 3)):
    counts = np.array(counts)
    return LevelWeightedGraph(len(counts), s, delta, counts)


def test_zero_weight_never_sampled_full_weight_always():
    G = small_graph([[3, 0, 3], [0, 3, 3], [3, 3, 3]])
    for seed in range(200):
        adj = sample_graph(G, seed).adjacency
        assert not adj[0, 1]
        assert adj[0, 2] and adj[1, 2]
        assert not adj.diagonal().any()


def test_weight_delta_inclusion_frequency():
    G = small_graph([[0, 1], [1, 0]])
    hits = sum(bool(sample_graph(G, seed).adjacency[0, 1]) for seed in range(10_000))
    assert abs(hits / 10_000 - 1 / 3) <= 0.02


def test_sampling_deterministic_and_seed_sensitive(graph160):
    a = sample_graph(graph160, 5)
    assert a == sample_graph(graph160, 5)
    others = [sample_graph(graph160, seed) for seed in range(10)]
    assert len({o.adjacency.tobytes() for o in others}) == 10


def test_empty_graph_audit_is_zero():
    G = small_graph(np.zeros((50, 50), dtype=int))
    rep = deviation_audit(G, sample_graph(G, 0), Fraction(1, 2), 20, seed=1, set_size=10)
    assert rep.max_deviation == 0 and rep.passed


def test_threshold_too_large():
    G = small_graph(np.zeros((100, 100), dtype=int))
    assert claim_threshold(100, Fraction(1, 100)) > 100
    with pytest.raises(ValueError, match="n too small"):
        deviation_audit(G, sample_graph(G, 0), Fraction(1, 100), 10, seed=0)


def test_audit_deterministic(graph160):
    Gp = sample_graph(graph160, 1)
    a = deviation_audit(graph160, Gp, Fraction(1, 5), 30, seed=9, set_size=40)
    b = deviation_audit(graph160, Gp, Fraction(1, 5), 30, seed=9, set_size=40)
    assert a.max_deviation == b.max_deviation and a.worst_trial == b.worst_trial


def test_concentration_with_explicit_set_size():
    # claim threshold exceeds n here, so sets of n/2 vertices stand in for it
    T = build_tower(ConstructionParams.custom(Fraction(1, 3), 3, 2000, seed=3))
    G = build_instance(T)
    for seed in range(3):
        rep = deviation_audit(G, sample_graph(G, seed), Fraction(1, 10), 20, seed, set_size=1000)
        assert rep.passed
        assert rep.max_deviation < Fraction(1, 50)
