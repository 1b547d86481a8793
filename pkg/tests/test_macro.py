import numpy as np
import pytest

from triptrie.macro import MacroError, MicroCluster, check_diameters, macro_cluster, micro_clusters
from triptrie.synth import random_walk_corpus
from triptrie.trie import build_trie_from_matrix

from conftest import A, B


def micros(*reps):
    return [MicroCluster(i, tuple(r), 1) for i, r in enumerate(reps)]


def test_micro_three(three):
    ms = micro_clusters(three, 1)
    assert [(m.representative, m.weight) for m in ms] == [((A,), 2), ((B,), 1)]
    assert len(micro_clusters(three, 2)) == 3


def test_micro_trims_padding():
    t = build_trie_from_matrix(np.array([[1, -1, -1], [1, 2, 3]]))
    reps = sorted(m.representative for m in micro_clusters(t, 3))
    assert reps == [(1,), (1, 2, 3)]


def test_micro_level_checked(three):
    with pytest.raises(MacroError):
        micro_clusters(three, 0)
    with pytest.raises(MacroError):
        micro_clusters(three, 3)


@pytest.mark.parametrize("method", ["complete", "greedy"])
def test_distance_one_pair_joins(method):
    r = macro_cluster(micros((1, 2, 3, 4), (2, 2, 3, 4)), 1, method)
    assert r.k == 1 and r.diameters == {1: 1}


@pytest.mark.parametrize("method", ["complete", "greedy"])
def test_q_zero_singletons(method):
    r = macro_cluster(micros((1,), (2,), (3, 4)), 0, method)
    assert r.k == 3


@pytest.mark.parametrize("method", ["complete", "greedy"])
def test_far_pair_split(method):
    # d(x,y)=1, d(y,z)=1, d(x,z)=2
    r = macro_cluster(micros((1,), (2,), (2, 3)), 1, method)
    lab = r.labels.tolist()
    assert lab[0] != lab[2]
    assert check_diameters(r)


def test_edge_cases():
    assert macro_cluster([], 2).k == 0
    assert macro_cluster(micros((1, 2)), 0).k == 1
    with pytest.raises(MacroError):
        macro_cluster(micros((1,)), -1)
    with pytest.raises(MacroError):
        macro_cluster(micros((1,)), 1, method="kmeans")


@pytest.mark.parametrize("method", ["complete", "greedy"])
def test_monotone_and_sound(method):
    t = build_trie_from_matrix(random_walk_corpus(400, 10, n_r=6, n_c=6, seed=2))
    ms = micro_clusters(t, 6)
    ks = []
    for q in range(7):
        r = macro_cluster(ms, q, method)
        assert check_diameters(r)
        assert all(d <= q for d in r.diameters.values())
        ks.append(r.k)
    if method == "complete":
        assert ks == sorted(ks, reverse=True)
    assert macro_cluster(ms, 6, method).k == 1


def test_assignment_keys(three):
    r = macro_cluster(micro_clusters(three, 2), 1)
    assert sorted(r.assignment) == sorted(m.node_id for m in r.micros)
    assert sum(len(r.members(c)) for c in r.diameters) == 3
