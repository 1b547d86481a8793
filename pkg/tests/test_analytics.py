import json
import math

import numpy as np
import pytest

from triptrie import analytics as an
from triptrie.geo_grid import make_grid
from triptrie.ingest import TripString
from triptrie.synth import random_walk_corpus
from triptrie.trie import build_trie_from_matrix

from conftest import A, B, C


def trie_of(*rows, l=None):
    l = l or max(len(r) for r in rows)
    return build_trie_from_matrix(np.array([list(r) + [-1] * (l - len(r)) for r in rows])).freeze()


def test_branching_three(three):
    assert an.level_branching(three) == [2.0, 1.5]
    assert an.branching_stats(three) == (1.75, 1.75)
    assert an.branching_stats(three, window=1) == (1.75, 2.0)


def test_branching_path():
    t = trie_of((4, 5, 6, 7))
    assert an.level_branching(t) == [1.0] * 4


def test_branching_ignores_ended_trips():
    # "a_" and "bb": the pad child of a does not count, and a is exhausted
    t = trie_of((A,), (B, B))
    assert an.level_branching(t) == [2.0, 1.0]


def test_region_counts():
    assert an.region_cluster_counts(trie_of((A, B))) == {A: 1, B: 1}
    t = trie_of((A, A), (B, A))
    assert an.region_cluster_counts(t) == {A: 3, B: 1}
    assert an.average_clusters_per_region(t) == 2.0
    assert an.region_cluster_counts(t, window=1) == {A: 1, B: 1}


def test_region_counts_empty():
    from triptrie.trie import Trie
    t = Trie(3)
    assert an.region_cluster_counts(t) == {}
    assert an.average_clusters_per_region(t) is None


def test_trips_per_cluster(three):
    assert math.isclose(an.trips_per_cluster(three), 1.2)
    assert an.trips_per_cluster(three, window=1) == 1.5
    assert an.trips_per_cluster(trie_of((1, 2), (1, 2), (1, 2))) == 3.0


def test_stats_report(three):
    text = an.format_stats({"All": an.trie_stats(three)})
    lines = text.splitlines()
    assert lines[1] == "Total number of trips\t3"
    assert lines[2] == "Level-wise Average branching factor\t1.7500"
    assert lines[3].startswith("Level-wise Average branching factor (first 11 levels)")
    assert lines[6] == "Average number of trips per cluster\t1.2000"


def _epoch(*ymdh):
    import datetime as dt
    tz = dt.timezone(dt.timedelta(hours=-7))
    return int(dt.datetime(*ymdh, tzinfo=tz).timestamp())


def test_start_categories():
    tue_9 = _epoch(2008, 6, 10, 9)
    assert an.start_category(tue_9, -7) == {"weekdays", "day_peak"}
    assert an.start_category(_epoch(2008, 6, 10, 16), -7) == {"weekdays", "night_peak"}
    assert an.start_category(_epoch(2008, 6, 10, 12), -7) == {"weekdays"}
    assert an.start_category(_epoch(2008, 6, 8, 1), -7) == {"weekends"}
    # same instant seen from UTC is 16:00
    assert an.start_category(tue_9, 0) == {"weekdays", "night_peak"}
    split = an.split_by_category([TripString((1,), 60, 0, start=tue_9)], -7)
    assert [len(v) for v in split.values()] == [1, 0, 1, 0]


def test_heatmap_three(three):
    g = make_grid((0, 0, 2, 1), 1, 2)
    hm = an.heatmap(three, 1, g)
    assert hm.counts.tolist() == [[2, 1]]
    assert hm.total == 3


def test_heatmap_drops_ended():
    t = trie_of((1,), (1, 2))
    g = make_grid((0, 0, 2, 1), 1, 2)
    assert an.heatmap(t, 2, g).counts.tolist() == [[0, 1]]


def test_heatmap_depth_checked(three):
    g = make_grid((0, 0, 2, 1), 1, 2)
    with pytest.raises(an.AnalyticsError):
        an.heatmap(three, 0, g)
    with pytest.raises(an.AnalyticsError):
        an.heatmap(three, 3, g)


def test_heatmap_rows_south_first(tmp_path):
    t = trie_of((1, 4))
    for origin, first in (("lower", [[1, 0], [0, 0]]), ("upper", [[0, 0], [1, 0]])):
        g = make_grid((0, 0, 2, 2), 2, 2, origin)
        hm = an.heatmap(t, 1, g, t_r=60)
        assert hm.counts.tolist() == first
    side = hm.to_csv(tmp_path / "h.csv")
    assert (tmp_path / "h.csv").read_text() == "0,0\n1,0\n"
    meta = json.loads(side.read_text())
    assert meta["level"] == 1 and meta["bbox"] == [0, 0, 2, 2] and meta["t_r"] == 60


def test_heatmap_conservation():
    mat = random_walk_corpus(800, 15, n_r=10, n_c=10, seed=3)
    t = build_trie_from_matrix(mat).freeze()
    g = make_grid((0, 0, 1, 1), 10, 10)
    for k in range(1, 16):
        assert an.heatmap(t, k, g).total == int((mat[:, k - 1] != -1).sum())


def test_top_k(three):
    assert an.top_k_clusters(three, 1, 1) == [((A,), 2)]
    assert len(an.top_k_clusters(three, 2, 10)) == 3
    t = trie_of((1, 2), (3, 3), (1, 2))
    assert an.top_k_clusters(t, 2, 2) == [((1, 2), 2), ((3, 3), 1)]


def test_top_k_ties_by_first_trip():
    t = trie_of((5, 1), (2, 1), (5, 1), (2, 2))
    assert an.top_k_clusters(t, 1, 2) == [((5,), 2), ((2,), 2)]


def test_first_occurrence():
    assert an.first_occurrence_depth(trie_of((A, B))) == {A: 1, B: 2}
    t = trie_of((1, 2, 3, 9), (4, 4, 4, 4, 4, 4, 9))
    occ = an.first_occurrence_depth(t)
    assert occ[9] == 4 and occ[1] == 1 and 5 not in occ


def test_occurrence_grid():
    t = trie_of((1, 4))
    g = make_grid((0, 0, 2, 2), 2, 2)
    assert an.occurrence_grid(t, g).tolist() == [[1, 0], [0, 2]]


def test_subtree(three):
    assert an.subtree_distribution(three, A, 2) == [(A, 1), (B, 1)]
    assert an.subtree_distribution(three, A, 1) == [(A, 2)]
    with pytest.raises(an.NotFoundError):
        an.subtree_distribution(three, C, 2)


def test_subtree_top_k_and_ended():
    t = trie_of((1, 2), (1, 2), (1, 3), (1,))
    assert an.subtree_distribution(t, 1, 2, top_k=1) == [(2, 2)]
    assert sum(c for _, c in an.subtree_distribution(t, 1, 2)) == 3


def test_route_diversity():
    t = trie_of((A, B), (A, B), (A, C, B))
    assert an.route_diversity(t, A, B) == 2
    assert an.route_diversity(t, B, A) == 0
    assert an.route_diversity(trie_of((A, A)), A, A) == 1
    assert an.route_diversity_table(t) == {(A, B): 2}


def test_outlier_involvement_ratio():
    # z=7 is in two trip types, z=8 in one
    t = trie_of((7, 1), (7, 8), (2, 2))
    rows = {r.region: r for r in an.outlier_report(t)}
    assert rows[7].involvement == 2 * rows[8].involvement
    assert 0 not in rows and -1 not in rows


def test_outlier_order():
    t = trie_of((1, 2, 3), (1, 2, 4), (1, 5, 5))
    rows = an.outlier_report(t)
    # single-path regions first, later first appearance ranks higher
    assert [r.region for r in rows][:3] == [3, 4, 5]
    assert rows[-1].region == 1


def test_permutation_invariance():
    mat = random_walk_corpus(400, 10, n_r=8, n_c=8, seed=11)
    perm = np.random.default_rng(0).permutation(400)
    t1 = build_trie_from_matrix(mat).freeze()
    t2 = build_trie_from_matrix(mat[perm]).freeze()
    g = make_grid((0, 0, 1, 1), 8, 8)
    assert an.trie_stats(t1) == an.trie_stats(t2)
    assert an.first_occurrence_depth(t1) == an.first_occurrence_depth(t2)
    assert np.array_equal(an.heatmap(t1, 5, g).counts, an.heatmap(t2, 5, g).counts)
    assert an.outlier_report(t1) == an.outlier_report(t2)
    assert an.route_diversity_table(t1) == an.route_diversity_table(t2)
    z = int(mat[0, 0])
    assert an.subtree_distribution(t1, z, 4) == an.subtree_distribution(t2, z, 4)
