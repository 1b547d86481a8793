"""Property tests over random small corpora."""
import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from triptrie import analytics as an
from triptrie.geo_grid import coord_to_symbol, make_grid, symbol_to_cell
from triptrie.metrics import levenshtein, shared_prefix_len, weighted_hamming
from triptrie.oracle import partitions_equal_up_to_relabeling, verify_equivalence
from triptrie.trie import Partition, Trie, build_trie_from_matrix


@st.composite
def corpora(draw, max_n=25, max_l=6, alphabet=4):
    l = draw(st.integers(1, max_l))
    n = draw(st.integers(1, max_n))
    rows = []
    for _ in range(n):
        length = draw(st.integers(1, l))
        body = draw(st.lists(st.integers(1, alphabet), min_size=length, max_size=length))
        rows.append(body + [-1] * (l - length))
    return np.array(rows, dtype=np.int64)


strings = st.lists(st.integers(-1, 3), min_size=0, max_size=8)


@given(corpora())
def test_trie_matches_oracle(mat):
    assert verify_equivalence(build_trie_from_matrix(mat), mat).ok


@given(corpora())
def test_refinement_chain(mat):
    t = build_trie_from_matrix(mat)
    for i in range(t.l + 1):
        assert t.level_partition(i).refines(t.level_partition(i + 1))


@given(corpora())
def test_prefix_faithful(mat):
    t = build_trie_from_matrix(mat)
    anc = t.ancestors()
    n = mat.shape[0]
    for i in range(n):
        for j in range(n):
            p = shared_prefix_len(mat[i].tolist(), mat[j].tolist())
            for k in range(t.l + 1):
                assert (anc[k, i] == anc[k, j]) == (p >= k)


@given(corpora(), st.data())
def test_insert_rebuild(mat, data):
    cut = data.draw(st.integers(0, mat.shape[0]))
    t = build_trie_from_matrix(mat[:cut]) if cut else Trie(mat.shape[1])
    for i in range(cut, mat.shape[0]):
        t.insert(mat[i].tolist(), trip_id=i)
    full = build_trie_from_matrix(mat)
    assert t.prefix_counts() == full.prefix_counts()
    for i in range(t.l + 2):
        assert t.level_partition(i) == full.level_partition(i)


@given(corpora())
def test_serialize_roundtrip(mat):
    t = build_trie_from_matrix(mat)
    assert Trie.deserialize(t.serialize()) == t


@given(corpora(max_l=5))
def test_analytics_invariants(mat):
    t = build_trie_from_matrix(mat).freeze()
    g = make_grid((0, 0, 2, 2), 2, 2)
    first = an.first_occurrence_depth(t)
    for node in range(1, t.counts.size):
        if t.counts[node] > 0 and t.symbols[node] > 0:
            assert first[int(t.symbols[node])] <= t.depths[node]
    for k in range(1, t.l + 1):
        assert an.heatmap(t, k, g).total == int((mat[:, k - 1] != -1).sum())
        counts = [c for _, c in an.top_k_clusters(t, k, 100)]
        assert counts == sorted(counts, reverse=True)
    for z in set(mat[:, 0].tolist()):
        start = int((mat[:, 0] == z).sum())
        for k in range(1, t.l + 1):
            total = sum(c for _, c in an.subtree_distribution(t, z, k, None))
            assert total == int(((mat[:, 0] == z) & (mat[:, k - 1] != -1)).sum()) <= start
    for f in an.level_branching(t):
        assert f is None or f >= 1


@given(st.lists(st.integers(1, 4), min_size=1, max_size=30), st.data())
def test_relabeling_symmetric(keys, data):
    a = Partition.from_keys(keys)
    perm = data.draw(st.permutations(range(1, a.k + 1)))
    relabeled = np.array(perm)[a.labels - 1]
    assert partitions_equal_up_to_relabeling(a, relabeled)
    other = Partition.from_keys(data.draw(st.lists(st.integers(1, 4), min_size=len(keys), max_size=len(keys))))
    assert partitions_equal_up_to_relabeling(a, other) == partitions_equal_up_to_relabeling(other, a) == (a == other)


@given(strings, strings)
def test_levenshtein_bounds(a, b):
    d = levenshtein(a, b)
    a_, b_ = [x for x in a], [x for x in b]
    assert d == levenshtein(b, a)
    assert d <= max(len(a_), len(b_))


@settings(max_examples=200)
@given(st.floats(0, 6), st.floats(0, 4), st.sampled_from(["lower", "upper"]))
def test_grid_cell_contains_point(x, y, origin):
    g = make_grid((0, 0, 6, 4), 4, 6, origin)
    z = coord_to_symbol(g, x, y)
    _, _, (x0, y0, x1, y1) = symbol_to_cell(g, z)
    assert x0 <= x <= x1 and y0 <= y <= y1


@given(st.integers(1, 8), st.data())
def test_weighted_hamming_prefix_dominance(l, data):
    s = data.draw(st.lists(st.integers(1, 3), min_size=l, max_size=l))
    t = data.draw(st.lists(st.integers(1, 3), min_size=l, max_size=l))
    p = shared_prefix_len(s, t)
    d = weighted_hamming(s, t)
    if p < l:
        assert 2 ** (l - p - 1) <= d < 2 ** (l - p)
    else:
        assert d == 0
