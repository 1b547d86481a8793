"""Brute-force single-linkage clustering used to check the trie.

Nothing here touches the trie's construction path: distances come from the
position-weighted Hamming metric and clusters from connected components of
the ``d <= t`` graph, so agreement with the trie's level partitions is an
independent confirmation that the trie is the single-linkage dendrogram.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from triptrie import kernels
from triptrie.ingest import as_matrix
from triptrie.metrics import weighted_hamming
from triptrie.trie import Partition, Trie, build_trie_from_matrix

DEFAULT_MAX_N = 20000


class CapacityError(MemoryError):
    pass


class InvalidPartitionError(ValueError):
    pass


@dataclass
class ThresholdDendrogram:
    """Ascending ``(threshold, partition)`` steps; step 0 is all singletons at -1."""

    steps: list

    def partition_at(self, t) -> Partition:
        """Partition after every merge at distance <= ``t``."""
        best = self.steps[0][1]
        for threshold, part in self.steps:
            if threshold <= t:
                best = part
            else:
                break
        return best

    @property
    def thresholds(self) -> list:
        return [t for t, _ in self.steps]


def _matrix(strings) -> np.ndarray:
    if isinstance(strings, np.ndarray):
        return np.ascontiguousarray(strings, dtype=np.int64)
    lengths = {len(s.symbols if hasattr(s, "symbols") else s) for s in strings}
    if len(lengths) > 1:
        raise ValueError(f"strings must share one length, got {sorted(lengths)}")
    return as_matrix(strings)


def pairwise_distances(strings, max_n: int = DEFAULT_MAX_N) -> np.ndarray:
    """Symmetric ``n x n`` weighted-Hamming matrix (object dtype beyond 62 symbols)."""
    mat = _matrix(strings)
    n, l = mat.shape
    if n > max_n:
        raise CapacityError(f"{n} strings exceed the oracle cap of {max_n}")
    if l <= kernels.MAX_INT64_LENGTH:
        return kernels.pairwise_weighted_hamming(mat)
    rows = mat.tolist()
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = weighted_hamming(rows[i], rows[j])
    return out


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, u):
        parent = self.parent
        root = u
        while parent[root] != root:
            root = parent[root]
        while parent[u] != root:
            parent[u], u = root, parent[u]
        return root

    def union(self, u, v) -> bool:
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return False
        if ru < rv:
            self.parent[rv] = ru
        else:
            self.parent[ru] = rv
        return True

    def labels(self):
        return [self.find(i) for i in range(len(self.parent))]


def single_linkage_multi_merge(strings=None, distances=None, max_n: int = DEFAULT_MAX_N) -> ThresholdDendrogram:
    """Single linkage where every merge available at a distance happens at once.

    Processes pairs in ascending distance; after all pairs at one distance are
    joined, the components form that threshold's partition. A threshold is
    recorded only when the partition changes.
    """
    if distances is None:
        distances = pairwise_distances(strings, max_n=max_n)
    n = distances.shape[0]
    steps = [(-1, Partition(np.arange(1, n + 1)))]
    if n <= 1:
        return ThresholdDendrogram(steps)
    iu, ju = np.triu_indices(n, k=1)
    flat = distances[iu, ju]
    order = np.argsort(flat, kind="stable")
    uf = _UnionFind(n)
    components = n
    pending = False
    prev = None
    for idx in order.tolist():
        d = flat[idx]
        if prev is not None and d != prev and pending:
            steps.append((int(prev), Partition.from_keys(uf.labels())))
            pending = False
            if components == 1:
                break
        prev = d
        if uf.union(int(iu[idx]), int(ju[idx])):
            components -= 1
            pending = True
    if pending:
        steps.append((int(prev), Partition.from_keys(uf.labels())))
    return ThresholdDendrogram(steps)


def naive_single_linkage(strings) -> ThresholdDendrogram:
    """Textbook agglomeration: repeatedly merge all clusters at the minimum linkage.

    Cubic or worse; for cross-checking on tiny corpora only.
    """
    mat = _matrix(strings)
    n = mat.shape[0]
    rows = mat.tolist()
    d = [[weighted_hamming(rows[i], rows[j]) for j in range(n)] for i in range(n)]
    clusters = [[i] for i in range(n)]
    steps = [(-1, Partition(np.arange(1, n + 1)))]
    while len(clusters) > 1:
        link = {}
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                link[a, b] = min(d[i][j] for i in clusters[a] for j in clusters[b])
        best = min(link.values())
        # clusters tied at the minimum merge together, transitively
        uf = _UnionFind(len(clusters))
        for (a, b), v in link.items():
            if v == best:
                uf.union(a, b)
        groups: dict = {}
        for a, cl in enumerate(clusters):
            groups.setdefault(uf.find(a), []).extend(cl)
        clusters = list(groups.values())
        keys = np.empty(n, dtype=np.int64)
        for c, members in enumerate(clusters):
            keys[members] = c
        steps.append((best, Partition.from_keys(keys)))
    return ThresholdDendrogram(steps)


def _labels(c) -> np.ndarray:
    labels = c.labels if isinstance(c, Partition) else np.asarray(c, dtype=np.int64)
    if labels.size:
        k = int(labels.max())
        if labels.min() < 1 or np.unique(labels).size != k:
            raise InvalidPartitionError("labels must be surjective onto 1..k")
    return labels


def partitions_equal_up_to_relabeling(c1, c2) -> bool:
    """Equal block counts and every block of ``c1`` carries a single ``c2`` label.

    The one-way check suffices: block -> label is then a function from k
    blocks onto k labels (onto because every ``c2`` label is used by some
    instance), hence a bijection, so the two partitions coincide.
    """
    a, b = _labels(c1), _labels(c2)
    if a.size != b.size:
        raise InvalidPartitionError("partitions cover different instance counts")
    k1 = int(a.max()) if a.size else 0
    k2 = int(b.max()) if b.size else 0
    if k1 != k2:
        return False
    if not a.size:
        return True
    pairs = np.unique(np.stack([a, b]), axis=1)
    return pairs.shape[1] == k1


@dataclass
class LevelCheck:
    level: int
    depth: int
    threshold: int
    blocks: int
    equal: bool


@dataclass
class VerificationReport:
    n: int
    l: int
    levels: list = field(default_factory=list)
    singletons_equal: bool = True
    # oracle partitions that match no trie level; informational only, since
    # single linkage also merges at distances strictly between 2**i - 1 steps
    extra_partitions: int | None = None

    @property
    def ok(self) -> bool:
        return self.singletons_equal and all(c.equal for c in self.levels)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "l": self.l,
            "ok": self.ok,
            "singletons_equal": self.singletons_equal,
            "extra_partitions": self.extra_partitions,
            "levels": [vars(c) for c in self.levels],
        }


def verify_equivalence(trie: Trie, strings, full_sweep: bool = False, max_n: int = DEFAULT_MAX_N) -> VerificationReport:
    """Compare every trie level with the single-linkage partition at ``2**i - 1``.

    Level ``i`` (trie depth ``l - i``) groups strings sharing ``l - i`` leading
    symbols, which is exactly ``d <= 2**i - 1``. The bottom level of all
    singletons is checked against the oracle's pre-merge step separately, so
    duplicate strings are handled. ``full_sweep`` also counts oracle partitions
    that appear at no trie level (for example {aa, ba, cc} merges aa and ba at
    distance 2, between the level thresholds 1 and 3); it does not affect ``ok``.
    """
    mat = _matrix(strings)
    if mat.shape[0] != trie.n:
        raise ValueError(f"trie holds {trie.n} trips but {mat.shape[0]} strings were given")
    if trie.n and mat.shape[1] != trie.l:
        raise ValueError(f"trie length {trie.l} != string length {mat.shape[1]}")
    l = trie.l
    dendro = single_linkage_multi_merge(mat, max_n=max_n)
    report = VerificationReport(n=trie.n, l=l)
    for i in range(l + 1):
        t = (1 << i) - 1
        mine = trie.depth_partition(l - i)
        equal = partitions_equal_up_to_relabeling(mine, dendro.partition_at(t))
        report.levels.append(LevelCheck(i, l - i, t, mine.k, equal))
    report.singletons_equal = partitions_equal_up_to_relabeling(trie.level_partition(0), dendro.steps[0][1])
    if full_sweep:
        seen = {trie.depth_partition(k) for k in range(l + 1)} | {trie.level_partition(0)}
        report.extra_partitions = sum(p not in seen for _, p in dendro.steps)
    return report


def verify_samples(strings, size: int, samples: int, seed: int, full_sweep: bool = False) -> list[VerificationReport]:
    """Draw ``samples`` random subsets of ``size`` strings; build and verify each."""
    mat = _matrix(strings)
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(samples):
        idx = np.sort(rng.choice(mat.shape[0], size=min(size, mat.shape[0]), replace=False))
        sub = mat[idx]
        trie = build_trie_from_matrix(sub, idx.tolist()).freeze()
        reports.append(verify_equivalence(trie, sub, full_sweep=full_sweep))
    return reports
