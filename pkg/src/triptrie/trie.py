"""The trip trie: a level-indexed prefix tree over equal-length trip strings.

Depth ``k`` holds one node per distinct length-``k`` prefix; the root (depth
0) is the artificial common start shared by every trip. Read as a dendrogram,
dendrogram level ``i`` is trie depth ``l - i``.

Lifecycle: build/insert/delete while mutable, then :meth:`Trie.freeze`; a
frozen trie rejects mutation and is safe to query from many threads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from triptrie import kernels
from triptrie.geo_grid import ROOT
from triptrie.ingest import as_matrix

TRIE_FORMAT = "triptrie-trie"
TRIE_VERSION = 1

_PARENT, _SYMBOL, _DEPTH, _COUNT = range(4)


class TrieError(ValueError):
    pass


class TrieFormatError(TrieError):
    pass


class FrozenTrieError(TrieError):
    pass


class UnknownNodeError(KeyError):
    pass


class Partition:
    """Labels ``1..k`` over ``n`` instances, canonically numbered by first occurrence."""

    __slots__ = ("labels", "k")

    def __init__(self, labels):
        labels = np.asarray(labels, dtype=np.int64)
        if labels.size:
            k = int(labels.max())
            if labels.min() < 1 or np.unique(labels).size != k:
                raise ValueError("partition labels must be surjective onto 1..k")
        else:
            k = 0
        self.labels = labels
        self.k = k

    @classmethod
    def from_keys(cls, keys) -> "Partition":
        keys = np.asarray(keys)
        if keys.size == 0:
            return cls(np.zeros(0, dtype=np.int64))
        _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(1, first.size + 1)
        return cls(rank[inverse.reshape(-1)])

    @property
    def n(self) -> int:
        return int(self.labels.size)

    def canonical(self) -> "Partition":
        return Partition.from_keys(self.labels)

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for i, lab in enumerate(self.labels.tolist()):
            out[lab - 1].append(i)
        return out

    def refines(self, other: "Partition") -> bool:
        """True if every block of ``self`` lies inside one block of ``other``."""
        if self.n != other.n:
            return False
        pairs = np.unique(np.stack([self.labels, other.labels]), axis=1)
        return pairs.shape[1] == self.k

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.canonical().labels, other.canonical().labels)

    def __hash__(self):
        return hash(self.canonical().labels.tobytes())

    def __repr__(self):
        return f"Partition(k={self.k}, labels={self.labels.tolist()})"


@dataclass(frozen=True)
class TrieNode:
    node_id: int
    level: int
    symbol: int
    parent: Optional[int]
    children: dict
    trip_count: int
    member_trips: list


class Trie:
    def __init__(self, l: int):
        if l < 0:
            raise TrieError("string length must be non-negative")
        self.l = int(l)
        # int32 until a symbol or node id needs more; see _widen
        self._nodes = np.zeros((4, 16), dtype=np.int32)
        self._nodes[:, 0] = (-1, ROOT, 0, 0)
        self._m = 1
        self._leaves = np.zeros(16, dtype=np.int64)
        self._trip_ids: list = []
        self._slot_of: Optional[dict] = {}
        self._live = 0
        self._kids: Optional[dict] = None
        self._frozen = False
        self._cache: dict = {}

    # --- construction ------------------------------------------------------

    @classmethod
    def _from_arrays(cls, l, nodes, leaves, trip_ids):
        trie = cls(l)
        trie._nodes = nodes
        trie._m = nodes.shape[1]
        trie._leaves = np.asarray(leaves, dtype=np.int64)
        # the default ids stay a range until an insert needs to append
        trie._trip_ids = trip_ids if isinstance(trip_ids, range) else list(trip_ids)
        trie._slot_of = None
        trie._live = int((trie._leaves >= 0).sum())
        if trie._live != len(trie._trip_ids):
            raise TrieError("leaf and trip id counts differ")
        return trie

    def _ensure_capacity(self, nodes: int = 0, slots: int = 0):
        need = self._m + nodes
        if need > self._nodes.shape[1]:
            grown = np.zeros((4, max(need, 2 * self._nodes.shape[1])), dtype=self._nodes.dtype)
            grown[:, : self._m] = self._nodes[:, : self._m]
            self._nodes = grown
        need = len(self._trip_ids) + slots
        if need > self._leaves.size:
            grown = np.zeros(max(need, 2 * self._leaves.size), dtype=np.int64)
            grown[: len(self._trip_ids)] = self._leaves[: len(self._trip_ids)]
            self._leaves = grown

    def _widen(self, symbols) -> None:
        if self._nodes.dtype == np.int64:
            return
        info = np.iinfo(np.int32)
        if self._m + len(symbols) > info.max or any(not info.min <= int(v) <= info.max for v in symbols):
            self._nodes = self._nodes.astype(np.int64)

    def _slots(self) -> dict:
        if self._slot_of is None:
            slots = {t: i for i, t in enumerate(self._trip_ids) if self._leaves[i] >= 0}
            if len(slots) != self._live:
                raise TrieError("duplicate trip ids")
            self._slot_of = slots
        return self._slot_of

    def _mutating(self):
        if self._frozen:
            raise FrozenTrieError("trie is frozen")
        self._cache.clear()

    def _children_index(self) -> dict:
        if self._kids is None:
            kids: dict = {}
            p, s, _, c = self._nodes[:, : self._m]
            for node, (par, sym, cnt) in enumerate(zip(p.tolist(), s.tolist(), c.tolist())):
                if par >= 0 and cnt > 0:
                    kids.setdefault(par, {})[sym] = node
            self._kids = kids
        return self._kids

    def insert(self, s, trip_id=None) -> int:
        """Insert one padded string in O(l); return its leaf node id."""
        self._mutating()
        symbols = s.symbols if hasattr(s, "symbols") else tuple(s)
        if len(symbols) != self.l:
            raise TrieError(f"string length {len(symbols)} != trie length {self.l}")
        if trip_id is None:
            trip_id = s.trip_id if hasattr(s, "trip_id") else len(self._trip_ids)
        slots = self._slots()
        if trip_id in slots:
            raise TrieError(f"trip id {trip_id!r} already present")
        kids = self._children_index()
        self._widen(symbols)
        self._ensure_capacity(nodes=self.l, slots=1)
        nodes = self._nodes
        node = 0
        nodes[_COUNT, 0] += 1
        for k, sym in enumerate(symbols, 1):
            sym = int(sym)
            row = kids.get(node)
            child = row.get(sym) if row is not None else None
            if child is None:
                child = self._m
                self._m += 1
                nodes[:, child] = (node, sym, k, 0)
                kids.setdefault(node, {})[sym] = child
            nodes[_COUNT, child] += 1
            node = child
        slot = len(self._trip_ids)
        if isinstance(self._trip_ids, range):
            self._trip_ids = list(self._trip_ids)
        self._trip_ids.append(trip_id)
        slots[trip_id] = slot
        self._leaves[slot] = node
        self._live += 1
        return node

    def delete(self, trip_id) -> None:
        """Remove one trip; nodes whose count drops to zero are pruned."""
        self._mutating()
        try:
            slot = self._slots().pop(trip_id)
        except KeyError:
            raise TrieError(f"unknown trip id {trip_id!r}") from None
        kids = self._children_index()
        nodes = self._nodes
        node = int(self._leaves[slot])
        while node > 0:
            nodes[_COUNT, node] -= 1
            par = int(nodes[_PARENT, node])
            if nodes[_COUNT, node] == 0:
                del kids[par][int(nodes[_SYMBOL, node])]
            node = par
        nodes[_COUNT, 0] -= 1
        self._leaves[slot] = -1
        self._live -= 1

    def freeze(self) -> "Trie":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    # --- basic accessors ---------------------------------------------------

    @property
    def n(self) -> int:
        return self._live

    def __len__(self):
        return self._live

    @property
    def n_nodes(self) -> int:
        return int((self.counts > 0).sum()) if self._live else 1

    @property
    def parents(self) -> np.ndarray:
        return self._nodes[_PARENT, : self._m]

    @property
    def symbols(self) -> np.ndarray:
        return self._nodes[_SYMBOL, : self._m]

    @property
    def depths(self) -> np.ndarray:
        return self._nodes[_DEPTH, : self._m]

    @property
    def counts(self) -> np.ndarray:
        return self._nodes[_COUNT, : self._m]

    def _check_node(self, node) -> int:
        node = int(node)
        if not (0 <= node < self._m) or (node > 0 and self._nodes[_COUNT, node] <= 0):
            raise UnknownNodeError(node)
        return node

    def _live_slots(self) -> np.ndarray:
        key = "slots"
        if key not in self._cache:
            self._cache[key] = np.flatnonzero(self._leaves[: len(self._trip_ids)] >= 0)
        return self._cache[key]

    @property
    def trip_ids(self) -> list:
        """Live trip ids in insertion order; position ``j`` is partition instance ``j``."""
        return [self._trip_ids[i] for i in self._live_slots().tolist()]

    def leaves(self) -> np.ndarray:
        return self._leaves[self._live_slots()]

    def ancestors(self) -> np.ndarray:
        """``(l + 1, n)`` table; row ``k`` is each live trip's node at depth ``k``."""
        if "anc" not in self._cache:
            table = np.empty((self.l + 1, self._live), dtype=np.int64)
            if self._live:
                row = self.leaves()
                parents = self.parents
                for k in range(self.l, -1, -1):
                    table[k] = row
                    row = parents[row]
            self._cache["anc"] = table
        return self._cache["anc"]

    def nodes_at(self, depth: int) -> np.ndarray:
        """Live node ids at a trie depth, in id order."""
        if not 0 <= depth <= self.l:
            return np.zeros(0, dtype=np.int64)
        if depth == 0:
            return np.zeros(1, dtype=np.int64)
        key = ("level", depth)
        if key not in self._cache:
            mask = (self.depths == depth) & (self.counts > 0)
            self._cache[key] = np.flatnonzero(mask)
        return self._cache[key]

    @property
    def level_index(self) -> list[np.ndarray]:
        return [self.nodes_at(k) for k in range(self.l + 1)]

    def path(self, node) -> tuple:
        """Symbols on the root-to-``node`` path (root excluded)."""
        node = self._check_node(node)
        out = []
        while node > 0:
            out.append(int(self._nodes[_SYMBOL, node]))
            node = int(self._nodes[_PARENT, node])
        return tuple(reversed(out))

    def children(self, node) -> dict:
        node = self._check_node(node)
        return dict(sorted(self._children_index().get(node, {}).items()))

    def member_trips(self, node) -> list:
        node = self._check_node(node)
        depth = int(self._nodes[_DEPTH, node])
        slots = self._live_slots()[self.ancestors()[depth] == node]
        return sorted(self._trip_ids[i] for i in slots.tolist())

    def node(self, node_id) -> TrieNode:
        node_id = self._check_node(node_id)
        par = int(self._nodes[_PARENT, node_id])
        return TrieNode(
            node_id=node_id,
            level=int(self._nodes[_DEPTH, node_id]),
            symbol=int(self._nodes[_SYMBOL, node_id]),
            parent=None if par < 0 else par,
            children=self.children(node_id),
            trip_count=int(self._nodes[_COUNT, node_id]),
            member_trips=self.member_trips(node_id),
        )

    def strings(self) -> np.ndarray:
        """Reconstruct the ``(n, l)`` padded string matrix in trip order."""
        anc = self.ancestors()
        return self.symbols[anc[1:]].T.copy()

    def prefix_counts(self) -> dict:
        """``{prefix tuple: trip count}`` for every live node, root as ``()``."""
        out = {(): self._live}
        for node in np.flatnonzero(self.counts > 0).tolist():
            if node:
                out[self.path(node)] = int(self._nodes[_COUNT, node])
        return out

    def __eq__(self, other):
        if not isinstance(other, Trie):
            return NotImplemented
        return (
            self.l == other.l
            and self.trip_ids == other.trip_ids
            and np.array_equal(self.strings(), other.strings())
        )

    __hash__ = None

    def __repr__(self):
        return f"Trie(n={self._live}, l={self.l}, nodes={self.n_nodes})"

    # --- queries -----------------------------------------------------------

    def depth_partition(self, depth: int) -> Partition:
        """Trips grouped by their node at ``depth`` (shared prefix of that length)."""
        if not 0 <= depth <= self.l:
            raise TrieError(f"depth {depth} outside 0..{self.l}")
        return Partition.from_keys(self.ancestors()[depth])

    def level_partition(self, i: int) -> Partition:
        """Dendrogram level ``i``: singletons at 0, depth ``l - i`` for ``1..l``, one block above."""
        if i < 0:
            raise TrieError("dendrogram level must be >= 0")
        if i == 0:
            return Partition(np.arange(1, self._live + 1))
        if i > self.l:
            return Partition(np.ones(self._live, dtype=np.int64))
        return self.depth_partition(self.l - i)

    def locate(self, prefix) -> Optional[int]:
        prefix = tuple(prefix)
        if len(prefix) > self.l:
            return None
        kids = self._children_index()
        node = 0
        for sym in prefix:
            node = kids.get(node, {}).get(int(sym))
            if node is None:
                return None
        return node

    def children_distribution(self, node) -> dict:
        """``{symbol: (count, probability)}`` over the node's children."""
        node = self._check_node(node)
        total = int(self._nodes[_COUNT, node])
        out = {}
        for sym, child in self.children(node).items():
            c = int(self._nodes[_COUNT, child])
            out[sym] = (c, c / total)
        return out

    def lca(self, a, b) -> int:
        a, b = self._check_node(a), self._check_node(b)
        depth, parent = self._nodes[_DEPTH], self._nodes[_PARENT]
        while depth[a] > depth[b]:
            a = int(parent[a])
        while depth[b] > depth[a]:
            b = int(parent[b])
        while a != b:
            a, b = int(parent[a]), int(parent[b])
        return a

    # --- serialization -----------------------------------------------------

    def serialize(self) -> bytes:
        """Level-indexed prefix table as JSON; live nodes renumbered breadth-first."""
        live = np.flatnonzero(self.counts > 0)
        live = live[live > 0]
        order = live[np.lexsort((live, self.depths[live]))]
        remap = np.full(self._m, -1, dtype=np.int64)
        remap[0] = 0
        remap[order] = np.arange(1, order.size + 1)
        levels: list[list] = [[[0, -1, ROOT, self._live]]] + [[] for _ in range(self.l)]
        p, s, d, c = self._nodes[:, : self._m]
        for node in order.tolist():
            levels[int(d[node])].append([int(remap[node]), int(remap[p[node]]), int(s[node]), int(c[node])])
        doc = {
            "format": TRIE_FORMAT,
            "version": TRIE_VERSION,
            "l": self.l,
            "n": self._live,
            "trip_ids": self.trip_ids,
            "leaves": remap[self.leaves()].tolist(),
            "levels": levels,
        }
        return json.dumps(doc, separators=(",", ":")).encode("utf-8")

    @classmethod
    def deserialize(cls, data: bytes) -> "Trie":
        try:
            doc = json.loads(data)
        except (ValueError, UnicodeDecodeError) as exc:
            raise TrieFormatError(f"corrupt trie payload: {exc}") from None
        if not isinstance(doc, dict) or doc.get("format") != TRIE_FORMAT:
            raise TrieFormatError("not a trip trie snapshot")
        if doc.get("version") != TRIE_VERSION:
            raise TrieFormatError(f"unsupported trie snapshot version {doc.get('version')!r}")
        try:
            l = int(doc["l"])
            levels = doc["levels"]
            rows = [row for level in levels for row in level]
            m = len(rows)
            arr = np.zeros((4, m), dtype=np.int64)
            for depth, level in enumerate(levels):
                for node, par, sym, cnt in level:
                    arr[:, node] = (par, sym, depth, cnt)
            trip_ids = list(doc["trip_ids"])
            leaves = np.array(doc["leaves"], dtype=np.int64)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise TrieFormatError(f"corrupt trie payload: {exc}") from None
        if len(levels) != l + 1 or leaves.size != len(trip_ids) or leaves.size != doc.get("n"):
            raise TrieFormatError("trie snapshot is inconsistent")
        trie = cls._from_arrays(l, arr, leaves, trip_ids)
        _validate(trie)
        return trie


def _validate(trie: Trie) -> None:
    p, _, d, c = trie._nodes[:, : trie._m]
    if trie._m and (p[0] != -1 or d[0] != 0 or c[0] != trie.n):
        raise TrieFormatError("bad root record")
    if trie._m > 1:
        par = p[1:]
        if (par < 0).any() or (par >= trie._m).any() or (d[par] != d[1:] - 1).any():
            raise TrieFormatError("parent links do not follow levels")
        sums = np.bincount(par, weights=c[1:], minlength=trie._m).astype(np.int64)
        internal = d[: trie._m] < trie.l
        if (sums[internal] != c[internal]).any():
            raise TrieFormatError("child counts do not sum to parent counts")
    leaves = trie.leaves()
    if leaves.size and ((leaves < 0).any() or (leaves >= trie._m).any() or (d[leaves] != trie.l).any()):
        raise TrieFormatError("leaf pointers are invalid")
    if np.bincount(leaves, minlength=trie._m)[d == trie.l].tolist() != c[d == trie.l].tolist():
        raise TrieFormatError("leaf counts do not match trips")


def build_trie(strings, l: Optional[int] = None, impl=None) -> Trie:
    """Build a trie from equal-length padded strings in O(n l)."""
    strings = list(strings)
    lengths = {len(s) for s in strings}
    if len(lengths) > 1:
        raise TrieError(f"strings must share one length, got {sorted(lengths)}")
    if not strings:
        return Trie(l or 0)
    l_found = lengths.pop()
    if l is not None and l != l_found:
        raise TrieError(f"strings have length {l_found}, expected {l}")
    trip_ids = [s.trip_id if hasattr(s, "trip_id") else i for i, s in enumerate(strings)]
    return build_trie_from_matrix(as_matrix(strings, l_found), trip_ids, impl=impl)


def build_trie_from_matrix(matrix, trip_ids=None, impl=None) -> Trie:
    matrix = np.ascontiguousarray(matrix, dtype=np.int64)
    n, l = matrix.shape
    if trip_ids is None:
        trip_ids = range(n)
    nodes, leaf = kernels.build_levels(matrix, impl=impl)
    return Trie._from_arrays(l, nodes, leaf, trip_ids)


def insert_trip(trie: Trie, s, trip_id=None) -> int:
    return trie.insert(s, trip_id)


def delete_trip(trie: Trie, trip_id) -> None:
    trie.delete(trip_id)


def level_partition(trie: Trie, i: int) -> Partition:
    return trie.level_partition(i)


def locate(trie: Trie, prefix) -> Optional[int]:
    return trie.locate(prefix)


def children_distribution(trie: Trie, node) -> dict:
    return trie.children_distribution(node)


def lca(trie: Trie, a, b) -> int:
    return trie.lca(a, b)


def serialize(trie: Trie) -> bytes:
    return trie.serialize()


def deserialize(data: bytes) -> Trie:
    return Trie.deserialize(data)
