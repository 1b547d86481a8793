"""Grouping micro-clusters (trie nodes at one level) under a diameter bound."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from triptrie import kernels
from triptrie.geo_grid import NULL_PAD
from triptrie.metrics import levenshtein
from triptrie.trie import Partition, Trie

METHODS = ("complete", "greedy")


class MacroError(ValueError):
    pass


@dataclass(frozen=True)
class MicroCluster:
    node_id: int
    representative: tuple
    weight: int


@dataclass
class MacroClustering:
    micros: list
    labels: np.ndarray
    q: int
    diameters: dict

    @property
    def k(self) -> int:
        return len(self.diameters)

    @property
    def assignment(self) -> dict:
        """``{node_id: macro label}``."""
        return {m.node_id: int(c) for m, c in zip(self.micros, self.labels.tolist())}

    def members(self, label: int) -> list:
        return [m for m, c in zip(self.micros, self.labels.tolist()) if c == label]


def micro_clusters(trie: Trie, level: int) -> list[MicroCluster]:
    """One micro-cluster per node at trie depth ``level``, padding trimmed off."""
    if not 1 <= level <= trie.l:
        raise MacroError(f"level {level} outside 1..{trie.l}")
    out = []
    for node in trie.nodes_at(level).tolist():
        rep = tuple(s for s in trie.path(node) if s != NULL_PAD)
        out.append(MicroCluster(node, rep, int(trie.counts[node])))
    return out


def distance_matrix(micros) -> np.ndarray:
    return kernels.pairwise_levenshtein([m.representative for m in micros])


def _diameters(dist: np.ndarray, labels: np.ndarray) -> dict:
    out = {}
    for c in np.unique(labels).tolist():
        idx = np.flatnonzero(labels == c)
        out[c] = int(dist[np.ix_(idx, idx)].max())
    return out


def _complete(dist: np.ndarray, q: int) -> np.ndarray:
    # complete-linkage merge heights are cluster diameters, so cutting at q
    # keeps every diameter <= q
    z = linkage(squareform(dist, checks=False).astype(float), method="complete")
    return fcluster(z, t=q, criterion="distance")


def _greedy(dist: np.ndarray, q: int, weights: np.ndarray) -> np.ndarray:
    """Seed at the heaviest free micro, absorb free micros nearest-first while the diameter holds."""
    m = dist.shape[0]
    labels = np.zeros(m, dtype=np.int64)
    seeds = np.lexsort((np.arange(m), -weights))
    c = 0
    for seed in seeds.tolist():
        if labels[seed]:
            continue
        c += 1
        labels[seed] = c
        members = [seed]
        free = np.flatnonzero(labels == 0)
        for j in free[np.argsort(dist[seed, free], kind="stable")].tolist():
            if dist[seed, j] > q:
                break
            if dist[j, members].max() <= q:
                labels[j] = c
                members.append(j)
    return labels


def macro_cluster(micros, q: int, method: str = "complete") -> MacroClustering:
    """Partition micro-clusters so every group's Levenshtein diameter is at most ``q``.

    Few groups are preferred but the count is not guaranteed minimal.
    Weights are carried for reporting only.
    """
    if q < 0:
        raise MacroError("q must be >= 0")
    if method not in METHODS:
        raise MacroError(f"unknown method {method!r}; expected one of {METHODS}")
    micros = list(micros)
    m = len(micros)
    if m == 0:
        return MacroClustering([], np.zeros(0, dtype=np.int64), q, {})
    dist = distance_matrix(micros)
    if m == 1:
        raw = np.ones(1, dtype=np.int64)
    elif method == "complete":
        raw = _complete(dist, q)
    else:
        raw = _greedy(dist, q, np.array([mc.weight for mc in micros], dtype=np.int64))
    labels = Partition.from_keys(raw).labels
    return MacroClustering(micros, labels, q, _diameters(dist, labels))


def check_diameters(clustering: MacroClustering) -> bool:
    """Recompute every within-group distance pair by pair and test it against ``q``."""
    for c in clustering.diameters:
        group = clustering.members(c)
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                if levenshtein(group[i].representative, group[j].representative) > clustering.q:
                    return False
    return True
