"""Statistics and maps computed from a built trie.

Node-level quantities come straight from the trie arrays; anything that needs
per-trip membership goes through the ancestor table, so every function is
O(n*l) at worst.
"""
from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from triptrie.geo_grid import NULL_PAD, Grid
from triptrie.trie import Trie

DEFAULT_WINDOW = 11

STAT_ROWS = (
    "Total number of trips",
    "Level-wise Average branching factor",
    "Level-wise Average branching factor (first {K} levels)",
    "Average number of clusters per region",
    "Average number of clusters per region (first {K} levels)",
    "Average number of trips per cluster",
    "Average number of trips per cluster (first {K} levels)",
)

# start-time categories: hour windows are half-open, weekday() 0 is Monday
CATEGORIES = {
    "day_peak": "Day peak",
    "night_peak": "Night peak",
    "weekdays": "Weekdays",
    "weekends": "Weekends",
}


class AnalyticsError(ValueError):
    pass


class NotFoundError(KeyError):
    pass


def _live(trie: Trie) -> np.ndarray:
    """Ids of live non-root nodes."""
    counts = trie.counts
    mask = counts > 0
    mask[0] = False
    return np.flatnonzero(mask)


def _check_depth(trie: Trie, depth: int) -> int:
    depth = int(depth)
    if not 1 <= depth <= trie.l:
        raise AnalyticsError(f"depth {depth} outside 1..{trie.l}")
    return depth


# --- dendrogram statistics table ----------------------------------------------


def _mean(values) -> Optional[float]:
    values = list(values)
    return float(np.mean(values)) if values else None


def level_branching(trie: Trie) -> list[Optional[float]]:
    """Branching factor from depth ``k`` to ``k + 1`` for ``k = 0..l-1``.

    Padding nodes are left out of the numerator, and the denominator counts
    only nodes with at least one non-padding child, so a level where every
    trip has ended gets ``None``.
    """
    nodes = _live(trie)
    real = nodes[trie.symbols[nodes] != NULL_PAD]
    depths = trie.depths[real]
    parents = trie.parents[real]
    out = []
    for k in range(trie.l):
        at = depths == k + 1
        kids = int(at.sum())
        out.append(kids / np.unique(parents[at]).size if kids else None)
    return out


def branching_stats(trie: Trie, window: int = DEFAULT_WINDOW) -> tuple[Optional[float], Optional[float]]:
    """Average branching factor over all levels and over the first ``window`` levels."""
    factors = level_branching(trie)
    return (
        _mean(f for f in factors if f is not None),
        _mean(f for f in factors[:window] if f is not None),
    )


def region_cluster_counts(trie: Trie, window: Optional[int] = None) -> dict[int, int]:
    """``{region: number of nodes labeled with it}``, optionally within depths ``1..window``."""
    nodes = _live(trie)
    nodes = nodes[trie.symbols[nodes] != NULL_PAD]
    if window is not None:
        nodes = nodes[trie.depths[nodes] <= window]
    regions, counts = np.unique(trie.symbols[nodes], return_counts=True)
    return dict(zip(regions.tolist(), counts.tolist()))


def average_clusters_per_region(trie: Trie, window: Optional[int] = None) -> Optional[float]:
    return _mean(region_cluster_counts(trie, window).values())


def trips_per_cluster(trie: Trie, window: Optional[int] = None) -> Optional[float]:
    """Mean trip count over non-root nodes, padding nodes included."""
    nodes = _live(trie)
    if window is not None:
        nodes = nodes[trie.depths[nodes] <= window]
    return _mean(trie.counts[nodes].tolist())


@dataclass
class TrieStats:
    n: int
    window: int
    branching: list = field(default_factory=list)
    avg_branching: Optional[float] = None
    avg_branching_window: Optional[float] = None
    clusters_per_region: Optional[float] = None
    clusters_per_region_window: Optional[float] = None
    trips_per_cluster: Optional[float] = None
    trips_per_cluster_window: Optional[float] = None

    def rows(self) -> list[tuple[str, object]]:
        values = (
            self.n,
            self.avg_branching,
            self.avg_branching_window,
            self.clusters_per_region,
            self.clusters_per_region_window,
            self.trips_per_cluster,
            self.trips_per_cluster_window,
        )
        return [(name.format(K=self.window), v) for name, v in zip(STAT_ROWS, values)]


def trie_stats(trie: Trie, window: int = DEFAULT_WINDOW) -> TrieStats:
    factors = level_branching(trie)
    avg, avg_w = branching_stats(trie, window)
    return TrieStats(
        n=trie.n,
        window=window,
        branching=factors,
        avg_branching=avg,
        avg_branching_window=avg_w,
        clusters_per_region=average_clusters_per_region(trie),
        clusters_per_region_window=average_clusters_per_region(trie, window),
        trips_per_cluster=trips_per_cluster(trie),
        trips_per_cluster_window=trips_per_cluster(trie, window),
    )


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def format_stats(columns: dict[str, TrieStats]) -> str:
    """Tab-separated report: one row per statistic, one column per category."""
    names = list(columns)
    if not names:
        return ""
    lines = ["\t".join([""] + names)]
    per_col = [columns[c].rows() for c in names]
    for r in range(len(STAT_ROWS)):
        label = per_col[0][r][0]
        lines.append("\t".join([label] + [_fmt(col[r][1]) for col in per_col]))
    return "\n".join(lines) + "\n"


def start_category(epoch: int, utc_offset_hours: float = 0.0) -> set[str]:
    """Categories a trip starting at ``epoch`` belongs to (not mutually exclusive)."""
    tz = _dt.timezone(_dt.timedelta(hours=utc_offset_hours))
    t = _dt.datetime.fromtimestamp(int(epoch), tz)
    out = {"weekends" if t.weekday() >= 5 else "weekdays"}
    if 5 <= t.hour < 12:
        out.add("day_peak")
    elif 15 <= t.hour < 22:
        out.add("night_peak")
    return out


def split_by_category(strings, utc_offset_hours: float = 0.0) -> dict[str, list]:
    """Group TripStrings by the categories of their start time."""
    out = {c: [] for c in CATEGORIES}
    for s in strings:
        for c in start_category(s.start, utc_offset_hours):
            out[c].append(s)
    return out


# --- maps ------------------------------------------------------------------


@dataclass
class HeatmapGrid:
    """Trip counts per cell; row 0 is the southernmost row whatever the grid origin."""

    counts: np.ndarray
    level: int
    grid: Grid
    t_r: Optional[int] = None

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def metadata(self) -> dict:
        return {
            "bbox": list(self.grid.bbox),
            "n_r": self.grid.n_r,
            "n_c": self.grid.n_c,
            "level": self.level,
            "t_r": self.t_r,
            "minute": None if self.t_r is None else (self.level - 1) * self.t_r / 60,
            "total": self.total,
        }

    def to_csv(self, path) -> Path:
        """Write the counts CSV plus a ``.json`` metadata sidecar; returns the sidecar path."""
        path = Path(path)
        np.savetxt(path, self.counts, fmt="%d", delimiter=",")
        side = path.with_suffix(path.suffix + ".json")
        side.write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n")
        return side


def _south_rows(grid: Grid, symbols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if symbols.size and (symbols.min() < 1 or symbols.max() > grid.n_regions):
        raise AnalyticsError("trie holds symbols outside the grid")
    i_y = (symbols - 1) // grid.n_c
    i_x = (symbols - 1) % grid.n_c
    if grid.origin == "upper":
        i_y = grid.n_r - 1 - i_y
    return i_y, i_x


def heatmap(trie: Trie, depth: int, grid: Grid, t_r: Optional[int] = None) -> HeatmapGrid:
    """Trips located in each cell at ``depth``; trips that already ended drop out."""
    depth = _check_depth(trie, depth)
    nodes = trie.nodes_at(depth)
    nodes = nodes[trie.symbols[nodes] != NULL_PAD]
    counts = np.zeros((grid.n_r, grid.n_c), dtype=np.int64)
    rows, cols = _south_rows(grid, trie.symbols[nodes])
    np.add.at(counts, (rows, cols), trie.counts[nodes])
    return HeatmapGrid(counts, depth, grid, t_r)


def first_occurrence_depth(trie: Trie) -> dict[int, int]:
    """``{region: shallowest depth of any node labeled with it}``."""
    nodes = _live(trie)
    nodes = nodes[trie.symbols[nodes] != NULL_PAD]
    out: dict[int, int] = {}
    for z, d in zip(trie.symbols[nodes].tolist(), trie.depths[nodes].tolist()):
        if d < out.get(z, d + 1):
            out[z] = d
    return dict(sorted(out.items()))


def occurrence_grid(trie: Trie, grid: Grid) -> np.ndarray:
    """First-occurrence depth per cell, 0 where the region never appears; row 0 is south."""
    first = first_occurrence_depth(trie)
    out = np.zeros((grid.n_r, grid.n_c), dtype=np.int64)
    if first:
        rows, cols = _south_rows(grid, np.array(list(first), dtype=np.int64))
        out[rows, cols] = list(first.values())
    return out


# --- cluster queries ---------------------------------------------------------


def top_k_clusters(trie: Trie, depth: int, k: int) -> list[tuple[tuple, int]]:
    """The ``k`` heaviest nodes at ``depth`` as ``(prefix, trip count)``.

    Ties go to the node whose first member trip comes first.
    """
    depth = _check_depth(trie, depth)
    row = trie.ancestors()[depth]
    nodes, first = np.unique(row, return_index=True)
    counts = trie.counts[nodes]
    order = np.lexsort((first, -counts))[: max(int(k), 0)]
    return [(trie.path(int(nodes[i])), int(counts[i])) for i in order]


def subtree_distribution(trie: Trie, start_region: int, depth: int, top_k: Optional[int] = 10) -> list[tuple[int, int]]:
    """Regions visited at ``depth`` by trips starting in ``start_region``, most frequent first."""
    depth = _check_depth(trie, depth)
    start = trie.locate((int(start_region),))
    if start is None or start_region == NULL_PAD:
        raise NotFoundError(f"no trips start in region {start_region}")
    anc = trie.ancestors()
    syms = trie.symbols[anc[depth][anc[1] == start]]
    regions, counts = np.unique(syms[syms != NULL_PAD], return_counts=True)
    order = np.lexsort((regions, -counts))
    if top_k is not None:
        order = order[: int(top_k)]
    return [(int(regions[i]), int(counts[i])) for i in order]


def _leaf_strings(trie: Trie) -> np.ndarray:
    """One padded string per distinct leaf (unique trip type)."""
    leaves = trie.leaves()
    if not leaves.size:
        return np.zeros((0, trie.l), dtype=np.int64)
    _, first = np.unique(leaves, return_index=True)
    return trie.strings()[np.sort(first)]


def route_diversity(trie: Trie, start_region: int, end_region: int) -> int:
    """Distinct trip types from ``start_region`` whose last real symbol is ``end_region``."""
    mat = _leaf_strings(trie)
    if not mat.size:
        return 0
    lengths = (mat != NULL_PAD).sum(axis=1)
    ok = lengths > 0
    last = mat[np.arange(mat.shape[0]), np.maximum(lengths - 1, 0)]
    return int((ok & (mat[:, 0] == start_region) & (last == end_region)).sum())


def route_diversity_table(trie: Trie) -> dict[tuple[int, int], int]:
    """``{(start, end): distinct trip types}`` for every observed pair."""
    mat = _leaf_strings(trie)
    lengths = (mat != NULL_PAD).sum(axis=1)
    keep = lengths > 0
    mat, lengths = mat[keep], lengths[keep]
    last = mat[np.arange(mat.shape[0]), lengths - 1]
    out: dict = {}
    for pair in zip(mat[:, 0].tolist(), last.tolist()):
        out[pair] = out.get(pair, 0) + 1
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class OutlierRow:
    region: int
    frequency: int
    involvement: int
    first_depth: int


def outlier_report(trie: Trie) -> list[OutlierRow]:
    """Per-region node frequency, trip-type involvement and first depth.

    Sorted so that regions in few trip types that appear late come first.
    """
    freq = region_cluster_counts(trie)
    first = first_occurrence_depth(trie)
    mat = _leaf_strings(trie)
    involvement: dict[int, int] = {}
    if mat.size:
        rows = np.repeat(np.arange(mat.shape[0]), mat.shape[1])
        pairs = np.unique(np.stack([rows, mat.ravel()]), axis=1)
        regions, counts = np.unique(pairs[1][pairs[1] != NULL_PAD], return_counts=True)
        involvement = dict(zip(regions.tolist(), counts.tolist()))
    rows_out = [OutlierRow(z, freq[z], involvement.get(z, 0), first[z]) for z in freq]
    rows_out.sort(key=lambda r: (r.involvement, -r.first_depth, r.frequency, r.region))
    return rows_out
