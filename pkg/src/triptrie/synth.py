"""Seeded synthetic trip corpora and raw trace files for tests and benchmarks."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from triptrie.geo_grid import NULL_PAD

# stay, north, south, east, west
_MOVES = np.array([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]])


def random_walk_corpus(
    n: int,
    l: int,
    n_r: int = 100,
    n_c: int = 100,
    hotspots: int = 20,
    min_len: int = 1,
    stay: float = 0.3,
    seed: int = 0,
) -> np.ndarray:
    """``(n, l)`` matrix of padded trip strings from lattice random walks.

    Starts concentrate on a few hotspot cells (Zipf weights) so prefixes are
    shared heavily near the root and fan out with depth, like real pickups.
    """
    rng = np.random.default_rng(seed)
    spots = np.stack([rng.integers(0, n_r, hotspots), rng.integers(0, n_c, hotspots)], axis=1)
    weights = 1.0 / np.arange(1, hotspots + 1)
    start = spots[rng.choice(hotspots, size=n, p=weights / weights.sum())]
    move_p = np.array([stay] + [(1 - stay) / 4] * 4)
    steps = _MOVES[rng.choice(5, size=(n, max(l - 1, 0)), p=move_p)]
    pos = np.concatenate([start[:, None, :], steps], axis=1).cumsum(axis=1)
    rows = np.clip(pos[..., 0], 0, n_r - 1)
    cols = np.clip(pos[..., 1], 0, n_c - 1)
    mat = rows * n_c + cols + 1
    lengths = rng.integers(min(min_len, l), l + 1, size=n)
    mat[np.arange(l)[None, :] >= lengths[:, None]] = NULL_PAD
    return mat.astype(np.int64)


def small_alphabet_corpus(n: int, l: int, alphabet: int = 3, seed: int = 0, pad: bool = True) -> np.ndarray:
    """Uniform strings over ``1..alphabet``; with ``pad`` a random suffix becomes NULL_PAD."""
    rng = np.random.default_rng(seed)
    mat = rng.integers(1, alphabet + 1, size=(n, l))
    if pad:
        lengths = rng.integers(1, l + 1, size=n)
        mat[np.arange(l)[None, :] >= lengths[:, None]] = NULL_PAD
    return mat.astype(np.int64)


def write_trace_directory(
    out_dir,
    taxis: int = 5,
    trips_per_taxi: int = 20,
    bbox=(-122.52, 37.70, -122.36, 37.82),
    seed: int = 0,
) -> Path:
    """Write cabspotting-style trace files (newest record first) for pipeline tests."""
    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    x0, y0, x1, y1 = bbox
    for taxi in range(taxis):
        lines = []
        t = 1_213_000_000 + int(rng.integers(0, 3600))
        lon = rng.uniform(x0, x1)
        lat = rng.uniform(y0, y1)
        for _ in range(trips_per_taxi):
            for occupied, count in ((0, int(rng.integers(1, 5))), (1, int(rng.integers(2, 40)))):
                for _ in range(count):
                    t += int(rng.integers(30, 90))
                    lon = float(np.clip(lon + rng.normal(0, 0.003), x0, x1))
                    lat = float(np.clip(lat + rng.normal(0, 0.003), y0, y1))
                    lines.append(f"{lat:.5f} {lon:.5f} {occupied} {t}")
        (out / f"new_taxi{taxi:03d}.txt").write_text("\n".join(reversed(lines)) + "\n")
    return out
