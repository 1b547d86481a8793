"""Rectangular lon/lat grid that turns coordinates into region symbols.

Symbols are 1-based ordinal cell ids. With the default ``origin="lower"``
row 1 is the southernmost row, so ``id = (i_y - 1) * n_c + i_x`` with both
indices counted from the bottom-left corner. ``origin="upper"`` numbers rows
from the top instead, which is the labeling used in hand-drawn grid figures
where the top-left cell is ``z1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ROOT = 0
NULL_PAD = -1


class GridError(ValueError):
    """Invalid grid parameters."""


class OutOfBoundsError(ValueError):
    """Coordinate outside the grid's bounding box."""


class NotARegionError(ValueError):
    """ROOT, NULL_PAD or an id outside ``1..n_r*n_c`` used as a region."""


@dataclass(frozen=True)
class Grid:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    n_r: int
    n_c: int
    origin: str = "lower"
    w: float = field(init=False)
    h: float = field(init=False)

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise GridError(f"degenerate bbox ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})")
        if int(self.n_r) != self.n_r or int(self.n_c) != self.n_c or self.n_r < 1 or self.n_c < 1:
            raise GridError(f"grid size must be positive integers, got ({self.n_r}, {self.n_c})")
        if self.origin not in ("lower", "upper"):
            raise GridError(f"origin must be 'lower' or 'upper', got {self.origin!r}")
        object.__setattr__(self, "w", (self.x_max - self.x_min) / self.n_c)
        object.__setattr__(self, "h", (self.y_max - self.y_min) / self.n_r)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    @property
    def n_regions(self) -> int:
        return self.n_r * self.n_c

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


def make_grid(bbox, n_r: int, n_c: int, origin: str = "lower") -> Grid:
    """Build a grid from ``(x_min, y_min, x_max, y_max)`` and a row/column count."""
    x_min, y_min, x_max, y_max = (float(v) for v in bbox)
    return Grid(x_min, y_min, x_max, y_max, n_r, n_c, origin)


def _clamp(v: int, hi: int) -> int:
    return 1 if v < 1 else hi if v > hi else v


def coord_to_symbol(grid: Grid, x: float, y: float) -> int:
    if not grid.contains(x, y):
        raise OutOfBoundsError(f"({x}, {y}) outside bbox {grid.bbox}")
    i_x = _clamp(math.ceil((x - grid.x_min) / grid.w), grid.n_c)
    i_y = _clamp(math.ceil((y - grid.y_min) / grid.h), grid.n_r)
    if grid.origin == "upper":
        i_y = grid.n_r - i_y + 1
    return (i_y - 1) * grid.n_c + i_x


def coords_to_symbols(grid: Grid, xs, ys) -> np.ndarray:
    """Vectorised :func:`coord_to_symbol`.

    Raises :class:`OutOfBoundsError` whose ``index`` attribute is the first
    offending position.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    bad = (xs < grid.x_min) | (xs > grid.x_max) | (ys < grid.y_min) | (ys > grid.y_max)
    bad |= np.isnan(xs) | np.isnan(ys)
    if bad.any():
        idx = int(np.flatnonzero(bad)[0])
        err = OutOfBoundsError(f"sample {idx} ({xs[idx]}, {ys[idx]}) outside bbox {grid.bbox}")
        err.index = idx
        raise err
    i_x = np.clip(np.ceil((xs - grid.x_min) / grid.w).astype(np.int64), 1, grid.n_c)
    i_y = np.clip(np.ceil((ys - grid.y_min) / grid.h).astype(np.int64), 1, grid.n_r)
    if grid.origin == "upper":
        i_y = grid.n_r - i_y + 1
    return (i_y - 1) * grid.n_c + i_x


def symbol_to_cell(grid: Grid, z: int):
    """Return ``(i_y, i_x, (x0, y0, x1, y1))`` for an ordinary symbol.

    ``i_y`` is in the grid's own row numbering (see ``origin``).
    """
    z = int(z)
    if not 1 <= z <= grid.n_regions:
        raise NotARegionError(f"{z} is not a region symbol of a {grid.n_r}x{grid.n_c} grid")
    i_y = -(-z // grid.n_c)
    i_x = z - (i_y - 1) * grid.n_c
    row_from_bottom = i_y if grid.origin == "lower" else grid.n_r - i_y + 1
    x0 = grid.x_min + (i_x - 1) * grid.w
    y0 = grid.y_min + (row_from_bottom - 1) * grid.h
    return i_y, i_x, (x0, y0, x0 + grid.w, y0 + grid.h)


def cell_center(grid: Grid, z: int) -> tuple[float, float]:
    _, _, (x0, y0, x1, y1) = symbol_to_cell(grid, z)
    return (x0 + x1) / 2, (y0 + y1) / 2


def relabel(grid: Grid, z: int, origin: str) -> int:
    """Translate a symbol of ``grid`` into the numbering of another row origin."""
    i_y, i_x, _ = symbol_to_cell(grid, z)
    if origin != grid.origin:
        i_y = grid.n_r - i_y + 1
    return (i_y - 1) * grid.n_c + i_x
