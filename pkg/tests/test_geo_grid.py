import math

import numpy as np
import pytest

from triptrie.geo_grid import (
    GridError,
    NotARegionError,
    OutOfBoundsError,
    cell_center,
    coord_to_symbol,
    coords_to_symbols,
    make_grid,
    relabel,
    symbol_to_cell,
)


def test_unit_cells():
    g = make_grid((0, 0, 6, 4), 4, 6)
    assert g.w == 1 and g.h == 1
    assert g.n_regions == 24


def test_single_cell():
    g = make_grid((0, 0, 1, 1), 1, 1)
    assert (g.w, g.h) == (1, 1)
    assert coord_to_symbol(g, 0.3, 0.9) == 1


@pytest.mark.parametrize("bbox,n_r,n_c", [((0, 0, 6, 4), 0, 6), ((0, 0, 6, 4), 4, -1), ((1, 0, 1, 4), 2, 2), ((0, 0, 6, 4), 2.5, 2)])
def test_bad_grid(bbox, n_r, n_c):
    with pytest.raises(GridError):
        make_grid(bbox, n_r, n_c)


def test_bad_origin():
    with pytest.raises(GridError):
        make_grid((0, 0, 1, 1), 1, 1, origin="left")


def test_lower_origin_numbering():
    g = make_grid((0, 0, 6, 4), 4, 6)
    assert coord_to_symbol(g, 0.5, 0.5) == 1
    assert coord_to_symbol(g, 5.5, 0.5) == 6
    assert coord_to_symbol(g, 0.5, 1.5) == 7
    assert coord_to_symbol(g, 5.5, 3.5) == 24


def test_upper_origin_numbering():
    g = make_grid((0, 0, 6, 4), 4, 6, origin="upper")
    assert coord_to_symbol(g, 0.5, 3.5) == 1
    assert coord_to_symbol(g, 5.5, 0.5) == 24


def test_boundary_clamps():
    g = make_grid((0, 0, 6, 4), 4, 6)
    assert coord_to_symbol(g, 0, 0) == 1
    assert coord_to_symbol(g, 6, 4) == 24
    # interior grid lines belong to the lower/left cell (ceil)
    assert coord_to_symbol(g, 1.0, 0.5) == 1
    assert coord_to_symbol(g, 1.0000001, 0.5) == 2


def test_out_of_bounds():
    g = make_grid((0, 0, 6, 4), 4, 6)
    with pytest.raises(OutOfBoundsError):
        coord_to_symbol(g, 6.01, 1)
    with pytest.raises(OutOfBoundsError) as exc:
        coords_to_symbols(g, [1, 2, -1], [1, 1, 1])
    assert exc.value.index == 2


def test_vectorised_matches_scalar():
    rng = np.random.default_rng(1)
    for origin in ("lower", "upper"):
        g = make_grid((-122.5, 37.6, -122.3, 37.9), 7, 11, origin)
        xs = rng.uniform(g.x_min, g.x_max, 500)
        ys = rng.uniform(g.y_min, g.y_max, 500)
        expect = [coord_to_symbol(g, x, y) for x, y in zip(xs, ys)]
        assert coords_to_symbols(g, xs, ys).tolist() == expect


def test_symbol_to_cell_inverse():
    for origin in ("lower", "upper"):
        g = make_grid((0, 0, 6, 4), 4, 6, origin)
        for z in range(1, 25):
            i_y, i_x, (x0, y0, x1, y1) = symbol_to_cell(g, z)
            assert (i_y - 1) * 6 + i_x == z
            assert math.isclose(x1 - x0, 1) and math.isclose(y1 - y0, 1)
            assert coord_to_symbol(g, *cell_center(g, z)) == z


def test_symbol_to_cell_rejects_specials():
    g = make_grid((0, 0, 6, 4), 4, 6)
    for z in (0, -1, 25):
        with pytest.raises(NotARegionError):
            symbol_to_cell(g, z)


def test_relabel_flips_rows():
    g = make_grid((0, 0, 6, 4), 4, 6, origin="upper")
    assert relabel(g, 9, "lower") == 15
    assert relabel(g, 9, "upper") == 9
