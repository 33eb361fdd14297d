import numpy as np
import pytest

from farfield_kalman.grid import (CellGrid, Medium, ShapeId, characteristic_medium,
                                  in_shape, make_directions, make_grid, mse)


def test_centers_match_formula():
    g = make_grid(3, 8)
    assert g.center(0, 0) == pytest.approx((0.1875, 0.1875), abs=1e-15)
    assert g.center(-8, -8) == pytest.approx((-2.8125, -2.8125), abs=1e-15)
    assert g.centers.shape == (16, 16, 2)
    assert g.size == 256


def test_unit_grid_has_four_centers():
    c = make_grid(1, 1).centers.reshape(-1, 2)
    assert sorted(map(tuple, c)) == [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)]


def test_point_reflection_symmetry():
    g = make_grid(3, 8)
    c = g.centers
    assert np.array_equal(c[::-1, ::-1], -c)


@pytest.mark.parametrize("S,M", [(0, 8), (-1, 8), (3, 0), (3, -2)])
def test_grid_rejects_nonpositive(S, M):
    with pytest.raises(ValueError):
        make_grid(S, M)


def test_directions():
    d = make_directions(30)
    assert d[30] == pytest.approx((1, 0), abs=1e-14)
    assert d[15] == pytest.approx((-1, 0), abs=1e-14)
    assert make_directions(4)[1] == pytest.approx((0, 1), abs=1e-15)
    assert np.allclose(np.linalg.norm(d.vectors, axis=1), 1)
    with pytest.raises(ValueError):
        make_directions(0)


def test_shapes():
    g = make_grid(3, 8)
    b1 = characteristic_medium(ShapeId("B1"), g)
    assert b1.values[8, 8] == 0.1
    assert b1.values[15, 15] == 0
    assert in_shape("B2", 1.5, 0.0)
    assert not in_shape("B2", 2.9, 2.9)
    assert characteristic_medium(ShapeId("b2"), g).values[15, 15] == 0
    with pytest.raises(ValueError):
        ShapeId("B3")


def test_mse_cell_count_oracle():
    g = make_grid(3, 8)
    count = 0
    for m1 in range(-8, 8):
        for m2 in range(-8, 8):
            x, y = (2 * m1 + 1) * 3 / 16, (2 * m2 + 1) * 3 / 16
            count += x * x + y * y < 1.5
    q = characteristic_medium("B1", g)
    assert mse(q, Medium.zeros(g)) == pytest.approx(0.01 * count, rel=1e-12)
    assert mse(q, q) == 0


def test_mse_grid_mismatch():
    with pytest.raises(ValueError):
        mse(Medium.zeros(make_grid(3, 8)), Medium.zeros(make_grid(3, 4)))


def test_medium_vector_roundtrip(rng):
    g = make_grid(2, 3)
    v = rng.normal(size=g.size) + 1j * rng.normal(size=g.size)
    m = Medium.from_vector(g, v)
    assert np.array_equal(m.vector, v)
    assert np.allclose((m + m - m * 2.0).vector, 0)


def test_medium_rejects_nonfinite():
    g = make_grid(1, 1)
    with pytest.raises(ValueError):
        Medium(g, np.full((2, 2), np.nan))


def test_is_physical():
    g = make_grid(1, 1)
    assert Medium(g, np.full((2, 2), 0.1 + 0.01j)).is_physical()
    assert not Medium(g, np.full((2, 2), 0.1 - 0.01j)).is_physical()
