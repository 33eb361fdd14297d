import numpy as np
import pytest
from scipy import integrate, special

from farfield_kalman.forward import (ForwardModel, SolverFailure, _truncated_kernel_transform,
                                     dense_convolution_matrix, far_field, forward_map,
                                     incident_plane_wave, make_fine_grid,
                                     sample_on_fine, solve_lippmann_schwinger,
                                     solve_lippmann_schwinger_dense, to_fine)
from farfield_kalman.grid import Medium, characteristic_medium, in_shape, make_directions


def test_fine_grid_defaults():
    g = make_fine_grid(3, 8, 128)
    assert g.refine == 3 and g.h == pytest.approx(0.125) and g.period == pytest.approx(16)
    assert g.exact
    assert g.support_points.shape == (48, 48, 2)
    # sub-cell midpoints average to the cell centers
    c = g.support_points.reshape(16, 3, 16, 3, 2).mean(axis=(1, 3))
    assert np.allclose(c, g.cell_grid.centers)


@pytest.mark.parametrize("n", [0, 3, 100])
def test_fine_grid_power_of_two(n):
    with pytest.raises(ValueError):
        make_fine_grid(3, 8, n)


def test_fine_grid_period_too_small():
    with pytest.raises(ValueError):
        make_fine_grid(3, 8, 32, refine=4)


def test_incident_wave():
    assert incident_plane_wave((0.6, 0.8), 5.0, np.zeros(2)) == 1
    assert incident_plane_wave((1, 0), 3.0, np.array([np.pi / 3, 0])) == pytest.approx(-1)
    with pytest.raises(ValueError):
        incident_plane_wave((1, 1), 3.0, np.zeros(2))


@pytest.mark.parametrize("s", [0.0, 1.0, 2.999, 3.0, 3.001, 7.5])
def test_kernel_transform_against_quadrature(s):
    # 2 pi int_0^R (i/4) H0(k r) J0(s r) r dr
    k, R = 3.0, 2.0

    def part(f):
        return integrate.quad(f, 0, R, limit=400, epsabs=1e-13, epsrel=1e-12)[0]

    re = part(lambda r: -0.25 * special.y0(k * r) * special.j0(s * r) * r)
    im = part(lambda r: 0.25 * special.j0(k * r) * special.j0(s * r) * r)
    ref = 2 * np.pi * complex(re, im)
    assert abs(_truncated_kernel_transform(np.array(s), k, R) - ref) < 1e-9 * abs(ref)


def test_zero_contrast_returns_incident(small_model):
    g = small_model.grid
    u = small_model.solve(Medium.zeros(g.cell_grid), (1.0, 0.0))
    assert np.array_equal(u.values, small_model.incident(np.array([1.0, 0.0])))
    assert small_model.residual(u.values, np.zeros((g.n, g.n)), u.values) == 0
    assert np.all(small_model.far_field_from(Medium.zeros(g.cell_grid), u) == 0)


def test_convolution_complex_symmetric(rng):
    g = make_fine_grid(3, 2, 16)
    C = dense_convolution_matrix(3.0, g)
    assert np.abs(C - C.T).max() < 1e-10 * np.abs(C).max()
    model = ForwardModel(3.0, g, make_directions(4))
    a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    b = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    lhs = np.sum(a * model.convolve(b))
    rhs = np.sum(b * model.convolve(a))
    assert abs(lhs - rhs) < 1e-10 * abs(lhs)
    assert np.allclose(C @ b.ravel(), model.convolve(b).ravel(), atol=1e-12)


def test_dense_agreement():
    g = make_fine_grid(3, 2, 16)
    q = characteristic_medium("B1", g.cell_grid) * 5.0
    u = solve_lippmann_schwinger(q, (0.6, 0.8), 3.0, g, tol=1e-11)
    ref = solve_lippmann_schwinger_dense(q, (0.6, 0.8), 3.0, g)
    assert np.abs(u.values - ref).max() < 1e-9 * np.abs(ref).max()


def test_first_order_smallness():
    g = make_fine_grid(3, 8, 128)
    q = characteristic_medium("B1", g.cell_grid) * 1e-2      # contrast 1e-3
    u = solve_lippmann_schwinger(q, (1.0, 0.0), 3.0, g)
    u_inc = ForwardModel(3.0, g, make_directions(1)).incident(np.array([1.0, 0.0]))
    assert np.abs(u.values - u_inc).max() < 10 * 1e-3


def test_solver_failure_carries_history():
    g = make_fine_grid(3, 8, 64)
    model = ForwardModel(7.0, g, make_directions(4), max_iter=3, restart=3)
    q = characteristic_medium("B1", g.cell_grid) * 10
    with pytest.raises(SolverFailure) as exc:
        model.far_field_matrix(q, make_directions(3))
    assert exc.value.direction_index == 1
    assert len(exc.value.residuals) > 0


def test_far_field_dimension_mismatch(small_model):
    u = small_model.solve(Medium.zeros(small_model.grid.cell_grid), (1.0, 0.0))
    with pytest.raises(ValueError):
        far_field(u, np.zeros((4, 4)), make_directions(3))


def test_forward_map_zero_and_deterministic(config):
    c = config.replace(N=4, J=5)
    model = ForwardModel.from_config(c)
    zero = forward_map(Medium.zeros(model.cell_grid), c, model)
    assert zero.values.shape == (5, 4) and not np.any(zero.values)
    q = characteristic_medium("B2", model.cell_grid)
    a, b = forward_map(q, c, model), forward_map(q, c, model)
    assert np.array_equal(a.values, b.values)


def test_residual_verified_on_every_solve(config):
    model = ForwardModel.from_config(config)
    q = characteristic_medium("B2", model.cell_grid)
    for theta in make_directions(5).vectors:
        assert model.solve(q, theta).residual <= 1e-8


def test_column_norm_symmetry(config):
    # rotating the disk medium permutes directions; cells break it slightly
    model = ForwardModel.from_config(config)
    F = model.far_field_matrix(characteristic_medium("B1", model.cell_grid), make_directions(30))
    norms = np.linalg.norm(F, axis=0)
    assert np.ptp(norms) / norms.mean() < 0.05


def test_sample_on_fine_area():
    g = make_fine_grid(3, 8, 256)
    frac = sample_on_fine(lambda x, y: in_shape("B1", x, y), g, supersample=8)
    assert frac.sum() * g.h ** 2 == pytest.approx(1.5 * np.pi, rel=2e-3)
    assert to_fine(frac, g).shape == (256, 256)
