import numpy as np
import pytest

from farfield_kalman.jacobian import LinearizedOperator
from farfield_kalman.kalman import (FilterState, ekf_run, kalman_gain, kalman_update,
                                    kfl_run, kfl_sweep)
from farfield_kalman.problem import LinearProblem
from farfield_kalman.regularize import LMConfig, WeightOperator, flm_run, tikhonov_step

ONE = WeightOperator(1.0)


def _linear(rng, N=4, J=5, P=6, noise=0.0):
    blocks = rng.normal(size=(N, J, P)) + 1j * rng.normal(size=(N, J, P))
    truth = rng.normal(size=P) + 1j * rng.normal(size=P)
    f = np.einsum("njp,p->jn", blocks, truth)
    f = f + noise * (rng.normal(size=f.shape) + 1j * rng.normal(size=f.shape))
    return blocks, truth, f


def test_gain_trivial():
    assert not np.any(kalman_gain(np.zeros((3, 3)), np.ones((2, 3)), ONE))
    assert kalman_gain(np.eye(1), np.eye(1), ONE)[0, 0] == pytest.approx(0.5)


def test_gain_information_form(rng):
    P, J = 8, 4
    a = rng.normal(size=(P, P)) + 1j * rng.normal(size=(P, P))
    B = a @ a.conj().T + 0.1 * np.eye(P)
    A = rng.normal(size=(J, P)) + 1j * rng.normal(size=(J, P))
    R = WeightOperator(1.7)
    ref = np.linalg.solve(np.linalg.inv(B) + A.conj().T @ A / R.variance, A.conj().T / R.variance)
    assert np.allclose(kalman_gain(B, A, R), ref, atol=1e-10)


def test_update_keeps_B_hermitian_psd(rng):
    P = 8
    phi = np.zeros(P, dtype=complex)
    B = np.eye(P, dtype=complex) * 10
    for _ in range(20):
        A = rng.normal(size=(3, P)) + 1j * rng.normal(size=(3, P))
        prev = np.linalg.norm(B, 2)
        phi, B, _ = kalman_update(phi, B, A, rng.normal(size=3) + 0j, ONE)
        assert np.abs(B - B.conj().T).max() <= 1e-10
        assert np.linalg.eigvalsh(B).min() >= -1e-10 * np.linalg.norm(B, 2)
        assert np.linalg.norm(B, 2) <= prev * (1 + 1e-12)


def test_sweep_single_block_is_tikhonov(rng):
    blocks, _, f = _linear(rng, N=1)
    phi0 = np.zeros(blocks.shape[2], dtype=complex)
    op = LinearizedOperator(blocks, phi0, np.zeros((blocks.shape[1], 1)))
    R = WeightOperator(2.0)
    out = kfl_sweep(FilterState.initial(phi0, 0.8), f, op, R)
    assert np.allclose(out.phi, tikhonov_step(blocks[0], f[:, 0], 0.8, R), atol=1e-13)


def test_sweep_zero_innovation_fixed(rng):
    blocks, truth, f = _linear(rng)
    op = LinearizedOperator(blocks, truth, f)
    out = kfl_sweep(FilterState.initial(truth, 1.0), f, op, ONE)
    assert np.array_equal(out.phi, truth)


def test_sweep_order_independent(rng):
    blocks, _, f = _linear(rng, noise=0.1)
    phi0 = np.zeros(blocks.shape[2], dtype=complex)
    op = LinearizedOperator(blocks, phi0, np.zeros_like(f))
    a = kfl_sweep(FilterState.initial(phi0, 0.5), f, op, ONE)
    b = kfl_sweep(FilterState.initial(phi0, 0.5), f, op, ONE, order=[3, 1, 4, 2])
    assert np.allclose(a.phi, b.phi, atol=1e-12)


def test_kfl_equals_flm_on_linear_problem(rng):
    blocks, truth, f = _linear(rng, noise=0.05)
    problem = LinearProblem(blocks)
    lm = LMConfig(0.5, max_outer=4)
    flm = flm_run(f, lm=lm, problem=problem, truth=truth, R=ONE)
    kfl = kfl_run(f, lm=lm, problem=problem, truth=truth, R=ONE)
    for a, b in zip(flm.phis, kfl.phis):
        assert np.linalg.norm(a - b) <= 1e-10 * max(np.linalg.norm(a), 1)
    assert np.allclose(flm.mse, kfl.mse, rtol=1e-8)


def test_kfl_noiseless_truth_fixed(rng):
    blocks, truth, _ = _linear(rng)
    problem = LinearProblem(blocks)
    f = problem.evaluate(truth)
    run = kfl_run(f, lm=LMConfig(0.4, max_outer=3), problem=problem,
                  q0=truth, truth=truth, R=ONE)
    assert all(np.array_equal(p, truth) for p in run.phis)


def test_ekf_single_step_is_tikhonov(rng):
    blocks, _, f = _linear(rng, N=1)
    R = WeightOperator(3.0)
    run = ekf_run(f, alpha0=2.0, iters=1, problem=LinearProblem(blocks), R=R)
    assert np.allclose(run.phis[1], tikhonov_step(blocks[0], f[:, 0], 2.0, R), atol=1e-13)


def test_ekf_equals_kfl_first_sweep_on_linear_problem(rng):
    # linear forward map: relinearising changes nothing in the first sweep
    blocks, _, f = _linear(rng, noise=0.1)
    problem = LinearProblem(blocks)
    ekf = ekf_run(f, alpha0=5.0, iters=1, problem=problem, R=ONE)
    kfl = kfl_run(f, lm=LMConfig(0.5, max_outer=1), problem=problem, R=ONE, alphas=[5.0])
    assert np.linalg.norm(ekf.phis[1] - kfl.phis[1]) <= 1e-12 * np.linalg.norm(kfl.phis[1])


def test_ekf_trace_and_B_monotone(rng):
    blocks, truth, f = _linear(rng, noise=0.05)
    run = ekf_run(f, alpha0=1.0, iters=3, problem=LinearProblem(blocks), truth=truth,
                  R=ONE, trace=True)
    norms = [row[3] for row in run.trace]
    assert len(run.trace) == 3 * blocks.shape[0]
    assert np.all(np.diff(norms) <= 1e-12)
    assert run.alphas[0] == 1.0 and np.all(np.isnan(run.alphas[1:]))
    B = run.final_B
    assert np.abs(B - B.conj().T).max() <= 1e-10


def test_ekf_rejects_nonpositive_alpha(rng):
    blocks, _, f = _linear(rng)
    with pytest.raises(ValueError):
        ekf_run(f, alpha0=0.0, iters=1, problem=LinearProblem(blocks), R=ONE)
