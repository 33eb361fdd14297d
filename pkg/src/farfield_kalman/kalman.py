"""Sequential reconstructions: Kalman-filter Levenberg-Marquardt and iterated EKF.

Both process the incident directions one at a time with a Kalman update of
the state ``phi`` and weight ``B``.  KFL linearises once per outer iteration
and resets ``B = I / alpha_i``; EKF relinearises before every measurement
and carries ``B`` across outer iterations.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .forward import SolverFailure
from .jacobian import LinearizedOperator, stack
from .regularize import (LMConfig, RunResult, WeightOperator, _data_matrix,
                         _last, _Tracker, _vector, choose_alpha,
                         hermitian_solve)

__all__ = ["FilterState", "kalman_gain", "kalman_update", "kfl_sweep",
           "kfl_run", "ekf_sweep", "ekf_run"]

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FilterState:
    phi: np.ndarray
    B: np.ndarray
    outer: int = 0
    inner: int = 0

    @classmethod
    def initial(cls, phi, alpha, outer=0):
        phi = _vector(phi)
        return cls(phi, np.eye(phi.size, dtype=complex) / alpha, outer, 0)


def kalman_gain(B, Aprime, R):
    """``B A'^H (R + A' B A'^H)^-1``, shape ``(P, J)``."""
    Aprime = np.atleast_2d(Aprime)
    BAh = B @ Aprime.conj().T
    inner = R.matrix(Aprime.shape[0]) + Aprime @ BAh
    inner = 0.5 * (inner + inner.conj().T)
    # K^H = inner^-1 (A' B), valid because B and inner are Hermitian
    return hermitian_solve(inner, BAh.conj().T).conj().T


def kalman_update(phi, B, Aprime, innovation, R):
    """One measurement update; returns ``(phi, B, K)``."""
    K = kalman_gain(B, Aprime, R)
    phi = phi + K @ innovation
    B = B - K @ (Aprime @ B)
    B = 0.5 * (B + B.conj().T)
    return phi, B, K


def _trace_row(trace, state, innovation, truth):
    if trace is None:
        return
    e = float("nan") if truth is None else float(np.sum(np.abs(state.phi - truth) ** 2))
    trace.append((state.outer, state.inner, float(np.linalg.norm(innovation)),
                  float(np.linalg.norm(state.B, 2)), e))


def kfl_sweep(state, data, op, R, order=None, trace=None, truth=None):
    """Process every direction once, linearised at the sweep's start point.

    ``op`` holds the blocks and far field at ``state.phi``.  For the linear
    surrogate any block order gives the same result; ``order`` (1-based
    direction labels) exists to check that.
    """
    f = _data_matrix(data)
    blocks = op.blocks
    F0 = np.asarray(op.base_farfield)
    base = _vector(op.base)
    phi, B = state.phi, state.B
    order = range(1, blocks.shape[0] + 1) if order is None else order
    for n in order:
        A = blocks[n - 1]
        innovation = f[:, n - 1] - F0[:, n - 1] - A @ (phi - base)
        phi, B, _ = kalman_update(phi, B, A, innovation, R)
        state = FilterState(phi, B, state.outer, n)
        _trace_row(trace, state, innovation, truth)
    return state


def kfl_run(data, config=None, lm=None, q0=None, problem=None, truth=None,
            R=None, alphas=None, trace=False):
    """Outer KFL loop with ``B_{i,0} = I / alpha_i``.

    ``alpha_i`` comes from the discrepancy principle on the stacked system
    linearised at the current iterate, unless ``alphas`` fixes them.
    """
    from .problem import ScatteringProblem

    lm = lm or LMConfig(rho=config.rho, max_outer=config.iters)
    R = R or WeightOperator(config.r)
    problem = problem or ScatteringProblem.from_config(config)
    f = _data_matrix(data)
    phi = _vector(q0) if q0 is not None else np.zeros(problem.dim, dtype=complex)
    result = RunResult("kfl", [phi.copy()], grid=problem.grid)
    rows = [] if trace else None
    truth_v = None if truth is None else _vector(truth)
    tracker = _Tracker(result, truth, lm.blowup)
    tracker.start(phi)
    n_outer = lm.max_outer if alphas is None else min(lm.max_outer, len(alphas))
    try:
        for i in range(n_outer):
            blocks, F = problem.linearize(phi)
            residual = (f - F).T.ravel()
            result.residuals.append(R.norm(residual))
            if not np.any(residual):
                result.alphas.append(float("nan"))
                result.clamped.append(False)
                tracker.record(phi.copy())
                result.stop_reason = "zero_residual"
                break
            if alphas is None:
                alpha, clamped = choose_alpha(stack(blocks), residual, R, lm,
                                              _last(result.alphas))
            else:
                alpha, clamped = float(alphas[i]), False
            result.alphas.append(alpha)
            result.clamped.append(clamped)
            op = LinearizedOperator(blocks, phi, F)
            state = kfl_sweep(FilterState.initial(phi, alpha, i), f, op, R,
                              trace=rows, truth=truth_v)
            phi = state.phi
            if tracker.record(phi.copy()):
                break
    except (SolverFailure, np.linalg.LinAlgError) as exc:
        result.stop_reason = "failure"
        result.error = f"{type(exc).__name__}: {exc}"
        log.error("kfl: %s", result.error)
    result.alphas.append(float("nan"))
    result.trace = rows or []
    return result


def ekf_sweep(state, data, problem, R, trace=None, truth=None):
    """Process every direction once, relinearising before each measurement."""
    f = _data_matrix(data)
    phi, B = state.phi, state.B
    for n in range(1, f.shape[1] + 1):
        try:
            A, far = problem.linearize_direction(phi, n)
        except SolverFailure as exc:
            exc.args = (f"outer {state.outer}, direction {n}: {exc}",)
            raise
        innovation = f[:, n - 1] - far
        phi, B, _ = kalman_update(phi, B, A, innovation, R)
        state = FilterState(phi, B, state.outer, n)
        _trace_row(trace, state, innovation, truth)
    return state


def ekf_run(data, config=None, alpha0=None, iters=None, q0=None, problem=None,
            truth=None, R=None, trace=False, blowup=1e3):
    """Iterated EKF; the weight carries over between outer iterations."""
    from .problem import ScatteringProblem

    alpha0 = alpha0 if alpha0 is not None else config.alpha0
    iters = iters if iters is not None else config.iters
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    R = R or WeightOperator(config.r)
    problem = problem or ScatteringProblem.from_config(config)
    phi = _vector(q0) if q0 is not None else np.zeros(problem.dim, dtype=complex)
    result = RunResult("ekf", [phi.copy()], grid=problem.grid)
    rows = [] if trace else None
    truth_v = None if truth is None else _vector(truth)
    tracker = _Tracker(result, truth, blowup)
    tracker.start(phi)
    state = FilterState.initial(phi, alpha0)
    try:
        for i in range(iters):
            result.alphas.append(alpha0 if i == 0 else float("nan"))
            state = ekf_sweep(FilterState(state.phi, state.B, i, 0), data, problem, R,
                              trace=rows, truth=truth_v)
            if tracker.record(state.phi.copy()):
                break
    except (SolverFailure, np.linalg.LinAlgError) as exc:
        result.alphas = result.alphas[:len(result.phis) - 1]
        result.stop_reason = "failure"
        result.error = f"{type(exc).__name__}: {exc}"
        log.error("ekf: %s", result.error)
    result.alphas.append(float("nan"))
    result.final_B = state.B
    result.trace = rows or []
    return result
