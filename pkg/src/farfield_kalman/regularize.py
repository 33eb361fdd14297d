"""Tikhonov steps, the discrepancy principle and full-data Levenberg-Marquardt."""
import logging
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .forward import SolverFailure
from .grid import Medium
from .jacobian import stack

__all__ = ["WeightOperator", "LMConfig", "MorozovResult", "RunResult",
           "NotPositiveDefinite", "hermitian_solve", "tikhonov_step",
           "discrepancy", "morozov_alpha", "choose_alpha", "flm_run"]

log = logging.getLogger(__name__)


class NotPositiveDefinite(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class WeightOperator:
    """Observation weight ``R = r^2 I``."""
    r: float = 3.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")

    @property
    def variance(self):
        return self.r ** 2

    def matrix(self, dim):
        return self.variance * np.eye(dim)

    def solve(self, v):
        """``R^{-1} v``."""
        return np.asarray(v) / self.variance

    def norm(self, v):
        """Norm in the ``R^{-1}``-weighted inner product."""
        return float(np.linalg.norm(v)) / self.r


@dataclass(frozen=True)
class LMConfig:
    rho: float = 0.4
    alpha_min: float = 1e-8
    alpha_max: float = 1e8
    bisect_tol: float = 1e-3
    max_bisect: int = 60
    max_outer: int = 10
    stagnation: float = 1e-6
    blowup: float = 1e3

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if not 0 < self.alpha_min < self.alpha_max:
            raise ValueError("need 0 < alpha_min < alpha_max")


def hermitian_solve(mat, rhs):
    """Solve ``mat x = rhs`` for Hermitian positive definite ``mat`` (Cholesky).

    One step of iterative refinement is applied.
    """
    mat = np.asarray(mat)
    rhs = np.asarray(rhs)
    scale = max(np.abs(mat).max(), np.finfo(float).tiny)
    if np.abs(mat - mat.conj().T).max() > 1e-12 * scale:
        raise ValueError("matrix is not Hermitian")
    try:
        factor = scipy.linalg.cho_factor(mat, lower=False, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    x = scipy.linalg.cho_solve(factor, rhs)
    return x + scipy.linalg.cho_solve(factor, rhs - mat @ x)


class _Normal:
    """Normal equations of a stacked linear system, reused across alphas."""

    def __init__(self, A, residual, R):
        self.A = np.asarray(A)
        self.residual = np.asarray(residual)
        self.R = R
        self.gram = self.A.conj().T @ R.solve(self.A)
        self.gram = 0.5 * (self.gram + self.gram.conj().T)
        self.rhs = self.A.conj().T @ R.solve(self.residual)

    def step(self, alpha):
        mat = self.gram + alpha * np.eye(self.gram.shape[0])
        return hermitian_solve(mat, self.rhs)

    def discrepancy(self, alpha):
        return self.R.norm(self.residual - self.A @ self.step(alpha))


def tikhonov_step(A, residual, alpha, R):
    """``(alpha I + A^H R^-1 A)^-1 A^H R^-1 residual``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not np.any(residual):
        return np.zeros(np.shape(A)[1], dtype=complex)
    return _Normal(A, residual, R).step(alpha)


def discrepancy(A, residual, alpha, R):
    """Linearised residual norm ``||residual - A step(alpha)||_{R^-1}``."""
    return _Normal(A, residual, R).discrepancy(alpha)


class MorozovResult(NamedTuple):
    alpha: float
    discrepancy: float
    target: float
    clamped: bool


def morozov_alpha(A, residual, R, rho, lm=None):
    """Regularisation parameter with linearised residual ``rho`` times the residual.

    Bisection in ``log(alpha)``; the linearised residual is nondecreasing in
    alpha.  Without a sign change on the bracket the nearer end is returned
    with ``clamped=True``.
    """
    lm = lm or LMConfig(rho=rho)
    normal = _Normal(A, residual, R)
    target = rho * R.norm(residual)
    lo, hi = lm.alpha_min, lm.alpha_max
    d_lo = normal.discrepancy(lo)
    if d_lo >= target:
        return MorozovResult(lo, d_lo, target, abs(d_lo - target) > lm.bisect_tol * target)
    d_hi = normal.discrepancy(hi)
    if d_hi <= target:
        return MorozovResult(hi, d_hi, target, abs(d_hi - target) > lm.bisect_tol * target)
    log_lo, log_hi = np.log(lo), np.log(hi)
    alpha, d = hi, d_hi
    # bisect until the bracket is negligible, not merely until bisect_tol
    # holds: near alpha_max the discrepancy is flat in alpha
    for _ in range(lm.max_bisect):
        mid = 0.5 * (log_lo + log_hi)
        alpha = float(np.exp(mid))
        d = normal.discrepancy(alpha)
        if d == target or log_hi - log_lo < 1e-10:
            break
        if d < target:
            log_lo = mid
        else:
            log_hi = mid
    if abs(d - target) > lm.bisect_tol * target:
        log.warning("discrepancy bisection ended %.2e from target", abs(d - target) / target)
    return MorozovResult(alpha, d, target, False)


def choose_alpha(A, residual, R, lm, previous=None):
    """Discrepancy-principle alpha for one outer iteration.

    When even ``alpha_min`` leaves the linearised residual above the target
    (the residual has reached the noise floor) the previous iteration's
    alpha is kept instead of collapsing to ``alpha_min``.
    Returns ``(alpha, clamped)``.
    """
    choice = morozov_alpha(A, residual, R, lm.rho, lm)
    if choice.clamped and choice.alpha == lm.alpha_min and previous is not None:
        return previous, True
    return choice.alpha, choice.clamped


@dataclass
class RunResult:
    """Iterates and diagnostics of one reconstruction.

    ``phis[i]`` is the i-th outer iterate (``phis[0]`` the initial guess),
    ``alphas[i]`` the parameter used to go from iterate i to i+1 (NaN where
    none was chosen), ``mse[i]`` the error against the truth when known.
    """
    algo: str
    phis: list
    alphas: list = field(default_factory=list)
    mse: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    clamped: list = field(default_factory=list)
    blew_up: bool = False
    stop_reason: str = "max_iter"
    error: str = ""
    trace: list = field(default_factory=list)
    final_B: np.ndarray = None
    grid: object = None

    @property
    def iterates(self):
        if self.grid is None:
            return list(self.phis)
        return [Medium.from_vector(self.grid, p) for p in self.phis]


def _last(alphas):
    finite = [a for a in alphas if np.isfinite(a)]
    return finite[-1] if finite else None


def _vector(q):
    return q.vector.copy() if isinstance(q, Medium) else np.array(q, dtype=complex)


def _data_matrix(data):
    return np.asarray(getattr(data, "values", data), dtype=complex)


class _Tracker:
    """Shared bookkeeping for the outer loops: MSE, blow-up and timing."""

    def __init__(self, result, truth, blowup):
        self.result = result
        self.truth = None if truth is None else _vector(truth)
        self.blowup = blowup
        self.t0 = time.perf_counter()
        self.ref = None

    def error(self, phi):
        if self.truth is None:
            return float("nan")
        d = phi - self.truth
        return float(np.vdot(d, d).real)

    def start(self, phi0):
        e0 = self.error(phi0)
        self.result.mse.append(e0)
        if self.truth is not None:
            self.ref = e0 if e0 > 0 else float(np.vdot(self.truth, self.truth).real)

    def record(self, phi):
        """Append iterate; return True when the run must halt."""
        res = self.result
        res.phis.append(phi)
        e = self.error(phi)
        res.mse.append(e)
        res.seconds.append(time.perf_counter() - self.t0)
        self.t0 = time.perf_counter()
        if not np.all(np.isfinite(phi)) or (
                self.ref is not None and self.ref > 0 and e > self.blowup * self.ref):
            res.blew_up = True
            res.stop_reason = "blow_up"
            log.warning("%s: blow-up detected at iteration %d (mse %.3g)",
                        res.algo, len(res.phis) - 1, e)
            return True
        return False


def flm_run(data, config=None, lm=None, q0=None, problem=None, truth=None,
            R=None, alphas=None):
    """Full-data Levenberg-Marquardt on the stacked system of all directions.

    ``alphas``, when given, fixes the regularisation parameter of each outer
    iteration instead of choosing it by the discrepancy principle.
    """
    from .problem import ScatteringProblem

    lm = lm or LMConfig(rho=config.rho, max_outer=config.iters)
    R = R or WeightOperator(config.r)
    problem = problem or ScatteringProblem.from_config(config)
    f = _data_matrix(data).T.ravel()
    phi = _vector(q0) if q0 is not None else np.zeros(problem.dim, dtype=complex)
    result = RunResult("flm", [phi.copy()], grid=problem.grid)
    tracker = _Tracker(result, truth, lm.blowup)
    tracker.start(phi)
    n_outer = lm.max_outer if alphas is None else min(lm.max_outer, len(alphas))
    prev_res = None
    try:
        for i in range(n_outer):
            blocks, F = problem.linearize(phi)
            residual = f - F.T.ravel()
            res_norm = R.norm(residual)
            result.residuals.append(res_norm)
            if res_norm == 0:
                result.alphas.append(float("nan"))
                result.clamped.append(False)
                tracker.record(phi.copy())
                result.stop_reason = "zero_residual"
                break
            A = stack(blocks)
            if alphas is None:
                alpha, clamped = choose_alpha(A, residual, R, lm, _last(result.alphas))
            else:
                alpha, clamped = float(alphas[i]), False
            result.alphas.append(alpha)
            result.clamped.append(clamped)
            phi = phi + tikhonov_step(A, residual, alpha, R)
            if tracker.record(phi.copy()):
                break
            if prev_res is not None and abs(res_norm - prev_res) < lm.stagnation * prev_res:
                result.stop_reason = "stagnation"
                break
            prev_res = res_norm
    except (SolverFailure, np.linalg.LinAlgError) as exc:
        result.stop_reason = "failure"
        result.error = f"{type(exc).__name__}: {exc}"
        log.error("flm: %s", result.error)
    result.alphas.append(float("nan"))
    return result
