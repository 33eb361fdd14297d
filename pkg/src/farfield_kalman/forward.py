"""Lippmann-Schwinger solver and far-field patterns.

The integral equation ``u = u_inc + k^2 Phi * (q u)`` is discretised with a
periodised, disk-truncated fundamental solution whose Fourier coefficients
are known in closed form (Vainikko's scheme).  The convolution is applied
with FFTs on a uniform periodic grid and the equation is solved with
restarted GMRES.

Grid nodes sit at the midpoints of ``p x p`` sub-cells of every coarse cell,
so a piecewise-constant medium is represented exactly, and the far field is
the midpoint rule on those sub-cells.
"""
import functools
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy.sparse.linalg import LinearOperator, gmres

from .grid import CellGrid, DirectionSet, Medium, make_directions, make_grid
from .specfun import bessel_j0, bessel_j1, hankel0_first, hankel1_first

__all__ = ["FineGrid", "make_fine_grid", "TotalField", "FarFieldSet",
           "SolverFailure", "ForwardModel", "incident_plane_wave",
           "kernel_symbol", "solve_lippmann_schwinger", "far_field",
           "born_far_field", "forward_map", "dense_convolution_matrix",
           "solve_lippmann_schwinger_dense", "to_fine", "cell_sums",
           "sample_at_centers", "sample_on_fine"]

log = logging.getLogger(__name__)

# Largest pairwise distance inside [-S, S]^2 is 2*sqrt(2)*S; the truncation
# radius must cover it and the periodic images must stay outside it.
_EXACT_PERIOD_FACTOR = 2.0 + 2.0 * np.sqrt(2.0)


class SolverFailure(RuntimeError):
    """GMRES did not reach the requested tolerance."""

    def __init__(self, message, residuals=(), direction_index=None):
        super().__init__(message)
        self.residuals = list(residuals)
        self.direction_index = direction_index


@dataclass(frozen=True)
class FineGrid:
    """Uniform periodic grid of ``n x n`` nodes with spacing ``S / (M refine)``.

    Node ``i`` along either axis sits at ``-period/2 + (i + 1/2) h``.
    """
    S: float
    M: int
    n: int
    refine: int

    @property
    def h(self):
        return self.S / (self.M * self.refine)

    @property
    def period(self):
        return self.n * self.h

    @property
    def axis(self):
        return -0.5 * self.period + (np.arange(self.n) + 0.5) * self.h

    @property
    def offset(self):
        """Index of the first node inside ``[-S, S]``."""
        return self.n // 2 - self.M * self.refine

    @property
    def support_size(self):
        return 2 * self.M * self.refine

    @property
    def support_slice(self):
        return slice(self.offset, self.offset + self.support_size)

    @property
    def support_axis(self):
        return self.axis[self.support_slice]

    @property
    def support_points(self):
        """Node coordinates inside the sampling square, shape ``(ns, ns, 2)``."""
        a = self.support_axis
        x, y = np.meshgrid(a, a, indexing="ij")
        return np.stack([x, y], axis=-1)

    @property
    def exact(self):
        """True when the periodised kernel equals Phi for every support pair."""
        return self.period >= _EXACT_PERIOD_FACTOR * self.S * (1 - 1e-12)

    @property
    def cutoff(self):
        if self.exact:
            return 2.0 * np.sqrt(2.0) * self.S
        return 0.5 * self.period

    @property
    def cell_grid(self):
        return make_grid(self.S, self.M)


def make_fine_grid(S, M, n, refine=None):
    """Build a :class:`FineGrid` with ``n`` points per axis.

    Without ``refine`` the largest sub-cell factor is taken for which the
    period still makes the kernel periodisation exact (at least 1).
    """
    if n < 2 or n & (n - 1):
        raise ValueError(f"n must be a power of two, got {n}")
    if refine is None:
        refine = max(1, int(np.floor(n / (_EXACT_PERIOD_FACTOR * M) + 1e-12)))
    grid = FineGrid(float(S), int(M), int(n), int(refine))
    if grid.period < 4 * S * (1 - 1e-12):
        raise ValueError(f"period {grid.period} < 4S; increase n or decrease refine")
    if not grid.exact:
        log.warning("fine grid n=%d: period %.3g below %.3g S, kernel truncation is "
                    "not exact on the full square", n, grid.period, _EXACT_PERIOD_FACTOR)
    return grid


def incident_plane_wave(direction, k, points):
    """``exp(i k x . direction)`` at ``points`` (array ``(..., 2)``)."""
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1) > 1e-12:
        raise ValueError("direction must be a unit vector")
    points = np.asarray(points, dtype=float)
    return np.exp(1j * k * (points @ direction))


def _truncated_kernel_transform(s, k, R):
    """Fourier transform of ``(i/4) H0(k|x|)`` restricted to ``|x| < R``."""
    s = np.asarray(s, dtype=float)
    kR = k * R
    h0 = hankel0_first(kR)
    h1 = hankel1_first(kR)
    j0 = bessel_j0(s * R)
    j1 = bessel_j1(s * R)
    num = 1 + 0.5j * np.pi * R * (s * h0 * j1 - k * h1 * j0)
    near = np.abs(s - k) < 1e-6 * k
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / (s * s - k * k)
    if near.any():
        # removable singularity at s = k: l'Hopital on numerator / (s^2 - k^2)
        z = k * R
        dj1 = bessel_j0(z) - bessel_j1(z) / z
        dnum = 0.5j * np.pi * R * (h0 * (bessel_j1(z) + z * dj1) + k * R * h1 * bessel_j1(z))
        out = np.where(near, dnum / (2 * k), out)
    return out


@functools.lru_cache(maxsize=16)
def kernel_symbol(k, grid):
    """FFT-ordered multipliers of the periodised kernel on ``grid``."""
    xi = 2 * np.pi * np.fft.fftfreq(grid.n, d=grid.h)
    sx, sy = np.meshgrid(xi, xi, indexing="ij")
    sym = _truncated_kernel_transform(np.hypot(sx, sy), k, grid.cutoff)
    sym.setflags(write=False)
    return sym


def to_fine(medium, grid):
    """Piecewise-constant injection of cell values onto the periodic grid."""
    if isinstance(medium, Medium):
        if medium.grid != grid.cell_grid:
            raise ValueError("medium grid does not match fine grid")
        p = grid.refine
        out = np.zeros((grid.n, grid.n), dtype=complex)
        s = grid.support_slice
        out[s, s] = np.repeat(np.repeat(medium.values, p, axis=0), p, axis=1)
        return out
    arr = np.asarray(medium, dtype=complex)
    if arr.shape != (grid.n, grid.n):
        raise ValueError(f"fine contrast must have shape {(grid.n, grid.n)}")
    return arr


def cell_sums(support_values, grid):
    """Sum ``(..., ns, ns)`` node values over each coarse cell -> ``(..., 2M, 2M)``."""
    p, m2 = grid.refine, 2 * grid.M
    v = np.asarray(support_values)
    return v.reshape(v.shape[:-2] + (m2, p, m2, p)).sum(axis=(-3, -1))


def sample_at_centers(support_values, grid):
    """Node nearest each cell center (the center itself when ``refine`` is odd)."""
    p = grid.refine
    i = p // 2
    return np.asarray(support_values)[..., i::p, i::p]


def sample_on_fine(indicator, grid, supersample=8):
    """Area fraction of each periodic-grid sub-cell inside ``indicator(x, y)``."""
    t = (np.arange(supersample) + 0.5) / supersample - 0.5
    a = grid.axis
    frac = np.zeros((grid.n, grid.n))
    for dx in t:
        for dy in t:
            x, y = np.meshgrid(a + dx * grid.h, a + dy * grid.h, indexing="ij")
            frac += indicator(x, y)
    return frac / supersample ** 2


@dataclass
class TotalField:
    """Total field on the periodic grid for one incident direction."""
    grid: FineGrid
    values: np.ndarray
    direction: np.ndarray
    k: float
    residual: float = 0.0
    iterations: int = 0

    @property
    def support_values(self):
        s = self.grid.support_slice
        return self.values[s, s]


@dataclass(frozen=True, eq=False)
class FarFieldSet:
    """Far-field samples ``values[j-1, n-1] = u_inf(x_j, theta_n)``."""
    values: np.ndarray
    obs_dirs: DirectionSet
    inc_dirs: DirectionSet
    noise_sigma: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.obs_dirs.count, self.inc_dirs.count):
            raise ValueError(f"far field shape {v.shape} does not match direction sets")
        if not np.all(np.isfinite(v)):
            raise ValueError("far field values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def stacked(self):
        """Column-major stacking: direction 1's J samples first."""
        return self.values.T.ravel()


class ForwardModel:
    """Solver state for one wavenumber and periodic grid.

    Holds the kernel multipliers and the far-field exponentials so repeated
    solves and far-field evaluations are cheap.
    """

    def __init__(self, k, grid, obs_dirs, tol=1e-8, restart=50, max_iter=500):
        self.k = float(k)
        self.grid = grid
        self.obs_dirs = obs_dirs
        self.tol = tol
        self.restart = restart
        self.max_iter = max_iter
        self.symbol = kernel_symbol(self.k, grid)
        pts = grid.support_points.reshape(-1, 2)
        # exp(-i k x_j . y) on support nodes, (J, ns*ns)
        self.obs_exp = np.exp(-1j * self.k * (obs_dirs.vectors @ pts.T))
        self.far_weight = self.k ** 2 * grid.h ** 2 / (4 * np.pi)

    @classmethod
    def from_config(cls, config, data=False):
        n = config.fine_grid if (not data or config.inverse_crime) else config.data_grid
        grid = make_fine_grid(config.S, config.M, n)
        return cls(config.k, grid, make_directions(config.J), tol=config.tol)

    @property
    def cell_grid(self):
        return self.grid.cell_grid

    def convolve(self, v):
        """Periodised-kernel convolution of nodal values ``v`` (n x n)."""
        return scipy.fft.ifft2(self.symbol * scipy.fft.fft2(v))

    def residual(self, u, q, u_inc):
        r = u - u_inc - self.k ** 2 * self.convolve(q * u)
        return np.linalg.norm(r) / np.linalg.norm(u_inc)

    def incident(self, direction):
        a = self.grid.axis
        x, y = np.meshgrid(a, a, indexing="ij")
        return incident_plane_wave(direction, self.k, np.stack([x, y], axis=-1))

    def solve(self, q, direction, direction_index=None):
        """Total field for contrast ``q`` (Medium or fine array)."""
        q = to_fine(q, self.grid)
        direction = np.asarray(direction, dtype=float)
        u_inc = self.incident(direction)
        if not np.any(q):
            return TotalField(self.grid, u_inc, direction, self.k)
        n = self.grid.n
        k2 = self.k ** 2

        def matvec(x):
            u = x.reshape(n, n)
            return (u - k2 * self.convolve(q * u)).ravel()

        op = LinearOperator((n * n, n * n), matvec=matvec, dtype=complex)
        history = []
        restart = min(self.restart, self.max_iter)
        sol, info = gmres(op, u_inc.ravel(), rtol=0.1 * self.tol, atol=0.0,
                          restart=restart, maxiter=-(-self.max_iter // restart),
                          callback=history.append, callback_type="pr_norm")
        u = sol.reshape(n, n)
        res = self.residual(u, q, u_inc)
        if info != 0 or not res <= self.tol:
            raise SolverFailure(
                f"GMRES stopped at relative residual {res:.3e} after {len(history)} "
                f"iterations (tol {self.tol:.1e})", history, direction_index)
        return TotalField(self.grid, u, direction, self.k, res, len(history))

    def far_field_from(self, q, total):
        """Far field for every observation direction from a solved total field."""
        q = to_fine(q, self.grid)
        s = self.grid.support_slice
        integrand = (q[s, s] * total.values[s, s]).ravel()
        return self.far_weight * (self.obs_exp @ integrand)

    def born(self, q, direction):
        q = to_fine(q, self.grid)
        s = self.grid.support_slice
        u_inc = self.incident(direction)
        return self.far_weight * (self.obs_exp @ (q[s, s] * u_inc[s, s]).ravel())

    def far_field_matrix(self, q, inc_dirs):
        """``(J, N)`` far-field samples for every incident direction."""
        q = to_fine(q, self.grid)
        cols = []
        for n, theta in enumerate(inc_dirs.vectors, start=1):
            total = self.solve(q, theta, direction_index=n)
            cols.append(self.far_field_from(q, total))
        return np.stack(cols, axis=1)


def solve_lippmann_schwinger(medium, direction, k, fine, tol=1e-8):
    model = ForwardModel(k, fine, make_directions(1), tol=tol)
    return model.solve(medium, direction)


def far_field(total, medium, obs_dirs):
    """``(k^2 / 4pi) sum_nodes h^2 exp(-i k x_j . y) u(y) q(y)`` for each x_j."""
    model = ForwardModel(total.k, total.grid, obs_dirs)
    return model.far_field_from(medium, total)


def born_far_field(medium, direction, k, fine, obs_dirs):
    """Far field with the total field replaced by the incident wave."""
    return ForwardModel(k, fine, obs_dirs).born(medium, direction)


def forward_map(medium, config, model=None):
    """Noise-free far-field data of ``medium`` as a :class:`FarFieldSet`."""
    if model is None:
        model = ForwardModel.from_config(config)
    inc = make_directions(config.N)
    values = model.far_field_matrix(medium, inc)
    return FarFieldSet(values, model.obs_dirs, inc, 0.0)


def dense_convolution_matrix(k, grid):
    """Dense ``(n^2, n^2)`` matrix of :meth:`ForwardModel.convolve`.

    Built from an explicit inverse DFT of the kernel multipliers, without
    FFTs; intended for small grids only.
    """
    n = grid.n
    if n > 32:
        raise ValueError("dense oracle limited to n <= 32")
    sym = kernel_symbol(k, grid)
    idx = np.arange(n)
    w = np.exp(2j * np.pi * np.outer(idx, idx) / n)   # w[d, f]
    # c[d1, d2] = n^-2 sum_f sym[f1, f2] exp(2 pi i (f . d) / n)
    c = w @ sym @ w.T / n ** 2
    d = (idx[:, None] - idx[None, :]) % n              # d[i, j] = i - j mod n
    mat = c[d[:, None, :, None], d[None, :, None, :]]  # [i1, i2, j1, j2]
    return mat.reshape(n * n, n * n)


def solve_lippmann_schwinger_dense(medium, direction, k, fine):
    """Direct solve of the discrete equation (test oracle, n <= 32)."""
    q = to_fine(medium, fine).ravel()
    a = fine.axis
    x, y = np.meshgrid(a, a, indexing="ij")
    u_inc = incident_plane_wave(direction, k, np.stack([x, y], axis=-1)).ravel()
    C = dense_convolution_matrix(k, fine)
    A = np.eye(q.size) - k ** 2 * C * q[None, :]
    return np.linalg.solve(A, u_inc).reshape(fine.n, fine.n)
