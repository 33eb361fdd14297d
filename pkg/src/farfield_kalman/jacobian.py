"""Frechet derivative of the far-field map as dense matrices.

For incident direction ``theta_n`` and observation ``x_j`` the derivative
acts on a cell perturbation ``m`` as

    (k^2 / 4pi) * integral K_q(x_j, y) u_q(y, theta_n) m(y) dy

where ``K_q(x, y)`` equals the total field at ``y`` for the plane wave of
direction ``-x``.  On the periodic grid this identity holds exactly, so
the kernel costs one solve per observation direction.  The integral over
each cell is the midpoint rule on its sub-cells, which makes the matrix
the exact derivative of :meth:`ForwardModel.far_field_matrix`.
"""
import csv
from dataclasses import dataclass

import numpy as np

from .forward import ForwardModel, cell_sums, sample_at_centers, to_fine
from .grid import Medium, make_directions

__all__ = ["LinearizedOperator", "DirectionFields", "kernel_K", "kernel_K_direct",
           "assemble_frechet", "assemble_block", "stack", "dump_blocks"]


def _key(v):
    return (round(float(v[0]), 12) + 0.0, round(float(v[1]), 12) + 0.0)


class DirectionFields:
    """Total fields for a fixed contrast, solved on demand and cached per direction."""

    def __init__(self, model, q):
        self.model = model
        self.q = to_fine(q, model.grid)
        self._cache = {}
        self.solves = 0

    def support(self, direction, index=None):
        key = _key(direction)
        if key not in self._cache:
            total = self.model.solve(self.q, direction, direction_index=index)
            self.solves += 1
            self._cache[key] = total.support_values.copy()
        return self._cache[key]

    def kernel(self):
        """``K_q(x_j, .)`` on support nodes, shape ``(J, ns, ns)``."""
        return np.stack([self.support(-x, j) for j, x in
                         enumerate(self.model.obs_dirs.vectors, start=1)])


@dataclass(frozen=True, eq=False)
class LinearizedOperator:
    """Per-direction derivative blocks at ``base``.

    ``blocks[n-1]`` is the ``(J, (2M)^2)`` matrix for incident direction n,
    ``base_farfield[:, n-1]`` the far field of ``base`` for that direction.
    """
    blocks: np.ndarray
    base: Medium
    base_farfield: np.ndarray

    @property
    def N(self):
        return self.blocks.shape[0]

    @property
    def J(self):
        return self.blocks.shape[1]

    def block(self, n):
        return self.blocks[n - 1]


def _block_from_fields(model, K, u):
    """``(J, P)`` block from kernel ``K`` (J, ns, ns) and total field ``u`` (ns, ns)."""
    prod = cell_sums(K * u[None], model.grid)
    return model.far_weight * prod.reshape(K.shape[0], -1)


def kernel_K(base, model):
    """``K_q(x_j, y_m)`` at the cell centers, shape ``(J, (2M)^2)``."""
    K = DirectionFields(model, base).kernel()
    return sample_at_centers(K, model.grid).reshape(K.shape[0], -1)


def kernel_K_direct(base, model, dense_matrix):
    """Kernel from its defining representation, one point source per node.

    Solves ``w(., y) = k^2 C q (w(., y) + Phi(., y))`` for every node ``y``
    with the dense convolution matrix ``C`` and sums
    ``exp(-i k x . y) + k^2 sum_z h^2 exp(-i k x . z) q(z) Phi_q(z, y)``.
    Returns values on all grid nodes, shape ``(J, n, n)``.  Small grids only.
    """
    grid = model.grid
    k2 = model.k ** 2
    h2 = grid.h ** 2
    q = to_fine(base, grid).ravel()
    C = np.asarray(dense_matrix)
    phi = C / h2                                   # Phi(x_i, y_j) on nodes
    A = np.eye(q.size) - k2 * C * q[None, :]
    w = np.linalg.solve(A, k2 * C @ (q[:, None] * phi))
    phi_q = phi + w                                # column j: Phi_q(., y_j)
    a = grid.axis
    x, y = np.meshgrid(a, a, indexing="ij")
    pts = np.stack([x.ravel(), y.ravel()], axis=-1)
    b = np.exp(-1j * model.k * (model.obs_dirs.vectors @ pts.T))   # (J, n^2)
    K = b + k2 * h2 * (b * q[None, :]) @ phi_q
    return K.reshape(-1, grid.n, grid.n)


def assemble_block(base, model, n_index, theta, fields=None):
    """Derivative block and far field for one incident direction.

    Returns ``(block (J, P), farfield (J,))``.
    """
    fields = fields if fields is not None else DirectionFields(model, base)
    u = fields.support(theta, n_index)
    K = fields.kernel()
    block = _block_from_fields(model, K, u)
    s = model.grid.support_slice
    farfield = model.far_weight * (model.obs_exp @ (fields.q[s, s] * u).ravel())
    return block, farfield


def assemble_frechet(base, config=None, model=None, inc_dirs=None):
    """Derivative blocks for all incident directions at ``base``.

    Total fields are solved once per distinct direction among the incident
    directions and the negated observation directions.
    """
    if model is None:
        model = ForwardModel.from_config(config)
    if inc_dirs is None:
        inc_dirs = make_directions(config.N)
    fields = DirectionFields(model, base)
    K = fields.kernel()
    s = model.grid.support_slice
    blocks, far = [], []
    for n, theta in enumerate(inc_dirs.vectors, start=1):
        u = fields.support(theta, n)
        blocks.append(_block_from_fields(model, K, u))
        far.append(model.far_weight * (model.obs_exp @ (fields.q[s, s] * u).ravel()))
    return LinearizedOperator(np.stack(blocks), base, np.stack(far, axis=1))


def stack(op):
    """Vertical concatenation of the blocks, ``(J N, P)``."""
    blocks = op.blocks if isinstance(op, LinearizedOperator) else np.asarray(op)
    return blocks.reshape(-1, blocks.shape[-1])


def dump_blocks(op, path):
    """Write blocks as CSV ``n,j,m,re,im`` (1-based n, j; 0-based flat cell m)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "j", "m", "re", "im"])
        for n, block in enumerate(op.blocks, start=1):
            for j, row in enumerate(block, start=1):
                for m, v in enumerate(row):
                    w.writerow([n, j, m, repr(float(v.real)), repr(float(v.imag))])
