"""Observation operators in the form the reconstruction loops consume.

A problem exposes

* ``linearize(phi) -> (blocks (N, J, P), farfield (J, N))``
* ``linearize_direction(phi, n) -> (block (J, P), farfield_n (J,))``

for the stacked and the per-measurement linearisations.
"""
import numpy as np

from .forward import ForwardModel
from .grid import Medium, make_directions
from .jacobian import DirectionFields, assemble_block, assemble_frechet

__all__ = ["ScatteringProblem", "LinearProblem"]


class ScatteringProblem:
    """Far-field map of the Lippmann-Schwinger solver on the inversion grid."""

    def __init__(self, model, inc_dirs):
        self.model = model
        self.inc_dirs = inc_dirs
        self.grid = model.cell_grid
        self.dim = self.grid.size
        self.solves = 0

    @classmethod
    def from_config(cls, config):
        return cls(ForwardModel.from_config(config), make_directions(config.N))

    @property
    def N(self):
        return self.inc_dirs.count

    def _medium(self, phi):
        return phi if isinstance(phi, Medium) else Medium.from_vector(self.grid, phi)

    def linearize(self, phi):
        op = assemble_frechet(self._medium(phi), model=self.model, inc_dirs=self.inc_dirs)
        return op.blocks, op.base_farfield

    def linearize_direction(self, phi, n):
        fields = DirectionFields(self.model, self._medium(phi))
        block, far = assemble_block(None, self.model, n, self.inc_dirs[n], fields)
        self.solves += fields.solves
        return block, far

    def evaluate(self, phi):
        return self.model.far_field_matrix(self._medium(phi), self.inc_dirs)


class LinearProblem:
    """Fixed matrices ``A_n``; the observation is ``A_n phi``."""

    def __init__(self, blocks):
        self.blocks = np.asarray(blocks, dtype=complex)
        if self.blocks.ndim != 3:
            raise ValueError("blocks must have shape (N, J, P)")
        self.grid = None
        self.dim = self.blocks.shape[2]

    @property
    def N(self):
        return self.blocks.shape[0]

    def linearize(self, phi):
        phi = np.asarray(phi)
        return self.blocks, (self.blocks @ phi).T

    def linearize_direction(self, phi, n):
        block = self.blocks[n - 1]
        return block, block @ np.asarray(phi)

    def evaluate(self, phi):
        return (self.blocks @ np.asarray(phi)).T
