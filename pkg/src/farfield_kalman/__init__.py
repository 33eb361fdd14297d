"""Inverse medium scattering from far-field data with Kalman-filter reconstructions.

Modules
-------
specfun     Bessel/Hankel functions of order 0 and 1.
grid        Cell grid, direction sets, test media and the MSE.
forward     Lippmann-Schwinger solver (periodised kernel + FFT + GMRES) and far fields.
jacobian    Frechet derivative of the far-field map as dense blocks.
regularize  Tikhonov step, discrepancy principle, full-data Levenberg-Marquardt.
kalman      Kalman-filter Levenberg-Marquardt and the iterated extended Kalman filter.
harness     Synthetic data, experiment runs, CSV/PNG outputs.
"""
from .config import ExperimentConfig
from .forward import (FarFieldSet, FineGrid, ForwardModel, SolverFailure,
                      forward_map, make_fine_grid, solve_lippmann_schwinger)
from .grid import (CellGrid, DirectionSet, Medium, ShapeId,
                   characteristic_medium, make_directions, make_grid, mse)
from .harness import add_noise, compare, generate_data, run_experiment
from .jacobian import LinearizedOperator, assemble_frechet, kernel_K, stack
from .kalman import FilterState, ekf_run, kfl_run
from .problem import LinearProblem, ScatteringProblem
from .regularize import LMConfig, WeightOperator, flm_run, morozov_alpha

__version__ = "0.1.0"
