"""Experiment driver: synthetic data, reconstruction runs and their outputs."""
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .config import ExperimentConfig
from .fileio import (write_farfield, write_json, write_medium_csv,
                     write_mse_csv, write_trace_csv)
from .forward import FarFieldSet, ForwardModel, SolverFailure
from .grid import Medium, ShapeId, characteristic_medium, make_directions, mse
from .kalman import ekf_run, kfl_run
from .problem import ScatteringProblem
from .regularize import LMConfig, WeightOperator, flm_run

__all__ = ["NoiseModel", "ExperimentReport", "add_noise", "generate_data",
           "true_medium", "run_experiment", "compare", "render_heatmap",
           "HEATMAP_SCALE"]

log = logging.getLogger(__name__)

HEATMAP_SCALE = (0.0, 0.12)
RNG_NAME = "numpy Philox"


@dataclass(frozen=True)
class NoiseModel:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


def add_noise(clean, model):
    """Add complex Gaussian noise, real and imaginary parts ``N(0, sigma^2)``."""
    meta = dict(clean.meta, seed=model.seed, rng=RNG_NAME)
    if model.sigma == 0:
        return FarFieldSet(clean.values.copy(), clean.obs_dirs, clean.inc_dirs, 0.0, meta)
    rng = np.random.Generator(np.random.Philox(model.seed))
    eps = rng.normal(0.0, model.sigma, size=(2,) + clean.values.shape)
    return FarFieldSet(clean.values + eps[0] + 1j * eps[1], clean.obs_dirs,
                       clean.inc_dirs, model.sigma, meta)


def true_medium(config, grid=None):
    if grid is None:
        from .grid import make_grid
        grid = make_grid(config.S, config.M)
    return characteristic_medium(ShapeId(config.shape, config.contrast), grid)


def generate_data(config, truth=None):
    """Far field of the true medium on the data grid, plus noise."""
    model = ForwardModel.from_config(config, data=True)
    truth = true_medium(config, model.cell_grid) if truth is None else truth
    inc = make_directions(config.N)
    values = model.far_field_matrix(truth, inc)
    meta = {"k": config.k, "S": config.S, "M": config.M, "shape": config.shape,
            "fine_n": model.grid.n, "refine": model.grid.refine,
            "period": model.grid.period}
    return add_noise(FarFieldSet(values, model.obs_dirs, inc, 0.0, meta),
                     NoiseModel(config.sigma, config.seed))


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    result: object
    truth: Medium
    data: FarFieldSet = None
    timings: dict = field(default_factory=dict)

    @property
    def mse(self):
        return list(self.result.mse)

    @property
    def alphas(self):
        return list(self.result.alphas)

    @property
    def blew_up(self):
        return self.result.blew_up

    @property
    def iterates(self):
        return self.result.iterates

    def mse_rows(self):
        r = self.result
        return [(i, r.algo, e, r.alphas[i] if i < len(r.alphas) else float("nan"))
                for i, e in enumerate(r.mse)]


def _run(config, data, truth, problem, trace):
    R = WeightOperator(config.r)
    if config.algo == "ekf":
        return ekf_run(data, config, problem=problem, truth=truth, R=R, trace=trace)
    lm = LMConfig(rho=config.rho, max_outer=config.iters)
    if config.algo == "flm":
        return flm_run(data, config, lm, problem=problem, truth=truth, R=R)
    return kfl_run(data, config, lm, problem=problem, truth=truth, R=R, trace=trace)


def run_experiment(config, data=None, out=None, png=False, trace=False, problem=None):
    """Generate data if needed, reconstruct with ``config.algo``, write outputs."""
    timings = {}
    t = time.perf_counter()
    if data is None:
        data = generate_data(config)
        timings["data"] = time.perf_counter() - t
    problem = problem or ScatteringProblem.from_config(config)
    truth = true_medium(config, problem.grid)
    t = time.perf_counter()
    result = _run(config, data, truth, problem, trace)
    timings["reconstruction"] = time.perf_counter() - t
    timings["per_iteration"] = list(result.seconds)
    report = ExperimentReport(config, result, truth, data, timings)
    if out is not None:
        write_report(report, out, png=png)
    return report


def write_report(report, out, png=False, write_data=True):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    r = report.result
    for i, medium in enumerate(r.iterates):
        write_medium_csv(medium, out / f"medium_iter_{i}.csv")
        if png:
            render_heatmap(medium, out / f"medium_iter_{i}.png")
    write_mse_csv(report.mse_rows(), out / "mse.csv")
    if r.trace:
        write_trace_csv(r.trace, out / "trace.csv")
    if write_data and report.data is not None:
        write_farfield(report.data, out / "farfield.csv", out / "farfield_meta.json")
    write_json({"config": report.config.to_dict(), "algo": r.algo,
                "stop_reason": r.stop_reason, "blew_up": r.blew_up, "error": r.error,
                "clamped_alpha": r.clamped, "timings": report.timings,
                "rng": RNG_NAME}, out / "meta.json")


def compare(config, out=None, algos=("flm", "kfl", "ekf"), png=False, trace=False):
    """Run several algorithms on one shared noisy data set."""
    t = time.perf_counter()
    data = generate_data(config)
    data_time = time.perf_counter() - t
    problem = ScatteringProblem.from_config(config)
    reports = {}
    for algo in algos:
        reports[algo] = run_experiment(config.replace(algo=algo), data=data,
                                       problem=problem, trace=trace)
        reports[algo].timings["data"] = data_time
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        write_farfield(data, out / "farfield.csv", out / "farfield_meta.json")
        rows = []
        for algo, rep in reports.items():
            write_report(rep, out / algo, png=png, write_data=False)
            rows.extend(rep.mse_rows())
        write_mse_csv(rows, out / "mse.csv")
    return reports


def render_heatmap(medium, path, block=16, scale=HEATMAP_SCALE):
    """PNG with one ``block x block`` square per cell, green level ~ Re q.

    Values are mapped linearly from ``scale`` to 0..255 and clipped; the
    top image row is the largest ``y``.
    """
    lo, hi = scale
    level = np.clip((medium.values.real - lo) / (hi - lo), 0.0, 1.0)
    g = np.rint(255 * level).astype(np.uint8)
    img = np.zeros(g.shape + (3,), dtype=np.uint8)
    img[..., 1] = g
    # values[i1, i2]: i1 along x, i2 along y
    img = np.flipud(img.transpose(1, 0, 2))
    img = np.repeat(np.repeat(img, block, axis=0), block, axis=1)
    try:
        Image.fromarray(img, "RGB").save(path, format="PNG")
    except OSError as exc:
        raise OSError(f"cannot write heatmap to {path}: {exc}") from exc
    return path
