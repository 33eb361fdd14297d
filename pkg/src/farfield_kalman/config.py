"""Experiment configuration shared by the forward model, solvers and driver."""
import dataclasses
import json
from dataclasses import dataclass

__all__ = ["ExperimentConfig", "load_config"]

ALGORITHMS = ("flm", "kfl", "ekf")


@dataclass(frozen=True)
class ExperimentConfig:
    """All scalars of one reconstruction experiment.

    ``fine_grid`` and ``data_grid`` are the points per axis of the periodic
    grids used by the Lippmann-Schwinger solver for inversion and for
    synthetic data respectively.  With ``inverse_crime`` set, data is
    generated on the inversion grid.
    """
    k: float = 3.0
    S: float = 3.0
    M: int = 8
    J: int = 30
    N: int = 30
    r: float = 3.0
    sigma: float = 0.01
    rho: float = 0.4
    alpha0: float = 50.0
    shape: str = "B1"
    contrast: complex = 0.1
    algo: str = "kfl"
    iters: int = 10
    seed: int = 0
    inverse_crime: bool = False
    fine_grid: int = 128
    data_grid: int = 256
    tol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "shape", self.shape.upper())
        object.__setattr__(self, "algo", self.algo.lower())
        object.__setattr__(self, "contrast", complex(self.contrast))
        for name in ("k", "S", "r", "alpha0", "tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("M", "J", "N", "fine_grid", "data_grid"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.iters < 0:
            raise ValueError("iters must be nonnegative")
        if self.algo not in ALGORITHMS:
            raise ValueError(f"algo must be one of {ALGORITHMS}")
        if self.shape not in ("B1", "B2"):
            raise ValueError("shape must be B1 or B2")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["contrast"] = [self.contrast.real, self.contrast.imag]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if isinstance(d.get("contrast"), (list, tuple)):
            re, im = d["contrast"]
            d["contrast"] = complex(re, im)
        return cls(**d)


def load_config(path):
    """Read a JSON config file with the same keys as :class:`ExperimentConfig`."""
    with open(path) as fh:
        return ExperimentConfig.from_dict(json.load(fh))
