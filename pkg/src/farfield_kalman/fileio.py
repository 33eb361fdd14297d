"""CSV and JSON readers/writers for media, far fields and run records.

Floats are written with ``repr`` so files round-trip exactly and repeated
runs give identical bytes.
"""
import csv
import json

import numpy as np

from .forward import FarFieldSet
from .grid import Medium, make_directions, make_grid

__all__ = ["write_medium_csv", "read_medium_csv", "write_farfield",
           "read_farfield", "write_mse_csv", "write_trace_csv", "write_json"]


def _f(x):
    x = float(x)
    return "" if np.isnan(x) else repr(x)


def write_medium_csv(medium, path):
    """Columns ``m1,m2,x,y,re_q,im_q``; rows ordered by m2, then m1."""
    g = medium.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m1", "m2", "x", "y", "re_q", "im_q"])
        for m2 in range(-g.M, g.M):
            for m1 in range(-g.M, g.M):
                x, y = g.center(m1, m2)
                v = medium.values[m1 + g.M, m2 + g.M]
                w.writerow([m1, m2, _f(x), _f(y), _f(v.real), _f(v.imag)])


def read_medium_csv(path, S):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    M = max(int(r["m1"]) for r in rows) + 1
    grid = make_grid(S, M)
    values = np.zeros((2 * M, 2 * M), dtype=complex)
    for r in rows:
        values[int(r["m1"]) + M, int(r["m2"]) + M] = complex(float(r["re_q"]), float(r["im_q"]))
    return Medium(grid, values)


def write_farfield(data, path, meta_path=None):
    """CSV ``j,n,re,im`` (1-based labels) plus a JSON sidecar of metadata."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "n", "re", "im"])
        for n in range(data.inc_dirs.count):
            for j in range(data.obs_dirs.count):
                v = data.values[j, n]
                w.writerow([j + 1, n + 1, _f(v.real), _f(v.imag)])
    if meta_path is not None:
        meta = {"J": data.obs_dirs.count, "N": data.inc_dirs.count,
                "sigma": data.noise_sigma, **data.meta}
        write_json(meta, meta_path)


def read_farfield(path, meta_path=None):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    J = max(int(r["j"]) for r in rows)
    N = max(int(r["n"]) for r in rows)
    values = np.zeros((J, N), dtype=complex)
    for r in rows:
        values[int(r["j"]) - 1, int(r["n"]) - 1] = complex(float(r["re"]), float(r["im"]))
    meta = {}
    if meta_path is not None:
        with open(meta_path) as fh:
            meta = json.load(fh)
    sigma = meta.pop("sigma", 0.0)
    meta.pop("J", None)
    meta.pop("N", None)
    return FarFieldSet(values, make_directions(J), make_directions(N), sigma, meta)


def write_mse_csv(rows, path):
    """``rows`` of ``(iter, algo, mse, alpha)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "algo", "mse", "alpha"])
        for it, algo, e, alpha in rows:
            w.writerow([it, algo, _f(e), _f(alpha)])


def write_trace_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["outer", "inner", "innovation_norm", "B_norm", "mse"])
        for i, n, innov, bnorm, e in rows:
            w.writerow([i, n, _f(innov), _f(bnorm), _f(e)])


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
