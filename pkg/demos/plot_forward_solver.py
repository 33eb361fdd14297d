"""
Far fields of the two test media
================================

Solve the Lippmann-Schwinger equation for the disk (B1) and the
three-piece medium (B2), look at the far-field matrix, and compare with
the Born approximation.
"""

import numpy as np

from farfield_kalman import ExperimentConfig, ForwardModel, characteristic_medium, make_directions

config = ExperimentConfig(k=3.0)
model = ForwardModel.from_config(config)
print("periodic grid:", model.grid.n, "points per axis, h =", model.grid.h,
      ", period =", model.grid.period)

# far-field matrix: rows are observation directions, columns incident ones
inc = make_directions(config.N)
for shape in ("B1", "B2"):
    q = characteristic_medium(shape, model.cell_grid)
    F = model.far_field_matrix(q, inc)
    print(f"{shape}: |u_inf| ranges over [{np.abs(F).min():.4f}, {np.abs(F).max():.4f}]")

    # reciprocity u(x, th) = u(-th, -x); with 30 directions -d_n = d_{n+15}
    idx = (np.arange(30) + 15) % 30
    print("   reciprocity defect:", np.abs(F - F[idx][:, idx].T).max() / np.abs(F).max())

# The Born far field replaces the total field by the incident wave.  For a
# weak scatterer the two agree to first order in the contrast.
q = characteristic_medium("B1", model.cell_grid)
theta = inc[30]
for eps in (1.0, 0.1, 0.01):
    full = model.far_field_from(q * eps, model.solve(q * eps, theta))
    born = model.born(q * eps, theta)
    print(f"contrast {0.1 * eps:.0e}: relative Born defect "
          f"{np.linalg.norm(full - born) / np.linalg.norm(born):.2e}")
