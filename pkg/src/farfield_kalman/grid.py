"""Cell grid on the sampling square, direction sets and the test media."""
from dataclasses import dataclass, field

import numpy as np

__all__ = ["CellGrid", "DirectionSet", "Medium", "ShapeId", "make_grid",
           "make_directions", "characteristic_medium", "in_shape", "mse",
           "SHAPES"]


@dataclass(frozen=True)
class CellGrid:
    """Square ``[-S, S]^2`` split into ``2M x 2M`` cells of side ``S/M``.

    Cell ``(m1, m2)`` with ``-M <= m1, m2 <= M-1`` has its center at
    ``((2 m1 + 1) S / 2M, (2 m2 + 1) S / 2M)``.  Arrays of cell values are
    indexed ``[m1 + M, m2 + M]``; flattening is C-order.
    """
    S: float
    M: int

    @property
    def cells_per_axis(self):
        return 2 * self.M

    @property
    def size(self):
        return (2 * self.M) ** 2

    @property
    def cell_width(self):
        return self.S / self.M

    @property
    def cell_area(self):
        return (self.S / self.M) ** 2

    @property
    def axis(self):
        m = np.arange(-self.M, self.M)
        return (2 * m + 1) * self.S / (2 * self.M)

    @property
    def centers(self):
        """Array of shape ``(2M, 2M, 2)``."""
        x, y = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.stack([x, y], axis=-1)

    def center(self, m1, m2):
        if not (-self.M <= m1 < self.M and -self.M <= m2 < self.M):
            raise IndexError(f"cell ({m1}, {m2}) outside grid with M={self.M}")
        return ((2 * m1 + 1) * self.S / (2 * self.M),
                (2 * m2 + 1) * self.S / (2 * self.M))


def make_grid(S, M):
    if not S > 0:
        raise ValueError(f"S must be positive, got {S}")
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    return CellGrid(float(S), int(M))


@dataclass(frozen=True)
class DirectionSet:
    """Unit vectors ``(cos(2 pi n / count), sin(2 pi n / count))``, n = 1..count."""
    count: int
    vectors: np.ndarray = field(repr=False)

    def __len__(self):
        return self.count

    def __getitem__(self, n):
        """1-based access matching the usual labelling of directions."""
        if not 1 <= n <= self.count:
            raise IndexError(n)
        return self.vectors[n - 1]


def make_directions(count):
    if int(count) != count or count < 1:
        raise ValueError(f"count must be a positive integer, got {count}")
    angles = 2 * np.pi * np.arange(1, count + 1) / count
    vectors = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    vectors.setflags(write=False)
    return DirectionSet(int(count), vectors)


@dataclass(frozen=True, eq=False)
class Medium:
    """Complex contrast, one value per cell of ``grid``.

    Reconstruction iterates may leave the physical class ``Im q >= 0``;
    use :meth:`is_physical` to check.
    """
    grid: CellGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        n = self.grid.cells_per_axis
        if values.size != n * n:
            raise ValueError(f"expected {n * n} cell values, got {values.size}")
        values = values.reshape(n, n)
        if not np.all(np.isfinite(values)):
            raise ValueError("medium values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((grid.cells_per_axis,) * 2, dtype=complex))

    @classmethod
    def from_vector(cls, grid, vector):
        return cls(grid, np.asarray(vector).reshape(grid.cells_per_axis, -1))

    @property
    def vector(self):
        return self.values.ravel()

    def is_physical(self):
        return bool(np.all(self.values.imag >= 0))

    def __add__(self, other):
        _check_same_grid(self, other)
        return Medium(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return Medium(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return Medium(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class ShapeId:
    tag: str
    contrast: complex = 0.1

    def __post_init__(self):
        tag = self.tag.upper()
        if tag not in SHAPES:
            raise ValueError(f"unsupported shape {self.tag!r}; choose from {sorted(SHAPES)}")
        object.__setattr__(self, "tag", tag)


def _b1(x, y):
    return x ** 2 + y ** 2 < 1.5


def _b2(x, y):
    disk = (x + 1.5) ** 2 + (y + 1.5) ** 2 < 1.0
    bar = (1 < x) & (x < 2) & (-2 < y) & (y < 2)
    base = (-2 < x) & (x < 2) & (-2.0 < y) & (y < -1.0)
    return disk | bar | base


SHAPES = {"B1": _b1, "B2": _b2}


def in_shape(shape, x, y):
    """Boolean membership of points ``(x, y)`` in the support of ``shape``."""
    if isinstance(shape, str):
        shape = ShapeId(shape)
    return SHAPES[shape.tag](np.asarray(x), np.asarray(y))


def characteristic_medium(shape, grid):
    """Contrast on cells whose center lies in the shape, zero elsewhere."""
    if isinstance(shape, str):
        shape = ShapeId(shape)
    c = grid.centers
    mask = in_shape(shape, c[..., 0], c[..., 1])
    return Medium(grid, np.where(mask, complex(shape.contrast), 0.0))


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def mse(a, b):
    """Squared Euclidean norm of the cellwise difference (no area weight)."""
    _check_same_grid(a, b)
    d = (a.values - b.values).ravel()
    return float(np.vdot(d, d).real)
