"""Bessel and Hankel functions of order zero and one for real positive arguments.

Small arguments use the ascending power series, large arguments the
Hankel asymptotic expansion.  Everything is vectorised over numpy arrays.
"""
import numpy as np

__all__ = ["bessel_j0", "bessel_j1", "bessel_y0", "bessel_y1",
           "hankel0_first", "hankel1_first", "SWITCHOVER"]

# Below this the power series loses < 1e-11 to cancellation; above it the
# smallest asymptotic term is below 1e-12.
SWITCHOVER = 14.0

_EULER_GAMMA = 0.57721566490153286061
_SERIES_TERMS = 60
_ASYMPTOTIC_TERMS = 40


def _as_array(z, name, strict):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError(f"{name}: argument must be finite")
    bad = z <= 0 if strict else z < 0
    if np.any(bad):
        raise ValueError(f"{name}: argument must be {'positive' if strict else 'nonnegative'}")
    return z


def _series(z):
    """Power series for J0, J1, Y0, Y1 (z > 0 for the Y's)."""
    x = 0.25 * z * z
    half = 0.5 * z
    j0 = np.zeros_like(z)
    j1 = np.zeros_like(z)
    s0 = np.zeros_like(z)   # sum_{k>=1} (-1)^{k+1} H_k x^k / (k!)^2
    s1 = np.zeros_like(z)   # sum_{k>=0} (-1)^k (psi(k+1)+psi(k+2)) x^k / (k!(k+1)!)
    term = np.ones_like(z)  # (-1)^k x^k / (k!)^2
    harmonic = 0.0
    for k in range(_SERIES_TERMS):
        if k > 0:
            term = term * (-x) / (k * k)
            harmonic += 1.0 / k
        j0 += term
        t1 = term / (k + 1)
        j1 += t1
        s0 -= harmonic * term
        s1 += (2.0 * harmonic + 1.0 / (k + 1) - 2.0 * _EULER_GAMMA) * t1
    j1 *= half
    with np.errstate(divide="ignore", invalid="ignore"):
        log_part = np.log(half) + _EULER_GAMMA
        y0 = (2.0 / np.pi) * (log_part * j0 + s0)
        y1 = (2.0 / np.pi) * np.log(half) * j1 - 2.0 / (np.pi * z) - half * s1 / np.pi
    return j0, j1, y0, y1


def _asymptotic(z, order):
    """Hankel expansion of H_order^(1)(z) for large z."""
    mu = 4.0 * order * order
    total = np.ones_like(z, dtype=complex)
    coeff = np.ones_like(z, dtype=complex)
    best = np.full(z.shape, np.inf)
    done = np.zeros(z.shape, dtype=bool)
    for m in range(1, _ASYMPTOTIC_TERMS):
        coeff = coeff * 1j * (mu - (2 * m - 1) ** 2) / (8.0 * m * z)
        size = np.abs(coeff)
        # stop each entry once the terms start growing or are negligible
        done |= size >= best
        total = np.where(done, total, total + coeff)
        best = np.where(done, best, size)
        done |= size < 1e-17
        if done.all():
            break
    phase = z - (0.5 * order + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * z)) * np.exp(1j * phase) * total


def _evaluate(z):
    """Return (J0, J1, Y0, Y1) for z > 0."""
    j0 = np.empty_like(z)
    j1 = np.empty_like(z)
    y0 = np.empty_like(z)
    y1 = np.empty_like(z)
    small = z <= SWITCHOVER
    if small.any():
        j0[small], j1[small], y0[small], y1[small] = _series(z[small])
    large = ~small
    if large.any():
        h0 = _asymptotic(z[large], 0)
        h1 = _asymptotic(z[large], 1)
        j0[large], y0[large] = h0.real, h0.imag
        j1[large], y1[large] = h1.real, h1.imag
    return j0, j1, y0, y1


def _scalar_or_array(value, like):
    return value.item() if np.ndim(like) == 0 else value


def bessel_j0(z):
    z = _as_array(z, "bessel_j0", strict=False)
    zz = np.atleast_1d(z)
    out = np.ones_like(zz)
    pos = zz > 0
    if pos.any():
        out[pos] = _evaluate(zz[pos])[0]
    return _scalar_or_array(out.reshape(z.shape), z)


def bessel_j1(z):
    z = _as_array(z, "bessel_j1", strict=False)
    zz = np.atleast_1d(z)
    out = np.zeros_like(zz)
    pos = zz > 0
    if pos.any():
        out[pos] = _evaluate(zz[pos])[1]
    return _scalar_or_array(out.reshape(z.shape), z)


def bessel_y0(z):
    z = _as_array(z, "bessel_y0", strict=True)
    return _scalar_or_array(_evaluate(np.atleast_1d(z))[2].reshape(z.shape), z)


def bessel_y1(z):
    z = _as_array(z, "bessel_y1", strict=True)
    return _scalar_or_array(_evaluate(np.atleast_1d(z))[3].reshape(z.shape), z)


def hankel0_first(z):
    """H_0^(1)(z) = J0(z) + i Y0(z) for z > 0.

    This is the order-zero Hankel function that appears in the 2D Helmholtz
    fundamental solution ``(i/4) H_0^(1)(k|x-y|)``.
    """
    z = _as_array(z, "hankel0_first", strict=True)
    j0, _, y0, _ = _evaluate(np.atleast_1d(z))
    return _scalar_or_array((j0 + 1j * y0).reshape(z.shape), z)


def hankel1_first(z):
    """H_1^(1)(z) = J1(z) + i Y1(z) for z > 0."""
    z = _as_array(z, "hankel1_first", strict=True)
    _, j1, _, y1 = _evaluate(np.atleast_1d(z))
    return _scalar_or_array((j1 + 1j * y1).reshape(z.shape), z)
