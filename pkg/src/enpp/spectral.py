"""Spectral operations on the 2*pi-periodic square grid.

Conventions used throughout the package:

* The domain is the torus [0, 2*pi)^2 sampled on an N x N grid,
  ``values[i1, i2] = f(2*pi*i1/N, 2*pi*i2/N)``; axis 1 is the first array
  index, axis 2 the second.
* Spectra hold Fourier-series coefficients ``c_k`` with
  ``f(x) = sum_k c_k exp(i k.x)`` over integer wavevectors
  ``k in {-N/2, ..., N/2-1}^2`` laid out like ``numpy.fft.fft2`` output,
  so ``c_k = fft2(values)[k1 % N, k2 % N] / N**2``.
* Spectral derivatives zero the Nyquist mode ``k = -N/2`` (it cannot carry
  a real odd-symmetric derivative), and the inverse Laplacian uses the
  zero-mean gauge (zero mode of the result is 0).
* Discrete L^p norms use the quadrature weight ``(2*pi/N)**2`` per node.

Field and spectrum objects are immutable value types: the wrapped arrays
are marked read-only on construction and every operation returns a new
object.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import AsymmetricSpectrum, NonNeutralField

SYMMETRY_TOL = 1e-10
NEUTRALITY_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Uniform N x N sampling of the torus [0, 2*pi)^2.

    ``dealias_fraction`` is the fraction of the Nyquist wavenumber kept by
    :func:`dealias` (2/3 rule by default).
    """

    n_points: int
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        if self.n_points < 4 or self.n_points % 2 != 0:
            raise ValueError(f"n_points must be an even integer >= 4, got {self.n_points}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction}")

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_points

    @property
    def quadrature_weight(self) -> float:
        """Area element of one grid cell."""
        return self.spacing**2

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinate arrays (X1, X2), each of shape (N, N)."""
        x = np.arange(self.n_points) * self.spacing
        return np.meshgrid(x, x, indexing="ij")

    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer wavevector arrays (K1, K2) in fft2 layout."""
        cache = _cache(self.n_points)
        return cache.k1, cache.k2


def _freeze(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, order="C", copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ScalarField:
    """Real scalar samples on a grid."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = _freeze(self.values, np.float64)
        n = self.grid.n_points
        if vals.shape != (n, n):
            raise ValueError(f"expected shape {(n, n)}, got {vals.shape}")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class VectorField:
    """Real two-component vector samples on a grid (components u1, u2)."""

    grid: GridSpec
    u1: np.ndarray = field(repr=False)
    u2: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        n = self.grid.n_points
        for name in ("u1", "u2"):
            vals = _freeze(getattr(self, name), np.float64)
            if vals.shape != (n, n):
                raise ValueError(f"expected shape {(n, n)}, got {vals.shape}")
            object.__setattr__(self, name, vals)

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u1, self.u2)

    def component(self, axis: int) -> ScalarField:
        _check_axis(axis)
        return ScalarField(self.grid, self.u1 if axis == 1 else self.u2)


@dataclass(frozen=True)
class Spectrum:
    """Fourier-series coefficients of a real scalar field."""

    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        c = _freeze(self.coeffs, np.complex128)
        n = self.grid.n_points
        if c.shape != (n, n):
            raise ValueError(f"expected shape {(n, n)}, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def conjugate_asymmetry(self) -> float:
        """Max deviation of ``c_{-k}`` from ``conj(c_k)`` on the lattice."""
        return _conjugate_asymmetry(self.coeffs)


class _GridCache:
    """Precomputed wavenumber machinery shared by all operations on one N."""

    def __init__(self, n: int) -> None:
        k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        self.k = k
        self.k1, self.k2 = np.meshgrid(k, k, indexing="ij")
        self.ksq = (self.k1**2 + self.k2**2).astype(np.float64)
        inv = np.zeros_like(self.ksq)
        nz = self.ksq > 0
        inv[nz] = 1.0 / self.ksq[nz]
        self.inv_ksq = inv
        # Derivative multipliers i*k with the Nyquist row/column zeroed.
        d1 = 1j * self.k1.astype(np.float64)
        d2 = 1j * self.k2.astype(np.float64)
        d1[self.k1 == -n // 2] = 0.0
        d2[self.k2 == -n // 2] = 0.0
        self.d1 = d1
        self.d2 = d2
        rev = (-np.arange(n)) % n
        self.rev = rev


@lru_cache(maxsize=None)
def _cache(n: int) -> _GridCache:
    return _GridCache(n)


@lru_cache(maxsize=None)
def _dealias_keep_mask(n: int, fraction: float) -> np.ndarray:
    """True where max(|k1|, |k2|) <= fraction * N/2."""
    cache = _cache(n)
    cutoff = fraction * (n / 2.0)
    mask = (np.abs(cache.k1) <= cutoff) & (np.abs(cache.k2) <= cutoff)
    mask.setflags(write=False)
    return mask


def _conjugate_asymmetry(coeffs: np.ndarray) -> float:
    n = coeffs.shape[0]
    rev = _cache(n).rev
    mirrored = np.conj(coeffs[np.ix_(rev, rev)])
    return float(np.max(np.abs(coeffs - mirrored)))


def _check_axis(axis: int) -> None:
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")


# ---------------------------------------------------------------------------
# Raw-array kernels.  These operate on coefficient arrays in fft2 layout and
# are shared by the public API and the time integrator's hot loop.
# ---------------------------------------------------------------------------

def fft_forward(values: np.ndarray) -> np.ndarray:
    """Grid samples -> Fourier-series coefficients."""
    n = values.shape[0]
    return np.fft.fft2(values) / (n * n)


def fft_inverse(coeffs: np.ndarray) -> np.ndarray:
    """Fourier-series coefficients -> grid samples (real part)."""
    n = coeffs.shape[0]
    return np.fft.ifft2(coeffs).real * (n * n)


def deriv_coeffs(coeffs: np.ndarray, axis: int) -> np.ndarray:
    _check_axis(axis)
    cache = _cache(coeffs.shape[0])
    return coeffs * (cache.d1 if axis == 1 else cache.d2)


def laplacian_coeffs(coeffs: np.ndarray) -> np.ndarray:
    return -_cache(coeffs.shape[0]).ksq * coeffs


def inv_neg_laplacian_coeffs(coeffs: np.ndarray) -> np.ndarray:
    """Zero-mean-gauge solve of -Lap(g) = f in coefficient space."""
    out = coeffs * _cache(coeffs.shape[0]).inv_ksq
    out[0, 0] = 0.0
    return out


def leray_coeffs(c1: np.ndarray, c2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Divergence-free projection; the k = 0 mode passes through unchanged."""
    cache = _cache(c1.shape[0])
    kdotv = cache.k1 * c1 + cache.k2 * c2
    factor = kdotv * cache.inv_ksq
    return c1 - cache.k1 * factor, c2 - cache.k2 * factor


def grad_part_coeffs(c1: np.ndarray, c2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradient-part projection; the k = 0 mode of the result is zero."""
    cache = _cache(c1.shape[0])
    kdotv = cache.k1 * c1 + cache.k2 * c2
    factor = kdotv * cache.inv_ksq
    return cache.k1 * factor, cache.k2 * factor


def dealias_coeffs(coeffs: np.ndarray, fraction: float) -> np.ndarray:
    keep = _dealias_keep_mask(coeffs.shape[0], fraction)
    return np.where(keep, coeffs, 0.0)


# ---------------------------------------------------------------------------
# Public field-level API.
# ---------------------------------------------------------------------------

def to_spectrum(f: ScalarField) -> Spectrum:
    """Forward transform; ``from_spectrum(to_spectrum(f)) == f`` to 1e-13."""
    return Spectrum(f.grid, fft_forward(f.values))


def from_spectrum(s: Spectrum) -> ScalarField:
    """Inverse transform of a conjugate-symmetric spectrum.

    Raises :class:`AsymmetricSpectrum` when the coefficients cannot come
    from a real field (asymmetry beyond ``SYMMETRY_TOL`` relative to the
    largest coefficient, with an absolute floor of 1).
    """
    asym = s.conjugate_asymmetry()
    scale = max(1.0, float(np.max(np.abs(s.coeffs)))) if s.coeffs.size else 1.0
    if asym > SYMMETRY_TOL * scale:
        raise AsymmetricSpectrum(
            f"conjugate symmetry violated by {asym:.3e} (tolerance {SYMMETRY_TOL * scale:.3e})"
        )
    return ScalarField(s.grid, fft_inverse(s.coeffs))


def mean(f: ScalarField) -> float:
    return float(np.mean(f.values))


def derivative(f: ScalarField, axis: int) -> ScalarField:
    """Spectral partial derivative along ``axis`` (1 or 2), Nyquist zeroed."""
    return ScalarField(f.grid, fft_inverse(deriv_coeffs(fft_forward(f.values), axis)))


def gradient(f: ScalarField) -> VectorField:
    c = fft_forward(f.values)
    return VectorField(f.grid, fft_inverse(deriv_coeffs(c, 1)), fft_inverse(deriv_coeffs(c, 2)))


def divergence(v: VectorField) -> ScalarField:
    c1 = deriv_coeffs(fft_forward(v.u1), 1)
    c2 = deriv_coeffs(fft_forward(v.u2), 2)
    return ScalarField(v.grid, fft_inverse(c1 + c2))


def vorticity(v: VectorField) -> ScalarField:
    """Scalar curl d2(v1) - d1(v2); this sign convention is used throughout."""
    c1 = deriv_coeffs(fft_forward(v.u1), 2)
    c2 = deriv_coeffs(fft_forward(v.u2), 1)
    return ScalarField(v.grid, fft_inverse(c1 - c2))


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, fft_inverse(laplacian_coeffs(fft_forward(f.values))))


def inv_neg_laplacian(f: ScalarField) -> ScalarField:
    """Solve -Lap(g) = f with the zero-mean gauge.

    Requires |mean(f)| <= ``NEUTRALITY_TOL`` (relative to the field's max
    amplitude, absolute floor 1); otherwise no periodic solution exists and
    :class:`NonNeutralField` is raised.
    """
    m = mean(f)
    scale = max(1.0, float(np.max(np.abs(f.values)))) if f.values.size else 1.0
    if abs(m) > NEUTRALITY_TOL * scale:
        raise NonNeutralField(
            f"mean {m:.3e} exceeds neutrality tolerance {NEUTRALITY_TOL * scale:.3e}"
        )
    return ScalarField(f.grid, fft_inverse(inv_neg_laplacian_coeffs(fft_forward(f.values))))


def leray_project(v: VectorField) -> VectorField:
    """Divergence-free part of ``v``; spatial mean passes through unchanged."""
    p1, p2 = leray_coeffs(fft_forward(v.u1), fft_forward(v.u2))
    return VectorField(v.grid, fft_inverse(p1), fft_inverse(p2))


def grad_part_project(v: VectorField) -> VectorField:
    """Gradient (curl-free, zero-mean) part of ``v``; equals v - leray_project(v)
    up to the zero mode, which is set to 0."""
    g1, g2 = grad_part_coeffs(fft_forward(v.u1), fft_forward(v.u2))
    return VectorField(v.grid, fft_inverse(g1), fft_inverse(g2))


def dealias(obj):
    """Zero every mode with max(|k1|, |k2|) > dealias_fraction * N/2.

    Accepts ScalarField, VectorField, or Spectrum and returns the same type.
    """
    if isinstance(obj, Spectrum):
        return Spectrum(obj.grid, dealias_coeffs(np.array(obj.coeffs), obj.grid.dealias_fraction))
    if isinstance(obj, ScalarField):
        c = dealias_coeffs(fft_forward(obj.values), obj.grid.dealias_fraction)
        return ScalarField(obj.grid, fft_inverse(c))
    if isinstance(obj, VectorField):
        frac = obj.grid.dealias_fraction
        c1 = dealias_coeffs(fft_forward(obj.u1), frac)
        c2 = dealias_coeffs(fft_forward(obj.u2), frac)
        return VectorField(obj.grid, fft_inverse(c1), fft_inverse(c2))
    raise TypeError(f"cannot dealias {type(obj).__name__}")


def band_limit(f: ScalarField, radius: float) -> ScalarField:
    """Zero every mode with |k| > radius (radial truncation helper)."""
    c = fft_forward(f.values)
    cache = _cache(f.grid.n_points)
    c = np.where(np.sqrt(cache.ksq) <= radius, c, 0.0)
    return ScalarField(f.grid, fft_inverse(c))


def velocity_from_vorticity(w: ScalarField, mean_u: tuple[float, float] = (0.0, 0.0)) -> VectorField:
    """The unique velocity with scalar curl ``w`` and the given spatial mean.

    Solves the stream-function problem -Lap(psi) = -w ... concretely:
    psi with |k|^2 psi_k = w_k, then u = (-d2 psi, d1 psi), which satisfies
    d2(u1) - d1(u2) = w.  ``w`` must have zero mean (periodicity), checked
    to ``NEUTRALITY_TOL``.
    """
    m = mean(w)
    scale = max(1.0, float(np.max(np.abs(w.values)))) if w.values.size else 1.0
    if abs(m) > NEUTRALITY_TOL * scale:
        raise NonNeutralField(
            f"vorticity mean {m:.3e} exceeds neutrality tolerance {NEUTRALITY_TOL * scale:.3e}"
        )
    psi = inv_neg_laplacian_coeffs(fft_forward(w.values))
    c1 = -deriv_coeffs(psi, 2)
    c2 = deriv_coeffs(psi, 1)
    c1[0, 0] = mean_u[0]
    c2[0, 0] = mean_u[1]
    return VectorField(w.grid, fft_inverse(c1), fft_inverse(c2))


# ---------------------------------------------------------------------------
# Discrete norms (quadrature weight (2*pi/N)^2 per node).
# ---------------------------------------------------------------------------

def _values_of(obj) -> np.ndarray:
    """Pointwise magnitude samples of a scalar or vector field."""
    if isinstance(obj, ScalarField):
        return np.abs(obj.values)
    if isinstance(obj, VectorField):
        return obj.magnitude()
    raise TypeError(f"expected a field, got {type(obj).__name__}")


def lp_norm(obj, p: float) -> float:
    """Discrete L^p norm; vector fields use the pointwise Euclidean magnitude."""
    vals = _values_of(obj)
    if np.isinf(p):
        return float(np.max(vals)) if vals.size else 0.0
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    w = obj.grid.quadrature_weight
    return float((w * np.sum(vals**p)) ** (1.0 / p))


def l2_norm(obj) -> float:
    return lp_norm(obj, 2.0)


def linf_norm(obj) -> float:
    return lp_norm(obj, np.inf)
