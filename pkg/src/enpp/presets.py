"""Built-in initial conditions.

Every preset except ``pure_heat`` returns a primal state satisfying the
full hypothesis set: divergence-free velocity, nonnegative charge
densities, and exactly matched charge means.  Smooth bumps are built as
periodized heat kernels directly in frequency space and dealiased at
construction, so preset fields live entirely inside the retained band.

``pure_heat`` is the one deliberately signed preset: a single-mode
electric field with zero velocity and zero total density, which makes
the energy decay analytically e^{-2t}.  Its half-sum fields a and b have
both signs, so it exists only in the reformulated variables and runs
with the positivity abort disarmed.  The amplitude is kept at 3e-5
because the total density feeds back quadratically in the amplitude;
at this size the relative deviation from the linear heat flow stays
below 1e-9 over unit time.
"""
from __future__ import annotations

import numpy as np

from .dynamics import PrimalState, ReformState
from .errors import UnknownPreset
from .spectral import (
    GridSpec,
    _cache,
    dealias_coeffs,
    fft_inverse,
    leray_project,
)

PRESET_NAMES = ("rest", "gaussian_blobs", "shear_charge", "random_bandlimited", "pure_heat")

BLOB_WIDTH = 0.7
BLOB_AMPLITUDE = 1.0
BLOB_FLOOR = 0.1
SHEAR_AMPLITUDE = 0.5
PURE_HEAT_AMPLITUDE = 3e-5
RANDOM_RADIUS = 4.0
RANDOM_DECAY = 2.5


def periodic_bump(grid: GridSpec, center: tuple[float, float], width: float) -> np.ndarray:
    """Periodized Gaussian bump with unit peak, band-limited to the grid."""
    cache = _cache(grid.n_points)
    coeffs = np.exp(-0.5 * width**2 * cache.ksq) * np.exp(
        -1j * (cache.k1 * center[0] + cache.k2 * center[1])
    )
    vals = fft_inverse(dealias_coeffs(coeffs, grid.dealias_fraction))
    return vals / np.max(vals)


def _blob_charges(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    bump_n = periodic_bump(grid, (0.5 * np.pi, np.pi), BLOB_WIDTH)
    bump_p = periodic_bump(grid, (1.5 * np.pi, np.pi), BLOB_WIDTH)
    # exact mass matching: scale the second bump so both means agree
    bump_p = bump_p * (float(np.mean(bump_n)) / float(np.mean(bump_p)))
    n = BLOB_FLOOR + BLOB_AMPLITUDE * bump_n
    p = BLOB_FLOOR + BLOB_AMPLITUDE * bump_p
    return n, p


def preset(name: str, grid: GridSpec, seed: int = 0):
    """Construct a named initial state; deterministic for a given seed."""
    shape = (grid.n_points, grid.n_points)
    zeros = np.zeros(shape)
    if name == "rest":
        return PrimalState.create(grid, zeros, zeros, zeros + 1.0, zeros + 1.0)
    if name == "gaussian_blobs":
        n, p = _blob_charges(grid)
        return PrimalState.create(grid, zeros, zeros, n, p)
    if name == "shear_charge":
        _, x2 = grid.coords()
        n, p = _blob_charges(grid)
        return PrimalState.create(grid, SHEAR_AMPLITUDE * np.sin(x2), zeros, n, p)
    if name == "random_bandlimited":
        rng = np.random.default_rng(seed)
        u = leray_project(_random_vector(grid, rng, 0.3))
        n = 1.0 + _random_zero_mean(grid, rng, 0.3)
        p = 1.0 + _random_zero_mean(grid, rng, 0.3)
        return PrimalState.create(grid, u.u1, u.u2, n, p)
    if name == "pure_heat":
        x1, _ = grid.coords()
        return ReformState.create(
            grid,
            zeros,
            zeros,
            zeros,
            PURE_HEAT_AMPLITUDE * np.cos(x1),
            zeros,
            require_nonneg=False,
        )
    raise UnknownPreset(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")


def _random_trig(grid: GridSpec, rng: np.random.Generator,
                 radius: float = RANDOM_RADIUS, decay: float = RANDOM_DECAY) -> np.ndarray:
    """Seeded real trig polynomial with a Gaussian-decaying spectrum.

    Modes are enumerated in a fixed lattice order, one cos/sin pair per
    half-plane wavenumber, so a given seed describes the same continuum
    field at every resolution that can hold the band.
    """
    x1, x2 = grid.coords()
    vals = np.zeros_like(x1)
    kmax = int(radius)
    for k1 in range(0, kmax + 1):
        for k2 in range(-kmax, kmax + 1):
            if k1 == 0 and k2 <= 0:
                continue
            ksq = k1 * k1 + k2 * k2
            if ksq > radius * radius:
                continue
            alpha, beta = rng.standard_normal(2)
            weight = np.exp(-ksq / (2.0 * decay * decay))
            phase = k1 * x1 + k2 * x2
            vals += weight * (alpha * np.cos(phase) + beta * np.sin(phase))
    return vals


def _random_zero_mean(grid: GridSpec, rng: np.random.Generator, amplitude: float) -> np.ndarray:
    vals = _random_trig(grid, rng)
    peak = float(np.max(np.abs(vals)))
    return vals * (amplitude / peak) if peak > 0 else vals


def _random_vector(grid: GridSpec, rng: np.random.Generator, amplitude: float):
    from .spectral import VectorField

    a = _random_zero_mean(grid, rng, amplitude)
    b = _random_zero_mean(grid, rng, amplitude)
    return VectorField(grid, a, b)


def default_dt(state, cfl_number: float = 0.5, cap: float = 5e-3) -> float:
    """Step-size heuristic from the advective CFL condition.

    Uses the combined transport speed max|u| + max|xi| (charges drift at
    u plus or minus xi) with a unit floor, capped for sampling sanity.
    """
    if isinstance(state, PrimalState):
        from .dynamics import xi_from_charge

        xi = xi_from_charge(state.n, state.p)
    else:
        xi = state.xi
    speed = float(np.max(np.hypot(state.u.u1, state.u.u2)))
    speed += float(np.max(np.hypot(xi.u1, xi.u2)))
    n = state.grid.n_points
    return min(cfl_number / (n * max(1.0, speed)), cap)