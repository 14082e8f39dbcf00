"""Dyadic (Littlewood-Paley) frequency decomposition and Besov norms.

The decomposition uses a smooth radial partition of unity built from the
classical bump construction: a C-infinity profile g(r) rising from 0 to 1
on [3/4, 1], equal to 1 on [1, 2], and falling back to 0 on [2, 8/3].  Its
dyadic-orbit sum S(r) = sum_i g(2^-i r) lies in [1, 2] and is invariant
under r -> 2r, so phi(r) = g(r) / S(r) satisfies sum_j phi(2^-j r) = 1
exactly for every r > 0, and chi = sum_{j <= -1} phi(2^-j .) completes the
inhomogeneous family.  Sampled on the integer wavenumber lattice this
yields a partition of unity that is exact (to rounding) for every lattice
point with |k| <= 1.5 * 2^j_max, the ``complete radius'' of the family;
blocks beyond j_max would be needed outside that ball, so band-limited
here means supported inside it.

Block supports: supp chi is contained in the ball |k| < 4/3 and
supp phi(2^-j .) in the annulus 3/4 * 2^j < |k| < 8/3 * 2^j, hence blocks
with |j - j'| >= 2 have disjoint supports.

The highest usable block index is the largest j with 8/3 * 2^j <= N/2,
so every retained block annulus fits inside the Nyquist square.

Note on s = 0: the dyadic H^0 norm is equivalent, not equal, to the
discrete L^2 norm.  Adjacent smooth blocks overlap, so
sum_j phi_j(k)^2 < 1 there; requiring equality would force indicator
blocks, contradicting the smooth partition the decomposition is built on.
The exact two-sided bound is computable from the family itself (see
:meth:`DyadicFamily.plancherel_floor`), and equality holds on modes owned
by a single block.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BlockOutOfRange, GridTooSmall
from .spectral import (
    GridSpec,
    ScalarField,
    VectorField,
    _cache,
    dealias_coeffs,
    fft_forward,
    fft_inverse,
)

MIN_GRID = 16

SUPPORT_LOW = 0.75       # rise starts
SUPPORT_HIGH = 8.0 / 3.0  # fall ends
PLATEAU_LOW = 1.0
PLATEAU_HIGH = 2.0


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    interior = (t > 0.0) & (t < 1.0)
    ti = t[interior]
    with np.errstate(over="ignore", under="ignore"):
        a = np.exp(-1.0 / ti)
        b = np.exp(-1.0 / (1.0 - ti))
    out[interior] = a / (a + b)
    return out


def _mother_profile(r: np.ndarray) -> np.ndarray:
    """The raw radial profile g: support (3/4, 8/3), plateau [1, 2]."""
    rise = _smooth_step((r - SUPPORT_LOW) / (PLATEAU_LOW - SUPPORT_LOW))
    fall = _smooth_step((SUPPORT_HIGH - r) / (SUPPORT_HIGH - PLATEAU_HIGH))
    return rise * fall


def j_max_for(n_points: int) -> int:
    """Largest block index whose annulus fits inside the Nyquist square."""
    j = 0
    while SUPPORT_HIGH * 2 ** (j + 1) <= n_points / 2:
        j += 1
    return j


@dataclass(frozen=True)
class DyadicFamily:
    """Lattice samples of the dyadic cutoff family for one grid size."""

    grid: GridSpec
    j_max: int
    chi: np.ndarray = field(repr=False)
    phis: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def complete_radius(self) -> float:
        """Partition of unity is exact for lattice points with |k| <= this."""
        return SUPPORT_LOW * 2.0 ** (self.j_max + 1)

    def multiplier(self, j: int) -> np.ndarray:
        if j == -1:
            return self.chi
        if 0 <= j <= self.j_max:
            return self.phis[j]
        raise BlockOutOfRange(f"block index {j} outside [-1, {self.j_max}]")

    def lowpass_multiplier(self, j: int) -> np.ndarray:
        """Multiplier of S_j = sum of blocks j' <= j - 1."""
        if j < 0:
            raise BlockOutOfRange(f"low-frequency cut index must be >= 0, got {j}")
        out = self.chi.copy()
        for jp in range(0, min(j - 1, self.j_max) + 1):
            out = out + self.phis[jp]
        return out

    def partition_sum(self) -> np.ndarray:
        out = self.chi.copy()
        for p in self.phis:
            out = out + p
        return out

    def plancherel_floor(self) -> float:
        """min over the complete ball of sqrt(chi^2 + sum_j phi_j^2).

        Lower constant in the two-sided comparison between the dyadic H^0
        norm and the discrete L^2 norm.
        """
        sq = self.chi**2
        for p in self.phis:
            sq = sq + p**2
        radii = np.sqrt(_cache(self.grid.n_points).ksq)
        return float(np.sqrt(np.min(sq[radii <= self.complete_radius])))


@lru_cache(maxsize=None)
def _build_family_cached(n_points: int, dealias_fraction: float) -> DyadicFamily:
    grid = GridSpec(n_points, dealias_fraction)
    jmax = j_max_for(n_points)
    radii = np.sqrt(_cache(n_points).ksq)
    # Raw profile at every dyadic shift that can touch the lattice.
    rmax = float(np.max(radii))
    i_hi = int(math.ceil(math.log2(max(rmax, 1.0) / SUPPORT_LOW))) + 1
    shifts = list(range(-2, i_hi + 1))
    g = {i: _mother_profile(radii * 2.0 ** (-i)) for i in shifts}
    orbit_sum = np.zeros_like(radii)
    for i in shifts:
        orbit_sum = orbit_sum + g[i]
    # The orbit sum is scale invariant and lies in [1, 2] away from k = 0.
    safe = np.where(orbit_sum > 0, orbit_sum, 1.0)
    phis = tuple(_readonly(g[j] / safe) for j in range(0, jmax + 1))
    chi = g[-1] / safe + g[-2] / safe
    chi[radii == 0] = 1.0
    return DyadicFamily(grid=grid, j_max=jmax, chi=_readonly(chi), phis=phis)


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def build_family(grid: GridSpec) -> DyadicFamily:
    """Dyadic family for ``grid``; requires at least a 16-point grid."""
    if grid.n_points < MIN_GRID:
        raise GridTooSmall(f"dyadic decomposition needs n_points >= {MIN_GRID}, got {grid.n_points}")
    return _build_family_cached(grid.n_points, grid.dealias_fraction)


def _family_for(obj, family: DyadicFamily | None) -> DyadicFamily:
    return family if family is not None else build_family(obj.grid)


def _apply_multiplier(obj, mult: np.ndarray):
    if isinstance(obj, ScalarField):
        return ScalarField(obj.grid, fft_inverse(mult * fft_forward(obj.values)))
    if isinstance(obj, VectorField):
        return VectorField(
            obj.grid,
            fft_inverse(mult * fft_forward(obj.u1)),
            fft_inverse(mult * fft_forward(obj.u2)),
        )
    raise TypeError(f"expected a field, got {type(obj).__name__}")


def dyadic_block(f, j: int, family: DyadicFamily | None = None):
    """Frequency block: multiplier chi for j = -1, phi(2^-j .) for j >= 0."""
    fam = _family_for(f, family)
    return _apply_multiplier(f, fam.multiplier(j))


def low_freq(f, j: int, family: DyadicFamily | None = None):
    """Low-frequency cut S_j f = sum of blocks j' <= j - 1 (j >= 0)."""
    fam = _family_for(f, family)
    return _apply_multiplier(f, fam.lowpass_multiplier(j))


def _block_lp_norm(obj, mult: np.ndarray, p: float) -> float:
    from .spectral import lp_norm

    return lp_norm(_apply_multiplier(obj, mult), p)


def besov_norm(f, s: float, p: float, r: float, family: DyadicFamily | None = None) -> float:
    """Inhomogeneous Besov norm: l^r over j of 2^(j s) ||block_j f||_{L^p}.

    ``f`` may be a scalar or vector field; vector blocks are measured with
    the pointwise Euclidean magnitude.  Block L^p norms use the grid
    quadrature weight, and L^infinity is the max over nodes.
    """
    fam = _family_for(f, family)
    terms = []
    for j in range(-1, fam.j_max + 1):
        w = 2.0 ** (j * s)
        terms.append(w * _block_lp_norm(f, fam.multiplier(j), p))
    arr = np.array(terms)
    if np.isinf(r):
        return float(np.max(arr))
    if r <= 0:
        raise ValueError(f"r must be positive or inf, got {r}")
    return float(np.sum(arr**r) ** (1.0 / r))


def sobolev_norm(f, s: float, family: DyadicFamily | None = None) -> float:
    """Dyadic H^s norm, the r = p = 2 Besov norm."""
    return besov_norm(f, s, 2.0, 2.0, family)


# ---------------------------------------------------------------------------
# Bony decomposition.  All pointwise products are dealiased with the grid's
# dealias fraction, so for band-limited inputs the retained band is exact.
# ---------------------------------------------------------------------------

def _scalar_coeffs(f: ScalarField) -> np.ndarray:
    return fft_forward(f.values)


def bony_paraproduct(u: ScalarField, v: ScalarField, family: DyadicFamily | None = None) -> ScalarField:
    """T_u v = sum_{j >= 1} S_{j-1} u * block_j((Id - block_{-1}) v)."""
    fam = _family_for(u, family)
    frac = u.grid.dealias_fraction
    cu = _scalar_coeffs(u)
    cv = _scalar_coeffs(v)
    cv_high = (1.0 - fam.chi) * cv
    acc = np.zeros_like(cu)
    for j in range(1, fam.j_max + 1):
        low = fft_inverse(fam.lowpass_multiplier(j - 1) * cu)
        blk = fft_inverse(fam.multiplier(j) * cv_high)
        acc = acc + dealias_coeffs(fft_forward(low * blk), frac)
    return ScalarField(u.grid, fft_inverse(acc))


def bony_remainder(u: ScalarField, v: ScalarField, family: DyadicFamily | None = None) -> ScalarField:
    """R(u, v) = sum over |j - j'| <= 1 of block_j' u * block_j v."""
    fam = _family_for(u, family)
    frac = u.grid.dealias_fraction
    cu = _scalar_coeffs(u)
    cv = _scalar_coeffs(v)
    blocks_u = [fft_inverse(fam.multiplier(j) * cu) for j in range(-1, fam.j_max + 1)]
    blocks_v = [fft_inverse(fam.multiplier(j) * cv) for j in range(-1, fam.j_max + 1)]
    acc = np.zeros_like(cu)
    count = fam.j_max + 2
    for a in range(count):
        for b in range(max(0, a - 1), min(count, a + 2)):
            acc = acc + dealias_coeffs(fft_forward(blocks_u[a] * blocks_v[b]), frac)
    return ScalarField(u.grid, fft_inverse(acc))


def bony_product(u: ScalarField, v: ScalarField, family: DyadicFamily | None = None) -> ScalarField:
    """T_u v + T_v u + R(u, v); equals the dealiased product for band-limited inputs."""
    fam = _family_for(u, family)
    t1 = bony_paraproduct(u, v, fam)
    t2 = bony_paraproduct(v, u, fam)
    rem = bony_remainder(u, v, fam)
    return ScalarField(u.grid, t1.values + t2.values + rem.values)


# ---------------------------------------------------------------------------
# Empirical constant sweeps.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BernsteinReport:
    """Worst-case derivative quotients per grid size.

    ``constants[n]`` bounds the two-sided Bernstein quotient
    ||grad f||_p / (2^j ||f||_p) over annulus-supported samples: every
    observed quotient q satisfies 1/C <= q <= C.
    """

    constants: dict[int, float]
    quotient_range: dict[int, tuple[float, float]]

    def stability_factor(self) -> float:
        vals = list(self.constants.values())
        return max(vals) / min(vals)


def bernstein_sweep(
    n_list: tuple[int, ...] = (32, 64),
    samples: int = 20,
    seed: int = 0,
    ps: tuple[float, ...] = (1.0, 2.0, np.inf),
) -> BernsteinReport:
    """Measure derivative quotients on annulus-supported random fields.

    For each block j >= 0 the sampled field has spectrum restricted to the
    block annulus, so sup_alpha ||d^alpha f||_p should behave like
    2^j ||f||_p with constants independent of the resolution.
    """
    from .spectral import deriv_coeffs, lp_norm

    constants: dict[int, float] = {}
    ranges: dict[int, tuple[float, float]] = {}
    for n in n_list:
        rng = np.random.default_rng(seed)
        grid = GridSpec(n)
        fam = build_family(grid)
        lo, hi = np.inf, 0.0
        for _ in range(samples):
            raw = fft_forward(rng.standard_normal((n, n)))
            for j in range(0, fam.j_max + 1):
                c = fam.multiplier(j) * raw
                f = ScalarField(grid, fft_inverse(c))
                cf = fft_forward(f.values)
                d1 = ScalarField(grid, fft_inverse(deriv_coeffs(cf, 1)))
                d2 = ScalarField(grid, fft_inverse(deriv_coeffs(cf, 2)))
                for p in ps:
                    denom = 2.0**j * lp_norm(f, p)
                    if denom == 0:
                        continue
                    q = max(lp_norm(d1, p), lp_norm(d2, p)) / denom
                    lo, hi = min(lo, q), max(hi, q)
        constants[n] = max(hi, 1.0 / lo)
        ranges[n] = (lo, hi)
    return BernsteinReport(constants=constants, quotient_range=ranges)


@dataclass(frozen=True)
class ContinuityReport:
    """Empirical operator-norm quotients per named estimate and grid size."""

    quotients: dict[str, dict[int, float]]

    def stability_factor(self, name: str) -> float:
        vals = list(self.quotients[name].values())
        return max(vals) / min(vals)

    def all_finite(self) -> bool:
        return all(np.isfinite(v) and v > 0 for d in self.quotients.values() for v in d.values())


def continuity_sweep(
    n_list: tuple[int, ...] = (32, 64),
    samples: int = 12,
    seed: int = 0,
    s1: float = 2.6,
    s2: float = 1.3,
) -> ContinuityReport:
    """Empirical constants for paraproduct, remainder, and product estimates.

    Measured quotient families (u, v random band-limited pairs):

    * ``para_linf``:  ||T_u v||_{H^s1} / (||u||_inf ||v||_{H^s1})
    * ``para_neg``:   ||T_u v||_{H^(s2-1/2)} / (||u||_{B^(-1/2),inf,inf} ||v||_{H^s2})
    * ``remainder``:  ||R(u,v)||_{B^(s1-1+s2),1,1} / (||u||_{H^(s1-1)} ||v||_{H^s2})
    * ``product_s``:  ||uv||_{H^s2} / (||u||_{H^(s2+1/2)} ||v||_{H^s2})
    * ``product_s1``: ||uv||_{H^(s2+1)} / (||u||_{H^(s2+1)} ||v||_{H^(s2+1)})

    Every grid evaluates the same randomized trigonometric polynomials:
    samples are drawn as conjugate-symmetric coefficient sets inside half
    the coarsest family's complete ball, so products stay inside the ball
    where every partition is complete and the quotients are directly
    comparable across resolutions.
    """
    from .spectral import dealias, linf_norm

    names = ("para_linf", "para_neg", "remainder", "product_s", "product_s1")
    quot: dict[str, dict[int, float]] = {name: {} for name in names}
    shared_radius = build_family(GridSpec(min(n_list))).complete_radius / 2.0
    rng0 = np.random.default_rng(seed)
    draws = [
        (_draw_coefficients(shared_radius, rng0), _draw_coefficients(shared_radius, rng0))
        for _ in range(samples)
    ]
    for n in n_list:
        grid = GridSpec(n)
        fam = build_family(grid)
        worst = dict.fromkeys(names, 0.0)
        for cu, cv in draws:
            u = _field_from_draw(grid, cu)
            v = _field_from_draw(grid, cv)
            tuv = bony_paraproduct(u, v, fam)
            ruv = bony_remainder(u, v, fam)
            prod = dealias(ScalarField(grid, u.values * v.values))
            worst["para_linf"] = max(
                worst["para_linf"],
                sobolev_norm(tuv, s1, fam) / (linf_norm(u) * sobolev_norm(v, s1, fam)),
            )
            worst["para_neg"] = max(
                worst["para_neg"],
                sobolev_norm(tuv, s2 - 0.5, fam)
                / (besov_norm(u, -0.5, np.inf, np.inf, fam) * sobolev_norm(v, s2, fam)),
            )
            worst["remainder"] = max(
                worst["remainder"],
                besov_norm(ruv, s1 - 1 + s2, 1.0, 1.0, fam)
                / (sobolev_norm(u, s1 - 1, fam) * sobolev_norm(v, s2, fam)),
            )
            worst["product_s"] = max(
                worst["product_s"],
                sobolev_norm(prod, s2, fam) / (sobolev_norm(u, s2 + 0.5, fam) * sobolev_norm(v, s2, fam)),
            )
            worst["product_s1"] = max(
                worst["product_s1"],
                sobolev_norm(prod, s2 + 1, fam)
                / (sobolev_norm(u, s2 + 1, fam) * sobolev_norm(v, s2 + 1, fam)),
            )
        for name in names:
            quot[name][n] = worst[name]
    return ContinuityReport(quotients=quot)


def _draw_coefficients(radius: float, rng: np.random.Generator) -> dict[tuple[int, int], complex]:
    """Grid-independent random real-field coefficients inside |k| <= radius."""
    rmax = int(radius)
    coeffs: dict[tuple[int, int], complex] = {}
    total = 0.0
    for k1 in range(-rmax, rmax + 1):
        for k2 in range(-rmax, rmax + 1):
            if k1 * k1 + k2 * k2 > radius * radius:
                continue
            if (k1, k2) <= (0, 0):
                continue  # half lattice; partners added by symmetry
            a = complex(rng.standard_normal(), rng.standard_normal())
            coeffs[(k1, k2)] = a
            coeffs[(-k1, -k2)] = a.conjugate()
            total += 2.0 * abs(a) ** 2
    scale = 1.0 / np.sqrt(total) if total > 0 else 1.0
    return {k: c * scale for k, c in coeffs.items()}


def _field_from_draw(grid: GridSpec, coeffs: dict[tuple[int, int], complex]) -> ScalarField:
    n = grid.n_points
    c = np.zeros((n, n), dtype=np.complex128)
    for (k1, k2), val in coeffs.items():
        c[k1 % n, k2 % n] = val
    return ScalarField(grid, fft_inverse(c))
