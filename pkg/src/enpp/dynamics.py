"""Right-hand sides and state types for the coupled fluid-ion system.

Primal variables: velocity u (divergence-free), anion density n, cation
density p, with the electric field xi = -grad (-Lap)^-1 (n - p) recovered
from the charge.  Reformulated variables: u, total density z = n + p, and
the electric field xi evolved directly; div xi plays the role of n - p.

Equations (nu >= 0 is the fluid viscosity; nu = 0 is the inviscid case):

    primal:  du = P(nu Lap u - u.grad u + (n - p) xi)
             dn = -div(u n) + Lap n - div(n xi)
             dp = -div(u p) + Lap p + div(p xi)

    reform:  du = P(nu Lap u - u.grad u + (div xi) xi)
             dz = -div(u z) + Lap z - div((div xi) xi)
             dxi = L(Lap xi - u (div xi) - z xi)

    half-sum fields a = (z + div xi)/2, b = (z - div xi)/2:
             da = -u.grad a + Lap a - div(a xi)
             db = -u.grad b + Lap b + div(b xi)

P is the divergence-free (Leray) projection and L = Id - P the gradient
part.  Advective products are written in conservative form, so the charge
means are conserved exactly, and every pointwise product is dealiased
(2/3 rule) unless disabled.  du is projected as a whole and dxi is
gradient-projected as a whole, so the structural posts div du = 0 and
dxi = L(dxi) hold to rounding even when the incoming state carries a tiny
constraint residual.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvariantDrift
from .spectral import (
    GridSpec,
    ScalarField,
    VectorField,
    NEUTRALITY_TOL,
    _dealias_keep_mask,
    deriv_coeffs,
    fft_forward,
    fft_inverse,
    grad_part_coeffs,
    inv_neg_laplacian_coeffs,
    laplacian_coeffs,
    leray_coeffs,
    linf_norm,
    l2_norm,
)

DIV_TOL = 1e-8
POS_TOL = 1e-10
GRAD_TOL = 1e-8


def _div_residual(u1: np.ndarray, u2: np.ndarray) -> float:
    c = deriv_coeffs(fft_forward(u1), 1) + deriv_coeffs(fft_forward(u2), 2)
    return float(np.max(np.abs(fft_inverse(c))))


def _grad_residual(x1: np.ndarray, x2: np.ndarray) -> float:
    """Distance of (x1, x2) from the range of L in the max norm."""
    c1, c2 = fft_forward(x1), fft_forward(x2)
    g1, g2 = grad_part_coeffs(c1, c2)
    return float(max(np.max(np.abs(fft_inverse(c1 - g1))), np.max(np.abs(fft_inverse(c2 - g2)))))


@dataclass(frozen=True)
class PrimalState:
    """(u, n, p) sample; build through :meth:`create` to enforce invariants."""

    u: VectorField
    n: ScalarField
    p: ScalarField

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    @classmethod
    def create(cls, grid: GridSpec, u1, u2, n, p, require_nonneg: bool = True) -> "PrimalState":
        state = cls(VectorField(grid, u1, u2), ScalarField(grid, n), ScalarField(grid, p))
        problems = state.violations(require_nonneg)
        if problems:
            raise InvariantDrift("; ".join(problems))
        return state

    def violations(self, require_nonneg: bool = True) -> list[str]:
        out = []
        div = _div_residual(self.u.u1, self.u.u2)
        if div > DIV_TOL:
            out.append(f"div u = {div:.3e} exceeds {DIV_TOL}")
        if require_nonneg:
            for name, f in (("n", self.n), ("p", self.p)):
                m = float(np.min(f.values))
                if m < -POS_TOL:
                    out.append(f"min {name} = {m:.3e} below -{POS_TOL}")
        charge_mean = float(np.mean(self.n.values - self.p.values))
        scale = max(1.0, linf_norm(self.n), linf_norm(self.p))
        if abs(charge_mean) > NEUTRALITY_TOL * scale:
            out.append(f"mean(n - p) = {charge_mean:.3e} breaks neutrality")
        return out


@dataclass(frozen=True)
class ReformState:
    """(u, z, xi) sample; build through :meth:`create` to enforce invariants."""

    u: VectorField
    z: ScalarField
    xi: VectorField

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    @classmethod
    def create(cls, grid: GridSpec, u1, u2, z, xi1, xi2, require_nonneg: bool = True) -> "ReformState":
        state = cls(VectorField(grid, u1, u2), ScalarField(grid, z), VectorField(grid, xi1, xi2))
        problems = state.violations(require_nonneg)
        if problems:
            raise InvariantDrift("; ".join(problems))
        return state

    def div_xi(self) -> ScalarField:
        c = deriv_coeffs(fft_forward(self.xi.u1), 1) + deriv_coeffs(fft_forward(self.xi.u2), 2)
        return ScalarField(self.grid, fft_inverse(c))

    def violations(self, require_nonneg: bool = True) -> list[str]:
        out = []
        div = _div_residual(self.u.u1, self.u.u2)
        if div > DIV_TOL:
            out.append(f"div u = {div:.3e} exceeds {DIV_TOL}")
        grad_res = _grad_residual(self.xi.u1, self.xi.u2)
        if grad_res > GRAD_TOL:
            out.append(f"xi deviates from a gradient by {grad_res:.3e} (tolerance {GRAD_TOL})")
        g = self.div_xi()
        gm = float(np.mean(g.values))
        if abs(gm) > 1e-13 * max(1.0, linf_norm(g)):
            out.append(f"mean(div xi) = {gm:.3e} is not zero")
        if require_nonneg:
            a, b = ab_fields(self)
            for name, f in (("a", a), ("b", b)):
                m = float(np.min(f.values))
                if m < -POS_TOL:
                    out.append(f"min {name} = {m:.3e} below -{POS_TOL}")
        return out


class PrimalRhs(NamedTuple):
    du: VectorField
    dn: ScalarField
    dp: ScalarField


class ReformRhs(NamedTuple):
    du: VectorField
    dz: ScalarField
    dxi: VectorField


def xi_from_charge(n: ScalarField, p: ScalarField) -> VectorField:
    """Electric field -grad (-Lap)^-1 (n - p); requires a neutral charge.

    Example: n - p = sin(x1) gives xi = (-cos(x1), 0).
    """
    q = n.values - p.values
    qmean = float(np.mean(q))
    scale = max(1.0, float(np.max(np.abs(q))))
    if abs(qmean) > NEUTRALITY_TOL * scale:
        raise InvariantDrift(f"mean(n - p) = {qmean:.3e} breaks neutrality")
    phi = inv_neg_laplacian_coeffs(fft_forward(q))
    return VectorField(
        n.grid,
        fft_inverse(-deriv_coeffs(phi, 1)),
        fft_inverse(-deriv_coeffs(phi, 2)),
    )


def reform_from_primal(state: PrimalState, require_nonneg: bool = True) -> ReformState:
    xi = xi_from_charge(state.n, state.p)
    return ReformState.create(
        state.grid,
        state.u.u1,
        state.u.u2,
        state.n.values + state.p.values,
        xi.u1,
        xi.u2,
        require_nonneg=require_nonneg,
    )


def reform_view(state: PrimalState) -> ReformState:
    """Reformulated view of a primal state without invariant enforcement.

    Monitoring path: mid-run states may carry drift within the abort
    tolerances, so this skips :meth:`ReformState.create` validation.
    """
    xi = xi_from_charge(state.n, state.p)
    return ReformState(
        VectorField(state.grid, state.u.u1, state.u.u2),
        ScalarField(state.grid, state.n.values + state.p.values),
        xi,
    )


def primal_from_reform(state: ReformState, require_nonneg: bool = True) -> PrimalState:
    g = state.div_xi().values
    return PrimalState.create(
        state.grid,
        state.u.u1,
        state.u.u2,
        0.5 * (state.z.values + g),
        0.5 * (state.z.values - g),
        require_nonneg=require_nonneg,
    )


def ab_fields(state: ReformState) -> tuple[ScalarField, ScalarField]:
    """Half-sum fields a = (z + div xi)/2, b = (z - div xi)/2."""
    g = state.div_xi().values
    a = ScalarField(state.grid, 0.5 * (state.z.values + g))
    b = ScalarField(state.grid, 0.5 * (state.z.values - g))
    return a, b


# ---------------------------------------------------------------------------
# Coefficient-level kernels.  The integrator drives these directly; the
# public rhs_* wrappers add the diffusive parts and wrap fields.
# ---------------------------------------------------------------------------

def _mask_for(grid: GridSpec, dealias: bool):
    if not dealias:
        return None
    return _dealias_keep_mask(grid.n_points, grid.dealias_fraction)


def _product(a_phys: np.ndarray, b_phys: np.ndarray, mask) -> np.ndarray:
    c = fft_forward(a_phys * b_phys)
    if mask is not None:
        c = np.where(mask, c, 0.0)
    return c


def _divergence_of(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    return deriv_coeffs(c1, 1) + deriv_coeffs(c2, 2)


def nonlinear_primal(cu1, cu2, cn, cp, grid: GridSpec, dealias: bool = True):
    """Nonadvective-diffusion-free part of the primal right-hand side."""
    mask = _mask_for(grid, dealias)
    U1, U2 = fft_inverse(cu1), fft_inverse(cu2)
    N, P = fft_inverse(cn), fft_inverse(cp)
    phi = inv_neg_laplacian_coeffs(cn - cp)
    X1 = fft_inverse(-deriv_coeffs(phi, 1))
    X2 = fft_inverse(-deriv_coeffs(phi, 2))
    Q = N - P
    # momentum: -u.grad u + (n - p) xi, then project
    adv1 = _divergence_of(_product(U1, U1, mask), _product(U2, U1, mask))
    adv2 = _divergence_of(_product(U1, U2, mask), _product(U2, U2, mask))
    f1 = _product(Q, X1, mask)
    f2 = _product(Q, X2, mask)
    du1, du2 = leray_coeffs(-adv1 + f1, -adv2 + f2)
    # charges: transport plus migration, conservative form
    dn = -_divergence_of(_product(U1, N, mask), _product(U2, N, mask)) - _divergence_of(
        _product(N, X1, mask), _product(N, X2, mask)
    )
    dp = -_divergence_of(_product(U1, P, mask), _product(U2, P, mask)) + _divergence_of(
        _product(P, X1, mask), _product(P, X2, mask)
    )
    return du1, du2, dn, dp


def nonlinear_reform(cu1, cu2, cz, cxi1, cxi2, grid: GridSpec, dealias: bool = True):
    """Nonadvective-diffusion-free part of the reformulated right-hand side."""
    mask = _mask_for(grid, dealias)
    U1, U2 = fft_inverse(cu1), fft_inverse(cu2)
    Z = fft_inverse(cz)
    X1, X2 = fft_inverse(cxi1), fft_inverse(cxi2)
    G = fft_inverse(_divergence_of(cxi1, cxi2))
    adv1 = _divergence_of(_product(U1, U1, mask), _product(U2, U1, mask))
    adv2 = _divergence_of(_product(U1, U2, mask), _product(U2, U2, mask))
    f1 = _product(G, X1, mask)
    f2 = _product(G, X2, mask)
    du1, du2 = leray_coeffs(-adv1 + f1, -adv2 + f2)
    dz = -_divergence_of(_product(U1, Z, mask), _product(U2, Z, mask)) - _divergence_of(f1, f2)
    dxi1, dxi2 = grad_part_coeffs(
        -_product(U1, G, mask) - _product(Z, X1, mask),
        -_product(U2, G, mask) - _product(Z, X2, mask),
    )
    return du1, du2, dz, dxi1, dxi2


def rhs_primal(state: PrimalState, nu: float = 0.0, dealias: bool = True) -> PrimalRhs:
    """Full primal right-hand side (nonlinear part plus diffusion)."""
    grid = state.grid
    cu1, cu2 = fft_forward(state.u.u1), fft_forward(state.u.u2)
    cn, cp = fft_forward(state.n.values), fft_forward(state.p.values)
    du1, du2, dn, dp = nonlinear_primal(cu1, cu2, cn, cp, grid, dealias)
    if nu != 0.0:
        v1, v2 = leray_coeffs(laplacian_coeffs(cu1), laplacian_coeffs(cu2))
        du1 = du1 + nu * v1
        du2 = du2 + nu * v2
    dn = dn + laplacian_coeffs(cn)
    dp = dp + laplacian_coeffs(cp)
    return PrimalRhs(
        VectorField(grid, fft_inverse(du1), fft_inverse(du2)),
        ScalarField(grid, fft_inverse(dn)),
        ScalarField(grid, fft_inverse(dp)),
    )


def rhs_reform(state: ReformState, nu: float = 0.0, dealias: bool = True) -> ReformRhs:
    """Full reformulated right-hand side (nonlinear part plus diffusion)."""
    grid = state.grid
    cu1, cu2 = fft_forward(state.u.u1), fft_forward(state.u.u2)
    cz = fft_forward(state.z.values)
    cxi1, cxi2 = fft_forward(state.xi.u1), fft_forward(state.xi.u2)
    du1, du2, dz, dxi1, dxi2 = nonlinear_reform(cu1, cu2, cz, cxi1, cxi2, grid, dealias)
    if nu != 0.0:
        v1, v2 = leray_coeffs(laplacian_coeffs(cu1), laplacian_coeffs(cu2))
        du1 = du1 + nu * v1
        du2 = du2 + nu * v2
    dz = dz + laplacian_coeffs(cz)
    l1, l2 = grad_part_coeffs(laplacian_coeffs(cxi1), laplacian_coeffs(cxi2))
    dxi1 = dxi1 + l1
    dxi2 = dxi2 + l2
    return ReformRhs(
        VectorField(grid, fft_inverse(du1), fft_inverse(du2)),
        ScalarField(grid, fft_inverse(dz)),
        VectorField(grid, fft_inverse(dxi1), fft_inverse(dxi2)),
    )


def rhs_ab(state: ReformState, dealias: bool = True) -> tuple[ScalarField, ScalarField]:
    """Right-hand sides of the half-sum fields a and b.

    Consistent with the (z, xi) system: da matches (dz + div dxi)/2 and
    db matches (dz - div dxi)/2 on band-limited states.
    """
    grid = state.grid
    mask = _mask_for(grid, dealias)
    a, b = ab_fields(state)
    ca, cb = fft_forward(a.values), fft_forward(b.values)
    U1, U2 = state.u.u1, state.u.u2
    X1, X2 = state.xi.u1, state.xi.u2
    ga1 = fft_inverse(deriv_coeffs(ca, 1))
    ga2 = fft_inverse(deriv_coeffs(ca, 2))
    gb1 = fft_inverse(deriv_coeffs(cb, 1))
    gb2 = fft_inverse(deriv_coeffs(cb, 2))
    da = (
        -_product(U1, ga1, mask)
        - _product(U2, ga2, mask)
        + laplacian_coeffs(ca)
        - _divergence_of(_product(a.values, X1, mask), _product(a.values, X2, mask))
    )
    db = (
        -_product(U1, gb1, mask)
        - _product(U2, gb2, mask)
        + laplacian_coeffs(cb)
        + _divergence_of(_product(b.values, X1, mask), _product(b.values, X2, mask))
    )
    return ScalarField(grid, fft_inverse(da)), ScalarField(grid, fft_inverse(db))


# ---------------------------------------------------------------------------
# Derived scalars and recovery of the original potential variables.
# ---------------------------------------------------------------------------

def energy(state: ReformState) -> float:
    """Half the squared L^2 norms of u and xi."""
    return 0.5 * (l2_norm(state.u) ** 2 + l2_norm(state.xi) ** 2)


def grad_xi_sq(state: ReformState) -> float:
    """Squared L^2 norm of the full gradient of xi."""
    total = 0.0
    for comp in (state.xi.u1, state.xi.u2):
        c = fft_forward(comp)
        for axis in (1, 2):
            d = ScalarField(state.grid, fft_inverse(deriv_coeffs(c, axis)))
            total += l2_norm(d) ** 2
    return total


def z_xi_sq(state: ReformState) -> float:
    """Quadrature of z |xi|^2 (sign-definite once z >= 0)."""
    w = state.grid.quadrature_weight
    return float(w * np.sum(state.z.values * (state.xi.u1**2 + state.xi.u2**2)))


def cancellation_residual(state: ReformState, dealias: bool = True) -> float:
    """Defect of the energy cancellation <P((div xi) xi), u> = <u (div xi), xi>."""
    grid = state.grid
    mask = _mask_for(grid, dealias)
    G = state.div_xi().values
    f1 = _product(G, state.xi.u1, mask)
    f2 = _product(G, state.xi.u2, mask)
    p1, p2 = leray_coeffs(f1, f2)
    w = grid.quadrature_weight
    lhs = w * np.sum(fft_inverse(p1) * state.u.u1 + fft_inverse(p2) * state.u.u2)
    t1 = _product(state.u.u1, G, mask)
    t2 = _product(state.u.u2, G, mask)
    rhs = w * np.sum(fft_inverse(t1) * state.xi.u1 + fft_inverse(t2) * state.xi.u2)
    return float(abs(lhs - rhs))


def recover_potential(state: ReformState) -> ScalarField:
    """Zero-mean potential phi with grad phi = xi and Lap phi = div xi."""
    g = fft_forward(state.div_xi().values)
    return ScalarField(state.grid, fft_inverse(-inv_neg_laplacian_coeffs(g)))


def recover_pressure(state: ReformState, dealias: bool = True) -> ScalarField:
    """Zero-mean pressure from -Lap P = div(u.grad u) - div((div xi) xi)."""
    grid = state.grid
    mask = _mask_for(grid, dealias)
    U1, U2 = state.u.u1, state.u.u2
    adv1 = _divergence_of(_product(U1, U1, mask), _product(U2, U1, mask))
    adv2 = _divergence_of(_product(U1, U2, mask), _product(U2, U2, mask))
    G = state.div_xi().values
    f1 = _product(G, state.xi.u1, mask)
    f2 = _product(G, state.xi.u2, mask)
    rhs = _divergence_of(adv1 - f1, adv2 - f2)
    # rhs holds div(u.grad u) - div((div xi) xi) written through first
    # derivatives of the dealiased products
    return ScalarField(grid, fft_inverse(inv_neg_laplacian_coeffs(rhs)))