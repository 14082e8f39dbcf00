"""Time integration for both formulations.

The scheme is an integrating-factor RK4: each diffusive component carries
its heat factor exactly (e^{-|k|^2 dt} for n, p, z, xi always, e^{-nu
|k|^2 dt} for u when nu > 0) and the remaining terms are advanced with
classical RK4 on the transformed variable.  Purely linear flows are
therefore integrated exactly, and stiffness from the Laplacian never
limits the step.

Trajectory drivers enforce the structural safeguards:

* advective CFL check dt * N * max|u| <= cfl_number before every step;
* re-projection of u onto divergence-free fields and of xi onto
  gradients whenever the drift of either structure exceeds a rounding
  threshold, with the pre-projection drift logged;
* a hard positivity abort when min(a) or min(b) falls below
  -10 * pos_tol, chosen over clipping because clipping would silently
  break charge conservation.  States whose initial data already violate
  positivity (deliberately signed test flows) disable the abort.

The fixed-point solver mirrors the analytical construction: iterate 0 is
(u0, e^{t Lap} z0, e^{t Lap} xi0); iterate m+1 solves the linear system
with u advected by the frozen u^m and all other couplings frozen at
iterate m, the coefficients interpolated linearly in time between stored
steps.  Convergence is measured by the Cauchy gap F_m in the lower-index
Sobolev norms and reported per iterate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import (
    POS_TOL,
    PrimalState,
    ReformState,
    nonlinear_primal,
    nonlinear_reform,
    xi_from_charge,
)
from .errors import CflViolation, ConstraintError, InvariantDrift, NoContraction
from .lp import build_family, sobolev_norm
from .spectral import (
    GridSpec,
    ScalarField,
    VectorField,
    _cache,
    _dealias_keep_mask,
    fft_forward,
    fft_inverse,
    grad_part_coeffs,
    l2_norm,
    leray_coeffs,
)

REPROJECT_TOL = 1e-12
POSITIVITY_ABORT = 10.0 * POS_TOL

_FORMULATIONS = ("primal", "reform", "both")


@dataclass(frozen=True)
class StepperConfig:
    """Settings for a single-trajectory run."""

    dt: float
    t_end: float
    formulation: str = "reform"
    nu: float = 0.0
    dealias: bool = True
    cfl_number: float = 0.5

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ConstraintError("dt > 0 violated")
        if self.t_end < 0.0:
            raise ConstraintError("t_end >= 0 violated")
        if self.formulation not in _FORMULATIONS:
            raise ConstraintError(
                f"formulation must be one of {_FORMULATIONS}, got {self.formulation!r}"
            )
        if self.nu < 0.0:
            raise ConstraintError("nu >= 0 violated")
        if self.cfl_number <= 0.0:
            raise ConstraintError("cfl_number > 0 violated")

    @property
    def n_steps(self) -> int:
        return max(0, int(round(self.t_end / self.dt)))


@dataclass(frozen=True)
class PicardConfig:
    """Settings for the fixed-point iteration over a short horizon."""

    horizon: float
    dt: float
    m_max: int = 6
    s1: float = 2.6
    s2: float = 1.3
    dealias: bool = True
    sample_every: int = 1

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ConstraintError("horizon > 0 violated")
        if self.dt <= 0.0 or self.dt > self.horizon + 1e-15:
            raise ConstraintError("0 < dt <= horizon violated")
        if self.m_max < 1:
            raise ConstraintError("m_max >= 1 violated")
        if self.sample_every < 1:
            raise ConstraintError("sample_every >= 1 violated")
        if not self.s1 > 2.0:
            raise ConstraintError(f"s1 > 2 violated: s1 = {self.s1}")
        if not self.s2 > 1.0:
            raise ConstraintError(f"s2 > 1 violated: s2 = {self.s2}")
        if not self.s2 + 1.5 > self.s1:
            raise ConstraintError(
                f"s2 + 3/2 > s1 violated: {self.s2} + 3/2 = {self.s2 + 1.5} <= {self.s1}"
            )
        if not self.s1 >= self.s2 + 1.0:
            raise ConstraintError(
                f"s1 >= s2 + 1 violated: {self.s1} < {self.s2} + 1 = {self.s2 + 1.0}"
            )

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.horizon / self.dt)))


class _IfRk4:
    """Integrating-factor RK4 over tuples of coefficient arrays."""

    def __init__(self, symbols: Sequence[np.ndarray], dt: float,
                 rhs: Callable[[float, tuple], tuple]):
        self.dt = dt
        self.rhs = rhs
        self.e_half = [np.exp(0.5 * dt * s) for s in symbols]
        self.e_full = [e * e for e in self.e_half]

    def step(self, t: float, y: tuple) -> tuple:
        h = self.dt
        eh, ef = self.e_half, self.e_full
        k1 = self.rhs(t, y)
        s2 = tuple(eh[i] * (y[i] + 0.5 * h * k1[i]) for i in range(len(y)))
        k2 = self.rhs(t + 0.5 * h, s2)
        s3 = tuple(eh[i] * y[i] + 0.5 * h * k2[i] for i in range(len(y)))
        k3 = self.rhs(t + 0.5 * h, s3)
        s4 = tuple(ef[i] * y[i] + h * eh[i] * k3[i] for i in range(len(y)))
        k4 = self.rhs(t + h, s4)
        return tuple(
            ef[i] * y[i] + (h / 6.0) * (ef[i] * k1[i] + 2.0 * eh[i] * (k2[i] + k3[i]) + k4[i])
            for i in range(len(y))
        )


def _symbols(grid: GridSpec, kind: str, nu: float) -> list[np.ndarray]:
    lam = -_cache(grid.n_points).ksq
    if kind == "primal":
        return [nu * lam, nu * lam, lam, lam]
    return [nu * lam, nu * lam, lam, lam, lam]


def _coeffs_from_state(state) -> tuple:
    if isinstance(state, PrimalState):
        return (
            fft_forward(state.u.u1),
            fft_forward(state.u.u2),
            fft_forward(state.n.values),
            fft_forward(state.p.values),
        )
    return (
        fft_forward(state.u.u1),
        fft_forward(state.u.u2),
        fft_forward(state.z.values),
        fft_forward(state.xi.u1),
        fft_forward(state.xi.u2),
    )


def _state_from_coeffs(grid: GridSpec, kind: str, coeffs: tuple):
    fields = [fft_inverse(c) for c in coeffs]
    if kind == "primal":
        return PrimalState(
            VectorField(grid, fields[0], fields[1]),
            ScalarField(grid, fields[2]),
            ScalarField(grid, fields[3]),
        )
    return ReformState(
        VectorField(grid, fields[0], fields[1]),
        ScalarField(grid, fields[2]),
        VectorField(grid, fields[3], fields[4]),
    )


def _dealias_tuple(grid: GridSpec, coeffs: tuple) -> tuple:
    mask = _dealias_keep_mask(grid.n_points, grid.dealias_fraction)
    return tuple(np.where(mask, c, 0.0) for c in coeffs)


def _stepper(grid: GridSpec, kind: str, nu: float, dt: float, dealias: bool) -> _IfRk4:
    if kind == "primal":
        def rhs(_t, y):
            return nonlinear_primal(y[0], y[1], y[2], y[3], grid, dealias)
    else:
        def rhs(_t, y):
            return nonlinear_reform(y[0], y[1], y[2], y[3], y[4], grid, dealias)

    return _IfRk4(_symbols(grid, kind, nu), dt, rhs)


class _TrajectoryGuard:
    """Per-step checks shared by the trajectory drivers."""

    def __init__(self, grid: GridSpec, kind: str, dt: float, cfl_number: float,
                 enforce_positivity: bool):
        self.grid = grid
        self.kind = kind
        self.dt = dt
        self.cfl_number = cfl_number
        self.enforce_positivity = enforce_positivity
        cache = _cache(grid.n_points)
        self.d1, self.d2 = cache.d1, cache.d2
        self.reprojections = 0
        self.max_div_drift = 0.0
        self.max_grad_drift = 0.0

    def check_cfl(self, coeffs: tuple, t: float) -> None:
        speed = float(
            np.max(np.hypot(fft_inverse(coeffs[0]), fft_inverse(coeffs[1])))
        )
        number = self.dt * self.grid.n_points * speed
        if number > self.cfl_number * (1.0 + 1e-12):
            raise CflViolation(
                f"dt*N*max|u| = {number:.6e} exceeds the CFL limit "
                f"{self.cfl_number} at t = {t:.6e}"
            )

    def enforce_structure(self, coeffs: tuple) -> tuple:
        """Measure structural drift, re-project when beyond rounding."""
        out = list(coeffs)
        div_phys = fft_inverse(self.d1 * out[0] + self.d2 * out[1])
        u_scale = max(
            1.0,
            float(np.max(np.abs(fft_inverse(out[0])))),
            float(np.max(np.abs(fft_inverse(out[1])))),
        )
        div_res = float(np.max(np.abs(div_phys)))
        self.max_div_drift = max(self.max_div_drift, div_res / u_scale)
        if div_res > REPROJECT_TOL * u_scale:
            out[0], out[1] = leray_coeffs(out[0], out[1])
            self.reprojections += 1
        if self.kind == "reform":
            g1, g2 = grad_part_coeffs(out[3], out[4])
            res = max(
                float(np.max(np.abs(fft_inverse(out[3] - g1)))),
                float(np.max(np.abs(fft_inverse(out[4] - g2)))),
            )
            xi_scale = max(
                1.0,
                float(np.max(np.abs(fft_inverse(out[3])))),
                float(np.max(np.abs(fft_inverse(out[4])))),
            )
            self.max_grad_drift = max(self.max_grad_drift, res / xi_scale)
            if res > REPROJECT_TOL * xi_scale:
                out[3], out[4] = g1, g2
                self.reprojections += 1
        return tuple(out)

    def check_positivity(self, coeffs: tuple, t: float) -> None:
        if not self.enforce_positivity:
            return
        if self.kind == "primal":
            min_a = float(np.min(fft_inverse(coeffs[2])))
            min_b = float(np.min(fft_inverse(coeffs[3])))
        else:
            g = self.d1 * coeffs[3] + self.d2 * coeffs[4]
            z_phys = fft_inverse(coeffs[2])
            g_phys = fft_inverse(g)
            min_a = 0.5 * float(np.min(z_phys + g_phys))
            min_b = 0.5 * float(np.min(z_phys - g_phys))
        if min(min_a, min_b) < -POSITIVITY_ABORT:
            raise InvariantDrift(
                f"positivity lost at t = {t:.6e}: min(a) = {min_a:.6e}, "
                f"min(b) = {min_b:.6e} (abort threshold -{POSITIVITY_ABORT:.1e})"
            )


@dataclass
class SimulationResult:
    final_state: PrimalState | ReformState
    final_time: float
    n_steps: int
    reprojections: int
    max_div_drift: float
    max_grad_drift: float
    positivity_enforced: bool


def _initial_positivity(state) -> bool:
    if isinstance(state, PrimalState):
        lows = (float(np.min(state.n.values)), float(np.min(state.p.values)))
    else:
        g = state.div_xi().values
        lows = (
            0.5 * float(np.min(state.z.values + g)),
            0.5 * float(np.min(state.z.values - g)),
        )
    return min(lows) >= -POS_TOL


def step_state(state, dt: float, nu: float = 0.0, dealias: bool = True,
               cfl_number: float = 0.5):
    """Advance one state by a single step with all per-step checks."""
    kind = "primal" if isinstance(state, PrimalState) else "reform"
    grid = state.grid
    guard = _TrajectoryGuard(grid, kind, dt, cfl_number, _initial_positivity(state))
    stepper = _stepper(grid, kind, nu, dt, dealias)
    coeffs = _coeffs_from_state(state)
    if dealias:
        coeffs = _dealias_tuple(grid, coeffs)
    guard.check_cfl(coeffs, 0.0)
    coeffs = stepper.step(0.0, coeffs)
    coeffs = guard.enforce_structure(coeffs)
    guard.check_positivity(coeffs, dt)
    return _state_from_coeffs(grid, kind, coeffs)


def simulate(initial, cfg: StepperConfig, on_sample=None, on_snapshot=None,
             diagnostics_every: int = 1, snapshot_every: int = 0,
             enforce_positivity: bool | None = None) -> SimulationResult:
    """Run one trajectory to t_end.

    ``on_sample(step_index, t, state)`` fires for the initial state, then
    after every ``diagnostics_every``-th step, and always for the final
    step.  ``on_snapshot(step_index, t, state)`` fires after every
    ``snapshot_every``-th step when that interval is positive.  With
    ``enforce_positivity=None`` the abort is armed exactly when the
    initial data satisfy the positivity hypothesis.
    """
    kind = "primal" if isinstance(initial, PrimalState) else "reform"
    if cfg.formulation == "both":
        raise ConstraintError("simulate runs one trajectory; use simulate_both")
    if cfg.formulation != kind:
        raise ConstraintError(
            f"formulation {cfg.formulation!r} does not match a {kind} initial state"
        )
    if diagnostics_every < 1:
        raise ConstraintError("diagnostics_every >= 1 violated")
    if snapshot_every < 0:
        raise ConstraintError("snapshot_every >= 0 violated")
    grid = initial.grid
    if enforce_positivity is None:
        enforce_positivity = _initial_positivity(initial)
    guard = _TrajectoryGuard(grid, kind, cfg.dt, cfg.cfl_number, enforce_positivity)
    stepper = _stepper(grid, kind, cfg.nu, cfg.dt, cfg.dealias)
    coeffs = _coeffs_from_state(initial)
    if cfg.dealias:
        coeffs = _dealias_tuple(grid, coeffs)
    n_steps = cfg.n_steps

    state = _state_from_coeffs(grid, kind, coeffs)
    if on_sample is not None:
        on_sample(0, 0.0, state)
    for i in range(n_steps):
        t = i * cfg.dt
        guard.check_cfl(coeffs, t)
        coeffs = stepper.step(t, coeffs)
        coeffs = guard.enforce_structure(coeffs)
        t_next = (i + 1) * cfg.dt
        guard.check_positivity(coeffs, t_next)
        is_sample = (i + 1) % diagnostics_every == 0 or i + 1 == n_steps
        is_snap = snapshot_every > 0 and (i + 1) % snapshot_every == 0
        if is_sample or is_snap:
            state = _state_from_coeffs(grid, kind, coeffs)
            if is_sample and on_sample is not None:
                on_sample(i + 1, t_next, state)
            if is_snap and on_snapshot is not None:
                on_snapshot(i + 1, t_next, state)
    final_state = _state_from_coeffs(grid, kind, coeffs)
    return SimulationResult(
        final_state=final_state,
        final_time=n_steps * cfg.dt,
        n_steps=n_steps,
        reprojections=guard.reprojections,
        max_div_drift=guard.max_div_drift,
        max_grad_drift=guard.max_grad_drift,
        positivity_enforced=enforce_positivity,
    )


def formulation_gap(primal: PrimalState, reform: ReformState) -> float:
    """L^2 distance between the two formulations of one flow."""
    grid = primal.grid
    dz = ScalarField(grid, reform.z.values - (primal.n.values + primal.p.values))
    xi_p = xi_from_charge(primal.n, primal.p)
    dxi = VectorField(grid, reform.xi.u1 - xi_p.u1, reform.xi.u2 - xi_p.u2)
    return l2_norm(dz) + l2_norm(dxi)


def simulate_both(initial: PrimalState, cfg: StepperConfig, on_sample=None,
                  diagnostics_every: int = 1,
                  enforce_positivity: bool | None = None):
    """Advance matched primal and reformulated trajectories side by side.

    ``on_sample(step_index, t, primal_state, reform_state, gap)`` fires on
    the same schedule as :func:`simulate`.  Returns the pair of
    :class:`SimulationResult` and the list of (t, gap) samples.
    """
    if not isinstance(initial, PrimalState):
        raise ConstraintError("simulate_both requires a primal initial state")
    if diagnostics_every < 1:
        raise ConstraintError("diagnostics_every >= 1 violated")
    grid = initial.grid
    if enforce_positivity is None:
        enforce_positivity = _initial_positivity(initial)
    from .dynamics import reform_from_primal

    reform_initial = reform_from_primal(initial, require_nonneg=False)
    guard_p = _TrajectoryGuard(grid, "primal", cfg.dt, cfg.cfl_number, enforce_positivity)
    guard_r = _TrajectoryGuard(grid, "reform", cfg.dt, cfg.cfl_number, enforce_positivity)
    stepper_p = _stepper(grid, "primal", cfg.nu, cfg.dt, cfg.dealias)
    stepper_r = _stepper(grid, "reform", cfg.nu, cfg.dt, cfg.dealias)
    cp = _coeffs_from_state(initial)
    cr = _coeffs_from_state(reform_initial)
    if cfg.dealias:
        cp = _dealias_tuple(grid, cp)
        cr = _dealias_tuple(grid, cr)
    n_steps = cfg.n_steps
    gaps: list[tuple[float, float]] = []

    def emit(step_index: int, t: float) -> None:
        sp = _state_from_coeffs(grid, "primal", cp)
        sr = _state_from_coeffs(grid, "reform", cr)
        gap = formulation_gap(sp, sr)
        gaps.append((t, gap))
        if on_sample is not None:
            on_sample(step_index, t, sp, sr, gap)

    emit(0, 0.0)
    for i in range(n_steps):
        t = i * cfg.dt
        guard_p.check_cfl(cp, t)
        guard_r.check_cfl(cr, t)
        cp = stepper_p.step(t, cp)
        cr = stepper_r.step(t, cr)
        cp = guard_p.enforce_structure(cp)
        cr = guard_r.enforce_structure(cr)
        t_next = (i + 1) * cfg.dt
        guard_p.check_positivity(cp, t_next)
        guard_r.check_positivity(cr, t_next)
        if (i + 1) % diagnostics_every == 0 or i + 1 == n_steps:
            emit(i + 1, t_next)
    result_p = SimulationResult(
        final_state=_state_from_coeffs(grid, "primal", cp),
        final_time=n_steps * cfg.dt,
        n_steps=n_steps,
        reprojections=guard_p.reprojections,
        max_div_drift=guard_p.max_div_drift,
        max_grad_drift=guard_p.max_grad_drift,
        positivity_enforced=enforce_positivity,
    )
    result_r = SimulationResult(
        final_state=_state_from_coeffs(grid, "reform", cr),
        final_time=n_steps * cfg.dt,
        n_steps=n_steps,
        reprojections=guard_r.reprojections,
        max_div_drift=guard_r.max_div_drift,
        max_grad_drift=guard_r.max_grad_drift,
        positivity_enforced=enforce_positivity,
    )
    return result_p, result_r, gaps


# ---------------------------------------------------------------------------
# Fixed-point iteration with contraction measurement.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PicardRow:
    m: int
    e_norm: float
    f_gap: float
    gap_ratio: float


@dataclass
class PicardReport:
    rows: list[PicardRow] = field(default_factory=list)

    def contraction_ratio(self, m: int) -> float:
        """Ratio of successive Cauchy gaps, F_{m+1} / F_m."""
        return self.rows[m].gap_ratio

    def e_norms(self) -> list[float]:
        return [row.e_norm for row in self.rows]


class _FrozenTrajectory:
    """Linear-in-time interpolation over stored per-step coefficients."""

    def __init__(self, samples: list[tuple], dt: float):
        self.samples = samples
        self.dt = dt

    def at(self, t: float) -> tuple:
        s = t / self.dt
        j = int(math.floor(s + 1e-9))
        j = min(max(j, 0), len(self.samples) - 1)
        frac = s - j
        if frac <= 1e-9 or j + 1 >= len(self.samples):
            return self.samples[j]
        left = self.samples[j]
        right = self.samples[j + 1]
        return tuple((1.0 - frac) * a + frac * b for a, b in zip(left, right))


def _picard_rhs(grid: GridSpec, frozen: _FrozenTrajectory, dealias: bool):
    """Right-hand side of the frozen-coefficient linear system."""
    cache = _cache(grid.n_points)
    d1, d2 = cache.d1, cache.d2
    mask = _dealias_keep_mask(grid.n_points, grid.dealias_fraction) if dealias else None

    def product(a_phys, b_phys):
        c = fft_forward(a_phys * b_phys)
        if mask is not None:
            c = np.where(mask, c, 0.0)
        return c

    def rhs(t, y):
        fu1, fu2, fz, fx1, fx2 = frozen.at(t)
        FU1, FU2 = fft_inverse(fu1), fft_inverse(fu2)
        FZ = fft_inverse(fz)
        FX1, FX2 = fft_inverse(fx1), fft_inverse(fx2)
        FG = fft_inverse(d1 * fx1 + d2 * fx2)
        # unknown velocity advected by the frozen flow
        du1 = -product(FU1, fft_inverse(d1 * y[0])) - product(FU2, fft_inverse(d2 * y[0]))
        du2 = -product(FU1, fft_inverse(d1 * y[1])) - product(FU2, fft_inverse(d2 * y[1]))
        # frozen corrector: keep only the gradient part of the frozen
        # self-advection, plus the projected electric force
        adv1 = product(FU1, fft_inverse(d1 * fu1)) + product(FU2, fft_inverse(d2 * fu1))
        adv2 = product(FU1, fft_inverse(d1 * fu2)) + product(FU2, fft_inverse(d2 * fu2))
        g1, g2 = grad_part_coeffs(adv1, adv2)
        p1, p2 = leray_coeffs(product(FG, FX1), product(FG, FX2))
        du1 = du1 + g1 + p1
        du2 = du2 + g2 + p2
        dz = -(d1 * product(FU1, FZ) + d2 * product(FU2, FZ)) - (
            d1 * product(FG, FX1) + d2 * product(FG, FX2)
        )
        l1, l2 = grad_part_coeffs(
            -product(FU1, FG) - product(FZ, FX1),
            -product(FU2, FG) - product(FZ, FX2),
        )
        return (du1, du2, dz, l1, l2)

    return rhs


def picard_solve(initial: ReformState, cfg: PicardConfig):
    """Run the fixed-point iteration and measure its contraction.

    Returns (PicardReport, final iterate state at t = horizon).  Raises
    NoContraction when the gap ratio stays above 0.95 for three
    consecutive iterates, which signals a horizon too large for the
    iteration to contract.
    """
    grid = initial.grid
    n = cfg.n_steps
    dt = cfg.horizon / n
    family = build_family(grid)
    cache = _cache(grid.n_points)
    ksq = cache.ksq
    y0 = _coeffs_from_state(initial)
    if cfg.dealias:
        y0 = _dealias_tuple(grid, y0)

    # iterate 0: constant velocity, exact heat flow for z and xi
    heat = [np.exp(-ksq * (j * dt)) for j in range(n + 1)]
    trajectory = [
        (y0[0].copy(), y0[1].copy(), heat[j] * y0[2], heat[j] * y0[3], heat[j] * y0[4])
        for j in range(n + 1)
    ]

    sample_idx = sorted(set(range(0, n + 1, cfg.sample_every)) | {n})
    symbols = [np.zeros_like(ksq), np.zeros_like(ksq), -ksq, -ksq, -ksq]

    def iterate_norms(traj) -> float:
        best_u = best_z = best_xi = 0.0
        for j in sample_idx:
            cu1, cu2, cz, cx1, cx2 = traj[j]
            u = VectorField(grid, fft_inverse(cu1), fft_inverse(cu2))
            z = ScalarField(grid, fft_inverse(cz))
            xi = VectorField(grid, fft_inverse(cx1), fft_inverse(cx2))
            best_u = max(best_u, sobolev_norm(u, cfg.s1, family))
            best_z = max(best_z, sobolev_norm(z, cfg.s2, family))
            best_xi = max(best_xi, sobolev_norm(xi, cfg.s2 + 1.0, family))
        return best_u + best_z + best_xi

    def gap_norms(traj_a, traj_b) -> float:
        best_u = best_z = best_xi = 0.0
        for j in sample_idx:
            a, b = traj_a[j], traj_b[j]
            u = VectorField(grid, fft_inverse(a[0] - b[0]), fft_inverse(a[1] - b[1]))
            z = ScalarField(grid, fft_inverse(a[2] - b[2]))
            xi = VectorField(grid, fft_inverse(a[3] - b[3]), fft_inverse(a[4] - b[4]))
            best_u = max(best_u, sobolev_norm(u, cfg.s1 - 1.0, family))
            best_z = max(best_z, sobolev_norm(z, cfg.s2 - 1.0, family))
            best_xi = max(best_xi, sobolev_norm(xi, cfg.s2, family))
        return best_u + best_z + best_xi

    e_norms = [iterate_norms(trajectory)]
    f_gaps: list[float] = []
    stall = 0
    for m in range(cfg.m_max):
        frozen = _FrozenTrajectory(trajectory, dt)
        stepper = _IfRk4(symbols, dt, _picard_rhs(grid, frozen, cfg.dealias))
        new_traj = [tuple(c.copy() for c in y0)]
        y = y0
        for j in range(n):
            y = stepper.step(j * dt, y)
            new_traj.append(y)
        e_norms.append(iterate_norms(new_traj))
        f_gaps.append(gap_norms(new_traj, trajectory))
        if len(f_gaps) >= 2 and f_gaps[-2] > 0.0:
            ratio = f_gaps[-1] / f_gaps[-2]
            if np.isfinite(ratio) and ratio > 0.95:
                stall += 1
                if stall >= 3:
                    raise NoContraction(
                        f"gap ratio stayed above 0.95 for three consecutive "
                        f"iterates (last F = {f_gaps[-1]:.6e}); shrink the horizon"
                    )
            else:
                stall = 0
        trajectory = new_traj

    rows = []
    for m in range(cfg.m_max + 1):
        f_gap = f_gaps[m] if m < len(f_gaps) else float("nan")
        if m + 1 < len(f_gaps) and f_gaps[m] > 0.0:
            ratio = f_gaps[m + 1] / f_gaps[m]
        else:
            ratio = float("nan")
        rows.append(PicardRow(m=m, e_norm=e_norms[m], f_gap=f_gap, gap_ratio=ratio))
    final_state = _state_from_coeffs(grid, "reform", trajectory[n])
    return PicardReport(rows=rows), final_state