"""Command line entry point: simulate, picard, analyze, selftest.

``simulate`` runs one configured trajectory (or a matched pair when the
formulation is "both"), writing diagnostics.csv, snapshot files, and a
summary.json with the monitor verdicts.  A run whose monitors fail still
exits 0; the verdicts live in the summary.  Numerical aborts (CFL,
positivity) exit 3 after writing the partial diagnostics and a summary
with the abort reason.

``picard`` runs the frozen-coefficient fixed-point iteration of the
reformulated system on the configured horizon and writes picard.csv with
one row per iterate: its index, the sampled solution norm E_m, the
Cauchy gap F_m to the previous iterate, and the forward gap ratio.

``analyze`` prints Sobolev or Besov norms of the fields stored in a
snapshot file.  ``selftest`` exercises the core identities on small
grids and exits 0 only if every check passes.

Exit codes: 0 success, 2 configuration, 3 numerics, 4 input/output.
ENPP_THREADS, when set to a positive integer, is exported to the BLAS
thread-count variables before heavy work; 0 means automatic.  The FFT
kernels themselves are single threaded.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config, serialize_config
from .dynamics import PrimalState, ReformState, reform_from_primal, reform_view
from .errors import ConstraintError, EnppError, IoError, NumericsError, SchemaError
from .integrator import (
    PicardConfig,
    StepperConfig,
    picard_solve,
    simulate,
    simulate_both,
)
from .io import (
    format_float,
    read_snapshot,
    snapshot_filename,
    snapshot_from_state,
    state_from_snapshot,
    write_diagnostics,
    write_snapshot,
)
from .lp import besov_norm, build_family, sobolev_norm
from .monitors import CSV_COLUMNS, run_checks, sample_state
from .presets import default_dt, preset
from .spectral import GridSpec

THREAD_ENV_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _apply_thread_cap() -> None:
    raw = os.environ.get("ENPP_THREADS")
    if raw is None:
        return
    try:
        value = int(raw)
    except ValueError:
        raise ConstraintError(
            f"ENPP_THREADS must be a nonnegative integer, got {raw!r}"
        ) from None
    if value < 0:
        raise ConstraintError(f"ENPP_THREADS >= 0 violated: got {value}")
    if value > 0:
        for var in THREAD_ENV_VARS:
            os.environ[var] = str(value)


def _load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _initial_state(cfg: RunConfig):
    grid = GridSpec(cfg.n_points)
    if cfg.preset is not None:
        return preset(cfg.preset, grid, seed=cfg.seed)
    try:
        snap = read_snapshot(cfg.ic_file)
    except OSError as exc:
        raise IoError(f"cannot read ic_file {cfg.ic_file}: {exc}") from exc
    if snap.n_points != cfg.n_points:
        raise ConstraintError(
            f"n_points == ic_file grid violated: config has {cfg.n_points}, "
            f"file has {snap.n_points}"
        )
    return state_from_snapshot(snap)


def _resolve_dt(cfg: RunConfig, state) -> float:
    return cfg.dt if cfg.dt is not None else default_dt(state)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _extrema(records) -> dict:
    out = {}
    for index, name in enumerate(CSV_COLUMNS):
        if name == "t":
            continue
        column = [rec.as_row()[index] for rec in records]
        if not column:
            continue
        out[name] = min(column) if name in ("min_a", "min_b") else max(column)
    return out


def _print_checks(checks, label: str = "") -> None:
    prefix = f"{label} " if label else ""
    for check in checks:
        if not check.applicable:
            verdict = "SKIP"
        else:
            verdict = "PASS" if check.passed else "FAIL"
        print(f"{prefix}{check.name}: {verdict} ({check.detail})")


def _collector(family, cfg: RunConfig):
    records, series = [], []

    def on_sample(step, t, state):
        reform = state if isinstance(state, ReformState) else reform_view(state)
        rec, ab = sample_state(t, reform, family, cfg.s1, cfg.s2,
                               nu=cfg.nu, dealias=cfg.dealias)
        records.append(rec)
        series.append(ab)

    return records, series, on_sample


def run_simulate(args) -> int:
    cfg = _load_config(args.config)
    initial = _initial_state(cfg)
    if cfg.formulation in ("primal", "both") and not isinstance(initial, PrimalState):
        raise ConstraintError(
            f"formulation {cfg.formulation!r} needs primal initial data, "
            "but the initial state is reformulated"
        )
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dt = _resolve_dt(cfg, initial)
    family = build_family(initial.grid)
    scfg = StepperConfig(dt=dt, t_end=cfg.t_end, formulation=cfg.formulation,
                         nu=cfg.nu, dealias=cfg.dealias)
    summary: dict = {
        "config": json.loads(serialize_config(cfg)),
        "dt": dt,
        "n_steps": scfg.n_steps,
    }

    if cfg.formulation == "both":
        return _simulate_both(cfg, scfg, initial, family, out_dir, summary)

    run_state = initial
    if cfg.formulation == "reform" and isinstance(initial, PrimalState):
        run_state = reform_from_primal(initial)
    records, series, on_sample = _collector(family, cfg)

    def on_snapshot(step, t, state):
        write_snapshot(out_dir / snapshot_filename(step), snapshot_from_state(state, t))

    if cfg.snapshot_every > 0:
        on_snapshot(0, 0.0, run_state)
    result = None
    abort = None
    try:
        result = simulate(run_state, scfg, on_sample=on_sample,
                          on_snapshot=on_snapshot,
                          diagnostics_every=cfg.diagnostics_every,
                          snapshot_every=cfg.snapshot_every)
    except NumericsError as exc:
        abort = exc

    write_diagnostics(out_dir / "diagnostics.csv", records)
    checks = run_checks(records, series, nu=cfg.nu, result=result)
    summary["aborted"] = abort is not None
    summary["abort_reason"] = None if abort is None else str(abort)
    summary["final_time"] = None if result is None else result.final_time
    summary["trajectory"] = None if result is None else {
        "reprojections": result.reprojections,
        "max_div_drift": result.max_div_drift,
        "max_grad_drift": result.max_grad_drift,
        "positivity_enforced": result.positivity_enforced,
    }
    summary["extrema"] = _extrema(records)
    summary["checks"] = [c.as_dict() for c in checks]
    (out_dir / "summary.json").write_text(
        json.dumps(_json_safe(summary), indent=2) + "\n"
    )
    _print_checks(checks)
    if abort is not None:
        raise abort
    final_step = result.n_steps
    write_snapshot(out_dir / snapshot_filename(final_step),
                   snapshot_from_state(result.final_state, result.final_time))
    print(f"wrote {out_dir / 'diagnostics.csv'} ({len(records)} samples), "
          f"{snapshot_filename(final_step)}, summary.json")
    return 0


def _simulate_both(cfg: RunConfig, scfg: StepperConfig, initial: PrimalState,
                   family, out_dir: Path, summary: dict) -> int:
    primal_dir = out_dir / "primal"
    reform_dir = out_dir / "reform"
    primal_dir.mkdir(exist_ok=True)
    reform_dir.mkdir(exist_ok=True)
    records_p, series_p, sample_p = _collector(family, cfg)
    records_r, series_r, sample_r = _collector(family, cfg)

    def on_sample(step, t, sp, sr, gap):
        sample_p(step, t, sp)
        sample_r(step, t, sr)

    results = None
    abort = None
    gaps: list = []
    try:
        result_p, result_r, gaps = simulate_both(
            initial, scfg, on_sample=on_sample,
            diagnostics_every=cfg.diagnostics_every,
        )
        results = (result_p, result_r)
    except NumericsError as exc:
        abort = exc

    write_diagnostics(primal_dir / "diagnostics.csv", records_p)
    write_diagnostics(reform_dir / "diagnostics.csv", records_r)
    gap_lines = ["t,gap"] + [
        f"{format_float(t)},{format_float(g)}" for t, g in gaps
    ]
    (out_dir / "cross_gap.csv").write_text("\n".join(gap_lines) + "\n")
    checks_p = run_checks(records_p, series_p, nu=cfg.nu,
                          result=None if results is None else results[0])
    checks_r = run_checks(records_r, series_r, nu=cfg.nu,
                          result=None if results is None else results[1])
    summary["aborted"] = abort is not None
    summary["abort_reason"] = None if abort is None else str(abort)
    summary["final_time"] = None if results is None else results[0].final_time
    summary["gap"] = {
        "max": max((g for _, g in gaps), default=0.0),
        "final": gaps[-1][1] if gaps else None,
    }
    summary["extrema"] = {"primal": _extrema(records_p), "reform": _extrema(records_r)}
    summary["checks"] = {
        "primal": [c.as_dict() for c in checks_p],
        "reform": [c.as_dict() for c in checks_r],
    }
    (out_dir / "summary.json").write_text(
        json.dumps(_json_safe(summary), indent=2) + "\n"
    )
    _print_checks(checks_p, "primal")
    _print_checks(checks_r, "reform")
    if abort is not None:
        raise abort
    result_p, result_r = results
    final_step = result_p.n_steps
    write_snapshot(primal_dir / snapshot_filename(final_step),
                   snapshot_from_state(result_p.final_state, result_p.final_time))
    write_snapshot(reform_dir / snapshot_filename(final_step),
                   snapshot_from_state(result_r.final_state, result_r.final_time))
    print(f"wrote paired diagnostics, cross_gap.csv ({len(gaps)} samples), "
          "summary.json")
    return 0


def run_picard(args) -> int:
    cfg = _load_config(args.config)
    if cfg.nu != 0.0:
        raise ConstraintError(
            f"nu == 0 violated for picard: the iteration is inviscid, got nu={cfg.nu}"
        )
    initial = _initial_state(cfg)
    state = initial if isinstance(initial, ReformState) else reform_from_primal(initial)
    dt = _resolve_dt(cfg, initial)
    pcfg = PicardConfig(horizon=cfg.t_end, dt=dt, s1=cfg.s1, s2=cfg.s2,
                        dealias=cfg.dealias, sample_every=cfg.diagnostics_every)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report, final = picard_solve(state, pcfg)
    lines = ["m,E_m,F_m,ratio"]
    for row in report.rows:
        lines.append(
            f"{row.m},{format_float(row.e_norm)},{format_float(row.f_gap)},"
            f"{format_float(row.gap_ratio)}"
        )
    (out_dir / "picard.csv").write_text("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    write_snapshot(out_dir / "picard_final.enpp",
                   snapshot_from_state(final, cfg.t_end))
    print(f"wrote {out_dir / 'picard.csv'} and picard_final.enpp")
    return 0


def _parse_norm(spec: str):
    text = spec.strip()
    if text.startswith("H"):
        try:
            return ("sobolev", float(text[1:]))
        except ValueError:
            raise SchemaError(
                f"norm spec {spec!r}: expected 'H<s>' with a numeric s"
            ) from None
    parts = text.split(",")
    if len(parts) != 3:
        raise SchemaError(
            f"norm spec {spec!r}: expected 'H<s>' or 's,p,r' with p, r numeric or inf"
        )
    try:
        s = float(parts[0])
        p = math.inf if parts[1].strip() == "inf" else float(parts[1])
        r = math.inf if parts[2].strip() == "inf" else float(parts[2])
    except ValueError:
        raise SchemaError(
            f"norm spec {spec!r}: expected 'H<s>' or 's,p,r' with p, r numeric or inf"
        ) from None
    if p < 1.0 or r < 1.0:
        raise ConstraintError(f"p >= 1 and r >= 1 violated in norm spec {spec!r}")
    return ("besov", s, p, r)


def run_analyze(args) -> int:
    try:
        snap = read_snapshot(args.snapshot)
    except OSError as exc:
        raise IoError(f"cannot read snapshot {args.snapshot}: {exc}") from exc
    state = state_from_snapshot(snap, validate=False)
    family = build_family(state.grid)
    if isinstance(state, PrimalState):
        targets = (("u", state.u), ("n", state.n), ("p", state.p))
    else:
        targets = (("u", state.u), ("z", state.z), ("xi", state.xi))
    for spec in args.norm:
        parsed = _parse_norm(spec)
        for name, obj in targets:
            if parsed[0] == "sobolev":
                value = sobolev_norm(obj, parsed[1], family)
            else:
                value = besov_norm(obj, parsed[1], parsed[2], parsed[3], family)
            print(f"{name} {spec} {format_float(value)}")
    return 0


# ---------------------------------------------------------------------------
# Built-in verification battery.
# ---------------------------------------------------------------------------

def _selftest_checks(quick: bool):
    from .dynamics import cancellation_residual, rhs_primal, rhs_reform
    from .integrator import step_state
    from .io import snapshot_from_bytes, snapshot_to_bytes
    from .lp import bernstein_sweep, bony_product, dyadic_block
    from .monitors import vorticity_residual
    from .spectral import (
        ScalarField,
        VectorField,
        _cache,
        dealias,
        divergence,
        fft_forward,
        fft_inverse,
        grad_part_project,
        leray_project,
        linf_norm,
    )

    n = 32
    grid = GridSpec(n)
    family = build_family(grid)
    rng = np.random.default_rng(2024)
    # Radial cutoff inside the dyadic family's completeness ball, so the
    # block reconstruction and product identities hold to rounding.
    radius = family.complete_radius

    def band_scalar(amplitude=1.0, positive_floor=None):
        c = fft_forward(rng.standard_normal((n, n)))
        cache = _cache(n)
        c = np.where(cache.ksq <= radius * radius, c, 0.0)
        c[0, 0] = 0.0
        vals = fft_inverse(c)
        vals *= amplitude / np.max(np.abs(vals))
        if positive_floor is not None:
            vals = vals - np.min(vals) + positive_floor
        return vals

    def check_projector_algebra():
        v = VectorField(grid, band_scalar(), band_scalar())
        pv = leray_project(v)
        lv = grad_part_project(v)
        plv = leray_project(lv)
        worst = max(
            linf_norm(divergence(pv)),
            float(np.max(np.abs(plv.u1))), float(np.max(np.abs(plv.u2))),
            float(np.max(np.abs(pv.u1 + lv.u1 - v.u1))),
            float(np.max(np.abs(pv.u2 + lv.u2 - v.u2))),
        )
        return worst < 1e-11, f"worst projector defect {worst:.2e}"

    def check_block_reconstruction():
        f = ScalarField(grid, band_scalar())
        total = np.zeros((n, n))
        for j in range(-1, family.j_max + 1):
            total = total + dyadic_block(f, j, family).values
        worst = float(np.max(np.abs(total - f.values)))
        return worst < 1e-12, f"reconstruction defect {worst:.2e}"

    def check_bony_product():
        u = ScalarField(grid, band_scalar())
        v = ScalarField(grid, band_scalar())
        prod = bony_product(u, v, family)
        want = dealias(ScalarField(grid, u.values * v.values))
        worst = float(np.max(np.abs(prod.values - want.values)))
        scale = max(1.0, linf_norm(want))
        return worst / scale < 1e-10, f"Bony defect {worst:.2e}"

    def check_bernstein():
        report = bernstein_sweep((n,), samples=4 if quick else 10, seed=1)
        c = report.constants[n]
        lo, hi = report.quotient_range[n]
        ok = c <= 10.0 and lo >= 1.0 / (c * 1.001) and hi <= c * 1.001
        return ok, f"constant {c:.2f}, quotients in [{lo:.3f}, {hi:.3f}]"

    def make_states():
        u = leray_project(VectorField(grid, band_scalar(0.3), band_scalar(0.3)))
        n_vals = band_scalar(0.3, positive_floor=0.2)
        # reversal is a grid symmetry: same values, same mean, same band
        p_vals = n_vals[::-1, ::-1].copy()
        primal = PrimalState.create(grid, u.u1, u.u2, n_vals, p_vals)
        return primal, reform_from_primal(primal)

    def check_rhs_structure():
        _, reform = make_states()
        out = rhs_reform(reform)
        gp = grad_part_project(out.dxi)
        worst = max(
            linf_norm(divergence(out.du)),
            float(np.max(np.abs(out.dxi.u1 - gp.u1))),
            float(np.max(np.abs(out.dxi.u2 - gp.u2))),
            abs(float(np.mean(out.dz.values))),
        )
        return worst < 1e-11, f"worst structural defect {worst:.2e}"

    def check_cross_formulation():
        primal, reform = make_states()
        pout = rhs_primal(primal, nu=0.2)
        rout = rhs_reform(reform, nu=0.2)
        g = divergence(rout.dxi).values
        dn_reform = 0.5 * (rout.dz.values + g)
        dp_reform = 0.5 * (rout.dz.values - g)
        scale = max(1.0, linf_norm(pout.dn), linf_norm(pout.dp), linf_norm(pout.du))
        worst = max(
            float(np.max(np.abs(pout.du.u1 - rout.du.u1))),
            float(np.max(np.abs(pout.du.u2 - rout.du.u2))),
            float(np.max(np.abs(pout.dn.values - dn_reform))),
            float(np.max(np.abs(pout.dp.values - dp_reform))),
        )
        return worst / scale < 1e-9, f"tendency gap {worst:.2e}"

    def check_cancellation():
        _, reform = make_states()
        worst = cancellation_residual(reform)
        return worst < 1e-10, f"pairing defect {worst:.2e}"

    def check_heat_exactness():
        x1, _ = grid.coords()
        amp = 1e-3
        zeros = np.zeros((n, n))
        state = ReformState.create(grid, zeros, zeros, zeros,
                                   amp * np.cos(x1), zeros, require_nonneg=False)
        dt = 1e-2
        stepped = step_state(state, dt)
        worst = float(np.max(np.abs(stepped.xi.u1 - math.exp(-dt) * state.xi.u1)))
        return worst < 1e-12, f"single-mode defect {worst:.2e}"

    def check_vorticity_identity():
        _, reform = make_states()
        res = vorticity_residual(reform)
        return res < 1e-9, f"residual {res:.2e}"

    def check_monitored_run():
        initial = reform_from_primal(preset("shear_charge", grid))
        t_end = 0.02 if quick else 0.1
        scfg = StepperConfig(dt=1e-3, t_end=t_end, formulation="reform")
        fam = build_family(grid)
        records, series = [], []

        def on_sample(step, t, s):
            rec, ab = sample_state(t, s, fam, 2.6, 1.3)
            records.append(rec)
            series.append(ab)

        result = simulate(initial, scfg, on_sample=on_sample,
                          diagnostics_every=max(1, int(t_end / 1e-3) // 4))
        checks = run_checks(records, series, nu=0.0, result=result)
        bad = [c.name for c in checks if c.applicable and not c.passed]
        return not bad, "all monitors hold" if not bad else f"failing: {', '.join(bad)}"

    def check_snapshot_round_trip():
        state = preset("gaussian_blobs", GridSpec(16))
        snap = snapshot_from_state(state, 0.5)
        raw = snapshot_to_bytes(snap)
        back = snapshot_from_bytes(raw)
        same = (
            back.time == snap.time
            and all(np.array_equal(back.fields[k], snap.fields[k]) for k in snap.fields)
            and snapshot_to_bytes(back) == raw
        )
        return same, "write-read-write is bit stable"

    checks = [
        ("projector_algebra", check_projector_algebra),
        ("block_reconstruction", check_block_reconstruction),
        ("bony_product", check_bony_product),
        ("bernstein_constants", check_bernstein),
        ("rhs_structure", check_rhs_structure),
        ("cross_formulation_rhs", check_cross_formulation),
        ("energy_cancellation", check_cancellation),
        ("heat_exactness", check_heat_exactness),
        ("vorticity_identity", check_vorticity_identity),
        ("monitored_run", check_monitored_run),
        ("snapshot_round_trip", check_snapshot_round_trip),
    ]
    return checks


def run_selftest(args) -> int:
    failures = 0
    started = time.perf_counter()
    for name, fn in _selftest_checks(args.quick):
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except EnppError as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - t0
        verdict = "PASS" if ok else "FAIL"
        print(f"{name}: {verdict} ({detail}) [{elapsed:.2f}s]")
        failures += 0 if ok else 1
    total = time.perf_counter() - started
    print(f"selftest: {'PASS' if failures == 0 else 'FAIL'} "
          f"({failures} failing) [{total:.2f}s]")
    return 0 if failures == 0 else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enpp",
        description="Pseudo-spectral simulator for coupled fluid and ion transport "
                    "on the periodic plane",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one configured trajectory")
    p_sim.add_argument("--config", required=True, help="path to a JSON run config")
    p_sim.set_defaults(func=run_simulate)

    p_pic = sub.add_parser("picard", help="run the fixed-point iteration")
    p_pic.add_argument("--config", required=True, help="path to a JSON run config")
    p_pic.set_defaults(func=run_picard)

    p_ana = sub.add_parser("analyze", help="print norms of a snapshot")
    p_ana.add_argument("--snapshot", required=True, help="path to a snapshot file")
    p_ana.add_argument("--norm", action="append", required=True,
                       help="norm spec: H<s> for Sobolev or s,p,r for Besov "
                            "(p, r may be inf); repeatable")
    p_ana.set_defaults(func=run_analyze)

    p_self = sub.add_parser("selftest", help="run the built-in verification battery")
    p_self.add_argument("--quick", action="store_true",
                        help="smaller sample counts and shorter runs")
    p_self.set_defaults(func=run_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_thread_cap()
        return args.func(args)
    except EnppError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
