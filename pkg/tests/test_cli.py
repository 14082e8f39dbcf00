"""Command line surface: subcommands, artifacts, exit codes, determinism."""
import json
import math
import os

import pytest

from enpp.cli import _apply_thread_cap, _parse_norm, main
from enpp.config import parse_config, serialize_config
from enpp.dynamics import reform_from_primal
from enpp.io import (
    PRIMAL_FIELDS,
    REFORM_FIELDS,
    read_diagnostics,
    read_snapshot,
    snapshot_from_state,
    state_from_snapshot,
    write_snapshot,
)
from enpp.lp import besov_norm, build_family, sobolev_norm
from enpp.monitors import CSV_COLUMNS
from enpp.presets import default_dt, preset
from enpp.spectral import GridSpec


def write_config(tmp_path, out_name="out", **overrides):
    fields = {
        "n_points": 32,
        "t_end": 0.02,
        "dt": 1e-3,
        "preset": "shear_charge",
        "diagnostics_every": 10,
        "output_dir": str(tmp_path / out_name),
    }
    fields.update(overrides)
    fields = {k: v for k, v in fields.items() if v is not None}
    path = tmp_path / f"{out_name}.json"
    path.write_text(json.dumps(fields))
    return path


class TestParser:
    def test_no_subcommand_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2
        capsys.readouterr()

    def test_unknown_subcommand_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 2
        capsys.readouterr()


class TestSimulate:
    def test_writes_diagnostics_snapshot_summary(self, tmp_path, capsys):
        cfg = write_config(tmp_path, snapshot_every=10)
        assert main(["simulate", "--config", str(cfg)]) == 0
        out = tmp_path / "out"
        rows = read_diagnostics(out / "diagnostics.csv")
        assert [r.t for r in rows] == [0.0, 0.01, 0.02]
        for step in (0, 10, 20):
            snap = read_snapshot(out / f"snapshot_{step:08d}.enpp")
            assert snap.n_points == 32
            assert tuple(snap.fields) == REFORM_FIELDS
        summary = json.loads((out / "summary.json").read_text())
        assert summary["aborted"] is False
        assert summary["n_steps"] == 20
        assert summary["final_time"] == pytest.approx(0.02)
        capsys.readouterr()

    def test_summary_reports_all_checks_passing(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        main(["simulate", "--config", str(cfg)])
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        names = [c["name"] for c in summary["checks"]]
        assert "energy_balance" in names and "vorticity_identity" in names
        assert all(c["passed"] for c in summary["checks"] if c["applicable"])
        stdout = capsys.readouterr().out
        assert "energy_balance: PASS" in stdout

    def test_summary_echoes_config_and_extrema(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        main(["simulate", "--config", str(cfg)])
        capsys.readouterr()
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        parsed = parse_config(cfg.read_text())
        assert summary["config"] == json.loads(serialize_config(parsed))
        assert set(summary["extrema"]) == set(CSV_COLUMNS) - {"t"}
        rows = read_diagnostics(tmp_path / "out" / "diagnostics.csv")
        assert summary["extrema"]["energy"] == max(r.energy for r in rows)
        assert summary["extrema"]["min_a"] == min(r.min_a for r in rows)

    def test_final_snapshot_written_without_snapshot_every(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        main(["simulate", "--config", str(cfg)])
        capsys.readouterr()
        out = tmp_path / "out"
        names = sorted(p.name for p in out.glob("*.enpp"))
        assert names == ["snapshot_00000020.enpp"]

    def test_default_dt_used_when_omitted(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dt=None)
        main(["simulate", "--config", str(cfg)])
        capsys.readouterr()
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        expect = default_dt(preset("shear_charge", GridSpec(32)))
        assert summary["dt"] == pytest.approx(expect)

    def test_primal_formulation_writes_primal_snapshots(self, tmp_path, capsys):
        cfg = write_config(tmp_path, preset="gaussian_blobs", formulation="primal")
        assert main(["simulate", "--config", str(cfg)]) == 0
        capsys.readouterr()
        snap = read_snapshot(tmp_path / "out" / "snapshot_00000020.enpp")
        assert tuple(snap.fields) == PRIMAL_FIELDS

    def test_same_seed_gives_identical_bytes(self, tmp_path, capsys):
        cfg_a = write_config(tmp_path, "a", preset="random_bandlimited", seed=7)
        cfg_b = write_config(tmp_path, "b", preset="random_bandlimited", seed=7)
        main(["simulate", "--config", str(cfg_a)])
        main(["simulate", "--config", str(cfg_b)])
        capsys.readouterr()
        csv_a = (tmp_path / "a" / "diagnostics.csv").read_bytes()
        csv_b = (tmp_path / "b" / "diagnostics.csv").read_bytes()
        assert csv_a == csv_b
        snap_a = (tmp_path / "a" / "snapshot_00000020.enpp").read_bytes()
        snap_b = (tmp_path / "b" / "snapshot_00000020.enpp").read_bytes()
        assert snap_a == snap_b

    def test_initial_state_from_snapshot_file(self, tmp_path, capsys):
        grid = GridSpec(32)
        ic = tmp_path / "ic.enpp"
        write_snapshot(ic, snapshot_from_state(preset("gaussian_blobs", grid), 0.0))
        cfg = write_config(tmp_path, preset=None, ic_file=str(ic))
        assert main(["simulate", "--config", str(cfg)]) == 0
        capsys.readouterr()
        assert (tmp_path / "out" / "summary.json").exists()

    def test_ic_file_grid_mismatch_is_a_config_error(self, tmp_path, capsys):
        ic = tmp_path / "ic.enpp"
        write_snapshot(ic, snapshot_from_state(preset("gaussian_blobs", GridSpec(16)), 0.0))
        cfg = write_config(tmp_path, preset=None, ic_file=str(ic))
        assert main(["simulate", "--config", str(cfg)]) == 2
        assert "n_points" in capsys.readouterr().err

    def test_cfl_abort_exits_3_with_partial_artifacts(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dt=0.9, t_end=3.0)
        assert main(["simulate", "--config", str(cfg)]) == 3
        err = capsys.readouterr().err
        assert "CFL" in err
        out = tmp_path / "out"
        assert (out / "diagnostics.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["aborted"] is True
        assert "CFL" in summary["abort_reason"]
        assert summary["final_time"] is None

    def test_missing_config_exits_4(self, tmp_path, capsys):
        assert main(["simulate", "--config", str(tmp_path / "nope.json")]) == 4
        assert "cannot read config" in capsys.readouterr().err

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, n_points=31)
        assert main(["simulate", "--config", str(cfg)]) == 2
        assert "n_points" in capsys.readouterr().err


class TestSimulateBoth:
    def test_paired_outputs_and_small_gap(self, tmp_path, capsys):
        cfg = write_config(tmp_path, preset="gaussian_blobs", formulation="both",
                           diagnostics_every=5)
        assert main(["simulate", "--config", str(cfg)]) == 0
        capsys.readouterr()
        out = tmp_path / "out"
        rows_p = read_diagnostics(out / "primal" / "diagnostics.csv")
        rows_r = read_diagnostics(out / "reform" / "diagnostics.csv")
        assert len(rows_p) == len(rows_r) == 5
        gap_lines = (out / "cross_gap.csv").read_text().strip().splitlines()
        assert gap_lines[0] == "t,gap"
        gaps = [float(line.split(",")[1]) for line in gap_lines[1:]]
        assert len(gaps) == 5
        assert max(gaps) < 1e-9
        summary = json.loads((out / "summary.json").read_text())
        assert summary["gap"]["max"] == max(gaps)
        assert set(summary["checks"]) == {"primal", "reform"}
        snap_p = read_snapshot(out / "primal" / "snapshot_00000020.enpp")
        snap_r = read_snapshot(out / "reform" / "snapshot_00000020.enpp")
        assert tuple(snap_p.fields) == PRIMAL_FIELDS
        assert tuple(snap_r.fields) == REFORM_FIELDS

    def test_both_needs_primal_initial_data(self, tmp_path, capsys):
        cfg = write_config(tmp_path, preset="pure_heat", formulation="both")
        assert main(["simulate", "--config", str(cfg)]) == 2
        capsys.readouterr()


class TestPicard:
    def test_writes_iteration_table(self, tmp_path, capsys):
        cfg = write_config(tmp_path, t_end=0.005, dt=5e-4, diagnostics_every=1)
        assert main(["picard", "--config", str(cfg)]) == 0
        capsys.readouterr()
        out = tmp_path / "out"
        lines = (out / "picard.csv").read_text().strip().splitlines()
        assert lines[0] == "m,E_m,F_m,ratio"
        assert len(lines) == 8
        table = [line.split(",") for line in lines[1:]]
        assert [int(r[0]) for r in table] == list(range(7))
        for r in table:
            assert math.isfinite(float(r[1]))
        # the last row has no forward gap, the last two no ratio
        assert table[-1][2] == "nan"
        assert table[-1][3] == "nan" and table[-2][3] == "nan"
        ratios = [float(r[3]) for r in table[2:5]]
        assert all(v <= 0.5 for v in ratios)
        assert (out / "picard_final.enpp").exists()

    def test_viscous_config_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, nu=0.01)
        assert main(["picard", "--config", str(cfg)]) == 2
        assert "nu == 0" in capsys.readouterr().err


class TestAnalyze:
    @pytest.fixture()
    def snapshot_path(self, tmp_path):
        state = reform_from_primal(preset("gaussian_blobs", GridSpec(32)))
        path = tmp_path / "state.enpp"
        write_snapshot(path, snapshot_from_state(state, 1.5))
        return path

    def test_sobolev_values_match_library(self, snapshot_path, capsys):
        assert main(["analyze", "--snapshot", str(snapshot_path),
                     "--norm", "H2.0"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [line.split()[0] for line in lines] == ["u", "z", "xi"]
        state = state_from_snapshot(read_snapshot(snapshot_path))
        family = build_family(state.grid)
        for line, obj in zip(lines, (state.u, state.z, state.xi)):
            got = float(line.split()[2])
            assert got == pytest.approx(sobolev_norm(obj, 2.0, family), rel=1e-12)

    def test_besov_spec_with_infinities(self, snapshot_path, capsys):
        assert main(["analyze", "--snapshot", str(snapshot_path),
                     "--norm", "1,inf,inf"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        state = state_from_snapshot(read_snapshot(snapshot_path))
        family = build_family(state.grid)
        want = besov_norm(state.u, 1.0, math.inf, math.inf, family)
        assert float(lines[0].split()[2]) == pytest.approx(want, rel=1e-12)

    def test_multiple_norms_grouped_by_spec(self, snapshot_path, capsys):
        main(["analyze", "--snapshot", str(snapshot_path),
              "--norm", "H2.0", "--norm", "0.5,2,1"])
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 6
        assert lines[0].split()[1] == "H2.0"
        assert lines[3].split()[1] == "0.5,2,1"

    def test_primal_snapshot_reports_densities(self, tmp_path, capsys):
        path = tmp_path / "primal.enpp"
        write_snapshot(path, snapshot_from_state(preset("gaussian_blobs", GridSpec(32)), 0.0))
        main(["analyze", "--snapshot", str(path), "--norm", "H2.5"])
        lines = capsys.readouterr().out.strip().splitlines()
        assert [line.split()[0] for line in lines] == ["u", "n", "p"]

    @pytest.mark.parametrize("spec", ["Hx", "2,2", "1;2;3", "s,p,r", "1,0.5,2"])
    def test_malformed_norm_spec_exits_2(self, snapshot_path, spec, capsys):
        assert main(["analyze", "--snapshot", str(snapshot_path),
                     "--norm", spec]) == 2
        capsys.readouterr()

    def test_missing_snapshot_exits_4(self, tmp_path, capsys):
        assert main(["analyze", "--snapshot", str(tmp_path / "nope.enpp"),
                     "--norm", "H2.0"]) == 4
        capsys.readouterr()


class TestNormSpecParsing:
    def test_sobolev_form(self):
        assert _parse_norm("H2.6") == ("sobolev", 2.6)

    def test_besov_form(self):
        kind, s, p, r = _parse_norm("1.5,2,inf")
        assert (kind, s, p) == ("besov", 1.5, 2.0)
        assert math.isinf(r)

    def test_negative_smoothness_allowed(self):
        assert _parse_norm("H-0.5") == ("sobolev", -0.5)
        assert _parse_norm("-1,inf,2")[1] == -1.0


class TestSelftest:
    def test_quick_battery_passes(self, capsys):
        assert main(["selftest", "--quick"]) == 0
        out = capsys.readouterr().out
        for name in ("projector_algebra", "block_reconstruction", "bony_product",
                     "bernstein_constants", "rhs_structure", "cross_formulation_rhs",
                     "energy_cancellation", "heat_exactness", "vorticity_identity",
                     "monitored_run", "snapshot_round_trip"):
            assert f"{name}: PASS" in out
        assert "selftest: PASS" in out
        assert "FAIL" not in out


class TestThreadEnvironment:
    def test_invalid_value_exits_2(self, monkeypatch, capsys):
        monkeypatch.setenv("ENPP_THREADS", "many")
        assert main(["selftest", "--quick"]) == 2
        assert "ENPP_THREADS" in capsys.readouterr().err

    def test_negative_value_exits_2(self, monkeypatch, capsys):
        monkeypatch.setenv("ENPP_THREADS", "-1")
        assert main(["selftest", "--quick"]) == 2
        capsys.readouterr()

    def test_positive_value_caps_blas_pools(self, monkeypatch):
        monkeypatch.setenv("ENPP_THREADS", "3")
        monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
        _apply_thread_cap()
        assert os.environ["OMP_NUM_THREADS"] == "3"
        assert os.environ["OPENBLAS_NUM_THREADS"] == "3"

    def test_zero_leaves_environment_alone(self, monkeypatch):
        monkeypatch.setenv("ENPP_THREADS", "0")
        monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
        _apply_thread_cap()
        assert "OMP_NUM_THREADS" not in os.environ
