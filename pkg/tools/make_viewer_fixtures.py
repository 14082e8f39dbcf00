"""Regenerate the viewer's format-conformance fixtures.

The frontend re-implements the snapshot and diagnostics formats from
scratch, so its tests need artifacts produced by this package's own
writers plus bit-exact reference dumps to compare against.  Everything
under frontend/test/fixtures/ comes from here:

* snapshots written through the normal `enpp simulate` path (shear and
  blob runs), plus direct t = 0 writes of the rest and pure-heat
  presets (a uniform field and a signed field, the two colormap edge
  cases),
* one <name>.json per <name>.enpp with time, grid size and every field
  value; floats rely on repr round-tripping, so a JSON parser on any
  side recovers the identical doubles,
* the shear run's diagnostics CSV, a header-only CSV, and a copy of the
  shear CSV with two energy values pushed upward on purpose so the
  viewer's monotonicity annotation has something to flag.

Usage: python3 tools/make_viewer_fixtures.py
"""
from __future__ import annotations

import csv
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from enpp.cli import main as cli_main  # noqa: E402
from enpp.io import (  # noqa: E402
    read_snapshot,
    snapshot_from_state,
    write_diagnostics,
    write_snapshot,
)
from enpp.presets import preset  # noqa: E402
from enpp.spectral import GridSpec  # noqa: E402

FIXTURES = ROOT / "frontend" / "test" / "fixtures"

# Rows whose energy gets inflated in the synthetic violation fixture.
BUMP_ROWS = (10, 30)
BUMP_FACTOR = 1.05


def run_cli_simulate(tmp: Path, name: str, **overrides) -> Path:
    out = tmp / name
    cfg = {
        "n_points": 32,
        "t_end": 0.1,
        "dt": 1e-3,
        "preset": name,
        "diagnostics_every": 2,
        "output_dir": str(out),
    }
    cfg.update(overrides)
    cfg_path = tmp / f"{name}.json"
    cfg_path.write_text(json.dumps(cfg))
    code = cli_main(["simulate", "--config", str(cfg_path)])
    if code != 0:
        raise SystemExit(f"simulate {name} exited {code}")
    return out


def dump_reference(snapshot_path: Path) -> None:
    snap = read_snapshot(snapshot_path)
    for values in snap.fields.values():
        if not bool(math.isfinite(float(values.min()))) or not bool(
            math.isfinite(float(values.max()))
        ):
            raise SystemExit(f"non-finite field in {snapshot_path}")
    payload = {
        "time": snap.time,
        "n_points": snap.n_points,
        "fields": {
            name: [float(v) for v in values.reshape(-1)]
            for name, values in snap.fields.items()
        },
    }
    snapshot_path.with_suffix(".json").write_text(json.dumps(payload))


def make_energy_bump(src: Path, dst: Path) -> None:
    with src.open(newline="") as handle:
        rows = list(csv.reader(handle))
    header, body = rows[0], rows[1:]
    energy_col = header.index("energy")
    for idx in BUMP_ROWS:
        body[idx][energy_col] = repr(float(body[idx][energy_col]) * BUMP_FACTOR)
    with dst.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(body)


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for old in FIXTURES.glob("*"):
        old.unlink()

    with tempfile.TemporaryDirectory() as tmpdir:
        tmp = Path(tmpdir)

        shear = run_cli_simulate(tmp, "shear_charge")
        shutil.copy(shear / "diagnostics.csv", FIXTURES / "diag_shear.csv")
        shutil.copy(shear / "snapshot_00000100.enpp", FIXTURES / "reform_shear.enpp")

        blobs = run_cli_simulate(
            tmp, "gaussian_blobs", formulation="primal", t_end=0.01
        )
        shutil.copy(blobs / "snapshot_00000010.enpp", FIXTURES / "primal_blobs.enpp")

    grid = GridSpec(32)
    write_snapshot(FIXTURES / "rest.enpp",
                   snapshot_from_state(preset("rest", grid), 0.0))
    write_snapshot(FIXTURES / "reform_heat.enpp",
                   snapshot_from_state(preset("pure_heat", grid), 0.0))

    for snap in sorted(FIXTURES.glob("*.enpp")):
        dump_reference(snap)

    write_diagnostics(FIXTURES / "diag_header_only.csv", [])
    make_energy_bump(FIXTURES / "diag_shear.csv",
                     FIXTURES / "diag_energy_bump.csv")

    for path in sorted(FIXTURES.iterdir()):
        print(f"{path.relative_to(ROOT)}  {path.stat().st_size} bytes")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
