"""JSON run configuration: schema checking, constraints, serialization.

A config document is a flat JSON object.  Field names and their order in
serialized output are fixed by :data:`FIELD_ORDER`.  Schema problems
(missing, unknown, or mistyped fields) raise :class:`SchemaError` naming
the field; value problems raise :class:`ConstraintError` naming the
violated inequality.  ``dt`` may be null, in which case the orchestration
layer fills it from the advective CFL heuristic once the initial state
is known.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ConstraintError, SchemaError

FIELD_ORDER = (
    "n_points",
    "dt",
    "t_end",
    "nu",
    "formulation",
    "preset",
    "ic_file",
    "diagnostics_every",
    "snapshot_every",
    "seed",
    "s1",
    "s2",
    "output_dir",
    "dealias",
)

FORMULATIONS = ("primal", "reform", "both")
DEFAULT_S1 = 2.6
DEFAULT_S2 = 1.3


@dataclass(frozen=True)
class RunConfig:
    n_points: int
    t_end: float
    dt: float | None = None
    nu: float = 0.0
    formulation: str = "reform"
    preset: str | None = None
    ic_file: str | None = None
    diagnostics_every: int = 1
    snapshot_every: int = 0
    seed: int = 0
    s1: float = DEFAULT_S1
    s2: float = DEFAULT_S2
    output_dir: str = "out"
    dealias: bool = True


def _require(data: dict, name: str):
    if name not in data or data[name] is None:
        raise SchemaError(f"{name}: field is required")
    return data[name]


def _integer(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{name}: expected an integer, got {value!r}")
    return value


def _number(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{name}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise SchemaError(f"{name}: expected a finite number, got {value!r}")
    return float(value)


def _string(name: str, value) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{name}: expected a string, got {value!r}")
    return value


def _boolean(name: str, value) -> bool:
    if not isinstance(value, bool):
        raise SchemaError(f"{name}: expected a boolean, got {value!r}")
    return value


def _constrain(ok: bool, inequality: str, got) -> None:
    if not ok:
        raise ConstraintError(f"{inequality} violated: got {got}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"config must be a JSON object, got {type(data).__name__}")
    for key in data:
        if key not in FIELD_ORDER:
            raise SchemaError(f"{key}: unknown field")

    n_points = _integer("n_points", _require(data, "n_points"))
    t_end = _number("t_end", _require(data, "t_end"))

    raw_dt = data.get("dt")
    dt = None if raw_dt is None else _number("dt", raw_dt)
    nu = _number("nu", data.get("nu", 0.0))
    formulation = _string("formulation", data.get("formulation", "reform"))
    if formulation not in FORMULATIONS:
        raise SchemaError(
            f"formulation: expected one of {', '.join(FORMULATIONS)}, got {formulation!r}"
        )
    preset = None if data.get("preset") is None else _string("preset", data["preset"])
    ic_file = None if data.get("ic_file") is None else _string("ic_file", data["ic_file"])
    if (preset is None) == (ic_file is None):
        raise SchemaError("exactly one of preset and ic_file must be set")
    diagnostics_every = _integer("diagnostics_every", data.get("diagnostics_every", 1))
    snapshot_every = _integer("snapshot_every", data.get("snapshot_every", 0))
    seed = _integer("seed", data.get("seed", 0))
    s1 = _number("s1", data.get("s1", DEFAULT_S1))
    s2 = _number("s2", data.get("s2", DEFAULT_S2))
    output_dir = _string("output_dir", data.get("output_dir", "out"))
    dealias = _boolean("dealias", data.get("dealias", True))

    _constrain(n_points >= 16 and n_points % 2 == 0,
               "n_points even and >= 16", n_points)
    _constrain(t_end >= 0.0, "t_end >= 0", t_end)
    if dt is not None:
        _constrain(dt > 0.0, "dt > 0", dt)
    _constrain(nu >= 0.0, "nu >= 0", nu)
    _constrain(diagnostics_every >= 1, "diagnostics_every >= 1", diagnostics_every)
    _constrain(snapshot_every >= 0, "snapshot_every >= 0", snapshot_every)
    _constrain(0 <= seed < 2**64, "0 <= seed < 2^64", seed)
    _constrain(s1 > 2.0, "s1 > 2", s1)
    _constrain(s2 > 1.0, "s2 > 1", s2)
    _constrain(s2 + 1.5 > s1, "s2 + 3/2 > s1", f"s1={s1}, s2={s2}")
    _constrain(s1 >= s2 + 1.0, "s1 >= s2 + 1", f"s1={s1}, s2={s2}")
    # unknown preset names are resolved by the preset constructor; the one
    # statically knowable cross-field constraint is checked here
    if preset == "pure_heat" and formulation != "reform":
        raise ConstraintError(
            "preset pure_heat exists only in the reform formulation, "
            f"got formulation={formulation!r}"
        )

    return RunConfig(
        n_points=n_points,
        t_end=t_end,
        dt=dt,
        nu=nu,
        formulation=formulation,
        preset=preset,
        ic_file=ic_file,
        diagnostics_every=diagnostics_every,
        snapshot_every=snapshot_every,
        seed=seed,
        s1=s1,
        s2=s2,
        output_dir=output_dir,
        dealias=dealias,
    )


def serialize_config(cfg: RunConfig) -> str:
    """Canonical JSON rendering; parse(serialize(x)) == x."""
    data = {name: getattr(cfg, name) for name in FIELD_ORDER}
    return json.dumps(data, indent=2) + "\n"
