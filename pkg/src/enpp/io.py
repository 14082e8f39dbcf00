"""Bit-exact file formats: field snapshots and the diagnostics CSV.

Snapshot layout (all integers and floats little-endian):

    magic   4 bytes ASCII "ENPP"
    version u16, currently 1
    n       u32 grid points per side
    time    f64
    count   u16 number of fields
    then per field:
        name_len u8, ASCII name, n*n f64 values row-major

Row-major means the first grid index varies slowest: values[i*n + j] is
the node at x1 = i*h, x2 = j*h.  Primal snapshots carry u1, u2, n, p in
that order; reformulated ones u1, u2, z, xi1, xi2.

The diagnostics CSV has the fixed 17-column header from
:data:`enpp.monitors.CSV_COLUMNS`; floats are printed with 17
significant digits so parsing returns the exact binary doubles and
identical runs produce byte-identical files.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .dynamics import PrimalState, ReformState
from .errors import IoError, SnapshotFormatError
from .monitors import CSV_COLUMNS, DiagnosticsRecord
from .spectral import GridSpec

MAGIC = b"ENPP"
VERSION = 1
PRIMAL_FIELDS = ("u1", "u2", "n", "p")
REFORM_FIELDS = ("u1", "u2", "z", "xi1", "xi2")


@dataclass(frozen=True)
class Snapshot:
    """One time-stamped collection of named scalar fields on a grid."""

    time: float
    n_points: int
    fields: dict[str, np.ndarray]

    @property
    def kind(self) -> str:
        names = tuple(self.fields)
        if names == PRIMAL_FIELDS:
            return "primal"
        if names == REFORM_FIELDS:
            return "reform"
        return "other"


def snapshot_from_state(state: PrimalState | ReformState, time: float) -> Snapshot:
    if isinstance(state, PrimalState):
        fields = {
            "u1": state.u.u1,
            "u2": state.u.u2,
            "n": state.n.values,
            "p": state.p.values,
        }
    else:
        fields = {
            "u1": state.u.u1,
            "u2": state.u.u2,
            "z": state.z.values,
            "xi1": state.xi.u1,
            "xi2": state.xi.u2,
        }
    return Snapshot(time=time, n_points=state.grid.n_points, fields=fields)


def state_from_snapshot(snap: Snapshot, dealias_fraction: float = 2.0 / 3.0,
                        validate: bool = True):
    """Rebuild a typed state; set ``validate=False`` to skip invariants."""
    grid = GridSpec(snap.n_points, dealias_fraction)
    f = snap.fields
    if snap.kind == "primal":
        if validate:
            return PrimalState.create(grid, f["u1"], f["u2"], f["n"], f["p"])
        from .spectral import ScalarField, VectorField

        return PrimalState(VectorField(grid, f["u1"], f["u2"]),
                           ScalarField(grid, f["n"]), ScalarField(grid, f["p"]))
    if snap.kind == "reform":
        if validate:
            return ReformState.create(
                grid, f["u1"], f["u2"], f["z"], f["xi1"], f["xi2"],
                require_nonneg=False,
            )
        from .spectral import ScalarField, VectorField

        return ReformState(VectorField(grid, f["u1"], f["u2"]),
                           ScalarField(grid, f["z"]),
                           VectorField(grid, f["xi1"], f["xi2"]))
    raise SnapshotFormatError(
        f"field names {tuple(snap.fields)} match neither the primal nor the "
        "reformulated layout"
    )


def snapshot_to_bytes(snap: Snapshot) -> bytes:
    parts = [MAGIC, struct.pack("<H", VERSION), struct.pack("<I", snap.n_points),
             struct.pack("<d", snap.time), struct.pack("<H", len(snap.fields))]
    for name, values in snap.fields.items():
        encoded = name.encode("ascii")
        if not 0 < len(encoded) < 256:
            raise SnapshotFormatError(f"field name {name!r} does not fit in one byte")
        arr = np.ascontiguousarray(values, dtype="<f8")
        if arr.shape != (snap.n_points, snap.n_points):
            raise SnapshotFormatError(
                f"field {name!r} has shape {arr.shape}, expected "
                f"({snap.n_points}, {snap.n_points})"
            )
        parts.append(struct.pack("<B", len(encoded)))
        parts.append(encoded)
        parts.append(arr.tobytes(order="C"))
    return b"".join(parts)


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def take(self, count: int, what: str) -> bytes:
        if self.pos + count > len(self.raw):
            raise SnapshotFormatError(
                f"truncated snapshot: needed {count} bytes for {what}, "
                f"had {len(self.raw) - self.pos}"
            )
        out = self.raw[self.pos:self.pos + count]
        self.pos += count
        return out

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))[0]


def snapshot_from_bytes(raw: bytes) -> Snapshot:
    r = _Reader(raw)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    version = r.unpack("<H", "version")
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    n_points = r.unpack("<I", "grid size")
    time = r.unpack("<d", "time")
    count = r.unpack("<H", "field count")
    fields: dict[str, np.ndarray] = {}
    for index in range(count):
        name_len = r.unpack("<B", f"name length of field {index}")
        name_bytes = r.take(name_len, f"name of field {index}")
        try:
            name = name_bytes.decode("ascii")
        except UnicodeDecodeError as exc:
            raise SnapshotFormatError(f"field {index} name is not ASCII") from exc
        if name in fields:
            raise SnapshotFormatError(f"duplicate field name {name!r}")
        payload = r.take(8 * n_points * n_points, f"values of field {name!r}")
        fields[name] = np.frombuffer(payload, dtype="<f8").reshape(n_points, n_points).copy()
    if r.pos != len(raw):
        raise SnapshotFormatError(f"{len(raw) - r.pos} trailing bytes after last field")
    return Snapshot(time=time, n_points=n_points, fields=fields)


def write_snapshot(path, snap: Snapshot) -> None:
    with open(path, "wb") as fh:
        fh.write(snapshot_to_bytes(snap))


def read_snapshot(path) -> Snapshot:
    with open(path, "rb") as fh:
        return snapshot_from_bytes(fh.read())


def snapshot_filename(step: int) -> str:
    return f"snapshot_{step:08d}.enpp"


def format_float(value: float) -> str:
    return f"{value:.17g}"


def write_diagnostics(path, records) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join(format_float(v) for v in rec.as_row()))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_diagnostics(path) -> list[DiagnosticsRecord]:
    with open(path, "r", newline="") as fh:
        lines = [line.rstrip("\n").rstrip("\r") for line in fh if line.strip()]
    if not lines or tuple(lines[0].split(",")) != CSV_COLUMNS:
        raise IoError(f"diagnostics header mismatch in {path}")
    out = []
    for number, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(CSV_COLUMNS):
            raise IoError(f"{path}:{number}: expected {len(CSV_COLUMNS)} columns, "
                          f"got {len(cells)}")
        try:
            out.append(DiagnosticsRecord(*(float(c) for c in cells)))
        except ValueError as exc:
            raise IoError(f"{path}:{number}: {exc}") from exc
    return out
