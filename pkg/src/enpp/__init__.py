"""Pseudo-spectral simulator and analysis toolkit for the
Euler-Nernst-Planck-Poisson system on the two-dimensional torus.

The package implements the coupled system for a velocity field u, anion
density n, cation density p, and electric potential phi with
Lap(phi) = n - p, in both its primal (u, n, p) form and the reformulated
(u, z, xi) form with z = n + p and xi = grad(phi), together with a dyadic
(Littlewood-Paley) analysis toolbox, runtime invariant monitors, an
integrating-factor RK4 time stepper, an iterative linearization solver,
and a command line interface.
"""

from .config import RunConfig, parse_config, serialize_config
from .dynamics import (
    PrimalState,
    ReformState,
    primal_from_reform,
    reform_from_primal,
)
from .errors import (
    AsymmetricSpectrum,
    BlockOutOfRange,
    CflViolation,
    ConstraintError,
    EnppError,
    GridTooSmall,
    InvariantDrift,
    IoError,
    NoContraction,
    NonNeutralField,
    NumericsError,
    SchemaError,
    SnapshotFormatError,
    UnknownPreset,
)
from .integrator import (
    PicardConfig,
    SimulationResult,
    StepperConfig,
    picard_solve,
    simulate,
    simulate_both,
    step_state,
)
from .io import (
    read_diagnostics,
    read_snapshot,
    snapshot_from_state,
    state_from_snapshot,
    write_diagnostics,
    write_snapshot,
)
from .lp import besov_norm, build_family, sobolev_norm
from .monitors import run_checks, sample_state
from .presets import PRESET_NAMES, default_dt, preset
from .spectral import GridSpec, ScalarField, Spectrum, VectorField

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "ScalarField",
    "VectorField",
    "Spectrum",
    "PrimalState",
    "ReformState",
    "reform_from_primal",
    "primal_from_reform",
    "RunConfig",
    "parse_config",
    "serialize_config",
    "StepperConfig",
    "PicardConfig",
    "SimulationResult",
    "simulate",
    "simulate_both",
    "step_state",
    "picard_solve",
    "preset",
    "PRESET_NAMES",
    "default_dt",
    "build_family",
    "besov_norm",
    "sobolev_norm",
    "run_checks",
    "sample_state",
    "read_snapshot",
    "write_snapshot",
    "snapshot_from_state",
    "state_from_snapshot",
    "read_diagnostics",
    "write_diagnostics",
    "EnppError",
    "AsymmetricSpectrum",
    "NonNeutralField",
    "GridTooSmall",
    "BlockOutOfRange",
    "CflViolation",
    "InvariantDrift",
    "NoContraction",
    "NumericsError",
    "IoError",
    "SchemaError",
    "ConstraintError",
    "UnknownPreset",
    "SnapshotFormatError",
    "__version__",
]
