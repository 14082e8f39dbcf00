"""Exception taxonomy.

Every error carries an ``exit_code`` so the command line tool can map
failures onto its documented process exit codes: 2 for configuration
problems, 3 for numerical failures, 4 for input/output problems.
"""


class EnppError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(EnppError):
    """Base class for configuration problems (exit code 2)."""

    exit_code = 2


class SchemaError(ConfigError):
    """A config document has a missing, unknown, or mistyped field."""


class ConstraintError(ConfigError):
    """A config value violates a documented inequality."""


class UnknownPreset(ConfigError):
    """Requested initial-condition preset does not exist."""


class NumericsError(EnppError):
    """Base class for numerical failures (exit code 3)."""

    exit_code = 3


class AsymmetricSpectrum(NumericsError):
    """A spectrum meant to represent a real field lost conjugate symmetry."""


class NonNeutralField(NumericsError):
    """A field that must have (near) zero mean does not."""


class GridTooSmall(NumericsError):
    """The grid cannot host the requested dyadic decomposition."""


class BlockOutOfRange(NumericsError):
    """Requested dyadic block index outside ``[-1, j_max]``."""


class CflViolation(NumericsError):
    """Advective CFL bound broken for the requested time step."""


class InvariantDrift(NumericsError):
    """A runtime invariant (positivity, divergence, ...) drifted past its tolerance."""


class NoContraction(NumericsError):
    """The iteration scheme stopped contracting."""


class IoError(EnppError):
    """Base class for file-format and filesystem problems (exit code 4)."""

    exit_code = 4


class SnapshotFormatError(IoError):
    """A snapshot file is truncated, has a bad magic, or an unknown version."""
