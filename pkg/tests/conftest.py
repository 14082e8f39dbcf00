"""Shared fixtures: seeded random field corpora and acceptance reporting."""
from __future__ import annotations

import numpy as np
import pytest

from enpp.spectral import GridSpec, ScalarField, VectorField, fft_forward, fft_inverse, _cache


def random_scalar(grid: GridSpec, rng: np.random.Generator, max_radius: float | None = None,
                  amplitude: float = 1.0, zero_mean: bool = False) -> ScalarField:
    """Band-limited random real field with roughly unit-size samples."""
    n = grid.n_points
    c = fft_forward(rng.standard_normal((n, n)))
    radii = np.sqrt(_cache(n).ksq)
    cutoff = max_radius if max_radius is not None else grid.dealias_fraction * n / 2.0
    c = np.where(radii <= cutoff, c, 0.0)
    if zero_mean:
        c[0, 0] = 0.0
    vals = fft_inverse(c)
    peak = np.max(np.abs(vals))
    if peak > 0:
        vals = vals * (amplitude / peak)
    return ScalarField(grid, vals)


def random_vector(grid: GridSpec, rng: np.random.Generator, max_radius: float | None = None,
                  amplitude: float = 1.0) -> VectorField:
    a = random_scalar(grid, rng, max_radius, amplitude)
    b = random_scalar(grid, rng, max_radius, amplitude)
    return VectorField(grid, a.values, b.values)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)


# ---------------------------------------------------------------------------
# Acceptance reporting: collected lines are printed after the test summary so
# they stay visible even though pytest captures per-test stdout.
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(name: str, detail: str, passed: bool = True) -> None:
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
