"""Transform, projector, and inverse-operator checks against slow oracles."""
from __future__ import annotations

import numpy as np
import pytest

from enpp.errors import AsymmetricSpectrum, NonNeutralField
from enpp import spectral
from enpp.spectral import (
    GridSpec,
    ScalarField,
    Spectrum,
    VectorField,
    band_limit,
    dealias,
    derivative,
    divergence,
    from_spectrum,
    gradient,
    grad_part_project,
    inv_neg_laplacian,
    l2_norm,
    leray_project,
    linf_norm,
    lp_norm,
    to_spectrum,
    velocity_from_vorticity,
    vorticity,
)
from conftest import random_scalar, random_vector


def brute_force_coefficients(values: np.ndarray) -> np.ndarray:
    """O(N^4) direct Fourier sum; the independent oracle for to_spectrum."""
    n = values.shape[0]
    x = 2.0 * np.pi * np.arange(n) / n
    k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    out = np.zeros((n, n), dtype=complex)
    for a, k1 in enumerate(k):
        for b, k2 in enumerate(k):
            phase = np.exp(-1j * (k1 * x[:, None] + k2 * x[None, :]))
            out[a, b] = np.sum(values * phase) / n**2
    return out


class TestTransforms:
    def test_matches_brute_force_dft(self):
        grid = GridSpec(8)
        rng = np.random.default_rng(7)
        f = ScalarField(grid, rng.standard_normal((8, 8)))
        got = to_spectrum(f).coeffs
        want = brute_force_coefficients(f.values)
        assert np.max(np.abs(got - want)) < 1e-13

    def test_round_trip(self, rng):
        for n in (8, 16, 64):
            grid = GridSpec(n)
            f = ScalarField(grid, rng.standard_normal((n, n)))
            back = from_spectrum(to_spectrum(f))
            assert np.max(np.abs(back.values - f.values)) < 1e-13

    def test_constant_field_coefficient(self):
        grid = GridSpec(16)
        s = to_spectrum(ScalarField(grid, np.full((16, 16), 3.25)))
        assert abs(s.coeffs[0, 0] - 3.25) < 1e-14
        rest = np.abs(s.coeffs).sum() - abs(s.coeffs[0, 0])
        assert rest < 1e-13

    def test_cosine_mode_coefficients(self):
        grid = GridSpec(16)
        x1, _ = grid.coords()
        s = to_spectrum(ScalarField(grid, np.cos(x1)))
        assert abs(s.coeffs[1, 0] - 0.5) < 1e-14
        assert abs(s.coeffs[-1, 0] - 0.5) < 1e-14
        assert np.abs(s.coeffs).sum() - 1.0 < 1e-13

    def test_sine_mode_coefficients(self):
        grid = GridSpec(16)
        _, x2 = grid.coords()
        s = to_spectrum(ScalarField(grid, np.sin(2 * x2)))
        # sin(2 x2) = (exp(2i x2) - exp(-2i x2)) / (2i)
        assert abs(s.coeffs[0, 2] - (-0.5j)) < 1e-14
        assert abs(s.coeffs[0, -2] - 0.5j) < 1e-14

    def test_asymmetric_spectrum_rejected(self):
        grid = GridSpec(8)
        c = np.zeros((8, 8), dtype=complex)
        c[1, 0] = 1.0  # conjugate partner missing
        with pytest.raises(AsymmetricSpectrum):
            from_spectrum(Spectrum(grid, c))

    def test_fields_are_immutable(self, rng):
        grid = GridSpec(8)
        f = ScalarField(grid, rng.standard_normal((8, 8)))
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0


class TestDerivative:
    def test_trig_exactness(self):
        grid = GridSpec(32)
        x1, x2 = grid.coords()
        f = ScalarField(grid, np.sin(3 * x1) * np.cos(2 * x2))
        d1 = derivative(f, 1)
        d2 = derivative(f, 2)
        assert np.max(np.abs(d1.values - 3 * np.cos(3 * x1) * np.cos(2 * x2))) < 1e-12
        assert np.max(np.abs(d2.values + 2 * np.sin(3 * x1) * np.sin(2 * x2))) < 1e-12

    def test_nyquist_mode_zeroed(self):
        n = 16
        grid = GridSpec(n)
        x1, _ = grid.coords()
        f = ScalarField(grid, np.cos((n // 2) * x1))
        assert linf_norm(derivative(f, 1)) < 1e-13

    def test_axis_validation(self):
        grid = GridSpec(8)
        f = ScalarField(grid, np.zeros((8, 8)))
        with pytest.raises(ValueError):
            derivative(f, 3)

    def test_second_derivative_matches_laplacian(self, rng):
        grid = GridSpec(32)
        f = random_scalar(grid, rng)
        twice = derivative(derivative(f, 1), 1).values + derivative(derivative(f, 2), 2).values
        assert np.max(np.abs(twice - spectral.laplacian(f).values)) < 1e-10


class TestInverseLaplacian:
    def test_single_modes(self):
        grid = GridSpec(32)
        x1, x2 = grid.coords()
        got = inv_neg_laplacian(ScalarField(grid, np.sin(x1)))
        assert np.max(np.abs(got.values - np.sin(x1))) < 1e-13
        got = inv_neg_laplacian(ScalarField(grid, np.cos(2 * x2)))
        assert np.max(np.abs(got.values - np.cos(2 * x2) / 4.0)) < 1e-13

    def test_zero_mean_gauge(self, rng):
        grid = GridSpec(32)
        f = random_scalar(grid, rng, zero_mean=True)
        sol = inv_neg_laplacian(f)
        assert abs(spectral.mean(sol)) < 1e-14
        # -Lap recovers the input
        back = ScalarField(grid, -spectral.laplacian(sol).values)
        assert np.max(np.abs(back.values - f.values)) < 1e-10

    def test_non_neutral_rejected(self):
        grid = GridSpec(16)
        with pytest.raises(NonNeutralField):
            inv_neg_laplacian(ScalarField(grid, np.ones((16, 16))))


class TestProjectors:
    def test_gradient_field_projects_to_zero(self):
        grid = GridSpec(32)
        x1, _ = grid.coords()
        v = gradient(ScalarField(grid, np.cos(x1) + 0.3 * np.sin(2 * x1)))
        assert linf_norm(leray_project(v)) < 1e-13

    def test_divergence_free_field_unchanged(self):
        grid = GridSpec(32)
        _, x2 = grid.coords()
        u = VectorField(grid, np.sin(x2), np.zeros_like(x2))
        pu = leray_project(u)
        assert np.max(np.abs(pu.u1 - u.u1)) < 1e-13
        assert np.max(np.abs(pu.u2 - u.u2)) < 1e-13

    def test_mean_passes_through(self, rng):
        grid = GridSpec(16)
        v = random_vector(grid, rng)
        shifted = VectorField(grid, v.u1 + 1.5, v.u2 - 0.75)
        pv = leray_project(shifted)
        assert abs(np.mean(pv.u1) - (np.mean(v.u1) + 1.5)) < 1e-13
        assert abs(np.mean(pv.u2) - (np.mean(v.u2) - 0.75)) < 1e-13
        # formula L = Id - P forces a zero-mean gradient part
        lv = grad_part_project(shifted)
        assert abs(np.mean(lv.u1)) < 1e-13
        assert abs(np.mean(lv.u2)) < 1e-13

    def test_projector_algebra_seeded_corpus(self):
        # P o P = P, L o L = L, P o L = 0, P + L = Id, div P v = 0, curl L v = 0
        rng = np.random.default_rng(11)
        grid = GridSpec(32)
        worst = 0.0
        for _ in range(100):
            v = random_vector(grid, rng)
            pv = leray_project(v)
            lv = grad_part_project(v)
            pieces = [
                np.max(np.abs(leray_project(pv).u1 - pv.u1)),
                np.max(np.abs(leray_project(pv).u2 - pv.u2)),
                np.max(np.abs(grad_part_project(lv).u1 - lv.u1)),
                np.max(np.abs(grad_part_project(lv).u2 - lv.u2)),
                linf_norm(leray_project(lv)),
                linf_norm(grad_part_project(pv)),
                np.max(np.abs(pv.u1 + lv.u1 - v.u1)),
                np.max(np.abs(pv.u2 + lv.u2 - v.u2)),
                linf_norm(divergence(pv)),
                linf_norm(vorticity(lv)),
            ]
            worst = max(worst, max(float(x) for x in pieces))
        assert worst < 1e-12


class TestDealias:
    @pytest.mark.parametrize("n,kept,removed", [(32, 10, 11), (64, 21, 22)])
    def test_boundary_modes(self, n, kept, removed):
        grid = GridSpec(n)
        x1, _ = grid.coords()
        f = ScalarField(grid, np.cos(kept * x1))
        assert np.max(np.abs(dealias(f).values - f.values)) < 1e-13
        g = ScalarField(grid, np.cos(removed * x1))
        assert linf_norm(dealias(g)) < 1e-13

    def test_nyquist_removed(self):
        n = 32
        grid = GridSpec(n)
        _, x2 = grid.coords()
        f = ScalarField(grid, np.cos((n // 2) * x2))
        assert linf_norm(dealias(f)) < 1e-13

    def test_commutes_with_derivative_on_retained_band(self, rng):
        grid = GridSpec(32)
        f = random_scalar(grid, rng)
        a = derivative(dealias(f), 1).values
        b = dealias(derivative(f, 1)).values
        assert np.max(np.abs(a - b)) < 1e-12

    def test_band_limit_helper(self):
        grid = GridSpec(32)
        x1, x2 = grid.coords()
        f = ScalarField(grid, np.cos(3 * x1) + np.cos(5 * x2))
        g = band_limit(f, 4.0)
        assert np.max(np.abs(g.values - np.cos(3 * x1))) < 1e-13


class TestVelocityFromVorticity:
    def oracle(self, w: ScalarField, mean_u) -> VectorField:
        """Independent stream-function construction via explicit coefficients."""
        n = w.grid.n_points
        c = np.fft.fft2(w.values) / n**2
        k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
        u1 = np.zeros((n, n), dtype=complex)
        u2 = np.zeros((n, n), dtype=complex)
        for a, k1 in enumerate(k):
            for b, k2 in enumerate(k):
                ksq = k1 * k1 + k2 * k2
                if ksq == 0:
                    continue
                psi = c[a, b] / ksq
                d1 = 0 if k1 == -n // 2 else k1
                d2 = 0 if k2 == -n // 2 else k2
                u1[a, b] = -1j * d2 * psi
                u2[a, b] = 1j * d1 * psi
        u1[0, 0], u2[0, 0] = mean_u
        return VectorField(w.grid, (np.fft.ifft2(u1) * n**2).real, (np.fft.ifft2(u2) * n**2).real)

    def test_matches_oracle(self, rng):
        grid = GridSpec(16)
        w = random_scalar(grid, rng, zero_mean=True)
        got = velocity_from_vorticity(w, (0.2, -0.4))
        want = self.oracle(w, (0.2, -0.4))
        assert np.max(np.abs(got.u1 - want.u1)) < 1e-13
        assert np.max(np.abs(got.u2 - want.u2)) < 1e-13

    def test_round_trip_and_mean(self, rng):
        grid = GridSpec(32)
        w = random_scalar(grid, rng, zero_mean=True)
        u = velocity_from_vorticity(w, (0.5, 1.5))
        assert np.max(np.abs(vorticity(u).values - w.values)) < 1e-12
        assert linf_norm(divergence(u)) < 1e-12
        assert abs(np.mean(u.u1) - 0.5) < 1e-13
        assert abs(np.mean(u.u2) - 1.5) < 1e-13

    def test_other_direction_round_trip(self, rng):
        grid = GridSpec(32)
        u = leray_project(random_vector(grid, rng))
        back = velocity_from_vorticity(vorticity(u), (float(np.mean(u.u1)), float(np.mean(u.u2))))
        assert np.max(np.abs(back.u1 - u.u1)) < 1e-12
        assert np.max(np.abs(back.u2 - u.u2)) < 1e-12

    def test_single_mode_closed_form(self):
        grid = GridSpec(32)
        x1, _ = grid.coords()
        u = velocity_from_vorticity(ScalarField(grid, np.sin(x1)))
        assert np.max(np.abs(u.u1)) < 1e-13
        assert np.max(np.abs(u.u2 - np.cos(x1))) < 1e-13

    def test_nonzero_mean_vorticity_rejected(self):
        grid = GridSpec(16)
        with pytest.raises(NonNeutralField):
            velocity_from_vorticity(ScalarField(grid, np.ones((16, 16))))


class TestNorms:
    def test_constant_lp(self):
        grid = GridSpec(16)
        f = ScalarField(grid, np.full((16, 16), 2.0))
        for p in (1.0, 2.0, 4.0):
            want = 2.0 * (2 * np.pi) ** (2.0 / p)
            assert abs(lp_norm(f, p) - want) < 1e-12
        assert linf_norm(f) == 2.0

    def test_sine_l2_closed_form(self):
        grid = GridSpec(64)
        x1, _ = grid.coords()
        f = ScalarField(grid, np.sin(x1))
        # integral of sin^2 over the torus is 2 pi^2
        assert abs(l2_norm(f) - np.sqrt(2 * np.pi**2)) < 1e-12

    def test_vector_norm_uses_magnitude(self):
        grid = GridSpec(16)
        v = VectorField(grid, np.full((16, 16), 3.0), np.full((16, 16), 4.0))
        assert abs(linf_norm(v) - 5.0) < 1e-14
        assert abs(l2_norm(v) - 5.0 * 2 * np.pi) < 1e-12
