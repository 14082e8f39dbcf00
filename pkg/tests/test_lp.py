"""Dyadic decomposition checks: partition, supports, norms, Bony algebra."""
from __future__ import annotations

import numpy as np
import pytest

from enpp.errors import BlockOutOfRange, GridTooSmall
from enpp.lp import (
    bernstein_sweep,
    besov_norm,
    bony_paraproduct,
    bony_product,
    bony_remainder,
    build_family,
    continuity_sweep,
    dyadic_block,
    j_max_for,
    low_freq,
    sobolev_norm,
)
from enpp.spectral import (
    GridSpec,
    ScalarField,
    band_limit,
    dealias,
    l2_norm,
    linf_norm,
    to_spectrum,
    _cache,
)
from conftest import random_scalar


def lattice_radii(n: int) -> np.ndarray:
    return np.sqrt(_cache(n).ksq)


class TestFamily:
    @pytest.mark.parametrize("n,jmax", [(16, 1), (32, 2), (64, 3), (128, 4)])
    def test_j_max(self, n, jmax):
        assert j_max_for(n) == jmax
        assert build_family(GridSpec(n)).j_max == jmax

    def test_small_grid_rejected(self):
        with pytest.raises(GridTooSmall):
            build_family(GridSpec(8))

    def test_block_index_range(self):
        fam = build_family(GridSpec(64))
        with pytest.raises(BlockOutOfRange):
            fam.multiplier(fam.j_max + 1)
        with pytest.raises(BlockOutOfRange):
            fam.multiplier(-2)
        with pytest.raises(BlockOutOfRange):
            fam.lowpass_multiplier(-1)

    def test_partition_of_unity_on_complete_ball(self):
        for n in (16, 32, 64, 128):
            fam = build_family(GridSpec(n))
            total = fam.partition_sum()
            inside = lattice_radii(n) <= fam.complete_radius
            assert np.max(np.abs(total[inside] - 1.0)) < 1e-12
            # strictly less than one outside: the family is deliberately
            # truncated at j_max
            outside = lattice_radii(n) > fam.complete_radius
            if outside.any():
                assert np.max(total[outside]) < 1.0 + 1e-12

    def test_partition_value_at_specific_mode(self):
        fam = build_family(GridSpec(64))
        assert abs(fam.partition_sum()[5, 0] - 1.0) < 1e-12

    def test_supports(self):
        fam = build_family(GridSpec(64))
        radii = lattice_radii(64)
        assert np.all(fam.chi[radii >= 4.0 / 3.0] == 0.0)
        assert np.all((fam.chi >= 0.0) & (fam.chi <= 1.0))
        for j, phi in enumerate(fam.phis):
            outside = (radii <= 0.75 * 2**j) | (radii >= 8.0 / 3.0 * 2**j)
            assert np.all(phi[outside] == 0.0)
            assert np.all((phi >= 0.0) & (phi <= 1.0))

    def test_chi_is_one_at_origin_and_low_modes(self):
        fam = build_family(GridSpec(64))
        assert fam.chi[0, 0] == 1.0


class TestBlocks:
    def test_disjoint_blocks_annihilate(self):
        fam = build_family(GridSpec(64))
        for j in range(-1, fam.j_max + 1):
            for jp in range(-1, fam.j_max + 1):
                if abs(j - jp) >= 2:
                    prod = fam.multiplier(j) * fam.multiplier(jp)
                    assert np.max(np.abs(prod)) == 0.0

    def test_single_mode_block_membership(self):
        # |k| = 4 lies in the annuli of blocks 1 and 2 only
        grid = GridSpec(64)
        x1, _ = grid.coords()
        f = ScalarField(grid, np.cos(4 * x1))
        fam = build_family(grid)
        present = [j for j in range(-1, fam.j_max + 1) if linf_norm(dyadic_block(f, j, fam)) > 1e-13]
        assert present == [1, 2]
        rec = dyadic_block(f, 1, fam).values + dyadic_block(f, 2, fam).values
        assert np.max(np.abs(rec - f.values)) < 1e-12

    def test_reconstruction_seeded_corpus(self):
        rng = np.random.default_rng(3)
        for n in (32, 64):
            grid = GridSpec(n)
            fam = build_family(grid)
            for _ in range(50):
                f = random_scalar(grid, rng, max_radius=fam.complete_radius)
                total = np.zeros_like(f.values)
                for j in range(-1, fam.j_max + 1):
                    total += dyadic_block(f, j, fam).values
                scale = max(1.0, float(np.max(np.abs(f.values))))
                assert np.max(np.abs(total - f.values)) < 1e-12 * scale

    def test_low_freq_kills_high_modes(self):
        grid = GridSpec(64)
        x1, _ = grid.coords()
        fam = build_family(grid)
        # |k| = 6 >= (8/3) * 2^1, so S_1 of that mode vanishes
        f = ScalarField(grid, np.sin(6 * x1))
        assert linf_norm(low_freq(f, 1, fam)) < 1e-13

    def test_low_freq_is_identity_beyond_family(self, rng):
        grid = GridSpec(64)
        fam = build_family(grid)
        f = random_scalar(grid, rng, max_radius=fam.complete_radius)
        g = low_freq(f, fam.j_max + 1, fam)
        assert np.max(np.abs(g.values - f.values)) < 1e-12


class TestNorms:
    def test_constant_field_reduces_to_low_block(self):
        grid = GridSpec(32)
        c = 1.7
        f = ScalarField(grid, np.full((32, 32), c))
        for s in (0.0, 1.3, 2.6):
            want = 2.0 ** (-s) * l2_norm(f)
            assert abs(sobolev_norm(f, s) - want) < 1e-12

    def test_besov_inf_inf_is_max_over_blocks(self, rng):
        grid = GridSpec(32)
        fam = build_family(grid)
        f = random_scalar(grid, rng, max_radius=fam.complete_radius)
        s = 1.0
        blocks = [2.0 ** (j * s) * linf_norm(dyadic_block(f, j, fam)) for j in range(-1, fam.j_max + 1)]
        assert abs(besov_norm(f, s, np.inf, np.inf, fam) - max(blocks)) < 1e-12

    def test_sobolev_equals_besov_22(self, rng):
        grid = GridSpec(32)
        f = random_scalar(grid, rng)
        assert abs(sobolev_norm(f, 1.3) - besov_norm(f, 1.3, 2.0, 2.0)) < 1e-13

    def test_h0_equals_l2_on_single_owner_mode(self):
        # |k| = 3 is owned by block 1 alone, so the dyadic H^0 norm agrees
        # with L^2 exactly there.
        grid = GridSpec(64)
        x1, _ = grid.coords()
        f = ScalarField(grid, np.sin(3 * x1))
        assert abs(sobolev_norm(f, 0.0) - l2_norm(f)) < 1e-12

    def test_h0_l2_two_sided_bound(self, rng):
        # For general fields the dyadic H^0 norm is only equivalent to L^2:
        # adjacent smooth blocks overlap.  The exact lower constant comes
        # from the family itself.
        grid = GridSpec(64)
        fam = build_family(grid)
        floor = fam.plancherel_floor()
        assert 0.5 < floor < 1.0
        for _ in range(10):
            f = random_scalar(grid, rng, max_radius=fam.complete_radius)
            h0 = sobolev_norm(f, 0.0, fam)
            l2 = l2_norm(f)
            assert floor * l2 - 1e-12 <= h0 <= l2 + 1e-12

    def test_quadrature_weight_in_block_norms(self):
        # single low mode: H^s norm is 2^(-s) * L2 when the mode sits in chi
        grid = GridSpec(64)
        x1, _ = grid.coords()
        f = ScalarField(grid, 0.3 * np.cos(x1))
        fam = build_family(grid)
        # |k| = 1: chi and phi_0 both see it; direct block sum oracle
        want = 0.0
        s = 1.3
        for j in range(-1, fam.j_max + 1):
            want += (2.0 ** (j * s) * l2_norm(dyadic_block(f, j, fam))) ** 2
        assert abs(sobolev_norm(f, s, fam) - np.sqrt(want)) < 1e-13


class TestBony:
    def test_constant_times_field_identity(self, rng):
        grid = GridSpec(64)
        fam = build_family(grid)
        v = random_scalar(grid, rng, max_radius=fam.complete_radius)
        c = ScalarField(grid, np.full_like(v.values, 2.5))
        got = bony_product(c, v, fam)
        assert np.max(np.abs(got.values - 2.5 * v.values)) < 1e-12
        # paraproduct with constant first argument keeps only high blocks
        t = bony_paraproduct(v, c, fam)
        assert linf_norm(t) < 1e-12

    def test_bony_identity_dealiased_same_grid(self):
        rng = np.random.default_rng(17)
        for n in (32, 64):
            grid = GridSpec(n)
            fam = build_family(grid)
            for _ in range(25):
                u = random_scalar(grid, rng, max_radius=fam.complete_radius)
                v = random_scalar(grid, rng, max_radius=fam.complete_radius)
                got = bony_product(u, v, fam)
                want = dealias(ScalarField(grid, u.values * v.values))
                scale = max(1.0, linf_norm(want))
                assert np.max(np.abs(got.values - want.values)) < 1e-12 * scale

    def test_bony_identity_exact_on_doubled_grid(self):
        # On a doubled grid the product of fields band-limited to the
        # smaller family's ball is alias-free, so the identity is exact
        # without any dealiasing.
        rng = np.random.default_rng(23)
        small_ball = build_family(GridSpec(32)).complete_radius
        grid = GridSpec(64)
        fam = build_family(grid)
        for _ in range(25):
            u = random_scalar(grid, rng, max_radius=small_ball)
            v = random_scalar(grid, rng, max_radius=small_ball)
            got = bony_product(u, v, fam)
            want = u.values * v.values
            scale = max(1.0, float(np.max(np.abs(want))))
            assert np.max(np.abs(got.values - want)) < 1e-12 * scale

    def test_remainder_is_symmetric(self, rng):
        grid = GridSpec(32)
        fam = build_family(grid)
        u = random_scalar(grid, rng, max_radius=fam.complete_radius)
        v = random_scalar(grid, rng, max_radius=fam.complete_radius)
        a = bony_remainder(u, v, fam)
        b = bony_remainder(v, u, fam)
        assert np.max(np.abs(a.values - b.values)) < 1e-12


class TestSweeps:
    def test_bernstein_constants_bounded_and_stable(self):
        report = bernstein_sweep(n_list=(32, 64), samples=10, seed=5)
        for n, c in report.constants.items():
            assert c <= 10.0, f"N={n} constant {c}"
        assert report.stability_factor() <= 2.0

    def test_continuity_quotients_finite_and_stable(self):
        report = continuity_sweep(n_list=(32, 64), samples=8, seed=9)
        assert report.all_finite()
        for name in report.quotients:
            assert report.stability_factor(name) <= 2.0, name
