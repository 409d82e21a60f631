"""Packets: profiles, free evolution, localization, lifting."""

import math

import numpy as np
import pytest
from scipy.integrate import fixed_quad

from branchwave.errors import EmptySupport, GridMismatch
from branchwave.geometry import CoveringSpec, build_grid
from branchwave.packets import (PacketSpec, WaveField, bump_profile,
                                check_localization, gaussian_profile,
                                lift_to_cover, packet_values, position_values,
                                sweep_localization)


class TestBumpProfile:
    def test_norm_one(self):
        for lo, hi in [(-1, 1), (0, 1), (-4, 4), (2, 7)]:
            p = bump_profile(lo, hi)
            assert p.norm_sq() == pytest.approx(1.0, abs=1e-10)

    def test_endpoint_and_center_values(self):
        p = bump_profile(-1, 1)
        assert p.fn(np.array([-1.0, 1.0])) == pytest.approx([0.0, 0.0])
        # center value is c e^{-1} with c the normalization
        c = p.fn(np.array([0.0]))[0] * math.e
        assert c > 0
        assert p.fn(np.array([0.0]))[0] == pytest.approx(c / math.e)

    def test_independent_quadrature_orders_agree(self):
        p = bump_profile(0, 1)
        lo_val, _ = fixed_quad(lambda x: p.fn(x) ** 2, 0, 1, n=80)
        hi_val, _ = fixed_quad(lambda x: p.fn(x) ** 2, 0, 1, n=160)
        assert lo_val == pytest.approx(hi_val, abs=1e-10)
        assert lo_val == pytest.approx(1.0, abs=1e-10)

    def test_empty_support(self):
        with pytest.raises(EmptySupport):
            bump_profile(1.0, 1.0)


class TestPositionValues:
    def test_parseval(self):
        p = bump_profile(-2, 2)
        xs = np.linspace(-60, 60, 12001)
        v = position_values(p, 0.0, 0.0, xs, 0.0)
        mass = np.trapezoid(np.abs(v) ** 2, xs)
        assert mass == pytest.approx(1.0, abs=1e-6)

    def test_unitarity_at_later_time(self):
        p = bump_profile(-1, 1)
        xs = np.linspace(-80, 80, 16001)
        v = position_values(p, 0.0, 0.0, xs, 1.5)
        mass = np.trapezoid(np.abs(v) ** 2, xs)
        assert mass == pytest.approx(1.0, abs=1e-5)

    def test_gaussian_dispersion_oracle(self):
        # free 1D evolution of the unit Gaussian: |Psi(0,t)|^2 / |Psi(0,0)|^2
        # equals (1 + 4 t^2)^(-1/2)
        g = gaussian_profile(8.0)
        v0 = position_values(g, 0.0, 0.0, [0.0], 0.0)[0]
        v1 = position_values(g, 0.0, 0.0, [0.0], 1.0)[0]
        assert abs(v1) ** 2 / abs(v0) ** 2 == pytest.approx(
            5 ** -0.5, abs=1e-6)

    def test_momentum_shift_moves_packet(self):
        p = bump_profile(0, 1)
        xs = np.linspace(-40, 80, 4801)
        s = 6.0
        v = position_values(p, s, 0.0, xs, 2.0)
        center = np.sum(xs * np.abs(v) ** 2) / np.sum(np.abs(v) ** 2)
        assert center == pytest.approx(2.0 * (s + 0.5) * 2.0, abs=1.0)

    def test_derivative_consistency(self):
        p = bump_profile(-2, 2)
        xs = np.array([-0.4, 0.1, 0.7])
        h = 1e-5
        d = position_values(p, 0.0, 0.0, xs, 0.3, derivative=1)
        fd = (position_values(p, 0.0, 0.0, xs + h, 0.3)
              - position_values(p, 0.0, 0.0, xs - h, 0.3)) / (2 * h)
        assert np.max(np.abs(d - fd)) < 1e-7


class TestLocalization:
    def test_monotone_in_bandwidth(self):
        res = sweep_localization(0.1, candidates=(4, 8, 16, 32))
        masses = [r.mass for r in res]
        assert all(m2 > m1 for m1, m2 in zip(masses, masses[1:]))

    def test_smallest_passing_bandwidth_reported(self):
        res = sweep_localization(0.1, candidates=(4, 8, 16, 32))
        passing = [r.a for r in res if r.passed]
        assert passing and passing[0] == 16.0
        assert res[2].mass > 0.9 and res[1].mass < 0.9

    def test_narrow_band_fails(self):
        r = check_localization(0.1, 0.01)
        assert not r.passed and r.mass < 0.99


class TestPacketSpec:
    def test_eps_prime(self):
        spec = PacketSpec(a=4, s=8, eps=0.2)
        assert spec.eps_prime == 0.04
        assert spec.momentum_support == (8.0, 9.0)

    def test_invalid_eps(self):
        with pytest.raises(ValueError):
            PacketSpec(a=4, s=8, eps=1.5)

    def test_packet_norm(self):
        spec = PacketSpec(a=2, s=3)
        xs = np.linspace(-30, 30, 1201)
        ys = np.linspace(-30, 30, 1201)
        u = packet_values(spec, xs, ys, 0.4)
        hx = xs[1] - xs[0]
        mass = np.sum(np.abs(u) ** 2) * hx * hx
        assert mass == pytest.approx(1.0, abs=1e-3)


class TestWaveFieldAndLift:
    def setup_method(self):
        self.grid = build_grid(CoveringSpec(), 4.5, 0.25)

    def test_norm_recompute(self):
        rng = np.random.default_rng(3)
        vals = rng.standard_normal(self.grid.n_nodes) \
            + 1j * rng.standard_normal(self.grid.n_nodes)
        f = WaveField(self.grid, vals)
        ref = self.grid.cell_measure * np.sum(np.abs(vals) ** 2)
        assert f.norm_sq == pytest.approx(ref, rel=1e-13)

    def test_lift_lower_support(self):
        v = np.zeros((self.grid.ny, self.grid.nx), dtype=complex)
        v[self.grid.ys < 0, :] = 1.0
        w = lift_to_cover(v, self.grid)
        masses = w.sheet_masses()
        assert masses[1] == 0.0 and masses[0] > 0

    def test_lift_preserves_norm(self):
        rng = np.random.default_rng(5)
        v = rng.standard_normal((self.grid.ny, self.grid.nx)) + 0j
        w = lift_to_cover(v, self.grid)
        assert w.norm_sq == pytest.approx(
            self.grid.cell_measure * np.sum(np.abs(v) ** 2), rel=1e-14)

    def test_lift_cross_splits_by_sign(self):
        v = np.ones((self.grid.ny, self.grid.nx), dtype=complex)
        w = lift_to_cover(v, self.grid, launch_sheet=0, mode="cross")
        arr = w.as_sheet_arrays()
        below = self.grid.ys < 0
        assert np.all(arr[0][below, :] == 1.0)
        assert np.all(arr[0][~below, :] == 0.0)
        assert np.all(arr[1][~below, :] == 1.0)

    def test_lift_embed(self):
        v = np.ones((self.grid.ny, self.grid.nx), dtype=complex)
        w = lift_to_cover(v, self.grid, launch_sheet=1, mode="embed")
        masses = w.sheet_masses()
        assert masses[0] == 0.0

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatch):
            lift_to_cover(np.zeros((3, 3)), self.grid)

    def test_field_csv_export(self, tmp_path):
        from branchwave.packets import export_field_csv
        xs = np.array([0.0, 1.0])
        ys = np.array([-1.0, 1.0])
        vals = np.array([[1 + 2j, 0j], [0.5j, -1.0 + 0j]])
        path = tmp_path / "field.csv"
        export_field_csv(path, xs, ys, vals)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,y,re,im"
        assert len(lines) == 5
        assert lines[1] == "0.0,-1.0,1.0,2.0"

    def test_truncated_packet_norm_high(self):
        # chi u0 keeps most of the packet for a localized profile
        from branchwave.cutoff import build_cutoff
        grid = build_grid(CoveringSpec(), 12, 1 / 8)
        spec = PacketSpec(a=6, s=6, eps=0.2)
        cut = build_cutoff(grid.xs, grid.ys)
        u0 = packet_values(spec, grid.xs, grid.ys, 0.0)
        w0 = lift_to_cover(cut.chi * u0, grid)
        assert w0.norm() > 1.0 - spec.eps_prime
