"""Channel experiments: masses, wave-operator approximants, surveys."""

import math

import numpy as np
import pytest

from branchwave.errors import CutOverlap, ResolutionViolation
from branchwave.evolution import StepperConfig, assemble_euclidean
from branchwave.geometry import CoveringSpec, build_grid
from branchwave.packets import PacketSpec, WaveField, lift_to_cover, packet_values
from branchwave.scattering import (approx_wave_operator_minus, channel_masses,
                                   multi_sheet_survey, s_entry_estimate,
                                   same_sheet_experiment,
                                   transmission_experiment,
                                   validate_resolution)


def quick_cfg(h, s, tol=1e-8):
    return StepperConfig(dt=h / (4.0 * (s + 1.0)), solver_tol=tol)


class TestValidation:
    def test_nyquist_violation(self):
        with pytest.raises(ResolutionViolation):
            validate_resolution(0.25, PacketSpec(a=4, s=4), 1e-3)

    def test_dt_violation(self):
        with pytest.raises(ResolutionViolation):
            validate_resolution(1 / 16, PacketSpec(a=2, s=2), 0.1)

    def test_acceptable(self):
        validate_resolution(1 / 16, PacketSpec(a=2, s=2), 1e-3)


class TestChannelMasses:
    def test_single_sheet_field(self):
        g = build_grid(CoveringSpec(), 4.5, 0.25)
        v = np.zeros((g.ny, g.nx), dtype=complex)
        v[:, :] = 1.0
        w = lift_to_cover(v, g, mode="embed", launch_sheet=0)
        total, far = channel_masses(w, r_far=2.0)
        assert total[1] == 0.0 and far[1] == 0.0
        assert total[0] == pytest.approx(w.norm_sq, rel=1e-12)
        assert far[0] < total[0]

    def test_symmetric_split(self):
        g = build_grid(CoveringSpec(), 4.5, 0.25)
        rng = np.random.default_rng(0)
        v = rng.standard_normal((g.ny, g.nx)) + 0j
        v = v + v[::-1, :]                      # even in y
        w = lift_to_cover(v, g, mode="cross")
        total, _ = channel_masses(w)
        assert total[0] == pytest.approx(total[1], rel=1e-12)

    def test_initial_split_matches_halfplane_quadrature(self):
        # mass on each sheet of the lifted truncated packet equals the
        # planar quadrature of |v0|^2 over the half planes
        g = build_grid(CoveringSpec(), 8, 1 / 8)
        spec = PacketSpec(a=3, s=4)
        from branchwave.cutoff import build_cutoff
        cut = build_cutoff(g.xs, g.ys)
        v0 = cut.chi * packet_values(spec, g.xs, g.ys, 0.0)
        w0 = lift_to_cover(v0, g, mode="cross")
        total, _ = channel_masses(w0)
        below = g.ys < 0
        h2 = g.cell_measure
        low_ref = float(h2 * np.sum(np.abs(v0[below, :]) ** 2))
        upp_ref = float(h2 * np.sum(np.abs(v0[~below, :]) ** 2))
        assert total[0] == pytest.approx(low_ref, rel=1e-12)
        assert total[1] == pytest.approx(upp_ref, rel=1e-12)


class TestWaveOperatorApproximant:
    def test_decoupled_identity(self):
        # with the cut removed the sheets are two disjoint planes and the
        # approximant reproduces the initial state up to discretization and
        # the window truncation of the packet's slow tails at finite T
        g = build_grid(CoveringSpec(), 8, 1 / 8, decoupled=True)
        spec = PacketSpec(a=2, s=3)
        v0 = packet_values(spec, g.xs, g.ys, 0.0)
        cfg = quick_cfg(g.h, spec.s)
        out = approx_wave_operator_minus(v0, 0, 0.25, g, cfg,
                                         boundary_threshold=1.0)
        arr = out.as_sheet_arrays()
        err = math.sqrt(float(np.sum(np.abs(arr[0] - v0) ** 2))
                        * g.cell_measure)
        assert err < 0.15
        assert float(np.abs(arr[1]).max()) == 0.0

    def test_norm_preserved(self):
        g = build_grid(CoveringSpec(), 8, 1 / 8)
        spec = PacketSpec(a=2, s=3)
        v0 = packet_values(spec, g.xs, g.ys, 0.0)
        cfg = quick_cfg(g.h, spec.s)
        out = approx_wave_operator_minus(v0, 0, 0.2, g, cfg,
                                         boundary_threshold=1.0)
        assert out.norm() == pytest.approx(1.0, abs=0.02)

    def test_decoupled_s_matrix(self):
        g = build_grid(CoveringSpec(), 8, 1 / 8, decoupled=True)
        spec = PacketSpec(a=2, s=3)
        cfg = quick_cfg(g.h, spec.s)
        same = s_entry_estimate(0, 0, spec, g, 0.25, cfg,
                                boundary_threshold=1.0, duhamel_steps=24)
        cross = s_entry_estimate(1, 0, spec, g, 0.25, cfg,
                                 boundary_threshold=1.0, duhamel_steps=24)
        assert abs(same - 1.0) < 0.2
        assert cross == 0.0


class TestTransmission:
    @pytest.fixture(scope="class")
    def small_report(self):
        g = build_grid(CoveringSpec(), 8, 1 / 8)
        spec = PacketSpec(a=3, s=5, eps=0.2)
        cfg = quick_cfg(g.h, spec.s)
        return transmission_experiment(spec, g, 0.35, cfg, t0=0.2,
                                       n_samples=2, duhamel_steps=24,
                                       boundary_threshold=0.2)

    def test_mass_bookkeeping(self, small_report):
        rep = small_report
        s = rep.forward_series
        totals = s.sheet_masses.sum(axis=1)
        assert np.allclose(totals, s.total_norm_sq, atol=1e-10)
        assert abs(s.total_norm_sq[-1] - rep.norm_w0 ** 2) < 1e-6

    def test_sheet_mass_moves_up(self, small_report):
        s = small_report.forward_series
        assert s.sheet_masses[-1, 1] > s.sheet_masses[0, 1]

    def test_projection_mass_approximants(self, small_report):
        from branchwave.cutoff import build_cutoff
        from branchwave.scattering import projection_mass_approximants
        g = build_grid(CoveringSpec(), 8, 1 / 8)
        spec = PacketSpec(a=3, s=5, eps=0.2)
        cut = build_cutoff(g.xs, g.ys)
        w0 = lift_to_cover(cut.chi * packet_values(spec, g.xs, g.ys, 0.0), g)
        cfg = quick_cfg(g.h, spec.s)
        out = projection_mass_approximants(w0, 0.35, g, cfg,
                                           boundary_threshold=0.3)
        assert set(out) == {"P_plus", "P_minus"}
        # partition of the norm across sheets
        assert out["P_plus"][0] ** 2 + out["P_plus"][1] ** 2 == \
            pytest.approx(1.0, abs=1e-6)
        # matches the fractions reported by the full experiment
        assert out["P_plus"][1] == pytest.approx(
            small_report.projection_fractions["P_plus"][1], abs=5e-3)

    def test_mirror_symmetry(self, small_report):
        rep = small_report
        # the covering has an exact y-reflection/sheet-swap symmetry, so the
        # backward run mirrors the forward one
        assert rep.residuals_backward == pytest.approx(
            rep.residuals_forward, rel=1e-6)
        pf = rep.projection_fractions
        assert pf["P_plus"][1] == pytest.approx(pf["P_minus"][0], rel=1e-9)

    def test_launch_sheet_swap(self):
        g = build_grid(CoveringSpec(), 8, 1 / 8)
        spec = PacketSpec(a=3, s=5, eps=0.2)
        cfg = quick_cfg(g.h, spec.s)
        rep0 = transmission_experiment(spec, g, 0.3, cfg, t0=0.3,
                                       n_samples=1, duhamel_steps=16,
                                       boundary_threshold=0.2,
                                       launch_sheet=0, backward=False)
        rep1 = transmission_experiment(spec, g, 0.3, cfg, t0=0.3,
                                       n_samples=1, duhamel_steps=16,
                                       boundary_threshold=0.2,
                                       launch_sheet=1, backward=False)
        m0 = rep0.forward_series.sheet_masses[-1]
        m1 = rep1.forward_series.sheet_masses[-1]
        assert m0[0] == pytest.approx(m1[1], rel=1e-10)
        assert m0[1] == pytest.approx(m1[0], rel=1e-10)


class TestSameSheet:
    def test_cut_overlap_rejected(self):
        g = build_grid(CoveringSpec(), 8, 1 / 8)
        spec = PacketSpec(a=2, s=4, k=1.2)
        cfg = quick_cfg(g.h, spec.s)
        with pytest.raises(CutOverlap):
            same_sheet_experiment(spec, g, 0.3, cfg)

    def test_shift_mirror_symmetry(self):
        g = build_grid(CoveringSpec(), 10, 1 / 8)
        cfg = quick_cfg(g.h, 4)
        reps = []
        for k in (3.0, -3.0):
            spec = PacketSpec(a=2, s=4, k=k)
            reps.append(same_sheet_experiment(spec, g, 0.3, cfg, t0=0.3,
                                              n_samples=1, duhamel_steps=16,
                                              boundary_threshold=0.2,
                                              backward=False))
        assert reps[0].far_field_fraction_forward == pytest.approx(
            reps[1].far_field_fraction_forward, abs=1e-8)
        assert reps[0].forward_series.sheet_masses[-1][0] == pytest.approx(
            reps[1].forward_series.sheet_masses[-1][0], abs=1e-8)

    def test_same_sheet_keeps_mass(self):
        g = build_grid(CoveringSpec(), 10, 1 / 8)
        spec = PacketSpec(a=2, s=4, k=3.0)
        cfg = quick_cfg(g.h, spec.s)
        rep = same_sheet_experiment(spec, g, 0.3, cfg, t0=0.3, n_samples=1,
                                    duhamel_steps=16, boundary_threshold=0.2,
                                    backward=False)
        masses = rep.forward_series.sheet_masses[-1]
        assert masses[0] > 0.98 * rep.norm_w0 ** 2
        assert masses[1] < 0.02


class TestMultiSheet:
    def test_three_sheet_rows_cyclic(self):
        g = build_grid(CoveringSpec(num_sheets=3), 8, 1 / 8)
        spec = PacketSpec(a=3, s=5)
        cfg = quick_cfg(g.h, spec.s)
        survey = multi_sheet_survey(spec, g, 0.3, cfg,
                                    boundary_threshold=0.2, duhamel_steps=8)
        rows = survey["total_matrix"]
        # launching one sheet higher shifts the arrival row cyclically
        r0 = rows[0]
        r1 = rows[1]
        assert r1[1] == pytest.approx(r0[0], rel=1e-9)
        assert r1[2] == pytest.approx(r0[1], rel=1e-9)
        assert r1[0] == pytest.approx(r0[2], rel=1e-9)

    def test_row_sums(self):
        g = build_grid(CoveringSpec(num_sheets=3), 8, 1 / 8)
        spec = PacketSpec(a=3, s=5)
        cfg = quick_cfg(g.h, spec.s)
        survey = multi_sheet_survey(spec, g, 0.25, cfg, launch_sheets=[0],
                                    boundary_threshold=0.2, duhamel_steps=8)
        total = sum(survey["total_matrix"][0])
        assert total == pytest.approx(1.0, abs=1e-6)
