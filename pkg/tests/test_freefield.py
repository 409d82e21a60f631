"""Planar FFT propagation and the Duhamel reference reconstruction."""

import math

import numpy as np
import pytest

from branchwave.freefield import FourierBox, FreeReference
from branchwave.geometry import CoveringSpec, build_grid
from branchwave.packets import PacketSpec, packet_values


@pytest.fixture(scope="module")
def grid():
    return build_grid(CoveringSpec(), 6, 1 / 8)


class TestFourierBox:
    def test_window_alignment(self, grid):
        box = FourierBox.for_grid(grid, pad=2.0)
        assert np.allclose(box.xs[box.ox:box.ox + grid.nx], grid.xs)
        assert np.allclose(box.ys[box.oy:box.oy + grid.ny], grid.ys)

    def test_embed_window_roundtrip(self, grid):
        box = FourierBox.for_grid(grid, pad=2.0)
        rng = np.random.default_rng(3)
        w = rng.standard_normal((grid.ny, grid.nx)) + 0j
        assert np.array_equal(box.window(box.embed(w)), w)

    def test_propagation_matches_tensor_evolution(self, grid):
        # FFT propagation of a sampled packet against the exact quadrature
        # evolution: two independent realizations of exp(-i t A0).  The
        # Gaussian profile keeps the spatial tails far below the box wrap.
        from branchwave.packets import gaussian_profile, position_values
        box = FourierBox.for_grid(grid, pad=4.0)
        g = gaussian_profile(6.0)
        t = 0.25
        px0 = position_values(g, 0.0, 0.0, box.xs, 0.0)
        py0 = position_values(g, 2.0, 0.0, box.ys, 0.0)
        u0 = np.outer(py0, px0)
        prop = box.propagate(u0, t)
        pxt = position_values(g, 0.0, 0.0, box.xs, t)
        pyt = position_values(g, 2.0, 0.0, box.ys, t)
        exact = np.outer(pyt, pxt)
        err = math.sqrt(box.mass(prop - exact))
        assert err < 1e-7

    def test_propagation_unitary(self, grid):
        box = FourierBox.for_grid(grid, pad=2.0)
        rng = np.random.default_rng(5)
        f = rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)
        assert box.mass(box.propagate(f, 0.3)) == pytest.approx(
            box.mass(f), rel=1e-12)


class TestFreeReference:
    def test_duhamel_matches_direct_propagation(self, grid):
        # chi u(t) - Duhamel(t) against the direct free evolution of chi u0:
        # two different numerical routes.  The direct route periodizes the
        # packet's slow spatial tails, which floors the agreement at a few
        # percent independent of padding; both routes also match a
        # brute-force Fresnel-kernel evaluation at that level.
        box = FourierBox.for_grid(grid, pad=10.0)
        spec = PacketSpec(a=2, s=3)
        t = 0.3
        ref = FreeReference(spec, box, [t], n_steps=96)
        via_duhamel = ref.values_at(t)
        direct = box.propagate(ref.initial_state(), t)
        err = math.sqrt(box.mass(via_duhamel - direct))
        assert err < 0.06

    def test_duhamel_second_order_in_steps(self, grid):
        # comparing two Duhamel resolutions against a fine one cancels the
        # box effects and exposes the trapezoid order
        box = FourierBox.for_grid(grid, pad=6.0)
        spec = PacketSpec(a=2, s=3)
        t = 0.3
        fine = FreeReference(spec, box, [t], n_steps=192).values_at(t)
        errs = []
        for n in (12, 24):
            ref = FreeReference(spec, box, [t], n_steps=n)
            errs.append(math.sqrt(box.mass(ref.values_at(t) - fine)))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.4)

    def test_negative_times_mirror(self, grid):
        box = FourierBox.for_grid(grid, pad=10.0)
        spec = PacketSpec(a=2, s=3)
        ref = FreeReference(spec, box, [-0.2], n_steps=48)
        direct = box.propagate(ref.initial_state(), -0.2)
        err = math.sqrt(box.mass(ref.values_at(-0.2) - direct))
        assert err < 0.06

    def test_mixed_sign_times_rejected(self, grid):
        box = FourierBox.for_grid(grid, pad=2.0)
        spec = PacketSpec(a=2, s=3)
        with pytest.raises(ValueError):
            FreeReference(spec, box, [-0.1, 0.1])
