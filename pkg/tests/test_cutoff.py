"""Mollified cone cutoff: values, sandwich, derivative consistency."""

import math

import numpy as np
import pytest

from branchwave.cutoff import (MOLLIFIER_RADIUS, SUPPORT_MARGIN, ConeCutoff,
                               build_cutoff)

EV = ConeCutoff()


def cone_distances(x, y, cx=0.0):
    """Signed clearances to the two complement wedges (positive inside the
    cone region Omega)."""
    out = []
    for sign in (+1.0, -1.0):
        ax = cx + sign * 0.5
        u = sign * (x - ax)
        d1 = (u - y) / math.sqrt(2)
        d2 = (u + y) / math.sqrt(2)
        out.append(-max(min(d1, d2), -10.0))
    return out


class TestValues:
    def test_deep_inside(self):
        assert EV.chi(np.array([0.0]), np.array([5.0]))[0] == 1.0
        assert EV.chi(np.array([0.0]), np.array([0.0]))[0] == 1.0

    def test_deep_outside(self):
        assert EV.chi(np.array([5.0]), np.array([0.0]))[0] == 0.0

    def test_apex_value(self):
        # at a wedge apex the ball sees exactly a quarter plane
        for x in (0.5, -0.5):
            assert EV.chi(np.array([x]), np.array([0.0]))[0] == \
                pytest.approx(0.75, abs=1e-6)

    def test_range_and_symmetry(self):
        xs = np.linspace(-2.5, 2.5, 41)
        ys = np.linspace(-2.0, 2.0, 33)
        f = build_cutoff(xs, ys)
        assert f.chi.min() >= 0.0 and f.chi.max() <= 1.0
        assert np.allclose(f.chi, f.chi[:, ::-1], atol=1e-9)   # x -> -x
        assert np.allclose(f.chi, f.chi[::-1, :], atol=1e-9)   # y -> -y

    def test_support_margins(self):
        # chi = 1 once both wedges are farther than the mollifier radius,
        # chi = 0 once the point is deeper than the radius inside a wedge
        rng = np.random.default_rng(2)
        for _ in range(200):
            x = rng.uniform(-3, 3)
            y = rng.uniform(-2, 2)
            d = min(cone_distances(x, y))
            val = EV.chi(np.array([x]), np.array([y]))[0]
            if d >= MOLLIFIER_RADIUS + 1e-9:
                assert val == 1.0
            elif d <= -MOLLIFIER_RADIUS - 1e-9:
                assert val == 0.0
            else:
                assert 0.0 <= val <= 1.0

    def test_support_inside_hypothesis_cone(self):
        # supp chi sits inside {|x| <= 1 + |y|}; the mollifier vanishes to
        # infinite order at its rim, so probe well inside the margin
        ys = np.linspace(-3, 3, 25)
        for y in ys:
            edge = 0.5 + abs(y) + SUPPORT_MARGIN
            assert edge < 1.0 + abs(y)
            assert EV.chi(np.array([edge + 0.02]), np.array([y]))[0] == 0.0
            assert EV.chi(np.array([edge - 0.1]), np.array([y]))[0] > 0.0


class TestDerivatives:
    def test_vanish_where_locally_constant(self):
        pts = [(0.0, 0.0), (0.0, 4.0), (3.0, 0.0), (-3.0, 0.0)]
        for x, y in pts:
            c, gx, gy, lap = EV.fields(np.array([x]), np.array([y]))
            assert c[0] in (0.0, 1.0)
            assert gx[0] == 0.0 and gy[0] == 0.0 and lap[0] == 0.0

    def test_fd_consistency_order(self):
        # central differences of chi converge to the analytic gradient at
        # second order; observed order on a halving sweep >= 1.9
        rng = np.random.default_rng(4)
        pts = rng.uniform(-1.6, 1.6, size=(25, 2))
        pts[:, 0] += 0.4
        _, gx, gy, _ = EV.fields(pts[:, 0], pts[:, 1])
        errs = []
        for h in (0.02, 0.01):
            fx = (EV.chi(pts[:, 0] + h, pts[:, 1])
                  - EV.chi(pts[:, 0] - h, pts[:, 1])) / (2 * h)
            fy = (EV.chi(pts[:, 0], pts[:, 1] + h)
                  - EV.chi(pts[:, 0], pts[:, 1] - h)) / (2 * h)
            errs.append(max(np.max(np.abs(fx - gx)), np.max(np.abs(fy - gy))))
        order = math.log2(errs[0] / errs[1])
        assert order >= 1.9

    def test_laplacian_against_fd(self):
        rng = np.random.default_rng(6)
        pts = rng.uniform(-1.5, 1.5, size=(20, 2))
        pts[:, 0] += 0.5
        c, _, _, lap = EV.fields(pts[:, 0], pts[:, 1])
        h = 1e-4
        fd = (EV.chi(pts[:, 0] + h, pts[:, 1])
              + EV.chi(pts[:, 0] - h, pts[:, 1])
              + EV.chi(pts[:, 0], pts[:, 1] + h)
              + EV.chi(pts[:, 0], pts[:, 1] - h) - 4 * c) / h ** 2
        assert np.max(np.abs(fd - lap)) < 5e-3

    def test_shifted_center(self):
        ev3 = ConeCutoff(3.0)
        assert ev3.chi(np.array([3.0]), np.array([0.0]))[0] == 1.0
        assert ev3.chi(np.array([0.0]), np.array([0.0]))[0] == 0.0
        base = EV.chi(np.array([0.3]), np.array([0.4]))[0]
        assert ev3.chi(np.array([3.3]), np.array([0.4]))[0] == \
            pytest.approx(base, abs=1e-12)
