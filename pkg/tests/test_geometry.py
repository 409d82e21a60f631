"""Geometry: crossing parity, geodesic distance, branched grids."""

import math
from fractions import Fraction

import numpy as np
import pytest

from branchwave.errors import (BranchPointOnGrid, EndpointOnCut,
                               ExtentTooSmall, SegmentThroughBranchPoint)
from branchwave.geometry import (CoveringSpec, SheetPoint,
                                 batch_geodesic_distance, build_disc_grid,
                                 build_grid, crossing_parity,
                                 distance_to_branch_points, geodesic_distance,
                                 geodesic_distance_detailed)

SPEC2 = CoveringSpec(num_sheets=2)


def exact_cut_crossings(p1, p2):
    """Independent oracle: exact rational segment-segment intersection."""
    x1, y1 = (Fraction(v).limit_denominator(10 ** 12) for v in p1)
    x2, y2 = (Fraction(v).limit_denominator(10 ** 12) for v in p2)
    if y1 == y2:
        return 0
    t = y1 / (y1 - y2)
    if not 0 <= t <= 1:
        return 0
    xc = x1 + t * (x2 - x1)
    return 1 if -1 < xc < 1 else 0


class TestCrossingParity:
    def test_vertical_through_center(self):
        assert crossing_parity((0, -1), (0, 1)) == 1

    def test_outside_cut_range(self):
        assert crossing_parity((3, -1), (3, 1)) == 0

    def test_diagonal_crossing(self):
        # crossing point of (-2,-1)->(2,1) with y=0 is the origin
        assert exact_cut_crossings((-2, -1), (2, 1)) == 1
        assert crossing_parity((-2, -1), (2, 1)) == 1

    def test_random_against_exact_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            p1 = tuple(rng.uniform(-3, 3, 2))
            p2 = tuple(rng.uniform(-3, 3, 2))
            if abs(p1[1]) < 1e-3 or abs(p2[1]) < 1e-3:
                continue
            assert crossing_parity(p1, p2) == exact_cut_crossings(p1, p2)

    def test_branch_point_hit(self):
        with pytest.raises(SegmentThroughBranchPoint):
            crossing_parity((1, -1), (1, 1))

    def test_endpoint_on_cut(self):
        with pytest.raises(EndpointOnCut):
            crossing_parity((0.5, 0.0), (0, 1))

    def test_collinear_through_cut(self):
        with pytest.raises(SegmentThroughBranchPoint):
            crossing_parity((-2, 0.0), (2, 0.0))


def brute_candidates(p1, p2, spec):
    """Independent candidate enumeration for the distance."""
    cands = []
    d1 = distance_to_branch_points(p1)
    d2 = distance_to_branch_points(p2)
    cands.append(d1[0] + d2[0])
    cands.append(d1[1] + d2[1])
    direct = math.hypot(p1.x - p2.x, p1.y - p2.y)
    if direct > 0:
        try:
            par = crossing_parity((p1.x, p1.effective_y()),
                                  (p2.x, p2.effective_y()))
        except SegmentThroughBranchPoint:
            par = None
        if par is not None:
            up = par if p1.effective_y() < p2.effective_y() else -par
            if (p1.sheet + up) % spec.num_sheets == p2.sheet:
                cands.append(direct)
    return min(cands)


class TestDistance:
    def test_worked_instance(self):
        for y in (0.5, 1.0, 2.0):
            p1 = SheetPoint(0, y, 0)
            p2 = SheetPoint(0, -y, 0)
            assert geodesic_distance(p1, p2, SPEC2) == pytest.approx(
                2 * math.sqrt(1 + y * y), abs=0, rel=0)

    def test_identity(self):
        p = SheetPoint(0.3, -0.7, 1)
        assert geodesic_distance(p, p, SPEC2) == 0.0

    def test_direct_cross_sheet(self):
        p1 = SheetPoint(0, 1, 0)
        p2 = SheetPoint(0, -1, 1)
        # candidate enumeration: direct segment (length 2, parity 1) wins
        assert brute_candidates(p1, p2, SPEC2) == 2.0
        d, route, _ = geodesic_distance_detailed(p1, p2, SPEC2)
        assert d == 2.0 and route == "direct"

    def test_symmetry_random(self):
        rng = np.random.default_rng(11)
        for _ in range(400):
            p1 = SheetPoint(*rng.uniform(-4, 4, 2), int(rng.integers(2)))
            p2 = SheetPoint(*rng.uniform(-4, 4, 2), int(rng.integers(2)))
            d12 = geodesic_distance(p1, p2, SPEC2)
            d21 = geodesic_distance(p2, p1, SPEC2)
            assert abs(d12 - d21) <= 1e-12

    def test_triangle_random(self):
        rng = np.random.default_rng(13)
        for _ in range(400):
            pts = [SheetPoint(*rng.uniform(-4, 4, 2), int(rng.integers(2)))
                   for _ in range(3)]
            d01 = geodesic_distance(pts[0], pts[1], SPEC2)
            d12 = geodesic_distance(pts[1], pts[2], SPEC2)
            d02 = geodesic_distance(pts[0], pts[2], SPEC2)
            assert d02 <= d01 + d12 + 1e-12

    def test_matches_candidate_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            p1 = SheetPoint(*rng.uniform(-4, 4, 2), int(rng.integers(2)))
            p2 = SheetPoint(*rng.uniform(-4, 4, 2), int(rng.integers(2)))
            assert geodesic_distance(p1, p2, SPEC2) == pytest.approx(
                brute_candidates(p1, p2, SPEC2), rel=0, abs=0)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(23)
        m = 500
        x1, y1 = rng.uniform(-4, 4, m), rng.uniform(-4, 4, m)
        x2, y2 = rng.uniform(-4, 4, m), rng.uniform(-4, 4, m)
        s1, s2 = rng.integers(2, size=m), rng.integers(2, size=m)
        batch = batch_geodesic_distance(x1, y1, s1, x2, y2, s2, SPEC2)
        for i in range(m):
            scalar = geodesic_distance(SheetPoint(x1[i], y1[i], int(s1[i])),
                                       SheetPoint(x2[i], y2[i], int(s2[i])),
                                       SPEC2)
            # np.hypot and math.hypot may differ in the last ulp
            assert batch[i] == pytest.approx(scalar, rel=1e-15)

    def test_same_planar_point_other_sheet(self):
        p1 = SheetPoint(0.5, 0.3, 0)
        p2 = SheetPoint(0.5, 0.3, 1)
        dm, dp = distance_to_branch_points(p1)
        assert geodesic_distance(p1, p2, SPEC2) == pytest.approx(
            2 * min(dm, dp), rel=1e-15)

    def test_branch_point_distances(self):
        assert distance_to_branch_points(SheetPoint(0, 1e-9, 0)) == \
            pytest.approx((math.hypot(1, 1e-9), math.hypot(1, 1e-9)))
        assert distance_to_branch_points(SheetPoint(3, 0, 0)) == (4.0, 2.0)
        dm, dp = distance_to_branch_points(SheetPoint(-1, 1, 1))
        assert (dm, dp) == pytest.approx((1.0, math.sqrt(5)))

    def test_branch_points_rejected(self):
        with pytest.raises(ValueError):
            SheetPoint(1.0, 0.0, 0)

    def test_on_cut_canonicalization(self):
        p = SheetPoint(0.0, 0.0, 0)          # on the open cut, from below
        q_above = SheetPoint(0.0, 0.5, 1)    # directly above on the far sheet
        # the limit-from-below point reaches the upper sheet by one crossing
        assert geodesic_distance(p, q_above, SPEC2) == pytest.approx(0.5)
        q_same = SheetPoint(0.0, -0.5, 0)
        assert geodesic_distance(p, q_same, SPEC2) == pytest.approx(0.5)


class TestMonodromy:
    def test_three_sheets_cycle(self):
        spec = CoveringSpec(num_sheets=3)
        assert spec.monodromy(0) == 1
        assert spec.monodromy(2) == 0
        assert spec.monodromy(1, 3) == 1

    def test_loop_around_single_branch_point(self):
        # a small square loop around q+ crosses the cut exactly once
        corners = [(1 - 0.1, -0.1), (1 + 0.1, -0.1), (1 + 0.1, 0.1),
                   (1 - 0.1, 0.1), (1 - 0.1, -0.1)]
        crossings = 0
        for p, q in zip(corners[:-1], corners[1:]):
            if p[1] * q[1] < 0:
                sign = 1 if q[1] > p[1] else -1
                crossings += sign * crossing_parity(p, q)
        assert abs(crossings) == 1

    def test_loop_around_both_branch_points(self):
        corners = [(-2, -0.1), (2, -0.1), (2, 0.1), (-2, 0.1), (-2, -0.1)]
        total = 0
        for p, q in zip(corners[:-1], corners[1:]):
            if p[1] * q[1] < 0:
                sign = 1 if q[1] > p[1] else -1
                total += sign * crossing_parity(p, q)
        assert total % 2 == 0


class TestGrid:
    def test_accepts_quarter_spacing(self):
        g = build_grid(SPEC2, 8, 0.25)
        assert g.n_nodes == 2 * (2 * 32) ** 2
        assert np.abs(np.abs(g.xs) - 1.0).min() > 0.1

    def test_rejects_branch_point_spacing(self):
        with pytest.raises(BranchPointOnGrid):
            build_grid(SPEC2, 8, 2 / 7)

    def test_rejects_small_extent(self):
        with pytest.raises(ExtentTooSmall):
            build_grid(SPEC2, 3, 0.25)

    def test_adjacency_symmetric(self):
        g = build_grid(SPEC2, 4.5, 0.25)
        u, v, _ = g.edges()
        fwd = set(zip(u.tolist(), v.tolist()))
        assert all((b, a) not in fwd for a, b in fwd)  # each edge listed once
        assert len(fwd) == len(u)

    def test_cross_cut_edges_exact(self):
        g = build_grid(SPEC2, 4.5, 0.25)
        u, v, ax = g.edges()
        kk, xx, yy = g.node_coordinates()
        cross = kk[u] != kk[v]
        # cross edges are vertical, straddle y = 0 and sit inside |x| < 1
        assert np.all(ax[cross] == 1)
        assert np.all(np.abs(xx[u][cross]) < 1)
        assert np.all(yy[u][cross] * yy[v][cross] < 0)
        # and every straddling vertical edge inside the cut is a cross edge
        straddle = (ax == 1) & (yy[u] * yy[v] < 0) & (np.abs(xx[u]) < 1)
        assert np.array_equal(straddle, cross)

    def test_three_sheet_monodromy_audit(self):
        g = build_grid(CoveringSpec(num_sheets=3), 4.5, 0.25)
        u, v, ax = g.edges()
        kk, xx, yy = g.node_coordinates()
        cross = kk[u] != kk[v]
        ku, kv = kk[u][cross], kk[v][cross]
        up = yy[u][cross] < yy[v][cross]
        # upward crossings advance the sheet by +1 mod 3
        assert np.all((ku[up] + 1) % 3 == kv[up])
        assert np.all((kv[~up] + 1) % 3 == ku[~up])

    def test_disc_grid_layout(self):
        g = build_disc_grid(1 / 8)
        kk, xx, yy = g.node_coordinates()
        assert np.all(xx ** 2 + yy ** 2 < 1.0)
        u, v, _ = g.edges()
        cross = kk[u] != kk[v]
        assert np.all(xx[u][cross] < 0)

    def test_export_csv(self, tmp_path):
        g = build_grid(SPEC2, 4.5, 0.5)
        path = tmp_path / "adj.csv"
        g.export_adjacency_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "node_id,sheet,x,y,neighbor_ids"
        assert len(lines) == g.n_nodes + 1
