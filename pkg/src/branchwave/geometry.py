"""Branched coverings of the Euclidean plane.

The covering is built by glueing ``n`` copies of the plane crosswise along
the straight cut between the branch points q- = (-1, 0) and q+ = (+1, 0):
crossing the open cut upward advances the sheet index by +1 mod n, crossing
downward undoes it.  The branch points themselves do not belong to the
surface.  This module provides sheet-indexed points, the geodesic distance
(straight segment or two legs through a branch point), and the staggered
finite-difference grid whose vertical edges across the cut swap sheets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BranchPointOnGrid,
    EndpointOnCut,
    ExtentTooSmall,
    GridMismatch,
    SegmentThroughBranchPoint,
)

Q_MINUS = (-1.0, 0.0)
Q_PLUS = (1.0, 0.0)

# y-nudge applied when a query segment grazes a branch point; the distance
# is an infimum over paths, so a measure-zero perturbation is admissible.
NUDGE = 1e-9

# points exactly on the open cut take the limit from below (y -> 0-)
_CUT_EPS = 1e-12


@dataclass(frozen=True)
class CoveringSpec:
    """Parameters of the n-sheeted covering branched over q- and q+."""

    num_sheets: int = 2

    def __post_init__(self):
        if self.num_sheets < 2:
            raise ValueError("a covering needs at least two sheets")

    @property
    def branch_minus(self) -> tuple[float, float]:
        return Q_MINUS

    @property
    def branch_plus(self) -> tuple[float, float]:
        return Q_PLUS

    @property
    def cut(self) -> tuple[float, float]:
        """x-range of the closed cut segment on y = 0."""
        return (-1.0, 1.0)

    def monodromy(self, sheet: int, upward_crossings: int = 1) -> int:
        """Sheet reached after the given number of upward cut crossings."""
        return (sheet + upward_crossings) % self.num_sheets


def _is_branch_point(x: float, y: float) -> bool:
    return y == 0.0 and (x == -1.0 or x == 1.0)


@dataclass(frozen=True)
class SheetPoint:
    """A point of the covering: planar coordinates plus sheet index.

    Points with y = 0 strictly between the branch points are canonically
    interpreted as limits from below (they belong to the sheet one reaches
    coming up from y < 0 on ``sheet``).
    """

    x: float
    y: float
    sheet: int = 0

    def __post_init__(self):
        if _is_branch_point(self.x, self.y):
            raise ValueError("branch points do not belong to the covering")
        if self.sheet < 0:
            raise ValueError("sheet index must be nonnegative")

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)

    def effective_y(self) -> float:
        """y-coordinate with the on-cut convention (limit from below) applied."""
        if self.y == 0.0 and -1.0 < self.x < 1.0:
            return -_CUT_EPS
        return self.y


def crossing_parity(p1_xy: tuple[float, float], p2_xy: tuple[float, float]) -> int:
    """Number of transversal crossings of the open cut by the segment p1->p2.

    Raises SegmentThroughBranchPoint if the segment hits (+-1, 0) and
    EndpointOnCut if an endpoint lies on the open cut.
    """
    x1, y1 = p1_xy
    x2, y2 = p2_xy
    for x, y in ((x1, y1), (x2, y2)):
        if y == 0.0:
            if -1.0 < x < 1.0:
                raise EndpointOnCut(f"endpoint ({x}, {y}) lies on the open cut")
            if _is_branch_point(x, y):
                raise SegmentThroughBranchPoint(
                    f"endpoint ({x}, {y}) is a branch point")
    if y1 == 0.0 and y2 == 0.0:
        # collinear with the cut line; both endpoints are outside [-1, 1]
        if x1 * x2 < 0:
            raise SegmentThroughBranchPoint(
                "segment runs along the cut through both branch points")
        return 0
    if y1 * y2 >= 0.0:
        # touches y = 0 at most at an endpoint, which sits outside the cut
        return 0
    t = y1 / (y1 - y2)
    x_cross = x1 + t * (x2 - x1)
    if abs(abs(x_cross) - 1.0) < 1e-14:
        raise SegmentThroughBranchPoint(
            f"segment passes through branch point near ({x_cross}, 0)")
    return 1 if -1.0 < x_cross < 1.0 else 0


def _parity_with_nudge(p1: SheetPoint, p2: SheetPoint) -> int:
    y1, y2 = p1.effective_y(), p2.effective_y()
    try:
        return crossing_parity((p1.x, y1), (p2.x, y2))
    except SegmentThroughBranchPoint:
        return crossing_parity((p1.x, y1 + NUDGE), (p2.x, y2 + NUDGE))


def distance_to_branch_points(p: SheetPoint) -> tuple[float, float]:
    """Planar distances (|p - q-|, |p - q+|); sheet independent."""
    dm = math.hypot(p.x - Q_MINUS[0], p.y - Q_MINUS[1])
    dp = math.hypot(p.x - Q_PLUS[0], p.y - Q_PLUS[1])
    return dm, dp


def geodesic_distance_detailed(p1: SheetPoint, p2: SheetPoint,
                               spec: CoveringSpec) -> tuple[float, str, bool]:
    """Distance plus the winning route and a flag for two-leg wins.

    Candidates are the straight segment (when its crossing parity maps
    sheet(p1) to sheet(p2) under the monodromy) and the two-leg paths
    through either branch point, which join every pair of sheets because
    all sheets meet at the cone points.  Any path through several cone
    points is dominated by a two-leg one via the planar triangle
    inequality, so the candidate set is exhaustive for every n.
    The returned flag marks pairs where a two-leg path beats a valid
    direct segment.
    """
    n = spec.num_sheets
    if p1.sheet >= n or p2.sheet >= n:
        raise ValueError("sheet index exceeds num_sheets")
    if p1.x == p2.x and p1.y == p2.y and p1.sheet == p2.sheet:
        return 0.0, "direct", False

    d1m, d1p = distance_to_branch_points(p1)
    d2m, d2p = distance_to_branch_points(p2)
    best = min(d1m + d2m, d1p + d2p)
    route = "via_q-" if d1m + d2m <= d1p + d2p else "via_q+"

    direct_len = math.hypot(p2.x - p1.x, p2.y - p1.y)
    direct_valid = False
    if direct_len > 0.0:
        parity = _parity_with_nudge(p1, p2)
        upward = parity if p1.effective_y() < p2.effective_y() else -parity
        direct_valid = spec.monodromy(p1.sheet, upward) == p2.sheet
    if direct_valid and direct_len < best:
        return direct_len, "direct", False
    return best, route, direct_valid


def geodesic_distance(p1: SheetPoint, p2: SheetPoint,
                      spec: CoveringSpec | None = None) -> float:
    """Geodesic distance on the covering (straight or through a cone point)."""
    dist, _, _ = geodesic_distance_detailed(p1, p2, spec or CoveringSpec())
    return dist


def batch_geodesic_distance(x1, y1, s1, x2, y2, s2,
                            spec: CoveringSpec | None = None) -> np.ndarray:
    """Vectorized candidate-enumeration distance for arrays of point pairs.

    Applies the same crossing convention as the scalar routine: points on
    the open cut count as limits from below, and segments grazing a branch
    point are nudged upward in y.
    """
    spec = spec or CoveringSpec()
    n = spec.num_sheets
    x1 = np.asarray(x1, float); y1 = np.asarray(y1, float)
    x2 = np.asarray(x2, float); y2 = np.asarray(y2, float)
    s1 = np.asarray(s1, int); s2 = np.asarray(s2, int)

    y1e = np.where((y1 == 0.0) & (np.abs(x1) < 1.0), -_CUT_EPS, y1)
    y2e = np.where((y2 == 0.0) & (np.abs(x2) < 1.0), -_CUT_EPS, y2)

    two_leg = np.minimum(np.hypot(x1 + 1.0, y1) + np.hypot(x2 + 1.0, y2),
                         np.hypot(x1 - 1.0, y1) + np.hypot(x2 - 1.0, y2))

    def parity(ya, yb):
        cross = ya * yb < 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(cross, ya / (ya - yb), 0.0)
        xc = x1 + t * (x2 - x1)
        grazing = cross & (np.abs(np.abs(xc) - 1.0) < 1e-14)
        par = np.where(cross & (np.abs(xc) < 1.0), 1, 0)
        return par, grazing

    par, grazing = parity(y1e, y2e)
    if grazing.any():
        par_n, _ = parity(y1e + NUDGE, y2e + NUDGE)
        par = np.where(grazing, par_n, par)
    upward = np.where(y1e < y2e, par, -par)
    length = np.hypot(x2 - x1, y2 - y1)
    direct_ok = (length > 0.0) & ((s1 + upward) % n == s2)
    same = (length == 0.0) & (s1 == s2)
    dist = np.where(direct_ok, np.minimum(length, two_leg), two_leg)
    return np.where(same, 0.0, dist)


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass
class BranchedGrid:
    """Staggered finite-difference grid on an n-sheeted covering.

    Nodes sit at ((i + 1/2) h, (j + 1/2) h) per sheet so that no node or
    vertical edge touches a branch point and no node lies on the cut line.
    Vertical edges crossing y = 0 with node x inside ``cut_x`` connect
    sheet k below to sheet (k + 1) mod n above.  Missing lattice neighbours
    act as homogeneous Dirichlet walls.  ``mask`` marks present nodes;
    box grids have all nodes present, disc grids only those inside the
    radius.
    """

    num_sheets: int
    h: float
    xs: np.ndarray                 # node x-coordinates, shape (nx,)
    ys: np.ndarray                 # node y-coordinates, shape (ny,)
    cut_x: tuple[float, float]     # open x-interval of sheet-swapping edges
    mask: np.ndarray               # present nodes, bool (num_sheets, ny, nx)
    periodic: bool = False
    decoupled: bool = False        # test plumbing: cut edges do not swap
    kind: str = "box"

    node_id: np.ndarray = field(init=False)   # int32 (num_sheets, ny, nx), -1 absent
    n_nodes: int = field(init=False)

    def __post_init__(self):
        ids = -np.ones(self.mask.shape, dtype=np.int64)
        ids[self.mask] = np.arange(int(self.mask.sum()))
        self.node_id = ids
        self.n_nodes = int(self.mask.sum())

    # -- basic layout helpers ------------------------------------------------

    @property
    def nx(self) -> int:
        return self.xs.size

    @property
    def ny(self) -> int:
        return self.ys.size

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.num_sheets, self.ny, self.nx)

    @property
    def full(self) -> bool:
        return bool(self.mask.all())

    @property
    def cell_measure(self) -> float:
        return self.h * self.h

    def j_below_cut(self) -> int:
        """Row index of the last node row with y < 0."""
        return int(np.searchsorted(self.ys, 0.0)) - 1

    def cut_columns(self) -> np.ndarray:
        """Boolean column mask: vertical edges here cross the cut."""
        lo, hi = self.cut_x
        return (self.xs > lo) & (self.xs < hi)

    def sheet_after_up(self, sheet: int) -> int:
        if self.decoupled:
            return sheet
        return (sheet + 1) % self.num_sheets

    def node_coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-node (sheet, x, y) arrays in node-id order."""
        kk, jj, ii = np.nonzero(self.mask)
        return kk.astype(np.int32), self.xs[ii], self.ys[jj]

    def boundary_margin_mask(self, fraction: float = 0.05) -> np.ndarray:
        """Nodes within the outer ``fraction`` margin of the domain (per node id)."""
        kk, xx, yy = self.node_coordinates()
        if self.kind == "disc":
            r = np.hypot(xx, yy)
            return r > (1.0 - fraction) * r.max()
        lx = self.xs.max()
        ly = self.ys.max()
        return ((np.abs(xx) > (1.0 - fraction) * lx)
                | (np.abs(yy) > (1.0 - fraction) * ly))

    # -- adjacency -----------------------------------------------------------

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All undirected edges as (u, v, axis) with axis 0 = x, 1 = y.

        Cross-cut edges are listed with u below the cut; each edge appears
        exactly once.  Periodic grids include the wrap-around edges.
        """
        n, ny, nx = self.shape
        ids = self.node_id
        out_u, out_v, out_ax = [], [], []

        # x-direction, same sheet
        u = ids[:, :, :-1]
        v = ids[:, :, 1:]
        keep = (u >= 0) & (v >= 0)
        out_u.append(u[keep]); out_v.append(v[keep])
        out_ax.append(np.zeros(int(keep.sum()), dtype=np.int8))
        if self.periodic:
            u = ids[:, :, -1]
            v = ids[:, :, 0]
            keep = (u >= 0) & (v >= 0)
            out_u.append(u[keep]); out_v.append(v[keep])
            out_ax.append(np.zeros(int(keep.sum()), dtype=np.int8))

        # y-direction: same sheet except across the cut row inside cut_x
        jb = self.j_below_cut()
        cut_cols = self.cut_columns() & ~np.bool_(self.decoupled)
        for k in range(n):
            for j in range(ny - 1):
                u_row = ids[k, j, :]
                if j == jb and 0 <= jb < ny - 1:
                    k_up_swap = self.sheet_after_up(k)
                    v_row = np.where(cut_cols, ids[k_up_swap, j + 1, :],
                                     ids[k, j + 1, :])
                else:
                    v_row = ids[k, j + 1, :]
                keep = (u_row >= 0) & (v_row >= 0)
                m = int(keep.sum())
                if m:
                    out_u.append(u_row[keep]); out_v.append(v_row[keep])
                    out_ax.append(np.ones(m, dtype=np.int8))
            if self.periodic:
                u_row = ids[k, ny - 1, :]
                v_row = ids[k, 0, :]
                keep = (u_row >= 0) & (v_row >= 0)
                m = int(keep.sum())
                if m:
                    out_u.append(u_row[keep]); out_v.append(v_row[keep])
                    out_ax.append(np.ones(m, dtype=np.int8))

        return (np.concatenate(out_u), np.concatenate(out_v),
                np.concatenate(out_ax))

    def export_adjacency_csv(self, path) -> None:
        """Debug export: node_id, sheet, x, y, neighbor ids (semicolon list)."""
        u, v, _ = self.edges()
        nbrs: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for a, b in zip(u.tolist(), v.tolist()):
            nbrs[a].append(b)
            nbrs[b].append(a)
        kk, xx, yy = self.node_coordinates()
        with open(path, "w") as fh:
            fh.write("node_id,sheet,x,y,neighbor_ids\n")
            for nid in range(self.n_nodes):
                ns = ";".join(str(m) for m in sorted(nbrs[nid]))
                fh.write(f"{nid},{kk[nid]},{xx[nid]!r},{yy[nid]!r},{ns}\n")


def _staggered_axis(half_extent: float, h: float) -> np.ndarray:
    m = math.ceil(half_extent / h)
    i = np.arange(-m, m)
    return (i + 0.5) * h


def build_grid(spec: CoveringSpec, L: float, h: float, *,
               periodic: bool = False, decoupled: bool = False) -> BranchedGrid:
    """Box grid of half-extent L covering both branch points.

    Rejects spacings for which some node x-coordinate (hence some vertical
    edge) falls on a branch point, and extents too small to contain the
    discs B_2(q+-).
    """
    if h <= 0:
        raise ValueError("spacing must be positive")
    if L <= 4:
        raise ExtentTooSmall(f"half extent L = {L} must exceed 4")
    xs = _staggered_axis(L, h)
    ys = _staggered_axis(L, h)
    gap = np.abs(np.abs(xs) - 1.0).min()
    if gap < 1e-9:
        raise BranchPointOnGrid(
            f"spacing h = {h} puts a node column at x = +-1 (gap {gap:.2e})")
    mask = np.ones((spec.num_sheets, ys.size, xs.size), dtype=bool)
    return BranchedGrid(num_sheets=spec.num_sheets, h=h, xs=xs, ys=ys,
                        cut_x=(-1.0, 1.0), mask=mask, periodic=periodic,
                        decoupled=decoupled, kind="box")


def build_disc_grid(h: float, *, radius: float = 1.0,
                    num_sheets: int = 2) -> BranchedGrid:
    """Two-sheeted disc with a single branch point at the origin.

    The cut runs along {x < 0, y = 0}; Dirichlet conditions at |p| = radius
    come from the missing-neighbour ghost rule.  Shares the cut-crossing
    adjacency code path with the two-branch-point box grid.
    """
    if h <= 0:
        raise ValueError("spacing must be positive")
    xs = _staggered_axis(radius, h)
    ys = _staggered_axis(radius, h)
    X, Y = np.meshgrid(xs, ys)
    inside = (X * X + Y * Y) < radius * radius
    mask = np.broadcast_to(inside, (num_sheets, ys.size, xs.size)).copy()
    return BranchedGrid(num_sheets=num_sheets, h=h, xs=xs, ys=ys,
                        cut_x=(-math.inf, 0.0), mask=mask, kind="disc")
