"""Band-limited scattering states and their exact free evolution.

A packet is a product psi1(x) psi2(y) of inverse Fourier transforms of
smooth compactly supported momentum profiles; the free Schrodinger
evolution then factorizes into two 1D oscillatory integrals which are
evaluated by Gauss-Legendre quadrature with order doubling.  The Fourier
convention is F[psi](xi) = (2 pi)^{-1/2} int psi(x) exp(-i x xi) dx, so the
free generator -d^2/dx^2 acts as the multiplier exp(-i t xi^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .cutoff import (SUPPORT_MARGIN, ConeCutoff, CutoffField,  # noqa: F401
                     build_cutoff)
from .errors import EmptySupport, GridMismatch, QuadratureNotConverged
from .geometry import BranchedGrid
from .quadrature import gl_nodes

__all__ = [
    "BandProfile", "bump_profile", "gaussian_profile", "position_values",
    "check_localization", "LocalizationResult", "sweep_localization",
    "PacketSpec", "packet_axes", "packet_values", "source_term_norm",
    "source_term_field", "WaveField", "lift_to_cover",
    "ConeCutoff", "CutoffField", "build_cutoff",
]


@dataclass(frozen=True)
class BandProfile:
    """Momentum profile with compact support [lo, hi] and unit L2 norm.

    ``fn`` evaluates the normalized profile at arbitrary momenta; the
    stored nodes, weights and values are a reference quadrature rule on
    the support used for norms and moments.
    """

    lo: float
    hi: float
    fn: Callable[[np.ndarray], np.ndarray]
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    def norm_sq(self) -> float:
        return float(np.dot(self.weights, self.values ** 2))

    def moment(self, power: int) -> float:
        """int xi^power |phi(xi)|^2 dxi on the reference rule."""
        return float(np.dot(self.weights, self.nodes ** power * self.values ** 2))


def _make_profile(raw: Callable[[np.ndarray], np.ndarray],
                  lo: float, hi: float) -> BandProfile:
    if not lo < hi:
        raise EmptySupport(f"momentum support [{lo}, {hi}] is empty")
    order = 64
    x, w = gl_nodes(lo, hi, order)
    prev = float(np.dot(w, raw(x) ** 2))
    while order <= 8192:
        order *= 2
        x, w = gl_nodes(lo, hi, order)
        cur = float(np.dot(w, raw(x) ** 2))
        if abs(cur - prev) <= 1e-12 * max(abs(cur), 1e-300):
            break
        prev = cur
    else:
        raise QuadratureNotConverged("profile normalization did not stabilize")
    c = 1.0 / math.sqrt(cur)

    def fn(xi, _raw=raw, _c=c, _lo=lo, _hi=hi):
        xi = np.asarray(xi, float)
        out = np.zeros_like(xi)
        inside = (xi > _lo) & (xi < _hi)
        out[inside] = _c * _raw(xi[inside])
        return out

    return BandProfile(lo=lo, hi=hi, fn=fn, nodes=x, weights=w, values=c * raw(x))


@lru_cache(maxsize=64)
def bump_profile(lo: float, hi: float) -> BandProfile:
    """Normalized bump c exp(-1/(1 - tau^2)) on (lo, hi), zero outside."""
    def raw(xi, _lo=lo, _hi=hi):
        tau = (2.0 * xi - _lo - _hi) / (_hi - _lo)
        g = 1.0 - tau * tau
        out = np.zeros_like(np.asarray(xi, float))
        ok = g > 0
        out[ok] = np.exp(-1.0 / g[ok])
        return out

    return _make_profile(raw, lo, hi)


@lru_cache(maxsize=16)
def gaussian_profile(halfwidth: float = 8.0) -> BandProfile:
    """Truncated unit-variance Gaussian, used as a dispersion oracle."""
    def raw(xi):
        return np.exp(-0.5 * np.asarray(xi, float) ** 2)

    return _make_profile(raw, -halfwidth, halfwidth)


def position_values(profile: BandProfile, shift_momentum: float,
                    shift_position: float, xs, t: float, *,
                    derivative: int = 0, tol: float = 1e-9) -> np.ndarray:
    """Evolved position-space values of the profile at time t.

    Computes (2 pi)^{-1/2} int phi(xi - mu) (i xi)^d
    exp(i (x - x0) xi - i t xi^2) d xi over the shifted compact support.
    The Gauss-Legendre order doubles until two refinements agree to ``tol``
    relative in L2 over the requested points.
    """
    xs = np.atleast_1d(np.asarray(xs, float))
    lo = profile.lo + shift_momentum
    hi = profile.hi + shift_momentum
    xr = xs - shift_position

    xmax = float(np.max(np.abs(xr))) if xs.size else 0.0
    ximax = max(abs(lo), abs(hi))
    phase_range = (hi - lo) * (xmax + 2.0 * abs(t) * ximax)
    order = 1 << int(math.ceil(math.log2(max(phase_range / 3.0, 32.0))))
    prev = None
    while order <= (1 << 22):
        vals = _osc_eval(profile, shift_momentum, lo, hi, xr, t, derivative, order)
        if prev is not None:
            num = float(np.linalg.norm(vals - prev))
            den = float(np.linalg.norm(vals))
            if num <= tol * max(den, 1e-300) or num <= 1e-13 * math.sqrt(xs.size):
                return vals
        prev = vals
        order *= 2
    raise QuadratureNotConverged(
        f"position values did not converge (order {order}, t={t})")


def _osc_eval(profile, mu, lo, hi, xr, t, derivative, order):
    xi, w = gl_nodes(lo, hi, order)
    amp = (profile.fn(xi - mu) * w).astype(complex)
    if derivative:
        amp = amp * (1j * xi) ** derivative
    amp = amp * np.exp(-1j * t * xi * xi)
    out = np.empty(xr.size, dtype=complex)
    chunk = max(1, (1 << 22) // order)
    for i in range(0, xr.size, chunk):
        blk = xr[i:i + chunk]
        out[i:i + chunk] = np.exp(1j * np.outer(blk, xi)) @ amp
    return out / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# localization of psi1 near the origin
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalizationResult:
    a: float
    eps_prime: float
    mass: float          # int_{-1/4}^{1/4} |psi1|^2
    norm: float          # sqrt(mass)
    passed: bool


def check_localization(a: float, eps_prime: float, *,
                       window: tuple[float, float] = (-0.25, 0.25)
                       ) -> LocalizationResult:
    """Mass of psi1 = F^{-1} bump(-a, a) on the window, against 1 - eps'."""
    profile = bump_profile(-a, a)
    lo, hi = window

    def density(x):
        return np.abs(position_values(profile, 0.0, 0.0, x, 0.0)) ** 2

    order = 64
    x, w = gl_nodes(lo, hi, order)
    prev = float(np.dot(w, density(x)))
    while order <= 4096:
        order *= 2
        x, w = gl_nodes(lo, hi, order)
        cur = float(np.dot(w, density(x)))
        if abs(cur - prev) <= 1e-11 * max(cur, 1e-300):
            break
        prev = cur
    mass = min(cur, 1.0)
    norm = math.sqrt(mass)
    return LocalizationResult(a=a, eps_prime=eps_prime, mass=mass,
                              norm=norm, passed=norm > 1.0 - eps_prime)


def sweep_localization(eps_prime: float,
                       candidates=(4.0, 8.0, 16.0, 32.0)) -> list[LocalizationResult]:
    """Localization check over a doubling sweep of bandwidths."""
    return [check_localization(a, eps_prime) for a in candidates]


# ---------------------------------------------------------------------------
# packets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PacketSpec:
    """Parameters of the product packet psi1(x - k) psi2(y).

    psi1 comes from the bump on (-a, a); psi2 carries momentum support
    [s, s + 1] and moves upward at group speed about 2s.  ``eps`` is the
    target accuracy of the transmission construction and fixes
    eps' = eps / 5.
    """

    a: float
    s: float
    k: float = 0.0
    eps: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if self.a <= 0 or self.s < 0:
            raise ValueError("need a > 0 and s >= 0")

    @property
    def eps_prime(self) -> float:
        return self.eps / 5.0

    @property
    def momentum_support(self) -> tuple[float, float]:
        return (self.s, self.s + 1.0)

    def profile1(self) -> BandProfile:
        return bump_profile(-self.a, self.a)

    def profile2(self) -> BandProfile:
        return bump_profile(0.0, 1.0)


def packet_axes(spec: PacketSpec, xs, ys, t: float, *,
                dx: int = 0, dy: int = 0,
                tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """1D factors (Psi1 on xs, Psi2 on ys) of the evolved packet at time t."""
    p1 = position_values(spec.profile1(), 0.0, spec.k, xs, t,
                         derivative=dx, tol=tol)
    p2 = position_values(spec.profile2(), spec.s, 0.0, ys, t,
                         derivative=dy, tol=tol)
    return p1, p2


def packet_values(spec: PacketSpec, xs, ys, t: float, *,
                  tol: float = 1e-9) -> np.ndarray:
    """Evolved packet on the tensor grid, out[j, i] at (xs[i], ys[j])."""
    p1, p2 = packet_axes(spec, xs, ys, t, tol=tol)
    return np.outer(p2, p1)


# ---------------------------------------------------------------------------
# localization source term f = -2i grad(chi) . grad(u) - i u lap(chi)
# ---------------------------------------------------------------------------

def _band_axis(center: float, s: float, a: float, t: float,
               ymax_pad: float = 22.0):
    """y-range that can carry packet mass at time t."""
    y_lo = min(0.0, 2.0 * s * t) - (ymax_pad + 2.0 * abs(t))
    y_hi = max(0.0, 2.0 * (s + 1.0) * t) + (ymax_pad + 2.0 * abs(t))
    return y_lo, y_hi


def _panel_axis(lo: float, hi: float, per_unit: float, order: int = 8):
    n = max(2, int(math.ceil((hi - lo) * per_unit)))
    edges = np.linspace(lo, hi, n + 1)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gl_nodes(a, b, order)
        xs.append(x); ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def source_term_norm(spec: PacketSpec, t: float,
                     evaluator: ConeCutoff | None = None, *,
                     tol: float = 1e-8) -> float:
    """L2 norm of the localization source at time t by band quadrature.

    The integrand lives on the transition bands of the cutoff, the strips
    of halfwidth sqrt(2)/4 around |x - cx| = 1/2 + |y|, weighted by the
    packet tails that reach them.  The y-axis is swept in panel blocks and
    only the x-window that the band occupies at that height is assembled,
    which keeps the 2D work proportional to the band area.
    """
    ev = evaluator or ConeCutoff(spec.k)
    cx = ev.center_x
    y_lo, y_hi = _band_axis(cx, spec.s, spec.a, t)
    ys, wy = _panel_axis(y_lo, y_hi, per_unit=max(1.2, 0.45 * (spec.s + 1.0)))
    ymax = max(abs(y_lo), abs(y_hi))
    band_in = 0.5 - SUPPORT_MARGIN - 0.02
    band_out = 0.5 + SUPPORT_MARGIN + 0.02
    # master x-axis over the widest possible band, both sides of the axis
    xs_r, wx_r = _panel_axis(cx + band_in, cx + band_out + ymax,
                             per_unit=max(1.2, 0.45 * spec.a))
    xs_l, wx_l = _panel_axis(cx - band_out - ymax, cx - band_in,
                             per_unit=max(1.2, 0.45 * spec.a))

    # evaluate 1D factors once on the master axes
    xs = np.concatenate([xs_l, xs_r])
    wx = np.concatenate([wx_l, wx_r])
    p1, d1 = (position_values(spec.profile1(), 0.0, spec.k, xs, t, tol=tol),
              position_values(spec.profile1(), 0.0, spec.k, xs, t,
                              derivative=1, tol=tol))
    p2 = position_values(spec.profile2(), spec.s, 0.0, ys, t, tol=tol)
    d2 = position_values(spec.profile2(), spec.s, 0.0, ys, t,
                         derivative=1, tol=tol)

    amp2 = np.abs(p2) + np.abs(d2)
    row_keep = amp2 > 1e-13 * max(float(amp2.max()), 1e-300)
    rel = np.abs(xs - cx)
    total = 0.0
    block = 64
    for i0 in range(0, ys.size, block):
        sl = slice(i0, i0 + block)
        if not row_keep[sl].any():
            continue
        yb = ys[sl]
        ay_lo, ay_hi = float(np.abs(yb).min()), float(np.abs(yb).max())
        cols = (rel >= band_in + ay_lo) & (rel <= band_out + ay_hi)
        if not cols.any():
            continue
        X, Y = np.meshgrid(xs[cols], yb)
        _, gx, gy, lap = ev.fields(X, Y)
        f = (2.0 * (gx * np.outer(p2[sl], d1[cols])
                    + gy * np.outer(d2[sl], p1[cols]))
             + lap * np.outer(p2[sl], p1[cols]))
        total += float(np.dot(wy[sl], np.abs(f) ** 2 @ wx[cols]))
    return math.sqrt(total)


def source_term_field(spec: PacketSpec, cutoff: CutoffField, t: float, *,
                      tol: float = 1e-9) -> tuple[np.ndarray, float]:
    """Source values on the cutoff's own grid plus the quadrature L2 norm."""
    p1, p2 = packet_axes(spec, cutoff.xs, cutoff.ys, t, tol=tol)
    d1, d2 = packet_axes(spec, cutoff.xs, cutoff.ys, t, dx=1, dy=1, tol=tol)
    f = -1j * (2.0 * (cutoff.chi_x * np.outer(p2, d1)
                      + cutoff.chi_y * np.outer(d2, p1))
               + cutoff.lap_chi * np.outer(p2, p1))
    return f, source_term_norm(spec, t, cutoff.evaluator, tol=max(tol, 1e-8))


# ---------------------------------------------------------------------------
# states on the covering
# ---------------------------------------------------------------------------

class WaveField:
    """Complex state on a branched grid with the h^2-weighted L2 norm."""

    def __init__(self, grid: BranchedGrid, values: np.ndarray):
        values = np.asarray(values)
        if values.shape != (grid.n_nodes,):
            raise GridMismatch(
                f"expected {grid.n_nodes} node values, got {values.shape}")
        self.grid = grid
        self.values = values.astype(complex, copy=False)
        self._norm_sq = self._compute_norm_sq()

    def _compute_norm_sq(self) -> float:
        v = self.values
        return float(self.grid.cell_measure
                     * np.dot(v.real, v.real) + self.grid.cell_measure
                     * np.dot(v.imag, v.imag))

    @property
    def norm_sq(self) -> float:
        return self._norm_sq

    def norm(self) -> float:
        return math.sqrt(self._norm_sq)

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.values.copy())

    def sheet_masses(self) -> np.ndarray:
        """h^2-weighted squared mass per sheet."""
        g = self.grid
        kk, _, _ = g.node_coordinates()
        m = np.zeros(g.num_sheets)
        np.add.at(m, kk, g.cell_measure * np.abs(self.values) ** 2)
        return m

    def as_sheet_arrays(self) -> np.ndarray:
        """Dense (num_sheets, ny, nx) view with zeros at absent nodes."""
        g = self.grid
        out = np.zeros(g.shape, dtype=complex)
        out[g.mask] = self.values
        return out

    @classmethod
    def from_sheet_arrays(cls, grid: BranchedGrid, arrays: np.ndarray) -> "WaveField":
        if arrays.shape != grid.shape:
            raise GridMismatch(f"expected shape {grid.shape}, got {arrays.shape}")
        return cls(grid, np.asarray(arrays)[grid.mask])


def export_field_csv(path, xs, ys, values) -> None:
    """Write a planar complex field as CSV rows (x, y, re, im)."""
    values = np.asarray(values)
    with open(path, "w") as fh:
        fh.write("x,y,re,im\n")
        for j, y in enumerate(np.asarray(ys, float)):
            for i, x in enumerate(np.asarray(xs, float)):
                v = complex(values[j, i])
                fh.write(f"{float(x)!r},{float(y)!r},{v.real!r},{v.imag!r}\n")


def lift_to_cover(v_planar: np.ndarray, grid: BranchedGrid, *,
                  launch_sheet: int = 0, mode: str = "cross") -> WaveField:
    """Lift a planar field onto the covering.

    mode "cross": values at y < 0 go to the launch sheet, values at y > 0
    to the sheet one upward crossing later, matching a packet that passes
    through the cut.  mode "embed": the whole field goes to the launch
    sheet (used when the support avoids the cut).  Node values are copied,
    so the norm is preserved exactly.
    """
    if not grid.full:
        raise GridMismatch("lifting requires a full box grid")
    v = np.asarray(v_planar)
    if v.shape != (grid.ny, grid.nx):
        raise GridMismatch(
            f"planar field shape {v.shape} does not match grid {(grid.ny, grid.nx)}")
    arrays = np.zeros(grid.shape, dtype=complex)
    if mode == "embed":
        arrays[launch_sheet] = v
    elif mode == "cross":
        below = grid.ys < 0
        upper = grid.sheet_after_up(launch_sheet)
        arrays[launch_sheet, below, :] = v[below, :]
        arrays[upper, ~below, :] = v[~below, :]
    else:
        raise ValueError(f"unknown lift mode {mode!r}")
    return WaveField.from_sheet_arrays(grid, arrays)
