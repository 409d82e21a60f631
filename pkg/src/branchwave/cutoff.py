"""Mollified cutoff for the double cone {|x - cx| < 1/2 + |y|}.

chi is the convolution of the radius-1/4 Friedrichs mollifier with the cone
indicator.  The complement of the cone is a pair of 45-degree wedges with
apexes at (cx - 1/2, 0) and (cx + 1/2, 0), at distance one from each other,
so the mollifier ball never meets both.  Away from an apex the wedge looks
like a half plane and the convolution reduces to a precomputed 1D profile
of the signed distance; near an apex a 2D panel quadrature over the exact
wedge-ball intersection takes over.  Gradients and Laplacian come from the
same construction (derivatives of the 1D profile, respectively convolution
with the mollifier derivatives), so they are consistent with chi to
quadrature accuracy rather than to finite-difference accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .quadrature import gl_nodes

MOLLIFIER_RADIUS = 0.25
SQRT2 = math.sqrt(2.0)

# true support margin of the mollified cone along the wedge bisector
SUPPORT_MARGIN = MOLLIFIER_RADIUS * SQRT2


def _bump_radial(r: np.ndarray, radius: float) -> np.ndarray:
    """Unnormalized mollifier kernel exp(-1/(1 - (r/radius)^2)) inside the ball."""
    out = np.zeros_like(r)
    inside = r < radius
    u = r[inside] / radius
    out[inside] = np.exp(-1.0 / (1.0 - u * u))
    return out


class _Mollifier:
    """Radial Friedrichs kernel of unit mass with analytic derivatives."""

    def __init__(self, radius: float = MOLLIFIER_RADIUS):
        self.radius = radius
        # mass = 2 pi int_0^R k(r) r dr, with k the unnormalized kernel
        r, w = gl_nodes(0.0, radius, 200)
        self.norm = 1.0 / (2.0 * math.pi * np.dot(w, _bump_radial(r, radius) * r))

    def value(self, r: np.ndarray) -> np.ndarray:
        return self.norm * _bump_radial(np.asarray(r, float), self.radius)

    def dvalue(self, r: np.ndarray) -> np.ndarray:
        """d/dr of the kernel (zero outside the ball)."""
        r = np.asarray(r, float)
        out = np.zeros_like(r)
        inside = r < self.radius
        u = r[inside] / self.radius
        g = 1.0 - u * u
        out[inside] = (self.norm * np.exp(-1.0 / g)
                       * (-2.0 * u / (g * g)) / self.radius)
        return out

    def laplacian(self, r: np.ndarray) -> np.ndarray:
        """Radial Laplacian k'' + k'/r."""
        r = np.asarray(r, float)
        out = np.zeros_like(r)
        inside = r < self.radius
        u = r[inside] / self.radius
        g = 1.0 - u * u
        e = np.exp(-1.0 / g)
        # with p = -2u/g^2: k' = e p / R, k'' = e (p^2 + dp/du) / R^2
        p = -2.0 * u / (g * g)
        dp = (-2.0 * g - 8.0 * u * u) / (g ** 3)
        kpp = e * (p * p + dp) / self.radius ** 2
        kp = e * p / self.radius
        with np.errstate(divide="ignore", invalid="ignore"):
            lap = kpp + np.where(r[inside] > 0, kp / r[inside], 0.0)
        # at r = 0 the angular term equals k'' by smoothness
        lap = np.where(r[inside] == 0.0, 2.0 * kpp, lap)
        out[inside] = self.norm * lap
        return out


@dataclass
class _HalfPlaneProfile:
    """Mass of the mollifier ball on one side of a line at signed distance d."""

    chord: CubicSpline      # c(d): line integral of the kernel at offset d
    mass: CubicSpline       # G(d) = int_{-R}^{d} c
    dchord: CubicSpline

    @classmethod
    def build(cls, mol: _Mollifier, n: int = 8193) -> "_HalfPlaneProfile":
        R = mol.radius
        d = np.linspace(-R, R, n)
        c = np.empty_like(d)
        for i, w in enumerate(d):
            half = math.sqrt(max(R * R - w * w, 0.0))
            if half == 0.0:
                c[i] = 0.0
                continue
            v, wt = gl_nodes(-half, half, 64)
            c[i] = np.dot(wt, mol.value(np.hypot(w, v)))
        chord = CubicSpline(d, c, bc_type="natural")
        return cls(chord=chord, mass=chord.antiderivative(), dchord=chord.derivative())


_MOL: _Mollifier | None = None
_PROFILE: _HalfPlaneProfile | None = None


def _tables() -> tuple[_Mollifier, _HalfPlaneProfile]:
    global _MOL, _PROFILE
    if _MOL is None:
        _MOL = _Mollifier()
        _PROFILE = _HalfPlaneProfile.build(_MOL)
    return _MOL, _PROFILE


def _wedge_integrals(mol: _Mollifier, d1: float, d2: float):
    """Convolutions of (k, kx, ky, lap k) with the wedge at offsets (d1, d2).

    The wedge in local coordinates (bisector along +x) is
    {q : (qx - qy)/sqrt2 >= -d1, (qx + qy)/sqrt2 >= -d2}; the integral runs
    over its intersection with the mollifier ball around the origin.
    The v-axis is split at the line crossing and at the points where either
    wedge edge is tangent to a chord of the ball, so every panel integrand
    is smooth.  Returns the four integrals in local coordinates.
    """
    R = mol.radius
    breaks = {-R, R, (d1 - d2) / SQRT2}
    for d, sgn in ((d1, 1.0), (d2, -1.0)):
        root = math.sqrt(max(R * R - d * d, 0.0))
        breaks.add(sgn * (d + root) / SQRT2)
        breaks.add(sgn * (d - root) / SQRT2)
    vb = sorted(min(max(b, -R), R) for b in breaks)
    vals = np.zeros(4)
    for lo, hi in zip(vb[:-1], vb[1:]):
        if hi - lo < 1e-15:
            continue
        v, wv = gl_nodes(lo, hi, 32)
        half = np.sqrt(np.maximum(R * R - v * v, 0.0))
        left = np.maximum(np.maximum(v - SQRT2 * d1, -v - SQRT2 * d2), -half)
        ok = left < half
        if not ok.any():
            continue
        v, wv, half, left = v[ok], wv[ok], half[ok], left[ok]
        # 32-point rule per qx-interval, all rows at once
        t, wt = gl_nodes(0.0, 1.0, 32)
        qx = left[:, None] + (half - left)[:, None] * t[None, :]
        ww = wv[:, None] * (half - left)[:, None] * wt[None, :]
        r = np.hypot(qx, v[:, None])
        k = mol.value(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            kd = np.where(r > 0, mol.dvalue(r) / r, 0.0)
        vals[0] += float(np.sum(ww * k))
        vals[1] += float(np.sum(ww * kd * qx))          # int kx
        vals[2] += float(np.sum(ww * kd * v[:, None]))  # int ky
        vals[3] += float(np.sum(ww * mol.laplacian(r)))
    return vals


class ConeCutoff:
    """Evaluator for chi = mollifier * cone indicator and its derivatives.

    The cone may be translated along x (``center_x``), which is how the
    shifted experiments that avoid the cut are built.
    """

    def __init__(self, center_x: float = 0.0):
        self.center_x = center_x
        self.mol, self.profile = _tables()

    # wedge orientation: sign = +1 for the right wedge, -1 for the left one
    def _wedge_fields(self, x, y, sign):
        mol, prof = self.mol, self.profile
        R = mol.radius
        ax = self.center_x + sign * 0.5
        u = sign * (np.asarray(x, float) - ax)   # bisector coordinate
        v = np.asarray(y, float)
        d1 = (u - v) / SQRT2
        d2 = (u + v) / SQRT2

        W = np.zeros_like(u)
        Wx = np.zeros_like(u)
        Wy = np.zeros_like(u)
        Wl = np.zeros_like(u)

        dmin = np.minimum(d1, d2)
        inside = dmin >= R
        W[inside] = 1.0
        out = dmin <= -R

        # half-plane regimes: the other line stays clear of the ball
        hp1 = (~inside) & (~out) & (np.abs(d1) < R) & (d2 >= R)
        hp2 = (~inside) & (~out) & (np.abs(d2) < R) & (d1 >= R)
        for hp, d, ny_sign in ((hp1, d1, -1.0), (hp2, d2, 1.0)):
            if hp.any():
                dd = d[hp]
                W[hp] = prof.mass(dd)
                c = prof.chord(dd)
                # gradient of G(d): d = (u -+ v)/sqrt2 in local coords
                Wu = c / SQRT2
                Wv = ny_sign * c / SQRT2
                Wx[hp] = sign * Wu
                Wy[hp] = Wv
                Wl[hp] = prof.dchord(dd)

        wedge = (~inside) & (~out) & (np.abs(d1) < R) & (np.abs(d2) < R)
        if wedge.any():
            idx = np.nonzero(wedge.ravel())[0]
            d1f, d2f = d1.ravel()[idx], d2.ravel()[idx]
            Wf = W.ravel(); Wxf = Wx.ravel(); Wyf = Wy.ravel(); Wlf = Wl.ravel()
            for n, (a, b) in enumerate(zip(d1f, d2f)):
                val = _wedge_integrals(mol, float(a), float(b))
                i = idx[n]
                Wf[i] = val[0]
                # gradient kernels carry a minus sign and the local frame
                Wxf[i] = sign * (-val[1])
                Wyf[i] = -val[2]
                Wlf[i] = val[3]
            W = Wf.reshape(W.shape); Wx = Wxf.reshape(W.shape)
            Wy = Wyf.reshape(W.shape); Wl = Wlf.reshape(W.shape)
        return W, Wx, Wy, Wl

    def fields(self, x, y):
        """chi, dchi/dx, dchi/dy, lap chi at the given points (broadcast)."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        x, y = np.broadcast_arrays(x, y)
        Wp, Wpx, Wpy, Wpl = self._wedge_fields(x, y, +1.0)
        Wm, Wmx, Wmy, Wml = self._wedge_fields(x, y, -1.0)
        # quadrature noise can undershoot by ~1e-7; the exact field is in [0, 1]
        chi = np.clip(1.0 - Wp - Wm, 0.0, 1.0)
        return (chi, -Wpx - Wmx, -Wpy - Wmy, -Wpl - Wml)

    def chi(self, x, y):
        return self.fields(x, y)[0]

    def support_halfwidth(self, y) -> np.ndarray:
        """x-halfwidth of supp chi at height y (about the cone axis)."""
        return 0.5 + np.abs(y) + SUPPORT_MARGIN


@dataclass
class CutoffField:
    """chi and its derivatives sampled on a tensor grid (field[j, i] at (x_i, y_j))."""

    xs: np.ndarray
    ys: np.ndarray
    chi: np.ndarray
    chi_x: np.ndarray
    chi_y: np.ndarray
    lap_chi: np.ndarray
    evaluator: ConeCutoff

    @property
    def center_x(self) -> float:
        return self.evaluator.center_x


def build_cutoff(xs: np.ndarray, ys: np.ndarray, *,
                 center_x: float = 0.0) -> CutoffField:
    """Sample the mollified cone cutoff on the tensor grid xs x ys.

    Points farther than the mollifier radius from both wedges are filled
    without quadrature; only the transition bands cost work.
    """
    ev = ConeCutoff(center_x)
    X, Y = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float))
    chi, cx, cy, lap = ev.fields(X, Y)
    return CutoffField(xs=np.asarray(xs, float), ys=np.asarray(ys, float),
                       chi=chi, chi_x=cx, chi_y=cy, lap_chi=lap, evaluator=ev)
