"""Graph metrics, curvature, quasi-distances and injectivity-radius bounds.

A surface function f induces the metric of its graph,
g = [[1 + fx^2, fx fy], [fx fy, 1 + fy^2]], whose eigenvalues are 1 and
det g = 1 + |grad f|^2.  This module evaluates the Gauss curvature, the
pointwise and integrated metric discrepancies against the flat metric,
admissibility of the perturbation class, and computable lower bounds for
the injectivity radius near cone points obtained from the quasi-isometry
comparison estimate with explicit cutoff and extension constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import AtPuncture, TailNotBounded, ValidationError, ZeroGamma
from .geometry import Q_MINUS, Q_PLUS, SheetPoint

__all__ = [
    "SurfaceFunction", "make_surface", "MetricSample", "metric_sample",
    "gauss_curvature", "dtilde", "dtilde_inf", "dtilde_1", "d0", "r0_default",
    "graph_condition_integral", "inj_bound_comparison", "inj_bound_global",
    "inj_bound_local", "inj_bound_punctured", "inj_bound_covering",
    "cutoff_constant", "EXTENSION_CONSTANT", "membership",
    "AdmissibilityReport",
]


# ---------------------------------------------------------------------------
# surface functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceFunction:
    """C^2 function on the covering with analytic derivatives.

    Values depend only on the planar coordinates (the same function on
    every sheet), which makes the induced metric continuous across the
    cut.  ``beta_bar`` and ``gamma_bar`` are global sup bounds for first
    and second derivatives when the family provides them; ``envelope``
    declares C, q with |grad f|^2 <= C |p|^-q at infinity for tail bounds.
    """

    name: str
    params: dict
    f: callable
    fx: callable
    fy: callable
    fxx: callable
    fxy: callable
    fyy: callable
    beta_bar: float | None = None
    gamma_bar: float | None = None
    envelope: tuple[float, float] | None = None

    def grad_sq(self, x, y):
        gx, gy = self.fx(x, y), self.fy(x, y)
        return gx * gx + gy * gy

    def scaled(self, factor: float) -> "SurfaceFunction":
        """The same surface multiplied by ``factor`` (derivatives scale too)."""
        s = float(factor)
        return SurfaceFunction(
            name=f"scaled({self.name},{s})",
            params={**self.params, "scale": s},
            f=lambda x, y: s * self.f(x, y),
            fx=lambda x, y: s * self.fx(x, y),
            fy=lambda x, y: s * self.fy(x, y),
            fxx=lambda x, y: s * self.fxx(x, y),
            fxy=lambda x, y: s * self.fxy(x, y),
            fyy=lambda x, y: s * self.fyy(x, y),
            beta_bar=None if self.beta_bar is None else abs(s) * self.beta_bar,
            gamma_bar=None if self.gamma_bar is None else abs(s) * self.gamma_bar,
            envelope=None if self.envelope is None
            else (s * s * self.envelope[0], self.envelope[1]),
        )


def _zeros(x, y):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


def make_surface(name: str, **params) -> SurfaceFunction:
    """Built-in families: zero, linear(ax, ay), paraboloid(c),
    gaussian_bump(A, sigma, center), scaled(name, factor, **inner)."""
    if name == "zero":
        return SurfaceFunction(name=name, params={}, f=_zeros, fx=_zeros,
                               fy=_zeros, fxx=_zeros, fxy=_zeros, fyy=_zeros,
                               beta_bar=0.0, gamma_bar=0.0, envelope=(0.0, 3.0))
    if name == "linear":
        ax, ay = float(params.get("ax", 0.0)), float(params.get("ay", 0.0))
        return SurfaceFunction(
            name=name, params={"ax": ax, "ay": ay},
            f=lambda x, y: ax * np.asarray(x, float) + ay * np.asarray(y, float),
            fx=lambda x, y: np.full(np.broadcast(x, y).shape, ax),
            fy=lambda x, y: np.full(np.broadcast(x, y).shape, ay),
            fxx=_zeros, fxy=_zeros, fyy=_zeros,
            beta_bar=max(abs(ax), abs(ay)), gamma_bar=0.0, envelope=None)
    if name == "paraboloid":
        c = float(params.get("c", 1.0))
        return SurfaceFunction(
            name=name, params={"c": c},
            f=lambda x, y: 0.5 * c * (np.asarray(x, float) ** 2
                                      + np.asarray(y, float) ** 2),
            fx=lambda x, y: c * np.asarray(x, float) + 0.0 * np.asarray(y, float),
            fy=lambda x, y: c * np.asarray(y, float) + 0.0 * np.asarray(x, float),
            fxx=lambda x, y: np.full(np.broadcast(x, y).shape, c),
            fxy=_zeros,
            fyy=lambda x, y: np.full(np.broadcast(x, y).shape, c),
            beta_bar=None, gamma_bar=abs(c), envelope=None)
    if name == "gaussian_bump":
        A = float(params.get("A", 1.0))
        sig = float(params.get("sigma", 1.0))
        cx, cy = params.get("center", (0.0, 0.0))
        s2 = sig * sig

        def g(x, y):
            dx = np.asarray(x, float) - cx
            dy = np.asarray(y, float) - cy
            return np.exp(-(dx * dx + dy * dy) / (2.0 * s2))

        def fx(x, y):
            dx = np.asarray(x, float) - cx
            return -A * dx / s2 * g(x, y)

        def fy(x, y):
            dy = np.asarray(y, float) - cy
            return -A * dy / s2 * g(x, y)

        def fxx(x, y):
            dx = np.asarray(x, float) - cx
            return A * (dx * dx / s2 - 1.0) / s2 * g(x, y)

        def fyy(x, y):
            dy = np.asarray(y, float) - cy
            return A * (dy * dy / s2 - 1.0) / s2 * g(x, y)

        def fxy(x, y):
            dx = np.asarray(x, float) - cx
            dy = np.asarray(y, float) - cy
            return A * dx * dy / (s2 * s2) * g(x, y)

        beta = abs(A) / (sig * math.sqrt(math.e))
        gamma = abs(A) / s2
        # |grad f|^2 r^q is maximized at finite radius; crude safe envelope
        rr = np.linspace(0.1, 12 * sig + abs(cx) + abs(cy) + 2, 4000)
        th = np.linspace(0, 2 * math.pi, 64, endpoint=False)
        R, TH = np.meshgrid(rr, th)
        gx = fx(R * np.cos(TH), R * np.sin(TH))
        gy = fy(R * np.cos(TH), R * np.sin(TH))
        q = 6.0
        C = float(np.max((gx * gx + gy * gy) * R ** q)) * 1.05
        return SurfaceFunction(
            name=name, params={"A": A, "sigma": sig, "center": (cx, cy)},
            f=lambda x, y: A * g(x, y), fx=fx, fy=fy, fxx=fxx, fxy=fxy,
            fyy=fyy, beta_bar=beta, gamma_bar=gamma, envelope=(C, q))
    if name == "scaled":
        inner = params.pop("base")
        factor = params.pop("factor")
        base = inner if isinstance(inner, SurfaceFunction) \
            else make_surface(inner, **params)
        return base.scaled(factor)
    raise ValidationError(f"unknown surface family {name!r}")


def metric_coefficients(surface: SurfaceFunction):
    """(g11, g12, g22) evaluator matching the Hamiltonian assembler."""
    def fn(x, y):
        gx, gy = surface.fx(x, y), surface.fy(x, y)
        return 1.0 + gx * gx, gx * gy, 1.0 + gy * gy
    return fn


@dataclass(frozen=True)
class MetricSample:
    g11: float
    g12: float
    g22: float

    @property
    def det(self) -> float:
        return self.g11 * self.g22 - self.g12 * self.g12

    @property
    def eigenvalues(self) -> tuple[float, float]:
        # for graph metrics the eigenvalues are exactly 1 and det g
        tr = self.g11 + self.g22
        disc = math.sqrt(max(tr * tr / 4.0 - self.det, 0.0))
        return (tr / 2.0 - disc, tr / 2.0 + disc)


def _xy(p) -> tuple[float, float]:
    if isinstance(p, SheetPoint):
        return p.x, p.y
    return float(p[0]), float(p[1])


def metric_sample(surface: SurfaceFunction, p) -> MetricSample:
    x, y = _xy(p)
    gx, gy = float(surface.fx(x, y)), float(surface.fy(x, y))
    return MetricSample(1.0 + gx * gx, gx * gy, 1.0 + gy * gy)


def gauss_curvature(surface: SurfaceFunction, p) -> float:
    """det(Hess f) / (1 + |grad f|^2)^2."""
    x, y = _xy(p)
    hxx = float(surface.fxx(x, y))
    hyy = float(surface.fyy(x, y))
    hxy = float(surface.fxy(x, y))
    g = 1.0 + float(surface.grad_sq(x, y))
    return (hxx * hyy - hxy * hxy) / (g * g)


# ---------------------------------------------------------------------------
# quasi-distances
# ---------------------------------------------------------------------------

def dtilde(surface: SurfaceFunction, p) -> float:
    """Pointwise metric discrepancy |a^(1/2) - a^(-1/2)| of the large eigenvalue."""
    x, y = _xy(p)
    det = 1.0 + float(surface.grad_sq(x, y))
    r = math.sqrt(det)
    return abs(r - 1.0 / r)


def d0(p) -> float:
    """min(1, distance to either branch point), in the flat metric."""
    x, y = _xy(p)
    dm = math.hypot(x - Q_MINUS[0], y - Q_MINUS[1])
    dp = math.hypot(x - Q_PLUS[0], y - Q_PLUS[1])
    return min(1.0, dm, dp)


def r0_default(p, rho: float = 0.5) -> float:
    """rho * d0 with rho in (0, 1/2]."""
    if not 0.0 < rho <= 0.5:
        raise ValidationError("rho must lie in (0, 1/2]")
    return rho * d0(p)


def dtilde_inf(surface: SurfaceFunction, *, extent: float = 24.0,
               n: int = 481) -> float:
    """Lattice estimate of sup dtilde, cross-checked with 2 beta_bar^2."""
    xs = np.linspace(-extent, extent, n)
    X, Y = np.meshgrid(xs, xs)
    det = 1.0 + surface.grad_sq(X, Y)
    r = np.sqrt(det)
    lattice = float(np.max(np.abs(r - 1.0 / r)))
    if surface.beta_bar is not None:
        return min(max(lattice, 0.0), 2.0 * surface.beta_bar ** 2)
    return lattice


def _weighted_integral(surface: SurfaceFunction, weight, *, R: float,
                       inner_delta: float, rho: float) -> float:
    """Panel quadrature of a pointwise quantity over both sheets.

    ``weight`` maps (values of |grad f|^2-derived integrand) pointwise;
    panels refine near the branch points and points inside the exclusion
    discs carry zero weight.  The factor two accounts for the two sheets.
    """
    from .quadrature import gl_nodes

    panels = []

    def split(x0, y0, size):
        near = min(math.hypot(x0 + 1, y0), math.hypot(x0 - 1, y0))
        if size > 0.25 and near < size + 1.5:
            half = size / 2.0
            for ddx in (0.0, half):
                for ddy in (0.0, half):
                    split(x0 + ddx, y0 + ddy, half)
        else:
            panels.append((x0, y0, size))

    size0 = 2.0
    m = int(math.ceil(R / size0))
    for i in range(-m, m):
        for j in range(-m, m):
            split(i * size0, j * size0, size0)

    total = 0.0
    gx_ref, gw_ref = gl_nodes(0.0, 1.0, 6)
    for (x0, y0, size) in panels:
        if math.hypot(x0 + size / 2, y0 + size / 2) > R + size:
            continue
        xs = x0 + size * gx_ref
        ys = y0 + size * gx_ref
        wx = size * gw_ref
        X, Y = np.meshgrid(xs, ys)
        dm = np.hypot(X + 1.0, Y)
        dp = np.hypot(X - 1.0, Y)
        inside = (np.minimum(dm, dp) >= inner_delta) & (np.hypot(X, Y) <= R)
        if not inside.any():
            continue
        vals = weight(surface, X, Y, dm, dp, rho)
        vals = np.where(inside, vals, 0.0)
        total += float(wx @ vals @ wx)
    return 2.0 * total


def _tail_bound(surface: SurfaceFunction, R: float, rho: float,
                weight_power: float) -> float:
    """Envelope tail of int |grad f|^2 w^-4 beyond radius R (both sheets)."""
    if surface.envelope is None:
        raise TailNotBounded(
            f"surface {surface.name!r} declares no decay envelope")
    C, q = surface.envelope
    if C == 0.0:
        return 0.0
    if q <= 2.0:
        raise TailNotBounded(f"envelope exponent q = {q} must exceed 2")
    # far away d0 = 1, so the weight is rho^-4 (or 1 for the d0 variant)
    w4 = rho ** (-weight_power)
    return 2.0 * w4 * 2.0 * math.pi * C * R ** (2.0 - q) / (q - 2.0)


def dtilde_1(surface: SurfaceFunction, rho: float = 0.5, *, R: float = 24.0,
             inner_delta: float = 0.05) -> tuple[float, float]:
    """Weighted L1 quasi-distance int dtilde r0^-4 plus its tail bound.

    The integral runs over both sheets of the truncated domain
    {inner_delta <= dist to branch points, |p| <= R}; the returned tail
    bound covers |p| > R via the declared envelope.
    """
    def weight(s, X, Y, dm, dp, rho_):
        det = 1.0 + s.grad_sq(X, Y)
        r = np.sqrt(det)
        dt = np.abs(r - 1.0 / r)
        r0 = rho_ * np.minimum(1.0, np.minimum(dm, dp))
        return dt / r0 ** 4

    main = _weighted_integral(surface, weight, R=R, inner_delta=inner_delta,
                              rho=rho)
    tail = _tail_bound(surface, R, rho, 4.0)
    return main, tail


def graph_condition_integral(surface: SurfaceFunction, *, R: float = 24.0,
                             inner_delta: float = 0.05) -> tuple[float, float]:
    """int |grad f|^2 d0^-4 over the truncated domain plus its tail bound."""
    def weight(s, X, Y, dm, dp, rho_):
        g2 = s.grad_sq(X, Y)
        dd = np.minimum(1.0, np.minimum(dm, dp))
        return g2 / dd ** 4

    main = _weighted_integral(surface, weight, R=R, inner_delta=inner_delta,
                              rho=1.0)
    tail = _tail_bound(surface, R, 1.0, 4.0)
    return main, tail


# ---------------------------------------------------------------------------
# injectivity-radius lower bounds
# ---------------------------------------------------------------------------

EXTENSION_CONSTANT = 3.0     # order-2 reflection extension coefficient bound


@lru_cache(maxsize=1)
def cutoff_constant() -> float:
    """max of the sup norms of first and second derivatives of the standard
    radial cutoff (1 on B1, 0 outside B2, exp-type transition)."""
    r = np.linspace(1.0 + 1e-9, 2.0 - 1e-9, 20001)

    def S(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out

    def Sp(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos]) / t[pos] ** 2
        return out

    def Spp(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos]) * (1.0 / t[pos] ** 4
                                            - 2.0 / t[pos] ** 3)
        return out

    a = S(2.0 - r)
    b = S(r - 1.0)
    ap = -Sp(2.0 - r)
    bp = Sp(r - 1.0)
    app = Spp(2.0 - r)
    bpp = Spp(r - 1.0)
    den = a + b
    eta = a / den
    etap = (ap * den - a * (ap + bp)) / den ** 2
    etapp = ((app * den - a * (app + bpp)) * den
             - 2.0 * den * (ap + bp) * (ap * den - a * (ap + bp)) / den) / den ** 3
    # |D_ij phi| <= max over direction of |eta'' u + eta' (1 - u)/r|, u in [0,1]
    du = np.linspace(0.0, 1.0, 41)[:, None]
    dij = np.abs(etapp[None, :] * du + etap[None, :] * (1.0 - du) / r[None, :])
    return float(max(np.max(np.abs(etap)), np.max(dij)))


def inj_bound_comparison(eta: float, K: float, inj0: float) -> float:
    """Quasi-isometry comparison bound (1/2) min(eta^2 pi / sqrt K, eta inj0).

    K <= 0 falls back to the flat-comparison limit (eta/2) inj0.
    """
    if not 0.0 < eta <= 1.0:
        raise ValidationError("eta must lie in (0, 1]")
    if inj0 <= 0:
        raise ValidationError("inj0 must be positive (use math.inf if unbounded)")
    if K <= 0.0:
        return 0.5 * eta * inj0
    return 0.5 * min(eta * eta * math.pi / math.sqrt(K), eta * inj0)


def inj_bound_global(beta: float, gamma: float) -> float:
    """pi / (2 sqrt 2) / ((1 + 2 beta^2)^2 gamma) for globally bounded f."""
    if beta < 0:
        raise ValidationError("beta must be nonnegative")
    if gamma <= 0:
        raise ZeroGamma("gamma must be positive")
    return math.pi / (2.0 * math.sqrt(2.0)) / ((1.0 + 2.0 * beta * beta) ** 2
                                               * gamma)


def _lattice_max(surface: SurfaceFunction, points) -> tuple[float, float]:
    """(beta, gamma) maxima of first and second derivatives over points."""
    X, Y = points
    b = max(float(np.max(np.abs(surface.fx(X, Y)))),
            float(np.max(np.abs(surface.fy(X, Y)))))
    g = max(float(np.max(np.abs(surface.fxx(X, Y)))),
            float(np.max(np.abs(surface.fxy(X, Y)))),
            float(np.max(np.abs(surface.fyy(X, Y)))))
    return b, g


def _refined_disc_max(surface, cx, cy, radius, pitch0=0.05,
                      rel_tol=0.01) -> tuple[float, float]:
    pitch = pitch0
    prev = None
    for _ in range(6):
        n = max(5, int(math.ceil(2 * radius / pitch)) + 1)
        xs = np.linspace(cx - radius, cx + radius, n)
        ys = np.linspace(cy - radius, cy + radius, n)
        X, Y = np.meshgrid(xs, ys)
        keep = (X - cx) ** 2 + (Y - cy) ** 2 <= radius * radius
        b, g = _lattice_max(surface, (X[keep], Y[keep]))
        if prev is not None:
            db = abs(b - prev[0]) <= rel_tol * max(prev[0], 1e-12)
            dg = abs(g - prev[1]) <= rel_tol * max(prev[1], 1e-12)
            if db and dg:
                return b, g
        prev = (b, g)
        pitch /= 2.0
    return prev


def inj_bound_local(surface: SurfaceFunction, p0) -> float:
    """Plane version: min(1, (1 + 2 c^2 b^2)^-2 / (g + c b)) with b, g
    maximized over the closed disc of radius 2 around p0."""
    x0, y0 = _xy(p0)
    b, g = _refined_disc_max(surface, x0, y0, 2.0)
    c = cutoff_constant()
    denom = g + c * b
    if denom == 0.0:
        return 1.0
    return min(1.0, (1.0 + 2.0 * c * c * b * b) ** (-2) / denom)


def _annulus_max(surface, p0_norm) -> tuple[float, float]:
    r_lo = 0.5 * p0_norm
    r_hi = 0.5 * p0_norm + 2.0
    n_r = 121
    n_th = 256
    rr = np.linspace(r_lo, r_hi, n_r)
    th = np.linspace(0.0, 2.0 * math.pi, n_th, endpoint=False)
    R, TH = np.meshgrid(rr, th)
    return _lattice_max(surface, (R * np.cos(TH), R * np.sin(TH)))


def inj_bound_punctured(surface: SurfaceFunction, p0) -> float:
    """Punctured-plane version with the annulus maximization and the
    reflection-extension constant; valid for |p0| <= 1."""
    x0, y0 = _xy(p0)
    norm = math.hypot(x0, y0)
    if norm == 0.0:
        raise AtPuncture("the bound is undefined at the puncture")
    if norm > 1.0:
        raise ValidationError("the punctured-plane bound assumes |p0| <= 1")
    b, g = _annulus_max(surface, norm)
    c = cutoff_constant() * EXTENSION_CONSTANT
    denom = g + c * b
    second = math.inf if denom == 0.0 \
        else (1.0 + 2.0 * c * c * b * b) ** (-2) / denom
    return min(norm / 2.0, second)


def covering_constant(surface: SurfaceFunction) -> float:
    """Global prefactor c_f of the covering bound c_f min(1, dist to q+-).

    Combines the plane bound far from the branch points with the
    half-scaled punctured-plane construction near them, using the
    declared global derivative bounds.
    """
    if surface.beta_bar is None or surface.gamma_bar is None:
        raise ValidationError(
            "covering bound needs declared global derivative bounds")
    b, g = surface.beta_bar, surface.gamma_bar
    c = cutoff_constant() * EXTENSION_CONSTANT
    denom = g + c * b
    second = math.inf if denom == 0.0 \
        else (1.0 + 2.0 * c * c * b * b) ** (-2) / denom
    return 0.5 * min(1.0, second)


def inj_bound_covering(surface: SurfaceFunction, p) -> float:
    """c_f min(1, dist(p, q-), dist(p, q+)) on the two-branch-point cover."""
    return covering_constant(surface) * d0(p)


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

@dataclass
class AdmissibilityReport:
    surface: str
    rho: float
    eta: float
    curvature_bound: float
    curvature_lattice: float
    inj_constant: float
    d_inf: float
    d_1: float
    d_1_tail: float
    gamma_threshold: float
    eps_threshold: float
    member_base: bool
    member_quant: bool
    failing_clauses: list[str]
    notes: list[str]

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "surface", "rho", "eta", "curvature_bound", "curvature_lattice",
            "inj_constant", "d_inf", "d_1", "d_1_tail", "gamma_threshold",
            "eps_threshold", "member_base", "member_quant", "failing_clauses",
            "notes")}


def membership(surface: SurfaceFunction, rho: float, gamma: float, eps: float,
               *, R: float = 24.0, inner_delta: float = 0.05
               ) -> AdmissibilityReport:
    """Check admissibility of the graph metric at weight rho d0.

    Base membership needs the curvature bound K rho^2 <= 1 and an
    injectivity constant c_f >= 2 rho (the factor two covers the
    homogenized radius on balls of radius r0 <= d0 / 2); the quantitative
    class additionally demands d_inf <= gamma and d_1 <= eps.  The lattice
    searches are deterministic and reported as lower-confidence estimates.
    """
    if surface.beta_bar is None or surface.gamma_bar is None:
        raise ValidationError("membership needs declared global bounds")
    failing: list[str] = []
    notes = ["derivative maxima from deterministic lattice search"]

    # curvature: lattice estimate plus the analytic bound 2 gamma_bar^2
    ext = 12.0
    xs = np.linspace(-ext, ext, 301)
    X, Y = np.meshgrid(xs, xs)
    hxx = surface.fxx(X, Y)
    hyy = surface.fyy(X, Y)
    hxy = surface.fxy(X, Y)
    det_h = hxx * hyy - hxy * hxy
    gsq = 1.0 + surface.grad_sq(X, Y)
    kappa_lattice = float(np.max(np.abs(det_h / gsq ** 2)))
    K = max(kappa_lattice, 1e-300)
    K_bound = 2.0 * surface.gamma_bar ** 2
    K_used = max(K, min(K_bound, 10 * K) if K_bound > 0 else K)

    eta = 1.0 / (1.0 + 2.0 * surface.beta_bar ** 2)
    c_f = covering_constant(surface)

    if rho > 0.5:
        failing.append("rho_range")
    if K_used > 0 and rho > 1.0 / math.sqrt(K_used):
        failing.append("curvature_lower_bound")
    if c_f < 2.0 * rho:
        failing.append("injectivity_radius")

    d_inf = dtilde_inf(surface)
    d1_main, d1_tail = dtilde_1(surface, rho, R=R, inner_delta=inner_delta)
    member_base = not failing
    quant_failing = list(failing)
    if d_inf > gamma:
        quant_failing.append("d_inf_exceeds_gamma")
    if d1_main + d1_tail > eps:
        quant_failing.append("d_1_exceeds_eps")

    return AdmissibilityReport(
        surface=surface.name, rho=rho, eta=eta, curvature_bound=K_used,
        curvature_lattice=kappa_lattice, inj_constant=c_f, d_inf=d_inf,
        d_1=d1_main, d_1_tail=d1_tail, gamma_threshold=gamma,
        eps_threshold=eps, member_base=member_base,
        member_quant=not quant_failing, failing_clauses=quant_failing,
        notes=notes)
