"""Gauss-Legendre quadrature helpers with order-doubling convergence control."""

from __future__ import annotations

import numpy as np

from .errors import QuadratureNotConverged

_rule_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the Gauss-Legendre rule on [-1, 1] (cached)."""
    rule = _rule_cache.get(order)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(order)
        _rule_cache[order] = rule
    return rule


def gl_nodes(a: float, b: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to the interval [a, b]."""
    x, w = gl_rule(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def panel_nodes(a: float, b: float, n_panels: int, order: int):
    """Composite rule: ``n_panels`` equal panels of the given order on [a, b]."""
    edges = np.linspace(a, b, n_panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gl_nodes(lo, hi, order)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def adaptive_integral(f, a: float, b: float, *, tol: float = 1e-9,
                      order0: int = 16, max_order: int = 16384,
                      relative: bool = True) -> float:
    """Integrate ``f`` over [a, b], doubling the GL order until stable.

    ``f`` must accept a node array and return values of matching shape.
    Raises QuadratureNotConverged if doubling up to ``max_order`` never
    brings two successive results within tolerance.
    """
    order = order0
    x, w = gl_nodes(a, b, order)
    prev = complex(np.dot(w, f(x)))
    while order <= max_order:
        order *= 2
        x, w = gl_nodes(a, b, order)
        cur = complex(np.dot(w, f(x)))
        scale = max(abs(cur), 1.0) if relative else 1.0
        if abs(cur - prev) <= tol * scale:
            return cur.real if abs(cur.imag) < 1e-300 else cur
        prev = cur
    raise QuadratureNotConverged(
        f"integral on [{a}, {b}] did not stabilize below {tol} "
        f"(last delta {abs(cur - prev):.3e} at order {order})")
