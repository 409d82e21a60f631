"""Planar free propagation and Duhamel reconstruction on a padded FFT box.

The truncated packet chi*u0 is not a tensor product, so its free evolution
is reconstructed from the identity

    exp(-i t A0) v0 = chi u(t) - int_0^t exp(-i (t - tau) A0) f(tau) dtau,

where u(t) is the tensor-product evolution and f the localization source.
The Duhamel integral is accumulated in Fourier space over a uniform
trapezoidal grid of source times, one FFT per node, and evaluated at the
observation times with a single inverse transform each.  The box shares
the staggered spacing of the finite-difference grid, so window extraction
is plain subsampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cutoff import ConeCutoff
from .geometry import BranchedGrid
from .packets import PacketSpec, packet_axes


@dataclass
class FourierBox:
    """Periodic staggered box containing a grid window plus padding."""

    h: float
    xs: np.ndarray
    ys: np.ndarray
    ox: int            # window offsets: grid.xs == xs[ox : ox + nx]
    oy: int
    nx_win: int
    ny_win: int

    @classmethod
    def for_grid(cls, grid: BranchedGrid, pad: float = 4.0) -> "FourierBox":
        h = grid.h
        n_pad = int(math.ceil(pad / h))
        nbx = grid.nx + 2 * n_pad
        nby = grid.ny + 2 * n_pad
        xs = grid.xs[0] + (np.arange(nbx) - n_pad) * h
        ys = grid.ys[0] + (np.arange(nby) - n_pad) * h
        return cls(h=h, xs=xs, ys=ys, ox=n_pad, oy=n_pad,
                   nx_win=grid.nx, ny_win=grid.ny)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ys.size, self.xs.size)

    def k_squared(self) -> np.ndarray:
        kx = 2.0 * math.pi * np.fft.fftfreq(self.xs.size, d=self.h)
        ky = 2.0 * math.pi * np.fft.fftfreq(self.ys.size, d=self.h)
        return (ky * ky)[:, None] + (kx * kx)[None, :]

    def window(self, field: np.ndarray) -> np.ndarray:
        return field[self.oy:self.oy + self.ny_win,
                     self.ox:self.ox + self.nx_win]

    def embed(self, window_field: np.ndarray) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        out[self.oy:self.oy + self.ny_win,
            self.ox:self.ox + self.nx_win] = window_field
        return out

    def mass(self, field: np.ndarray) -> float:
        return float(self.h * self.h * np.sum(np.abs(field) ** 2))

    def propagate(self, field: np.ndarray, dt: float) -> np.ndarray:
        """exp(-i dt A0) by the exact Fourier multiplier of the box."""
        return np.fft.ifft2(np.fft.fft2(field) * np.exp(-1j * dt * self.k_squared()))


def source_on_box(spec: PacketSpec, box: FourierBox, cone_fields, t: float,
                  *, tol: float = 1e-8) -> np.ndarray:
    """Localization source on the box from cached cutoff fields."""
    chi_x, chi_y, lap = cone_fields
    p1, p2 = packet_axes(spec, box.xs, box.ys, t, tol=tol)
    d1, d2 = packet_axes(spec, box.xs, box.ys, t, dx=1, dy=1, tol=tol)
    return -1j * (2.0 * (chi_x * np.outer(p2, d1) + chi_y * np.outer(d2, p1))
                  + lap * np.outer(p2, p1))


class FreeReference:
    """exp(-i t A0) v0 at a fixed set of observation times.

    Observation times must share a sign; they are snapped to the uniform
    Duhamel grid.  ``values_at`` returns the full box field; use the box
    window helpers for grid comparisons.
    """

    def __init__(self, spec: PacketSpec, box: FourierBox, times,
                 *, n_steps: int = 96, tol: float = 1e-8):
        times = sorted(float(t) for t in times)
        if not times:
            raise ValueError("need at least one observation time")
        if times[0] < 0 < times[-1]:
            raise ValueError("observation times must share a sign")
        self.spec = spec
        self.box = box
        self.tol = tol
        t_end = max(abs(times[0]), abs(times[-1]))
        sign = 1.0 if times[-1] > 0 else -1.0
        n_steps = max(n_steps, 8)
        dtau = sign * t_end / n_steps
        self.tau = dtau * np.arange(n_steps + 1)
        self.obs_index = {float(t): int(round(t / dtau)) for t in times}

        ev = ConeCutoff(spec.k)
        X, Y = np.meshgrid(box.xs, box.ys)
        chi, cx, cy, lap = ev.fields(X, Y)
        self.chi = chi
        self._cone_fields = (cx, cy, lap)
        self.evaluator = ev

        ksq = box.k_squared()
        acc = np.zeros(box.shape, dtype=complex)
        self._duhamel: dict[int, np.ndarray] = {}
        prev_hat = None
        want = set(self.obs_index.values())
        if 0 in want:
            self._duhamel[0] = np.zeros(box.shape, dtype=complex)
        for j in range(1, n_steps + 1):
            if prev_hat is None:
                f0 = source_on_box(spec, box, self._cone_fields,
                                   float(self.tau[0]), tol=tol)
                prev_hat = np.fft.fft2(f0) * np.exp(1j * self.tau[0] * ksq)
            fj = source_on_box(spec, box, self._cone_fields,
                               float(self.tau[j]), tol=tol)
            fj_hat = np.fft.fft2(fj) * np.exp(1j * self.tau[j] * ksq)
            acc = acc + 0.5 * dtau * (prev_hat + fj_hat)
            prev_hat = fj_hat
            if j in want:
                self._duhamel[j] = np.fft.ifft2(
                    acc * np.exp(-1j * self.tau[j] * ksq))

    def values_at(self, t: float) -> np.ndarray:
        """Box field of exp(-i t A0) v0 (tensor part minus Duhamel part)."""
        j = self.obs_index[float(t)]
        p1, p2 = packet_axes(self.spec, self.box.xs, self.box.ys, t,
                             tol=self.tol)
        return self.chi * np.outer(p2, p1) - self._duhamel[j]

    def initial_state(self) -> np.ndarray:
        """v0 = chi u0 on the box."""
        p1, p2 = packet_axes(self.spec, self.box.xs, self.box.ys, 0.0,
                             tol=self.tol)
        return self.chi * np.outer(p2, p1)
