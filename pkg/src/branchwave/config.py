"""Experiment configuration: schema, defaults and validation.

Configs are plain JSON.  Validation happens before any computation and
reports the violated clause by name, so a bad spacing surfaces as
"BranchPointOnGrid" and an unresolvable packet as "ResolutionViolation".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, ValidationError
from .geometry import CoveringSpec, build_grid
from .packets import PacketSpec
from .scattering import validate_resolution

EXPERIMENT_KINDS = (
    "distance", "evolve", "transmit", "same_sheet", "smatrix", "multi_sheet",
    "metric_report", "inj_bounds", "spectrum", "phase_decay",
    "convergence_sweep",
)

_GRID_KINDS = {"evolve", "transmit", "same_sheet", "smatrix", "multi_sheet"}
_PACKET_KINDS = _GRID_KINDS | {"phase_decay"}


@dataclass
class ExperimentConfig:
    kind: str
    geometry: dict = field(default_factory=dict)
    packet: dict = field(default_factory=dict)
    stepper: dict = field(default_factory=dict)
    transport: dict = field(default_factory=dict)
    metric: dict = field(default_factory=dict)
    spectrum: dict = field(default_factory=dict)
    decay: dict = field(default_factory=dict)
    points: list = field(default_factory=list)
    sweep: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        kind = data.get("kind")
        if kind not in EXPERIMENT_KINDS:
            raise ConfigError(
                f"unknown experiment kind {kind!r}; expected one of "
                f"{', '.join(EXPERIMENT_KINDS)}")
        known = {f_.name for f_ in cls.__dataclass_fields__.values()} - {"raw"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        kwargs = {k: data[k] for k in data if k != "kind"}
        return cls(kind=kind, raw=dict(data), **kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    # -- typed accessors -----------------------------------------------------

    def covering(self) -> CoveringSpec:
        return CoveringSpec(num_sheets=int(self.geometry.get("n_sheets", 2)))

    def grid_params(self) -> tuple[float, float]:
        L = float(self.geometry.get("L", 12.0))
        h = self.geometry.get("h")
        if h is None:
            raise ConfigError("geometry.h is required for grid experiments")
        return L, float(h)

    def packet_spec(self) -> PacketSpec:
        p = self.packet
        try:
            return PacketSpec(a=float(p.get("a", 4.0)),
                              s=float(p.get("s", 8.0)),
                              k=float(p.get("k", 0.0)),
                              eps=float(p.get("eps", 0.2)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def dt(self) -> float:
        dt = self.stepper.get("dt")
        if dt is None:
            _, h = self.grid_params()
            spec = self.packet_spec()
            return h / (4.0 * (spec.s + 1.0))
        return float(dt)

    def validate(self) -> dict:
        """Run all static checks; returns a dict of derived quantities.

        Raises a named ValidationError subclass on the first violated
        clause.
        """
        derived: dict = {"kind": self.kind}
        if self.kind in _GRID_KINDS or (
                self.kind == "convergence_sweep"
                and self.sweep.get("target") in ("cayley_order",
                                                 "transmission_h")):
            L, h = self.grid_params()
            grid = build_grid(self.covering(), L, h)   # named geometry errors
            derived["grid_nodes"] = grid.n_nodes
            derived["grid_shape"] = list(grid.shape)
            if self.kind in _PACKET_KINDS or self.kind == "convergence_sweep":
                spec = self.packet_spec()
                dt = self.dt()
                validate_resolution(h, spec, dt)
                derived["dt"] = dt
                derived["phase_per_step"] = dt * ((spec.s + 1.0) ** 2
                                                  + spec.a ** 2)
                if derived["phase_per_step"] > 0.5:
                    raise ValidationError(
                        "ResolutionViolation: packet phase per step "
                        f"{derived['phase_per_step']:.3f} rad exceeds 0.5")
        elif self.kind == "phase_decay":
            spec = self.packet_spec()
            derived["eps_prime"] = spec.eps_prime
        elif self.kind == "spectrum":
            h = float(self.spectrum.get("h", 1 / 64))
            if h <= 0:
                raise ConfigError("spectrum.h must be positive")
            derived["h"] = h
        elif self.kind == "distance":
            if not self.points:
                raise ConfigError("distance experiment needs a points list")
        return derived


def load_and_validate(path) -> tuple[ExperimentConfig, dict]:
    cfg = ExperimentConfig.load(path)
    return cfg, cfg.validate()
