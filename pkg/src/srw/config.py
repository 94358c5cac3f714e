"""Flat key=value experiment configuration.

The format is deliberately plain: one `key = value` pair per line, dotted
keys for grouping, `#` comments, no sections or nesting. Unknown keys and
duplicates are hard errors so that a typo cannot silently fall back to a
default. emit_config writes the canonical form (every key, sorted layout)
and parse(emit(cfg)) == cfg exactly; the sha256 of that canonical text
identifies the run in every output file.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Point2, RectDomain
from .mobility import MobilityModel, ModelVariant
from .sampling import (AnnulusUniform, BallUniform, CenteredPowerTail,
                       DeterministicAlarm, ExponentialAlarm, Hotspot,
                       HotspotMixture, TabulatedVelocity, UniformAlarm,
                       UniformDomain, UniformVelocity)


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(ValueError):
    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(tok) for tok in text.split(","))


def _hotspots(text: str) -> tuple[tuple[float, float, float, float], ...]:
    text = text.strip()
    if not text:
        return ()
    out = []
    for part in text.split(";"):
        vals = [float(tok) for tok in part.split(":")]
        if len(vals) != 4:
            raise ValueError("hotspot entries are x:y:radius:weight")
        out.append(tuple(vals))
    return tuple(out)


@dataclass(frozen=True)
class MobilityConfig:
    """One experiment's full parameter set. Defaults form a valid config."""

    a_x: float = 10.0
    a_y: float = 10.0
    boundary: str = "bounded"            # bounded | torus
    intensity: float = 0.5               # walker home intensity (key: lambda)
    r: float = 0.5                       # communication radius
    rho_detect: float = -1.0             # contact range; -1 resolves to 2r
    eps: float = -1.0                    # coverage resolution; -1 -> r/5
    variant: str = "srw_carryover"
    waypoint_kind: str = "uniform_domain"
    waypoint_radius: float = 1.0
    waypoint_beta: float = 1.5
    waypoint_scale: float = 1.0
    waypoint_hotspots: tuple = ()
    waypoint_background: float = 0.0
    velocity_kind: str = "uniform"       # uniform | tabulated
    v_min: float = 1.0
    v_max: float = 2.0
    velocity_speeds: tuple = ()
    velocity_weights: tuple = ()
    alarm_kind: str = "deterministic"    # none | deterministic | exponential | uniform
    alarm_duration: float = 20.0
    alarm_rate: float = 0.05
    alarm_lo: float = 10.0
    alarm_hi: float = 30.0
    p: float = 0.5                       # interpolation long-trip probability
    R: float = 1.0                       # interpolation home-ball radius
    t_max: float = 200.0
    reps: int = 100
    seed: int = 1
    t_grid_points: int = 101
    out_prefix: str = "srw"

    def __post_init__(self):
        def bad(field_, reason):
            raise ValidationError(field_, reason)

        if self.a_x <= 0 or self.a_y <= 0:
            bad("domain", "side lengths must be positive")
        if self.boundary not in ("bounded", "torus"):
            bad("domain.boundary", "must be 'bounded' or 'torus'")
        if self.intensity <= 0:
            bad("lambda", "intensity must be positive")
        if self.r <= 0:
            bad("r", "communication radius must be positive")
        if self.rho_detect != -1.0 and self.rho_detect <= 0:
            bad("rho_detect", "contact range must be positive")
        if self.eps != -1.0 and not 0 < self.eps < self.r:
            bad("eps", "need 0 < eps < r")
        try:
            ModelVariant(self.variant)
        except ValueError:
            bad("variant", f"unknown variant {self.variant!r}")
        if self.waypoint_kind not in ("uniform_domain", "ball_uniform",
                                      "annulus_uniform", "centered_power_tail",
                                      "hotspot_mixture"):
            bad("waypoint.kind", f"unknown measure {self.waypoint_kind!r}")
        if self.waypoint_kind in ("ball_uniform", "annulus_uniform") and self.waypoint_radius <= 0:
            bad("waypoint.radius", "must be positive")
        if self.waypoint_kind == "centered_power_tail":
            if self.waypoint_beta <= 1:
                bad("waypoint.beta", "must exceed 1")
            if self.waypoint_scale <= 0:
                bad("waypoint.scale", "must be positive")
        if self.waypoint_kind == "hotspot_mixture" and not self.waypoint_hotspots \
                and self.waypoint_background <= 0:
            bad("waypoint.hotspots", "mixture needs a component")
        if self.velocity_kind not in ("uniform", "tabulated"):
            bad("velocity.kind", f"unknown kind {self.velocity_kind!r}")
        if self.velocity_kind == "uniform" and not 0 < self.v_min <= self.v_max:
            bad("velocity.v_min", "need 0 < v_min <= v_max")
        if self.velocity_kind == "tabulated" and len(self.velocity_speeds) < 2:
            bad("velocity.speeds", "need at least two knots")
        if self.alarm_kind not in ("none", "deterministic", "exponential", "uniform"):
            bad("alarm.kind", f"unknown kind {self.alarm_kind!r}")
        if self.variant in ("srw_carryover", "srw_reset") and self.alarm_kind == "none":
            bad("alarm.kind", f"{self.variant} requires an alarm measure")
        if not 0.0 <= self.p <= 1.0:
            bad("p", "must lie in [0, 1]")
        if self.variant == "interpolation" and self.R <= 0:
            bad("R", "interpolation needs a positive home-ball radius")
        if self.t_max <= 0:
            bad("t_max", "must be positive")
        if self.reps < 1:
            bad("reps", "must be at least 1")
        if self.t_grid_points < 2:
            bad("t_grid.points", "need at least two grid points")

    # resolved values -------------------------------------------------------

    @property
    def rho(self) -> float:
        return 2.0 * self.r if self.rho_detect == -1.0 else self.rho_detect

    @property
    def eps_value(self) -> float:
        return self.r / 5.0 if self.eps == -1.0 else self.eps

    def domain(self) -> RectDomain:
        return RectDomain(self.a_x, self.a_y, torus=self.boundary == "torus")

    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.t_grid_points)

    def waypoint_measure(self):
        kind = self.waypoint_kind
        if kind == "uniform_domain":
            return UniformDomain()
        if kind == "ball_uniform":
            return BallUniform(self.waypoint_radius)
        if kind == "annulus_uniform":
            return AnnulusUniform(self.waypoint_radius)
        if kind == "centered_power_tail":
            return CenteredPowerTail(self.waypoint_beta, self.waypoint_scale)
        spots = tuple(Hotspot(Point2(x, y), rad, w)
                      for x, y, rad, w in self.waypoint_hotspots)
        return HotspotMixture(spots, self.waypoint_background)

    def velocity_measure(self):
        if self.velocity_kind == "uniform":
            return UniformVelocity(self.v_min, self.v_max)
        return TabulatedVelocity(tuple(self.velocity_speeds),
                                 tuple(self.velocity_weights))

    def alarm_measure(self):
        kind = self.alarm_kind
        if kind == "none":
            return None
        if kind == "deterministic":
            return DeterministicAlarm(self.alarm_duration)
        if kind == "exponential":
            return ExponentialAlarm(self.alarm_rate)
        return UniformAlarm(self.alarm_lo, self.alarm_hi)

    def build_model(self) -> MobilityModel:
        return MobilityModel(variant=ModelVariant(self.variant),
                             dom=self.domain(),
                             waypoints=self.waypoint_measure(),
                             velocity=self.velocity_measure(),
                             alarm=self.alarm_measure(),
                             long_trip_prob=self.p,
                             home_radius=self.R)


# key -> (attribute, converter); order fixes the canonical emit layout
_KEYS: dict[str, tuple[str, object]] = {
    "domain.a_x": ("a_x", float),
    "domain.a_y": ("a_y", float),
    "domain.boundary": ("boundary", str),
    "lambda": ("intensity", float),
    "r": ("r", float),
    "rho_detect": ("rho_detect", float),
    "eps": ("eps", float),
    "variant": ("variant", str),
    "waypoint.kind": ("waypoint_kind", str),
    "waypoint.radius": ("waypoint_radius", float),
    "waypoint.beta": ("waypoint_beta", float),
    "waypoint.scale": ("waypoint_scale", float),
    "waypoint.hotspots": ("waypoint_hotspots", _hotspots),
    "waypoint.background_weight": ("waypoint_background", float),
    "velocity.kind": ("velocity_kind", str),
    "velocity.v_min": ("v_min", float),
    "velocity.v_max": ("v_max", float),
    "velocity.speeds": ("velocity_speeds", _floats),
    "velocity.weights": ("velocity_weights", _floats),
    "alarm.kind": ("alarm_kind", str),
    "alarm.duration": ("alarm_duration", float),
    "alarm.rate": ("alarm_rate", float),
    "alarm.lo": ("alarm_lo", float),
    "alarm.hi": ("alarm_hi", float),
    "p": ("p", float),
    "R": ("R", float),
    "t_max": ("t_max", float),
    "reps": ("reps", int),
    "seed": ("seed", int),
    "t_grid.points": ("t_grid_points", int),
    "out.prefix": ("out_prefix", str),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in _KEYS.items()}


def parse_config(text: str) -> MobilityConfig:
    """Parse flat key=value text; see _KEYS for the vocabulary."""
    kwargs = {}
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(lineno, f"expected key = value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in seen:
            raise ParseError(lineno, f"duplicate key {key!r} "
                                     f"(first at line {seen[key]})")
        seen[key] = lineno
        if key not in _KEYS:
            raise ValidationError(key, "unknown key")
        attr, conv = _KEYS[key]
        try:
            kwargs[attr] = conv(value)
        except ValidationError:
            raise
        except ValueError as exc:
            raise ParseError(lineno, f"bad value for {key}: {exc}")
    return MobilityConfig(**kwargs)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return ";".join(":".join(repr(float(x)) for x in spot)
                            for spot in value)
        return ",".join(repr(float(x)) for x in value)
    return str(value)


def emit_config(cfg: MobilityConfig) -> str:
    """Canonical text form; parse_config(emit_config(cfg)) == cfg."""
    lines = []
    for key, (attr, _) in _KEYS.items():
        lines.append(f"{key} = {_format_value(getattr(cfg, attr))}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: MobilityConfig) -> str:
    return hashlib.sha256(emit_config(cfg).encode()).hexdigest()[:12]


def with_overrides(cfg: MobilityConfig, **changes) -> MobilityConfig:
    """Functional update preserving validation."""
    return replace(cfg, **changes)
