"""Physical description of the rig: frame geometry, payload, cables, motors.

All types are immutable after construction and validated eagerly, so they can
be shared freely between threads and across simulations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quaternions

GRAVITY = 9.8  # m/s^2

PPR_MIN = 800
PPR_MAX = 40000


class ConfigError(ValueError):
    """A configuration value violates a physical invariant."""


def _finite_scalar(value, name: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
    if not np.isfinite(x):
        raise ConfigError(f"{name} must be finite (no NaN/inf)")
    return x


def _positive_scalar(value, name: str) -> float:
    x = _finite_scalar(value, name)
    if x <= 0.0:
        raise ConfigError(f"{name} must be positive")
    return x


def _finite_array(value, shape: tuple, name: str) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.shape != shape:
        raise ConfigError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be finite (no NaN/inf)")
    arr.flags.writeable = False
    return arr


def _set(obj, **fields):
    # frozen dataclasses: assign coerced values in __post_init__
    for k, v in fields.items():
        object.__setattr__(obj, k, v)


@dataclass(frozen=True, eq=False)
class RobotGeometry:
    """Frame-side cable exit points (pulleys) and the winch drum radius."""

    proximal_anchors: np.ndarray  # (3, 3) world frame, metres
    drum_radius: float            # metres
    frame_side: float = 1.0       # metres, informational

    def __post_init__(self):
        anchors = _finite_array(self.proximal_anchors, (3, 3), "geometry.proximal_anchors")
        area = 0.5 * np.linalg.norm(np.cross(anchors[1] - anchors[0], anchors[2] - anchors[0]))
        if area < 1e-9:
            raise ConfigError("geometry.proximal_anchors must be non-collinear")
        _set(self,
             proximal_anchors=anchors,
             drum_radius=_positive_scalar(self.drum_radius, "geometry.drum_radius"),
             frame_side=_positive_scalar(self.frame_side, "geometry.frame_side"))


@dataclass(frozen=True, eq=False)
class PayloadSpec:
    """Rigid payload: mass, inertia and body-frame cable attachment offsets.

    Variant "A" carries three distinct attachment points on the body; variant
    "B" attaches all three cables at the centre of mass (all offsets zero).
    """

    mass: float                 # kg
    inertia: np.ndarray         # (3, 3) kg m^2, body frame, about the COM
    distal_anchors: np.ndarray  # (3, 3) body-frame offsets, metres
    variant: str = "A"

    def __post_init__(self):
        mass = _finite_scalar(self.mass, "payload.mass")
        if mass <= 0.0:
            raise ConfigError("payload.mass must be positive")
        inertia = _finite_array(self.inertia, (3, 3), "payload.inertia")
        if not np.allclose(inertia, inertia.T, rtol=0.0, atol=1e-9):
            raise ConfigError("payload.inertia must be symmetric")
        if np.min(np.linalg.eigvalsh(inertia)) <= 0.0:
            raise ConfigError("payload.inertia must be positive definite")
        anchors = _finite_array(self.distal_anchors, (3, 3), "payload.distal_anchors")
        variant = str(self.variant).upper()
        if variant not in ("A", "B"):
            raise ConfigError(f"payload.variant must be 'A' or 'B', got {self.variant!r}")
        if variant == "B" and np.any(anchors != 0.0):
            raise ConfigError("payload.variant B requires all distal_anchors to be zero")
        _set(self, mass=mass, inertia=inertia, distal_anchors=anchors, variant=variant)

    @property
    def is_point_attached(self) -> bool:
        """True when all cables attach at the centre of mass (no cable moments)."""
        return not np.any(self.distal_anchors)


@dataclass(frozen=True, eq=False)
class CableSpec:
    """Elastic cable parameters shared by the three cables."""

    stiffness: float              # N/m
    natural_lengths: np.ndarray   # (3,) unstretched lengths at start, metres
    diameter_mm: float = 0.9      # informational

    def __post_init__(self):
        lengths = _finite_array(self.natural_lengths, (3,), "cable.natural_lengths")
        if np.any(lengths <= 0.0):
            raise ConfigError("cable.natural_lengths must be positive")
        _set(self,
             stiffness=_positive_scalar(self.stiffness, "cable.stiffness"),
             natural_lengths=lengths,
             diameter_mm=_positive_scalar(self.diameter_mm, "cable.diameter_mm"))


@dataclass(frozen=True, eq=False)
class MotorSpec:
    """Stepper motor rating and driver resolution."""

    max_torque: float     # N m
    max_speed_rpm: float  # RPM
    ppr: int              # pulses per revolution

    def __post_init__(self):
        ppr = self.ppr
        if int(ppr) != ppr:
            raise ConfigError("motor.ppr must be an integer")
        ppr = int(ppr)
        if not PPR_MIN <= ppr <= PPR_MAX:
            raise ConfigError(f"motor.ppr must be between {PPR_MIN} and {PPR_MAX}, got {ppr}")
        _set(self,
             max_torque=_positive_scalar(self.max_torque, "motor.max_torque"),
             max_speed_rpm=_positive_scalar(self.max_speed_rpm, "motor.max_speed_rpm"),
             ppr=ppr)

    @property
    def max_speed_rad(self) -> float:
        return self.max_speed_rpm * 2.0 * np.pi / 60.0


@dataclass(frozen=True, eq=False)
class SimParams:
    """Integration settings for the time-domain simulator."""

    dt: float = 1e-4          # s
    duration: float = 1.0     # s
    damping: float = 0.0      # N s/m, viscous, on payload translation
    gravity: float = GRAVITY  # m/s^2

    def __post_init__(self):
        duration = _finite_scalar(self.duration, "sim.duration")
        if duration < 0.0:
            raise ConfigError("sim.duration must be non-negative")
        damping = _finite_scalar(self.damping, "sim.damping")
        if damping < 0.0:
            raise ConfigError("sim.damping must be non-negative")
        gravity = _finite_scalar(self.gravity, "sim.gravity")
        if gravity < 0.0:
            raise ConfigError("sim.gravity must be non-negative")
        _set(self,
             dt=_positive_scalar(self.dt, "sim.dt"),
             duration=duration, damping=damping, gravity=gravity)


@dataclass(frozen=True, eq=False)
class PayloadState:
    """Payload rigid-body state: position, velocity, attitude, body rates."""

    position: np.ndarray          # (3,) m, world
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))   # m/s
    orientation: np.ndarray = field(default_factory=quaternions.identity)  # (w,x,y,z)
    angular_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))  # rad/s, body

    def __post_init__(self):
        q = _finite_array(self.orientation, (4,), "state.orientation")
        norm = np.linalg.norm(q)
        if abs(norm - 1.0) > 1e-9:
            raise ConfigError(f"state.orientation must be unit-norm, |q| = {norm}")
        q = q / norm
        q.flags.writeable = False
        _set(self,
             position=_finite_array(self.position, (3,), "state.position"),
             velocity=_finite_array(self.velocity, (3,), "state.velocity"),
             orientation=q,
             angular_velocity=_finite_array(self.angular_velocity, (3,), "state.angular_velocity"))

    @classmethod
    def at_rest(cls, position, orientation=None) -> "PayloadState":
        if orientation is None:
            orientation = quaternions.identity()
        return cls(position=position, orientation=orientation)


def cylinder_inertia(mass: float, radius: float, height: float) -> np.ndarray:
    """Principal inertia of a solid cylinder, axis along body z."""
    ixx = mass * (3.0 * radius**2 + height**2) / 12.0
    izz = 0.5 * mass * radius**2
    return np.diag([ixx, ixx, izz])
