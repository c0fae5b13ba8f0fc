"""Time-domain simulation of the suspended payload on unilateral elastic cables.

The payload is a 6-DOF rigid body. Each cable pulls along its line of action
with tension k*(l - lN) while stretched and goes slack (zero force) when the
geometric length drops below the commanded natural length. Natural lengths
come from a winch profile sampled on a uniform grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quaternions
from .kinematics import DegenerateCableError, cable_geometry
from .rig import CableSpec, ConfigError, PayloadSpec, PayloadState, RobotGeometry, SimParams

# fixed-step RK4 must resolve the cable spring frequency sqrt(k/m)
DT_SAFETY_FACTOR = 0.05


@dataclass(frozen=True, eq=False)
class WinchProfile:
    """Commanded natural length of each cable, uniformly sampled.

    Values between samples are linearly interpolated; outside the sampled
    window the end values are held.
    """

    sample_period: float
    lengths: np.ndarray  # (N, 3) metres

    def __post_init__(self):
        lengths = np.asarray(self.lengths, dtype=float)
        if lengths.ndim != 2 or lengths.shape[1] != 3 or lengths.shape[0] < 2:
            raise ValueError("winch lengths must have shape (N >= 2, 3)")
        if not np.all(np.isfinite(lengths)):
            raise ValueError("winch lengths must be finite")
        if np.any(lengths <= 0.0):
            raise ValueError("winch natural lengths must be positive")
        if self.sample_period <= 0.0:
            raise ValueError("winch sample period must be positive")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "sample_period", float(self.sample_period))

    @property
    def duration(self) -> float:
        return (self.lengths.shape[0] - 1) * self.sample_period

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.lengths.shape[0]) * self.sample_period

    def natural_lengths(self, t: float) -> np.ndarray:
        u = t / self.sample_period
        i = int(u)
        last = self.lengths.shape[0] - 1
        if i < 0:
            return self.lengths[0]
        if i >= last:
            return self.lengths[last]
        f = u - i
        return self.lengths[i] * (1.0 - f) + self.lengths[i + 1] * f

    def hold(self, extra: float) -> "WinchProfile":
        """Extend the profile by holding the final lengths for ``extra`` seconds."""
        n = int(np.ceil(extra / self.sample_period))
        if n <= 0:
            return self
        tail = np.repeat(self.lengths[-1][None, :], n, axis=0)
        return WinchProfile(self.sample_period, np.vstack([self.lengths, tail]))

    @classmethod
    def constant(cls, lengths, duration: float, sample_period: float = 1e-3) -> "WinchProfile":
        n = max(2, int(np.ceil(duration / sample_period)) + 1)
        table = np.repeat(np.asarray(lengths, dtype=float)[None, :], n, axis=0)
        return cls(sample_period, table)


@dataclass(frozen=True, eq=False)
class StateDerivative:
    velocity: np.ndarray
    acceleration: np.ndarray
    orientation_rate: np.ndarray
    angular_acceleration: np.ndarray


@dataclass(frozen=True, eq=False)
class SimTrace:
    """Sampled simulation output; row k is time t[k]."""

    t: np.ndarray                 # (N,)
    position: np.ndarray          # (N, 3)
    velocity: np.ndarray          # (N, 3)
    orientation: np.ndarray       # (N, 4)
    angular_velocity: np.ndarray  # (N, 3)
    tension: np.ndarray           # (N, 3)
    length: np.ndarray            # (N, 3)
    natural_length: np.ndarray    # (N, 3)

    def state_at(self, index: int) -> PayloadState:
        return PayloadState(position=self.position[index],
                            velocity=self.velocity[index],
                            orientation=self.orientation[index],
                            angular_velocity=self.angular_velocity[index])

    def to_csv(self, path) -> None:
        header = ("t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,"
                  "T1,T2,T3,l1,l2,l3,lN1,lN2,lN3")
        data = np.hstack([self.t[:, None], self.position, self.velocity,
                          self.orientation, self.angular_velocity,
                          self.tension, self.length, self.natural_length])
        with open(path, "w", newline="") as f:
            f.write(header + "\n")
            for row in data:
                f.write(",".join(f"{x:.15g}" for x in row) + "\n")


def cable_tension(length, natural_length, stiffness):
    """Unilateral spring law: k*(l - lN) while taut, zero when slack."""
    stretch = np.maximum(np.asarray(length, dtype=float) - natural_length, 0.0)
    result = stiffness * stretch
    return float(result) if np.ndim(result) == 0 else result


def dynamics_rhs(state: PayloadState, natural_lengths, geom: RobotGeometry,
                 payload: PayloadSpec, cable: CableSpec,
                 params: SimParams) -> StateDerivative:
    """State derivative of the suspended payload at one instant."""
    geo = cable_geometry(state, geom, payload)
    tensions = np.maximum(cable.stiffness * (geo.lengths - np.asarray(natural_lengths, float)), 0.0)
    cable_force = -geo.units.T @ tensions
    gravity = np.array([0.0, 0.0, -payload.mass * params.gravity])
    accel = (cable_force + gravity - params.damping * state.velocity) / payload.mass

    torque_world = -np.cross(geo.offsets, geo.units).T @ tensions
    rot = quaternions.rotation_matrix(state.orientation)
    torque_body = rot.T @ torque_world
    omega = state.angular_velocity
    ang_accel = np.linalg.solve(payload.inertia,
                                torque_body - np.cross(omega, payload.inertia @ omega))
    return StateDerivative(velocity=np.asarray(state.velocity, float),
                           acceleration=accel,
                           orientation_rate=quaternions.derivative(state.orientation, omega),
                           angular_acceleration=ang_accel)


def max_stable_dt(stiffness: float, mass: float) -> float:
    return DT_SAFETY_FACTOR * 2.0 * np.pi / np.sqrt(stiffness / mass)


def integrate(state0: PayloadState, winch: WinchProfile, geom: RobotGeometry,
              payload: PayloadSpec, cable: CableSpec, params: SimParams,
              record_every: int = 1) -> SimTrace:
    """Fixed-step RK4 integration of the payload/cable dynamics.

    The winch profile must cover [0, duration]; the attitude quaternion is
    renormalized after every step. ``record_every`` decimates the trace.
    """
    dt = params.dt
    dt_max = max_stable_dt(cable.stiffness, payload.mass)
    if dt > dt_max:
        raise ConfigError(
            f"sim.dt = {dt:g} s does not resolve the cable spring frequency; "
            f"need dt <= {dt_max:.3e} s for k = {cable.stiffness:g} N/m, "
            f"m = {payload.mass:g} kg")
    if winch.duration < params.duration - 1e-9:
        raise ConfigError(
            f"winch profile covers {winch.duration:g} s but the simulation "
            f"runs {params.duration:g} s")

    n_steps = int(round(params.duration / dt))
    anchors = geom.proximal_anchors
    body_anchors = payload.distal_anchors
    point_attached = payload.is_point_attached
    mass = payload.mass
    inertia = payload.inertia
    inertia_inv = np.linalg.inv(inertia)
    k = cable.stiffness
    c = params.damping
    grav = np.array([0.0, 0.0, -mass * params.gravity])

    table = winch.lengths
    last_row = table.shape[0] - 1
    sp = winch.sample_period

    def natural(t):
        u = t / sp
        i = int(u)
        if i >= last_row:
            return table[last_row]
        if i < 0:
            return table[0]
        f = u - i
        return table[i] * (1.0 - f) + table[i + 1] * f

    def tensions_at(t, y):
        pos = y[0:3]
        if point_attached:
            vec = pos - anchors
        else:
            rot = quaternions.rotation_matrix(y[6:10])
            vec = pos + body_anchors @ rot.T - anchors
        lengths = np.sqrt(np.einsum("ij,ij->i", vec, vec))
        if lengths.min() < 1e-9:
            bad = int(np.argmin(lengths)) + 1
            raise DegenerateCableError(
                f"cable {bad} collapsed to zero length at t = {t:.6f} s")
        l_nat = natural(t)
        tens = np.maximum(k * (lengths - l_nat), 0.0)
        return vec, lengths, l_nat, tens

    def rhs(t, y):
        vec, lengths, _, tens = tensions_at(t, y)
        units = vec / lengths[:, None]
        force = -units.T @ tens + grav
        vel = y[3:6]
        accel = (force - c * vel) / mass
        q = y[6:10]
        omega = y[10:13]
        if point_attached:
            ang_accel = inertia_inv @ (-np.cross(omega, inertia @ omega))
        else:
            rot = quaternions.rotation_matrix(q)
            offsets = body_anchors @ rot.T
            torque_body = rot.T @ (-np.cross(offsets, units).T @ tens)
            ang_accel = inertia_inv @ (torque_body - np.cross(omega, inertia @ omega))
        out = np.empty(13)
        out[0:3] = vel
        out[3:6] = accel
        out[6:10] = quaternions.derivative(q, omega)
        out[10:13] = ang_accel
        return out

    y = np.concatenate([state0.position, state0.velocity,
                        state0.orientation, state0.angular_velocity])
    n_rec = n_steps // record_every + 1
    rec_t = np.empty(n_rec)
    rec_y = np.empty((n_rec, 13))
    rec_tension = np.empty((n_rec, 3))
    rec_length = np.empty((n_rec, 3))
    rec_natural = np.empty((n_rec, 3))

    def record(idx, t, y):
        _, lengths, l_nat, tens = tensions_at(t, y)
        rec_t[idx] = t
        rec_y[idx] = y
        rec_tension[idx] = tens
        rec_length[idx] = lengths
        rec_natural[idx] = l_nat

    record(0, 0.0, y)
    idx = 1
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(n_steps):
        t = step * dt
        k1 = rhs(t, y)
        k2 = rhs(t + half, y + half * k1)
        k3 = rhs(t + half, y + half * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y[6:10] /= np.linalg.norm(y[6:10])
        if (step + 1) % record_every == 0:
            record(idx, (step + 1) * dt, y)
            idx += 1

    return SimTrace(t=rec_t[:idx], position=rec_y[:idx, 0:3],
                    velocity=rec_y[:idx, 3:6], orientation=rec_y[:idx, 6:10],
                    angular_velocity=rec_y[:idx, 10:13],
                    tension=rec_tension[:idx], length=rec_length[:idx],
                    natural_length=rec_natural[:idx])


def energy(state: PayloadState, geom: RobotGeometry, payload: PayloadSpec,
           cable: CableSpec, natural_lengths, g: float) -> float:
    """Total mechanical energy: kinetic + gravitational + elastic."""
    geo = cable_geometry(state, geom, payload)
    stretch = np.maximum(geo.lengths - np.asarray(natural_lengths, dtype=float), 0.0)
    kinetic = 0.5 * payload.mass * float(state.velocity @ state.velocity)
    rotational = 0.5 * float(state.angular_velocity @ payload.inertia @ state.angular_velocity)
    potential = payload.mass * g * float(state.position[2])
    elastic = 0.5 * cable.stiffness * float(stretch @ stretch)
    return kinetic + rotational + potential + elastic


def residual_oscillation(trace: SimTrace, t_settle: float) -> float:
    """Largest payload excursion from its mean position after ``t_settle``."""
    mask = trace.t >= t_settle
    if not np.any(mask):
        raise ValueError(f"trace ends at {trace.t[-1]:g} s, before t_settle = {t_settle:g} s")
    window = trace.position[mask]
    deviation = window - window.mean(axis=0)
    return float(np.max(np.linalg.norm(deviation, axis=1)))
