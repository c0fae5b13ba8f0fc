"""Cable geometry: lengths, unit vectors, Jacobian, IK/FK and static tensions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quaternions import identity, rotation_matrix
from .rig import GRAVITY, PayloadSpec, PayloadState, RobotGeometry


class WorkspaceError(ValueError):
    """Pose outside the reachable/suspended workspace, or degenerate for statics."""


class DegenerateCableError(ValueError):
    """A cable has collapsed to zero length."""


class ConvergenceError(RuntimeError):
    """Forward kinematics did not converge (lengths may be infeasible)."""


@dataclass(frozen=True, eq=False)
class CableGeometryResult:
    """Per-cable geometry at one pose.

    Row i of ``units`` is the unit vector along cable i pointing from the
    frame anchor toward the payload; row i of ``offsets`` is the world-frame
    vector from the payload COM to the cable's attachment point.
    """

    lengths: np.ndarray  # (3,)
    units: np.ndarray    # (3, 3)
    offsets: np.ndarray  # (3, 3)


@dataclass(frozen=True, eq=False)
class StaticTensionResult:
    tensions: np.ndarray  # (3,) N
    feasible: bool        # all tensions non-negative
    residual: float       # wrench balance residual norm (least-squares case)


def cable_geometry(state: PayloadState, geom: RobotGeometry,
                   payload: PayloadSpec) -> CableGeometryResult:
    """Cable lengths, direction unit vectors and world attachment offsets."""
    rot = rotation_matrix(state.orientation)
    offsets = payload.distal_anchors @ rot.T
    vec = state.position + offsets - geom.proximal_anchors
    lengths = np.linalg.norm(vec, axis=1)
    for i in range(3):
        if lengths[i] < 1e-12:
            raise DegenerateCableError(f"cable {i + 1} has zero length (anchor points coincide)")
    units = vec / lengths[:, None]
    return CableGeometryResult(lengths=lengths, units=units, offsets=offsets)


def jacobian(state: PayloadState, geom: RobotGeometry, payload: PayloadSpec) -> np.ndarray:
    """6x3 map from cable tensions to payload wrench; column i = [s_i; b_i x s_i]."""
    geo = cable_geometry(state, geom, payload)
    moments = np.cross(geo.offsets, geo.units)
    return np.vstack([geo.units.T, moments.T])


def anchor_plane(geom: RobotGeometry):
    """Plane through the three proximal anchors: (point, unit normal with n_z > 0)."""
    a = geom.proximal_anchors
    n = np.cross(a[1] - a[0], a[2] - a[0])
    n = n / np.linalg.norm(n)
    if abs(n[2]) < 1e-9:
        raise WorkspaceError("anchor plane is vertical; no suspended workspace below it")
    if n[2] < 0.0:
        n = -n
    return a[0], n


def _plane_distance(point, geom: RobotGeometry) -> float:
    origin, normal = anchor_plane(geom)
    return float(np.dot(normal, np.asarray(point, dtype=float) - origin))


def home_position(geom: RobotGeometry, depth: float) -> np.ndarray:
    """Point on the anchors' centroid axis, ``depth`` metres below their plane."""
    _, normal = anchor_plane(geom)
    return geom.proximal_anchors.mean(axis=0) - depth * normal


def inverse_kinematics(position, geom: RobotGeometry, payload: PayloadSpec,
                       orientation=None) -> np.ndarray:
    """Cable lengths that place the payload at the given pose.

    Raises WorkspaceError for poses strictly above the anchor plane.
    """
    if orientation is None:
        orientation = identity()
    position = np.asarray(position, dtype=float)
    if _plane_distance(position, geom) > 1e-12:
        raise WorkspaceError(f"pose {position.tolist()} is above the anchor plane")
    state = PayloadState(position=position, orientation=orientation)
    return cable_geometry(state, geom, payload).lengths


def forward_kinematics_point(lengths, geom: RobotGeometry, initial_guess=None,
                             tol: float = 1e-10, max_iter: int = 100) -> np.ndarray:
    """Intersect the three anchor spheres (point-attached payload).

    Newton iteration on the length residuals; of the two mirror solutions the
    one below the anchor plane (suspended branch) is returned.
    """
    lengths = np.asarray(lengths, dtype=float)
    if lengths.shape != (3,) or np.any(lengths <= 0.0):
        raise ValueError("lengths must be three positive values")
    anchors = geom.proximal_anchors
    origin, normal = anchor_plane(geom)
    if initial_guess is None:
        x = anchors.mean(axis=0) - float(np.mean(lengths)) * normal
    else:
        x = np.asarray(initial_guess, dtype=float).copy()

    residual = None
    for _ in range(max_iter):
        diff = x - anchors
        dist = np.linalg.norm(diff, axis=1)
        if np.any(dist < 1e-12):
            raise ConvergenceError("iterate collapsed onto an anchor point")
        residual = dist - lengths
        if np.max(np.abs(residual)) < tol:
            d = float(np.dot(normal, x - origin))
            if d > 0.0:
                # mirror solution: the anchors span the reflection plane
                x = x - 2.0 * d * normal
            return x
        jac = diff / dist[:, None]
        try:
            step = np.linalg.solve(jac, residual)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular geometry while solving forward kinematics") from None
        x = x - step
    raise ConvergenceError(
        "no convergence after "
        f"{max_iter} iterations (max residual {np.max(np.abs(residual)):.3e} m); "
        "the requested lengths may not intersect")


def static_tensions(position, geom: RobotGeometry, payload: PayloadSpec,
                    g: float = GRAVITY, orientation=None) -> StaticTensionResult:
    """Cable tensions balancing gravity at a fixed pose.

    For a point-attached payload the 3x3 force balance is solved exactly; with
    offset attachments the 6x3 force/moment system is solved in the
    least-squares sense and the residual norm reported. Negative tensions mark
    the pose as statically infeasible (cables cannot push); the values are
    still returned.
    """
    if orientation is None:
        orientation = identity()
    state = PayloadState(position=position, orientation=orientation)
    geo = cable_geometry(state, geom, payload)
    gravity_force = np.array([0.0, 0.0, -payload.mass * g])
    if payload.is_point_attached:
        s_mat = geo.units.T  # columns s_i
        try:
            tensions = np.linalg.solve(s_mat, gravity_force)
        except np.linalg.LinAlgError:
            raise WorkspaceError("degenerate pose: cable directions are coplanar") from None
        residual = float(np.linalg.norm(s_mat @ tensions - gravity_force))
    else:
        h_mat = np.vstack([geo.units.T, np.cross(geo.offsets, geo.units).T])
        wrench = np.concatenate([gravity_force, np.zeros(3)])
        tensions, *_ = np.linalg.lstsq(h_mat, wrench, rcond=None)
        residual = float(np.linalg.norm(h_mat @ tensions - wrench))
    feasible = bool(np.all(tensions >= -1e-9))
    return StaticTensionResult(tensions=tensions, feasible=feasible, residual=residual)
