"""Rigid-body rotational dynamics of a quadrotor and its actuator limits.

State vectors are plain float ndarrays of shape (6,) ordered
[phi, phi_dot, theta, theta_dot, psi, psi_dot] (angles rad, rates rad/s).
Torque vectors are shape (3,) body-frame [tau_phi, tau_theta, tau_psi] in
N*m, motor speeds shape (4,) in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ANGLE_IDX = np.array([0, 2, 4])
RATE_IDX = np.array([1, 3, 5])

_POSITIVE_FIELDS = ("Ixx", "Iyy", "Izz", "m", "g", "d", "b", "k", "w_max")


@dataclass(frozen=True)
class QuadParams:
    """Physical constants of the airframe.

    Defaults describe the reference vehicle used throughout the test suite.
    ``w_min``, the per-motor speed that balances gravity at hover, is derived
    from the thrust balance m*g = 4*b*w_min^2 and must stay below ``w_max``.
    """

    Ixx: float = 0.0213        # kg m^2, roll inertia
    Iyy: float = 0.02217       # kg m^2, pitch inertia
    Izz: float = 0.0282        # kg m^2, yaw inertia
    m: float = 1.587           # kg
    g: float = 9.81            # m/s^2
    d: float = 0.243           # m, moment arm
    b: float = 3.7102e-5       # N s^2, propeller thrust coefficient
    k: float = 7.6933e-7       # N m s^2, propeller drag coefficient
    w_max: float = 494.27      # rad/s, max propeller speed
    soft_rate_limits: tuple[float, float, float] = (35.0, 35.0, 35.0)

    def __post_init__(self):
        for name in _POSITIVE_FIELDS:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"QuadParams.{name} must be strictly positive, got {value!r}")
        soft = tuple(float(v) for v in self.soft_rate_limits)
        if len(soft) != 3 or any(not (math.isfinite(v) and v > 0.0) for v in soft):
            raise ValueError(f"QuadParams.soft_rate_limits must be 3 positive rates, got {self.soft_rate_limits!r}")
        object.__setattr__(self, "soft_rate_limits", soft)
        if not self.w_min < self.w_max:
            raise ValueError(
                f"hover speed w_min={self.w_min:.3f} rad/s must stay below w_max={self.w_max:.3f} rad/s"
            )

    @property
    def w_min(self) -> float:
        """Per-motor speed at hover, sqrt(m*g / (4*b))."""
        return math.sqrt(self.m * self.g / (4.0 * self.b))

    @property
    def inertia(self) -> np.ndarray:
        return np.array([self.Ixx, self.Iyy, self.Izz])


@dataclass(frozen=True, eq=False)
class LinearModel:
    """LTI model x_dot = A x + B u, y = C x + D u, linearized at hover."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray


@dataclass(frozen=True, eq=False)
class InputLimits:
    """Symmetric torque bounds reachable by the motors, U_min = -U_max."""

    U_max: np.ndarray
    U_min: np.ndarray

    def __post_init__(self):
        if np.any(self.U_max <= 0.0):
            raise ValueError(f"InputLimits.U_max components must be positive, got {self.U_max}")
        if not np.array_equal(self.U_min, -self.U_max):
            raise ValueError("InputLimits.U_min must equal -U_max")


@dataclass(frozen=True, eq=False)
class StateLimits:
    """Hard (torque-integral) and soft (sensor range) 6-vector state bounds."""

    hard: np.ndarray
    soft: np.ndarray

    def __post_init__(self):
        for name, vec in (("hard", self.hard), ("soft", self.soft)):
            if vec.shape != (6,):
                raise ValueError(f"StateLimits.{name} must have shape (6,)")
            if not np.all(vec[ANGLE_IDX] == math.pi):
                raise ValueError(f"StateLimits.{name} angle entries must equal pi exactly")
        if np.any(self.soft[RATE_IDX] > self.hard[RATE_IDX]):
            raise ValueError(
                "soft rate limits exceed hard rate limits; the configured episode is too "
                f"short for soft limits {self.soft[RATE_IDX]} (hard {self.hard[RATE_IDX]})"
            )


def rotation_matrix(phi: float, theta: float, psi: float) -> np.ndarray:
    """Body-fixed to earth-fixed rotation for roll/pitch/yaw Euler angles."""
    if not all(math.isfinite(a) for a in (phi, theta, psi)):
        raise ValueError(f"rotation_matrix angles must be finite, got {(phi, theta, psi)!r}")
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    return np.array(
        [
            [cpsi * cth, cpsi * sth * sphi - spsi * cphi, cpsi * sth * cphi + spsi * sphi],
            [spsi * cth, spsi * sth * sphi + cpsi * cphi, spsi * sth * cphi - cpsi * sphi],
            [-sth, cth * sphi, cth * cphi],
        ]
    )


def nonlinear_deriv(x: np.ndarray, u: np.ndarray, p: QuadParams, out: np.ndarray | None = None) -> np.ndarray:
    """Euler rotational equations for a rigid symmetric body.

    phi_ddot   = ((Iyy - Izz) * theta_dot * psi_dot + U1) / Ixx
    theta_ddot = ((Izz - Ixx) * phi_dot   * psi_dot + U2) / Iyy
    psi_ddot   = ((Ixx - Iyy) * phi_dot   * theta_dot + U3) / Izz
    """
    if out is None:
        out = np.empty(6)
    phi_dot = x[1]
    theta_dot = x[3]
    psi_dot = x[5]
    out[0] = phi_dot
    out[1] = ((p.Iyy - p.Izz) * theta_dot * psi_dot + u[0]) / p.Ixx
    out[2] = theta_dot
    out[3] = ((p.Izz - p.Ixx) * phi_dot * psi_dot + u[1]) / p.Iyy
    out[4] = psi_dot
    out[5] = ((p.Ixx - p.Iyy) * phi_dot * theta_dot + u[2]) / p.Izz
    return out


def linear_deriv(x: np.ndarray, u: np.ndarray, model: LinearModel, out: np.ndarray | None = None) -> np.ndarray:
    """Hover-linearized derivative A x + B u."""
    d = model.A @ x
    d += model.B @ u
    if out is None:
        return d
    out[:] = d
    return out


def build_linear_model(p: QuadParams) -> LinearModel:
    """Hover linearization: integrator chains per axis, torque over inertia."""
    A = np.zeros((6, 6))
    A[0, 1] = 1.0
    A[2, 3] = 1.0
    A[4, 5] = 1.0
    B = np.zeros((6, 3))
    B[1, 0] = 1.0 / p.Ixx
    B[3, 1] = 1.0 / p.Iyy
    B[5, 2] = 1.0 / p.Izz
    return LinearModel(A=A, B=B, C=np.eye(6), D=np.zeros((6, 3)))


def compute_input_limits(p: QuadParams) -> InputLimits:
    """Torque bounds from the motor speed envelope.

    U_max = [d*b*(w_max^2 - w_min^2), d*b*(w_max^2 - w_min^2), 2*k*(w_max^2 - w_min^2)]
    with the factor 2 on the yaw channel only.
    """
    spread = p.w_max**2 - p.w_min**2
    u_max = np.array([p.d * p.b * spread, p.d * p.b * spread, 2.0 * p.k * spread])
    return InputLimits(U_max=u_max, U_min=-u_max)


def compute_hard_state_limits(p: QuadParams, t_start: float, t_end: float) -> np.ndarray:
    """Rates reachable by holding U_max over [t_start, t_end]; angles bounded by pi."""
    if t_end < t_start:
        raise ValueError("t_end must not precede t_start")
    duration = t_end - t_start
    u_max = compute_input_limits(p).U_max
    limits = np.empty(6)
    limits[ANGLE_IDX] = math.pi
    limits[RATE_IDX] = u_max / p.inertia * duration
    return limits


def soft_state_limits(p: QuadParams) -> np.ndarray:
    """Practical bounds: angles pi, rates capped at the gyro measurement range."""
    limits = np.empty(6)
    limits[ANGLE_IDX] = math.pi
    limits[RATE_IDX] = p.soft_rate_limits
    return limits


def motors_to_torques(w: np.ndarray, p: QuadParams) -> np.ndarray:
    """Body torques produced by the four propellers.

    U1 = d*b*(w4^2 - w2^2), U2 = d*b*(w1^2 - w3^2),
    U3 = k*(w1^2 + w3^2 - w2^2 - w4^2).
    """
    w1s, w2s, w3s, w4s = w[0] ** 2, w[1] ** 2, w[2] ** 2, w[3] ** 2
    return np.array(
        [
            p.d * p.b * (w4s - w2s),
            p.d * p.b * (w1s - w3s),
            p.k * (w1s + w3s - w2s - w4s),
        ]
    )


def mix_torques_to_motors(
    u: np.ndarray, total_thrust: float, p: QuadParams
) -> tuple[np.ndarray, np.ndarray]:
    """Allocate body torques plus a total-thrust constraint to motor speeds.

    The three torque equations are closed with T = b * sum(w_i^2), giving a
    unique solution for the squared speeds:

        w1^2 = T/(4b) + U2/(2db) + U3/(4k)
        w2^2 = T/(4b) - U1/(2db) - U3/(4k)
        w3^2 = T/(4b) - U2/(2db) + U3/(4k)
        w4^2 = T/(4b) + U1/(2db) - U3/(4k)

    Squared speeds are clamped to [0, w_max^2]; the returned realized torque
    is recomputed from the clamped speeds, so saturation shows up as
    realized != u rather than as an error.
    """
    if not total_thrust >= 0.0:
        raise ValueError(f"total_thrust must be nonnegative, got {total_thrust!r}")
    base = total_thrust / (4.0 * p.b)
    roll = u[0] / (2.0 * p.d * p.b)
    pitch = u[1] / (2.0 * p.d * p.b)
    yaw = u[2] / (4.0 * p.k)
    w_sq = np.array([base + pitch + yaw, base - roll - yaw, base - pitch + yaw, base + roll - yaw])
    np.clip(w_sq, 0.0, p.w_max**2, out=w_sq)
    w = np.sqrt(w_sq)
    return w, motors_to_torques(w, p)


def rpm_to_rad_per_s(rpm: float) -> float:
    """Convert rotations per minute to rad/s."""
    return rpm * 2.0 * math.pi / 60.0
