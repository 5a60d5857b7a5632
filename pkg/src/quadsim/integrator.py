"""Explicit Dormand-Prince 5(4) stepping over a fixed macro grid.

The control input is held constant (zero-order hold) across the whole call.
Internal steps are adaptive but always land exactly on every macro grid
point, so the returned states do not depend on interpolation. All arithmetic
is deterministic: identical inputs give bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IntegrationError

# Dormand-Prince 5(4) tableau. B are the 5th-order weights, E the difference
# between the 5th- and embedded 4th-order weights (local error estimate).
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0

Deriv = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegratorConfig:
    """Solver settings.

    ``fixed_internal_step`` disables error control and forces the given
    internal step size; it exists for convergence-order studies and is not
    used in normal operation.
    """

    sim_frequency: float = 250.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_internal_steps: int = 10_000
    fixed_internal_step: float | None = None

    def __post_init__(self):
        if not self.sim_frequency > 0.0:
            raise ValueError(f"sim_frequency must be positive, got {self.sim_frequency!r}")
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.max_internal_steps < 1:
            raise ValueError("max_internal_steps must be at least 1")
        if self.fixed_internal_step is not None and not self.fixed_internal_step > 0.0:
            raise ValueError("fixed_internal_step must be positive when set")


def _advance_substep(
    deriv: Deriv,
    x: np.ndarray,
    u: np.ndarray,
    t0: float,
    dt: float,
    h: float,
    cfg: IntegratorConfig,
    k1: np.ndarray,
) -> tuple[np.ndarray, float, np.ndarray]:
    """One macro substep [t0, t0 + dt]; returns (x_end, next step size, f(x_end))."""
    t = 0.0
    fixed = cfg.fixed_internal_step
    steps = 0
    while True:
        remaining = dt - t
        if remaining <= 0.0:
            return x, h, k1
        if steps >= cfg.max_internal_steps:
            raise IntegrationError("internal step budget exhausted", t0 + t)
        if fixed is not None:
            h = fixed
        last = h >= remaining * (1.0 - 1e-12)
        h_step = remaining if last else h

        k2 = deriv(x + h_step * (_A21 * k1), u)
        k3 = deriv(x + h_step * (_A31 * k1 + _A32 * k2), u)
        k4 = deriv(x + h_step * (_A41 * k1 + _A42 * k2 + _A43 * k3), u)
        k5 = deriv(x + h_step * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4), u)
        k6 = deriv(x + h_step * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5), u)
        x_new = x + h_step * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = deriv(x_new, u)
        steps += 1

        if not np.all(np.isfinite(x_new)):
            raise IntegrationError("state became non-finite", t0 + t)

        if fixed is not None:
            accept, factor = True, 1.0
        else:
            err_vec = h_step * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(x), np.abs(x_new))
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
            if err == 0.0:
                accept, factor = True, _MAX_FACTOR
            elif err <= 1.0:
                accept = True
                factor = min(_MAX_FACTOR, _SAFETY * err ** -0.2)
            else:
                accept = False
                factor = max(_MIN_FACTOR, _SAFETY * err ** -0.2)

        if accept:
            x = x_new
            k1 = k7  # first-same-as-last: k7 is f at the accepted state
            if last:
                return x, h * factor, k1
            t += h_step
            h = h_step * factor
        else:
            h = h_step * factor


def integrate_grid(
    deriv: Deriv,
    x0: np.ndarray,
    u: np.ndarray,
    n_substeps: int,
    dt_sub: float,
    cfg: IntegratorConfig,
) -> np.ndarray:
    """Integrate with held input u, returning the state at every grid point.

    The result has shape (n_substeps + 1, len(x0)) and starts with x0.
    """
    if n_substeps < 0:
        raise ValueError("n_substeps must be nonnegative")
    if not dt_sub > 0.0:
        raise ValueError("dt_sub must be positive")
    x = np.asarray(x0, dtype=float)
    u = np.asarray(u, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
        raise ValueError("initial state and input must be finite")

    out = np.empty((n_substeps + 1, x.shape[0]))
    out[0] = x
    h = cfg.fixed_internal_step if cfg.fixed_internal_step is not None else dt_sub
    # overflow inside a trial step is legitimate; the finiteness check
    # inside _advance_substep turns it into an IntegrationError
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = deriv(x, u)
        for i in range(n_substeps):
            x, h, k1 = _advance_substep(deriv, x, u, i * dt_sub, dt_sub, h, cfg, k1)
            out[i + 1] = x
    return out


def integrate_interval(
    deriv: Deriv,
    x0: np.ndarray,
    u: np.ndarray,
    n_substeps: int,
    dt_sub: float,
    cfg: IntegratorConfig,
) -> np.ndarray:
    """State after n_substeps grid intervals of dt_sub seconds each."""
    return integrate_grid(deriv, x0, u, n_substeps, dt_sub, cfg)[-1]
