"""Closed linear dynamics of the deviation second moments.

For the prey-birth-rate noise placement, multiplying the deviation
equations by the deviations and averaging over an ensemble closes on the
triple psi = (<dx^2>, <dy^2>, <dx*dy>):

    d psi / dt = L psi + phi

    L = | 2(1 - y_st)      0          -2 x_st     |
        | 0                2(x_st-1)   2 y_st     |
        | y_st            -x_st        x_st - y_st|

    phi = (x_st**2 * amplitude**2, 0, 0)

The diagonal of the covariance row is the Jacobian trace, so the
homogeneous part decays exactly when the stationary point is locally
stable.  The source is the equal-time correlation 2*x_st*<xi*dx> of the
driven linear system, whose boundary-instant value is x_st*amplitude**2/2;
this matches what an ensemble of the linearized system actually measures.
At the classic point (1, 1) the trace var_x + var_y grows exactly as
amplitude**2 * t, and the solution has the closed form

    var_x  = (amplitude**2/2) * (t + sin(2t)/2)
    var_y  = (amplitude**2/2) * (t - sin(2t)/2)
    cov_xy = (amplitude**2/4) * (1 - cos(2t))
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrate import _require_point, step_count, time_grid
from .model import FluxParams

__all__ = [
    "MomentMatrix",
    "MomentSeries",
    "MomentState",
    "closed_form_zero_flux",
    "moment_matrix",
    "solve_moments",
]


@dataclass(frozen=True)
class MomentState:
    """Second moments of the deviations at one instant."""

    var_x: float
    var_y: float
    cov_xy: float


@dataclass(frozen=True)
class MomentMatrix:
    """Generator L and source phi of the moment dynamics."""

    l: np.ndarray
    phi: np.ndarray


@dataclass(frozen=True)
class MomentSeries:
    """Moment triple on a uniform time grid."""

    times: np.ndarray
    var_x: np.ndarray
    var_y: np.ndarray
    cov_xy: np.ndarray

    @property
    def trace(self) -> np.ndarray:
        return self.var_x + self.var_y

    def state_at(self, k: int) -> MomentState:
        return MomentState(
            float(self.var_x[k]), float(self.var_y[k]), float(self.cov_xy[k])
        )


def moment_matrix(x_st: float, y_st: float, amplitude: float) -> MomentMatrix:
    """Build (L, phi) from the stationary populations and noise amplitude."""
    l = np.array(
        [
            [2.0 * (1.0 - y_st), 0.0, -2.0 * x_st],
            [0.0, 2.0 * (x_st - 1.0), 2.0 * y_st],
            [y_st, -x_st, x_st - y_st],
        ]
    )
    phi = np.array([x_st * x_st * amplitude * amplitude, 0.0, 0.0])
    return MomentMatrix(l=l, phi=phi)


def solve_moments(
    f: FluxParams,
    amplitude: float,
    dt: float,
    t_end: float,
    initial: MomentState = MomentState(0.0, 0.0, 0.0),
) -> MomentSeries:
    """Integrate the moment dynamics from psi(0) with 4th-order steps.

    The system is advanced regardless of regime: at a locally stable point
    the homogeneous part decays and the source drives a slow spread; at an
    unstable point the moments grow exponentially, as they should.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    analysis = _require_point(f)
    mm = moment_matrix(analysis.x_st, analysis.y_st, amplitude)
    l, phi = mm.l, mm.phi
    n = step_count(t_end, dt)
    out = np.empty((n + 1, 3))
    psi = np.array([initial.var_x, initial.var_y, initial.cov_xy], dtype=float)
    out[0] = psi
    for k in range(n):
        k1 = l @ psi + phi
        k2 = l @ (psi + 0.5 * dt * k1) + phi
        k3 = l @ (psi + 0.5 * dt * k2) + phi
        k4 = l @ (psi + dt * k3) + phi
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = psi
    return MomentSeries(
        times=time_grid(t_end, dt),
        var_x=out[:, 0],
        var_y=out[:, 1],
        cov_xy=out[:, 2],
    )


def closed_form_zero_flux(amplitude: float, t):
    """Exact moment triple at the classic point (1, 1); t may be an array.

    Serves as an independent check on solve_moments: var_x + var_y equals
    amplitude**2 * t identically.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be >= 0")
    a2 = amplitude * amplitude
    var_x = 0.5 * a2 * (t + 0.5 * np.sin(2.0 * t))
    var_y = 0.5 * a2 * (t - 0.5 * np.sin(2.0 * t))
    cov = 0.25 * a2 * (1.0 - np.cos(2.0 * t))
    if t.ndim == 0:
        return MomentState(float(var_x), float(var_y), float(cov))
    return MomentState(var_x, var_y, cov)
