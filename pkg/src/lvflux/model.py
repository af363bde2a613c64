"""Vector field and noise sampling for the open predator-prey system.

The reduced two-species system with constant external fluxes is

    dx/dt = x - x*y + bx
    dy/dt = x*y - y + by

where x, y are prey and predator counts scaled by their classic stationary
values.  A Langevin perturbation may ride on exactly one kinetic coefficient
(or on one flux): the per-step perturbation is drawn with standard deviation
amplitude/sqrt(dt), so that its delta-correlated intensity amplitude**2 does
not depend on the step size.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

_SQRT3 = np.sqrt(3.0)
_TINY = np.nextafter(0.0, 1.0)  # guards log(1/u) at u == 0
_TWO_PI = 2.0 * np.pi


class NoiseTarget(Enum):
    """Which coefficient carries the random perturbation (one per run)."""

    K1 = "k1"            # prey birth rate: (1+xi)*x
    K2 = "k2"            # prey loss from encounters: (1+xi)*x*y
    K3 = "k3"            # predator gain from encounters: (1+xi)*x*y
    K4 = "k4"            # predator death rate: (1+xi)*y
    FLUX_X = "flux-x"    # prey flux: bx + xi
    FLUX_Y = "flux-y"    # predator flux: by + xi


class NoiseDistribution(Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class FluxParams:
    """Constant external fluxes; positive = sponsoring, negative = hunting."""

    bx: float
    by: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.bx) and np.isfinite(self.by)):
            raise ValueError("flux rates must be finite")


@dataclass(frozen=True)
class State:
    """Reduced population pair.  Physical trajectories keep x > 0 and y > 0."""

    x: float
    y: float


@dataclass(frozen=True)
class NoiseSpec:
    """Langevin noise placement: target coefficient, amplitude, sampling law.

    amplitude = 0 makes every stochastic run collapse onto the deterministic
    one computed with the same stepping scheme.
    """

    target: NoiseTarget
    amplitude: float
    distribution: NoiseDistribution = NoiseDistribution.UNIFORM

    def __post_init__(self) -> None:
        if not np.isfinite(self.amplitude) or self.amplitude < 0.0:
            raise ValueError("noise amplitude must be finite and >= 0")


def _rhs(x, y, bx, by, target=None, xi=0.0):
    """Time derivatives for scalars or numpy arrays.

    The perturbation enters additively (xi * term), which makes xi == 0
    reproduce the unperturbed derivatives bit for bit.
    """
    xy = x * y
    dx = x - xy + bx
    dy = xy - y + by
    if target is None:
        return dx, dy
    if target is NoiseTarget.K1:
        return dx + xi * x, dy
    if target is NoiseTarget.K2:
        return dx - xi * xy, dy
    if target is NoiseTarget.K3:
        return dx, dy + xi * xy
    if target is NoiseTarget.K4:
        return dx, dy - xi * y
    if target is NoiseTarget.FLUX_X:
        return dx + xi, dy
    if target is NoiseTarget.FLUX_Y:
        return dx, dy + xi
    raise ValueError(f"unknown noise target: {target!r}")


def deterministic_rhs(s: State, f: FluxParams) -> tuple[float, float]:
    """(dx/dt, dy/dt) of the flux-fed system, evaluated exactly."""
    return _rhs(s.x, s.y, f.bx, f.by)


def perturbed_rhs(
    s: State, f: FluxParams, target: NoiseTarget, xi: float
) -> tuple[float, float]:
    """Derivatives with the perturbation applied to exactly one term.

    K1..K4 scale their kinetic term by (1 + xi); FLUX_X / FLUX_Y shift the
    corresponding flux by xi.  perturbed_rhs(s, f, t, 0.0) equals
    deterministic_rhs(s, f) exactly for every target.
    """
    return _rhs(s.x, s.y, f.bx, f.by, target, xi)


def sample_noise(spec: NoiseSpec, dt: float, rng: np.random.Generator) -> float:
    """Draw one per-step coefficient perturbation.

    Both sampling laws have mean 0 and variance amplitude**2/dt over the
    stream.  Uniform draws are bounded by sqrt(3)*amplitude/sqrt(dt);
    Gaussian draws are unbounded.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    scale = spec.amplitude / np.sqrt(dt)
    if spec.distribution is NoiseDistribution.UNIFORM:
        return float(scale * _SQRT3 * (2.0 * rng.random() - 1.0))
    u1 = rng.random()
    u2 = max(rng.random(), _TINY)
    return float(scale * np.sin(_TWO_PI * u1) * np.sqrt(2.0 * np.log(1.0 / u2)))


def sample_noise_steps(
    spec: NoiseSpec, dt: float, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw n per-step perturbations at once.

    Consumes the generator exactly like n successive sample_noise calls, so
    pre-drawn and step-by-step trajectories see identical noise.
    """
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    scale = spec.amplitude / np.sqrt(dt)
    if spec.distribution is NoiseDistribution.UNIFORM:
        return scale * _SQRT3 * (2.0 * rng.random(n) - 1.0)
    u = rng.random((n, 2))
    u2 = np.maximum(u[:, 1], _TINY)
    return scale * np.sin(_TWO_PI * u[:, 0]) * np.sqrt(2.0 * np.log(1.0 / u2))
