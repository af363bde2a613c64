"""Stationary-point analysis and the five-regime map of the flux plane.

For fluxes (bx, by) the stationary populations, when they exist, are

    x_st = (1 - bx - by)/2 + sqrt(D),   y_st = (1 + bx + by)/2 + sqrt(D),
    D    = (1 - bx - by)**2 / 4 + bx.

The Jacobian at the stationary point has trace x_st - y_st and determinant
x_st + y_st - 1, giving the eigenvalue pair

    lambda = ((x_st - y_st) +- sqrt((x_st - y_st)**2 + 4(1 - x_st - y_st))) / 2

with a complex square root whenever the radicand is negative.  Each flux
pair falls into exactly one of five regimes:

    NO_STATIONARY   D < 0: no stationary solution at all.
    NON_PHYSICAL    x_st <= 0 or y_st <= 0: the solution is not a
                    population state.
    STABLE          both real parts below -EIGEN_TOL: local convergence.
    ZERO_STABILITY  purely imaginary pair: perpetual oscillation with
                    neither convergence nor divergence (the classic system,
                    and on this branch only the line bx + by = 0).
    UNSTABLE        everything else, including real pairs with a zero
                    member.

Exact zero real parts are not reproducible on a float grid, so the
stable/oscillatory/unstable boundaries use the tolerance EIGEN_TOL.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import FluxParams

EIGEN_TOL = 1e-12  # |Re lambda| at or below this counts as zero

__all__ = [
    "EIGEN_TOL",
    "NoStationaryPoint",
    "Regime",
    "RegimeGrid",
    "StationaryAnalysis",
    "classify",
    "eigenvalues",
    "regime_diagram",
    "steady_state",
]


class NoStationaryPoint(Exception):
    """The requested operation needs a physical stationary point."""


class Regime(Enum):
    """Stability class of a flux pair; values are the stable wire codes."""

    NO_STATIONARY = 0
    NON_PHYSICAL = 1
    UNSTABLE = 2
    ZERO_STABILITY = 3
    STABLE = 4

    @property
    def code(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def rgb(self) -> tuple[int, int, int]:
        return _COLORS[self]


_LABELS = {
    Regime.NO_STATIONARY: "no-stationary",
    Regime.NON_PHYSICAL: "non-physical",
    Regime.UNSTABLE: "unstable",
    Regime.ZERO_STABILITY: "zero-stability",
    Regime.STABLE: "stable",
}

_COLORS = {
    Regime.NO_STATIONARY: (255, 0, 0),
    Regime.NON_PHYSICAL: (0, 0, 0),
    Regime.UNSTABLE: (255, 255, 0),
    Regime.ZERO_STABILITY: (150, 75, 0),
    Regime.STABLE: (0, 200, 0),
}


@dataclass(frozen=True)
class StationaryAnalysis:
    """Full local analysis of one flux pair.

    When no stationary solution exists (discriminant < 0) the point and
    eigenvalue fields are None.
    """

    bx: float
    by: float
    exists: bool
    discriminant: float
    x_st: float | None
    y_st: float | None
    lambda1: complex | None
    lambda2: complex | None
    regime: Regime


def eigenvalues(x_st: float, y_st: float) -> tuple[complex, complex]:
    """Jacobian eigenvalue pair at a stationary point (complex when needed)."""
    tr = x_st - y_st
    rad = tr * tr + 4.0 * (1.0 - x_st - y_st)
    root = np.sqrt(complex(rad))
    return (
        complex((tr + root) / 2.0),
        complex((tr - root) / 2.0),
    )


def _analyze_arrays(bx, by):
    """Vectorized analysis kernel shared by the scalar and grid paths.

    Returns (disc, x_st, y_st, re1, im1, re2, im2, codes); point and
    eigenvalue entries are nan where no stationary solution exists.
    """
    bx = np.asarray(bx, dtype=float)
    by = np.asarray(by, dtype=float)
    s = bx + by
    disc = (1.0 - s) ** 2 / 4.0 + bx
    exists = disc >= 0.0
    with np.errstate(invalid="ignore"):
        root = np.sqrt(np.where(exists, disc, np.nan))
        x_st = (1.0 - s) / 2.0 + root
        y_st = (1.0 + s) / 2.0 + root
        tr = x_st - y_st
        rad = tr * tr + 4.0 * (1.0 - x_st - y_st)
        lam_root = np.sqrt(rad.astype(complex))
        lam1 = (tr + lam_root) / 2.0
        lam2 = (tr - lam_root) / 2.0
        re1, im1 = lam1.real, lam1.imag
        re2, im2 = lam2.real, lam2.imag
        nonphysical = (x_st <= 0.0) | (y_st <= 0.0)
        stable = (re1 < -EIGEN_TOL) & (re2 < -EIGEN_TOL)
        oscillatory = (
            (np.abs(re1) <= EIGEN_TOL) & (np.abs(re2) <= EIGEN_TOL) & (im1 != 0.0)
        )
    codes = np.select(
        [~exists, nonphysical, stable, oscillatory],
        [
            Regime.NO_STATIONARY.code,
            Regime.NON_PHYSICAL.code,
            Regime.STABLE.code,
            Regime.ZERO_STABILITY.code,
        ],
        default=Regime.UNSTABLE.code,
    ).astype(np.int8)
    return disc, x_st, y_st, re1, im1, re2, im2, codes


def steady_state(f: FluxParams) -> StationaryAnalysis:
    """Analyze the stationary solution for one flux pair.

    Only the upper branch of the stationary quadratic is reported; the lower
    branch is never a candidate here.  Absence of a solution is a regular
    result, not an error.
    """
    disc, x_st, y_st, re1, im1, re2, im2, code = _analyze_arrays(f.bx, f.by)
    regime = Regime(int(code))
    if regime is Regime.NO_STATIONARY:
        return StationaryAnalysis(
            bx=f.bx,
            by=f.by,
            exists=False,
            discriminant=float(disc),
            x_st=None,
            y_st=None,
            lambda1=None,
            lambda2=None,
            regime=regime,
        )
    return StationaryAnalysis(
        bx=f.bx,
        by=f.by,
        exists=True,
        discriminant=float(disc),
        x_st=float(x_st),
        y_st=float(y_st),
        lambda1=complex(float(re1), float(im1)),
        lambda2=complex(float(re2), float(im2)),
        regime=regime,
    )


def classify(f: FluxParams) -> Regime:
    """Regime label for one flux pair."""
    return steady_state(f).regime


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0.0:
        raise ValueError("step must be > 0")
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("range bounds must be finite")
    if hi < lo:
        raise ValueError(f"inverted range: [{lo}, {hi}]")
    # +1e-9 absorbs representation error in (hi - lo)/step for decimal steps
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


@dataclass(frozen=True)
class RegimeGrid:
    """Row-major regime codes: codes[i, j] classifies (bx_values[j], by_values[i])."""

    bx_values: np.ndarray
    by_values: np.ndarray
    codes: np.ndarray

    def regime_at(self, i: int, j: int) -> Regime:
        return Regime(int(self.codes[i, j]))


def regime_diagram(
    bx_range: tuple[float, float],
    by_range: tuple[float, float],
    step: float,
) -> RegimeGrid:
    """Classify every node of a uniform grid over the flux plane.

    Grid nodes are lo + k*step per axis, floor((hi-lo)/step)+1 of them; the
    classification of each cell matches classify() at the node exactly, and
    the assembly is independent of any evaluation order.
    """
    bx = _axis(bx_range[0], bx_range[1], step)
    by = _axis(by_range[0], by_range[1], step)
    mesh_bx, mesh_by = np.meshgrid(bx, by)
    codes = _analyze_arrays(mesh_bx, mesh_by)[-1]
    return RegimeGrid(bx_values=bx, by_values=by, codes=codes)
