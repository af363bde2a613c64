"""Convergence-region mapping around a locally stable stationary point.

A start converges when the deterministic flow enters the disk of radius
eps_in about the stationary point and stays inside it for one full period
estimate 2*pi/|Im lambda| (orbits can brush past the focus and still
escape, so entry alone is not enough; for a non-oscillatory point the
dwell requirement is dropped).  A start diverges when the state norm
exceeds r_out or the trajectory leaves the open positive quadrant.  When
the horizon t_max runs out first the start stays UNDECIDED; boundary cells
are reported as such, never folded into DIVERGED.

Grid starts that are already outside the open positive quadrant are
NON_PHYSICAL: they are not population states to begin with.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .integrate import rk4_full_step, step_count
from .model import FluxParams, State
from .stability import Regime, steady_state

CELL_CHUNK = 4096  # grid cells per work chunk; fixed so that results never
                   # depend on the worker count

__all__ = ["BasinGrid", "BasinOutcome", "NotStableRegime", "converges", "map_basin"]


class NotStableRegime(Exception):
    """Basin mapping needs a locally stable stationary point."""


class BasinOutcome(Enum):
    CONVERGED = 0
    DIVERGED = 1
    NON_PHYSICAL = 2
    UNDECIDED = 3

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
    BasinOutcome.CONVERGED: "converged",
    BasinOutcome.DIVERGED: "diverged",
    BasinOutcome.NON_PHYSICAL: "non-physical",
    BasinOutcome.UNDECIDED: "undecided",
}

_COLORS = {
    BasinOutcome.CONVERGED: (0, 200, 0),
    BasinOutcome.DIVERGED: (255, 0, 0),
    BasinOutcome.NON_PHYSICAL: (0, 0, 0),
    BasinOutcome.UNDECIDED: (128, 128, 128),
}


@dataclass(frozen=True)
class BasinGrid:
    """Row-major outcomes: outcomes[i, j] is the start (x_values[j], y_values[i])."""

    x_values: np.ndarray
    y_values: np.ndarray
    outcomes: np.ndarray

    def outcome_at(self, i: int, j: int) -> BasinOutcome:
        return BasinOutcome(int(self.outcomes[i, j]))

    def converged_fraction(self) -> float:
        return float(np.mean(self.outcomes == BasinOutcome.CONVERGED.code))


def _require_stable(f: FluxParams):
    analysis = steady_state(f)
    if analysis.regime is not Regime.STABLE:
        raise NotStableRegime(
            f"flux ({f.bx}, {f.by}) is {analysis.regime.label}; convergence "
            "regions are defined only around locally stable points"
        )
    return analysis


def _classify_starts(
    starts: np.ndarray,
    f: FluxParams,
    x_st: float,
    y_st: float,
    dwell: float,
    t_max: float,
    eps_in: float,
    r_out: float,
    dt: float,
) -> np.ndarray:
    """Outcome codes for an array of starts, advanced in lockstep."""
    x = starts[:, 0].astype(float).copy()
    y = starts[:, 1].astype(float).copy()
    m = len(x)
    out = np.full(m, BasinOutcome.UNDECIDED.code, dtype=np.int8)
    out[(x <= 0.0) | (y <= 0.0)] = BasinOutcome.NON_PHYSICAL.code
    active = out == BasinOutcome.UNDECIDED.code
    inside_since = np.full(m, np.nan)
    dist = np.hypot(x - x_st, y - y_st)
    entered = active & (dist <= eps_in)
    inside_since[entered] = 0.0
    if dwell <= 0.0:
        out[entered] = BasinOutcome.CONVERGED.code
        active[entered] = False
    n = step_count(t_max, dt)
    bx, by = f.bx, f.by
    for k in range(1, n + 1):
        if not active.any():
            break
        idx = np.where(active)[0]
        xa, ya = rk4_full_step(x[idx], y[idx], bx, by, dt)
        x[idx], y[idx] = xa, ya
        t = k * dt
        bad = (
            ~np.isfinite(xa)
            | ~np.isfinite(ya)
            | (xa <= 0.0)
            | (ya <= 0.0)
            | (np.hypot(xa, ya) > r_out)
        )
        inside = np.hypot(xa - x_st, ya - y_st) <= eps_in
        since = inside_since[idx]
        since[~inside] = np.nan
        fresh = inside & np.isnan(since)
        since[fresh] = t
        inside_since[idx] = since
        done_conv = inside & (t - since >= dwell) & ~bad
        out[idx[bad]] = BasinOutcome.DIVERGED.code
        out[idx[done_conv]] = BasinOutcome.CONVERGED.code
        active[idx[bad | done_conv]] = False
    return out


def _dwell_time(analysis) -> float:
    im = abs(analysis.lambda1.imag)
    return 2.0 * np.pi / im if im > 0.0 else 0.0


def converges(
    f: FluxParams,
    start: State,
    t_max: float = 500.0,
    eps_in: float = 1e-3,
    r_out: float = 1e3,
    dt: float = 0.01,
) -> BasinOutcome:
    """Outcome of one deterministic start (see module docstring)."""
    analysis = _require_stable(f)
    codes = _classify_starts(
        np.array([[start.x, start.y]]),
        f,
        analysis.x_st,
        analysis.y_st,
        _dwell_time(analysis),
        t_max,
        eps_in,
        r_out,
        dt,
    )
    return BasinOutcome(int(codes[0]))


def map_basin(
    f: FluxParams,
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    step: float,
    t_max: float = 500.0,
    eps_in: float = 1e-3,
    r_out: float = 1e3,
    dt: float = 0.01,
    threads: int = 1,
) -> BasinGrid:
    """Apply the convergence test to every node of a uniform state grid.

    Cells are processed in fixed-size chunks and written back by index, so
    the outcome grid does not depend on traversal order or worker count.
    """
    from .stability import _axis  # same node convention as the regime grid

    if threads < 1:
        raise ValueError("threads must be >= 1")
    analysis = _require_stable(f)
    xs = _axis(x_range[0], x_range[1], step)
    ys = _axis(y_range[0], y_range[1], step)
    mesh_x, mesh_y = np.meshgrid(xs, ys)
    starts = np.column_stack([mesh_x.ravel(), mesh_y.ravel()])
    dwell = _dwell_time(analysis)

    def work(chunk: np.ndarray) -> np.ndarray:
        return _classify_starts(
            chunk, f, analysis.x_st, analysis.y_st, dwell, t_max, eps_in, r_out, dt
        )

    chunks = [starts[lo : lo + CELL_CHUNK] for lo in range(0, len(starts), CELL_CHUNK)]
    if threads == 1 or len(chunks) == 1:
        parts = [work(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    codes = np.concatenate(parts).reshape(len(ys), len(xs))
    return BasinGrid(x_values=xs, y_values=ys, outcomes=codes)
