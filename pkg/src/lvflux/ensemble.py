"""Ensemble statistics: mean squared displacement and noise correlations.

An ensemble is m independent runs of the same configuration, each on its
own random stream derived from (seed, trajectory index).  Work is split
into fixed-size chunks whose partial sums are combined in chunk order, so
the results are bit-identical no matter how many workers execute the
chunks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .integrate import (
    SimConfig,
    _require_point,
    linear_step_operator,
    noise_column,
    rk4_full_step,
    step_count,
    time_grid,
    trajectory_rng,
)
from .model import sample_noise_steps

CHUNK = 256  # trajectories per accumulation chunk; fixed so that results
             # never depend on the worker count

__all__ = ["CorrelationEstimate", "MsdSeries", "fit_alpha", "noise_displacement_correlation", "run_msd"]


@dataclass(frozen=True)
class MsdSeries:
    """Mean squared displacement from the stationary point over time.

    msd[k] is the raw second moment about the stationary point (not the
    ensemble variance) averaged over the valid_count[k] trajectories that
    are still physical at times[k]; trajectories are excluded from the
    average after their failure time.
    """

    times: np.ndarray
    msd: np.ndarray
    m: int
    valid_count: np.ndarray


class CorrelationEstimate(NamedTuple):
    """Time-averaged ensemble correlations of the step noise with the deviations."""

    xi_dx: float
    xi_dy: float


def _chunk_ranges(m: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + CHUNK, m)) for lo in range(0, m, CHUNK)]


def _draw_chunk(cfg: SimConfig, lo: int, hi: int, n: int) -> np.ndarray:
    xis = np.empty((hi - lo, n))
    for i in range(lo, hi):
        if cfg.noise is None:
            xis[i - lo] = 0.0
        else:
            xis[i - lo] = sample_noise_steps(
                cfg.noise, cfg.dt, n, trajectory_rng(cfg.seed, i)
            )
    return xis


def _accumulate_linear(cfg, analysis, target, lo, hi, n, want_corr):
    """Advance one chunk of deviation trajectories, accumulating sums."""
    c = hi - lo
    xis = _draw_chunk(cfg, lo, hi, n)
    gx, gy = (0.0, 0.0)
    if target is not None:
        gx, gy = noise_column(target, analysis.x_st, analysis.y_st)
    r, q = linear_step_operator(analysis.x_st, analysis.y_st, gx, gy, cfg.dt)
    r00, r01, r10, r11 = r[0, 0], r[0, 1], r[1, 0], r[1, 1]
    qx, qy = q[0], q[1]
    dx = np.full(c, cfg.x0 - analysis.x_st)
    dy = np.full(c, cfg.y0 - analysis.y_st)
    sq_sum = np.empty(n + 1)
    sq_sum[0] = np.sum(dx * dx + dy * dy)
    counts = np.full(n + 1, c, dtype=np.int64)
    corr_x = np.zeros(n) if want_corr else None
    corr_y = np.zeros(n) if want_corr else None
    for k in range(n):
        xi = xis[:, k]
        dx_new = r00 * dx + r01 * dy + xi * qx
        dy_new = r10 * dx + r11 * dy + xi * qy
        if want_corr:
            # half-weight pairing: the state at the boundary between two
            # steps carries half of either step's noise
            corr_x[k] = np.sum(xi * (dx + dx_new)) / 2.0
            corr_y[k] = np.sum(xi * (dy + dy_new)) / 2.0
        dx, dy = dx_new, dy_new
        sq_sum[k + 1] = np.sum(dx * dx + dy * dy)
    return sq_sum, counts, corr_x, corr_y


def _accumulate_full(cfg, analysis, target, lo, hi, n, want_corr):
    """Advance one chunk of full-system trajectories, accumulating sums.

    Trajectories whose populations stop being positive finite numbers are
    frozen and leave the sums from their failure step on.
    """
    c = hi - lo
    xis = _draw_chunk(cfg, lo, hi, n)
    x = np.full(c, float(cfg.x0))
    y = np.full(c, float(cfg.y0))
    x_st, y_st = analysis.x_st, analysis.y_st
    bx, by = cfg.flux.bx, cfg.flux.by
    alive = np.ones(c, dtype=bool)
    sq_sum = np.empty(n + 1)
    sq_sum[0] = np.sum((x - x_st) ** 2 + (y - y_st) ** 2)
    counts = np.empty(n + 1, dtype=np.int64)
    counts[0] = c
    corr_x = np.zeros(n) if want_corr else None
    corr_y = np.zeros(n) if want_corr else None
    all_alive = True
    for k in range(n):
        xi = xis[:, k]
        if all_alive:
            x_new, y_new = rk4_full_step(x, y, bx, by, cfg.dt, target, xi)
        else:
            x_new, y_new = x.copy(), y.copy()
            x_new[alive], y_new[alive] = rk4_full_step(
                x[alive], y[alive], bx, by, cfg.dt, target, xi[alive]
            )
        ok = (
            np.isfinite(x_new)
            & np.isfinite(y_new)
            & (x_new > 0.0)
            & (y_new > 0.0)
        )
        newly_dead = alive & ~ok
        if newly_dead.any():
            # freeze at the last valid state
            x_new[newly_dead] = x[newly_dead]
            y_new[newly_dead] = y[newly_dead]
            alive &= ok
            all_alive = False
        if want_corr:
            # half-weight pairing of the step's draw with its endpoint states
            px = xi * ((x - x_st) + (x_new - x_st)) / 2.0
            py = xi * ((y - y_st) + (y_new - y_st)) / 2.0
            if all_alive:
                corr_x[k] = np.sum(px)
                corr_y[k] = np.sum(py)
            else:
                corr_x[k] = np.sum(px[alive])
                corr_y[k] = np.sum(py[alive])
        x, y = x_new, y_new
        dxs = x - x_st
        dys = y - y_st
        sq = dxs * dxs + dys * dys
        if all_alive:
            sq_sum[k + 1] = np.sum(sq)
            counts[k + 1] = c
        else:
            sq_sum[k + 1] = np.sum(sq[alive])
            counts[k + 1] = int(np.sum(alive))
    return sq_sum, counts, corr_x, corr_y


def _run_chunks(cfg: SimConfig, m: int, threads: int, want_corr: bool):
    if m < 1:
        raise ValueError("ensemble size must be >= 1")
    if threads < 1:
        raise ValueError("threads must be >= 1")
    analysis = _require_point(cfg.flux)
    target = cfg.noise.target if cfg.noise is not None else None
    n = step_count(cfg.t_end, cfg.dt)
    worker = _accumulate_linear if cfg.linearized else _accumulate_full
    ranges = _chunk_ranges(m)
    if threads == 1 or len(ranges) == 1:
        parts = [worker(cfg, analysis, target, lo, hi, n, want_corr) for lo, hi in ranges]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(worker, cfg, analysis, target, lo, hi, n, want_corr)
                for lo, hi in ranges
            ]
            parts = [f.result() for f in futures]  # chunk order, not finish order
    sq_sum = np.zeros(n + 1)
    counts = np.zeros(n + 1, dtype=np.int64)
    corr_x = np.zeros(n) if want_corr else None
    corr_y = np.zeros(n) if want_corr else None
    for part in parts:
        sq_sum += part[0]
        counts += part[1]
        if want_corr:
            corr_x += part[2]
            corr_y += part[3]
    return analysis, n, sq_sum, counts, corr_x, corr_y


def run_msd(cfg: SimConfig, m: int, threads: int = 1) -> MsdSeries:
    """Mean squared displacement about the stationary point over m runs.

    Full or linearized dynamics per cfg.linearized; msd(0) is exactly the
    squared distance of the initial point from the stationary point.
    """
    analysis, n, sq_sum, counts, _, _ = _run_chunks(cfg, m, threads, want_corr=False)
    with np.errstate(invalid="ignore", divide="ignore"):
        msd = np.where(counts > 0, sq_sum / counts, np.nan)
    return MsdSeries(
        times=time_grid(cfg.t_end, cfg.dt),
        msd=msd,
        m=m,
        valid_count=counts,
    )


def fit_alpha(
    series: MsdSeries,
    amplitude: float,
    t_min: float | None = None,
    t_max: float | None = None,
) -> float:
    """Slope of msd vs t through the origin over a window, in units of
    amplitude**2.

    The default window [t_end/10, t_end] skips the transient that runs
    start away from the stationary point.
    """
    if not (np.isfinite(amplitude) and amplitude > 0.0):
        raise ValueError("amplitude must be > 0 to normalize the slope")
    t_end = float(series.times[-1]) if len(series.times) else 0.0
    if t_min is None:
        t_min = t_end / 10.0
    if t_max is None:
        t_max = t_end
    w = (
        (series.times >= t_min)
        & (series.times <= t_max)
        & (series.valid_count > 0)
        & np.isfinite(series.msd)
    )
    if not w.any():
        raise ValueError(f"empty fit window [{t_min}, {t_max}]")
    t = series.times[w]
    slope = float(np.sum(t * series.msd[w]) / np.sum(t * t))
    return slope / (amplitude * amplitude)


def noise_displacement_correlation(
    cfg: SimConfig, m: int, t_min: float = 0.0, threads: int = 1
) -> CorrelationEstimate:
    """Estimate the equal-time correlations <xi*dx> and <xi*dy>.

    Each step pairs its own noise draw with the half-weight average of the
    step's endpoint deviations (the end state carries the step's full noise
    increment, the start state none of it; their mean is what the
    delta-correlated limit assigns to the shared boundary instant).  The
    ensemble averages are then time-averaged over steps ending at
    t >= t_min.
    """
    if cfg.noise is None:
        raise ValueError("noise_displacement_correlation requires cfg.noise")
    _, n, _, counts, corr_x, corr_y = _run_chunks(cfg, m, threads, want_corr=True)
    if n == 0:
        raise ValueError("horizon too short: no steps to average over")
    step_counts = counts[1:]  # pair count of step k is the survivors at its end
    t_ends = cfg.dt * np.arange(1, n + 1)
    w = (t_ends >= t_min) & (step_counts > 0)
    if not w.any():
        raise ValueError(f"empty averaging window from t_min={t_min}")
    mean_x = corr_x[w] / step_counts[w]
    mean_y = corr_y[w] / step_counts[w]
    return CorrelationEstimate(float(np.mean(mean_x)), float(np.mean(mean_y)))
