import numpy as np
import pytest

from lvflux import (
    FluxParams,
    MsdSeries,
    NoStationaryPoint,
    NoiseSpec,
    NoiseTarget,
    SimConfig,
    fit_alpha,
    integrate_linearized,
    integrate_stochastic,
    noise_displacement_correlation,
    run_msd,
    trajectory_rng,
)

CLASSIC = FluxParams(0.0, 0.0)
A = 0.07


def _cfg(**overrides):
    base = dict(flux=CLASSIC, x0=1.0, y0=1.0, dt=0.05, t_end=10.0,
                noise=NoiseSpec(NoiseTarget.K1, A), seed=3)
    base.update(overrides)
    return SimConfig(**base)


def test_zero_amplitude_at_stationary_point_is_flat():
    cfg = _cfg(noise=NoiseSpec(NoiseTarget.K1, 0.0))
    series = run_msd(cfg, 8)
    assert np.all(series.msd == 0.0)
    assert np.all(series.valid_count == 8)


def test_initial_msd_is_exact_squared_distance():
    series = run_msd(_cfg(x0=2.0, y0=2.0), 16)
    assert series.msd[0] == 2.0


def test_fit_alpha_recovers_exact_lines():
    t = np.linspace(0.0, 50.0, 501)
    ones = np.ones(len(t), dtype=np.int64)
    unit = MsdSeries(times=t, msd=A * A * t, m=1, valid_count=ones)
    assert fit_alpha(unit, A) == pytest.approx(1.0, rel=1e-12)
    double = MsdSeries(times=t, msd=2 * A * A * t, m=1, valid_count=ones)
    assert fit_alpha(double, A) == pytest.approx(2.0, rel=1e-12)


def test_fit_alpha_rejects_bad_inputs():
    t = np.linspace(0.0, 10.0, 11)
    series = MsdSeries(times=t, msd=t.copy(), m=1, valid_count=np.ones(11, dtype=np.int64))
    with pytest.raises(ValueError):
        fit_alpha(series, 0.0)
    with pytest.raises(ValueError):
        fit_alpha(series, A, t_min=20.0, t_max=30.0)


def test_linearized_prey_birth_noise_spreads_linearly():
    # the linearized ensemble follows msd = amplitude^2 * t within the
    # Monte Carlo band 3*A^2*t*sqrt(2/m)
    cfg = _cfg(dt=0.01, t_end=50.0, linearized=True)
    series = run_msd(cfg, 400)
    w = series.times >= 5.0
    t = series.times[w]
    band = 3.0 * A * A * t * np.sqrt(2.0 / 400)
    assert np.all(np.abs(series.msd[w] - A * A * t) <= band)
    assert 0.9 <= fit_alpha(series, A, 5.0, 50.0) <= 1.1


def test_sign_symmetric_placements_give_identical_msd():
    pairs = [
        (NoiseTarget.K1, NoiseTarget.K2),
        (NoiseTarget.K3, NoiseTarget.K4),
        (NoiseTarget.K1, NoiseTarget.FLUX_X),
        (NoiseTarget.K3, NoiseTarget.FLUX_Y),
    ]
    for first, second in pairs:
        a = run_msd(_cfg(noise=NoiseSpec(first, A), linearized=True), 32)
        b = run_msd(_cfg(noise=NoiseSpec(second, A), linearized=True), 32)
        assert np.array_equal(a.msd, b.msd), (first, second)


def test_full_system_dips_before_spreading():
    # off-point start: the orbit first swings toward the stationary point
    series = run_msd(_cfg(x0=2.0, y0=2.0), 100)
    early = series.times <= 10.0
    assert series.msd[0] == 2.0
    assert np.min(series.msd[early]) < 2.0


def test_ensemble_equals_average_of_single_runs():
    cfg = _cfg(t_end=5.0)
    series = run_msd(cfg, 3)
    manual = np.mean(
        [
            (tr.x - 1.0) ** 2 + (tr.y - 1.0) ** 2
            for tr in (
                integrate_stochastic(cfg, rng=trajectory_rng(cfg.seed, i))
                for i in range(3)
            )
        ],
        axis=0,
    )
    assert np.array_equal(series.msd, manual)

    cfg_lin = _cfg(t_end=5.0, linearized=True)
    series_lin = run_msd(cfg_lin, 3)
    manual_lin = np.mean(
        [
            tr.x**2 + tr.y**2
            for tr in (
                integrate_linearized(cfg_lin, rng=trajectory_rng(cfg_lin.seed, i))
                for i in range(3)
            )
        ],
        axis=0,
    )
    assert np.array_equal(series_lin.msd, manual_lin)


def test_results_do_not_depend_on_thread_count():
    cfg = _cfg(t_end=10.0, linearized=True)
    one = run_msd(cfg, 600, threads=1)
    many = run_msd(cfg, 600, threads=3)
    assert np.array_equal(one.msd, many.msd)
    assert np.array_equal(one.valid_count, many.valid_count)


def test_failed_trajectories_are_truncated_not_fatal():
    # additive flux noise can push populations out of the quadrant
    cfg = _cfg(noise=NoiseSpec(NoiseTarget.FLUX_X, 2.0), seed=0)
    series = run_msd(cfg, 64)
    assert np.all(np.diff(series.valid_count) <= 0)
    assert series.valid_count[-1] < 64
    alive = series.valid_count > 0
    assert np.all(np.isfinite(series.msd[alive]))


def test_monte_carlo_band_shrinks_with_m():
    base = dict(flux=CLASSIC, x0=1.0, y0=1.0, dt=0.05, t_end=20.0,
                noise=NoiseSpec(NoiseTarget.K1, A), linearized=True)
    small = run_msd(SimConfig(**base, seed=21), 200).msd[-1]
    large = run_msd(SimConfig(**base, seed=22), 400).msd[-1]
    assert small / large == pytest.approx(1.0, abs=0.35)


def test_msd_needs_stationary_point():
    cfg = SimConfig(flux=FluxParams(-1, 2), x0=1, y0=1, dt=0.05, t_end=1.0,
                    noise=NoiseSpec(NoiseTarget.K1, A))
    with pytest.raises(NoStationaryPoint):
        run_msd(cfg, 4)


def test_correlation_zero_amplitude_is_exactly_zero():
    cfg = _cfg(noise=NoiseSpec(NoiseTarget.K1, 0.0), linearized=True)
    est = noise_displacement_correlation(cfg, 100)
    assert est.xi_dx == 0.0 and est.xi_dy == 0.0


def test_correlation_boundary_values_by_target():
    half = A * A / 2.0
    base = dict(flux=CLASSIC, x0=1.0, y0=1.0, dt=0.01, t_end=20.0,
                seed=5, linearized=True)
    est = noise_displacement_correlation(
        SimConfig(noise=NoiseSpec(NoiseTarget.K1, A), **base), 400
    )
    assert est.xi_dx == pytest.approx(half, rel=0.2)
    assert abs(est.xi_dy) <= 0.2 * half

    est = noise_displacement_correlation(
        SimConfig(noise=NoiseSpec(NoiseTarget.K4, A), **base), 400
    )
    assert est.xi_dy == pytest.approx(-half, rel=0.2)
    assert abs(est.xi_dx) <= 0.2 * half

    est = noise_displacement_correlation(
        SimConfig(noise=NoiseSpec(NoiseTarget.FLUX_Y, A), **base), 400
    )
    assert est.xi_dy == pytest.approx(half, rel=0.2)


def test_correlation_threads_bitwise():
    cfg = _cfg(dt=0.01, t_end=5.0, linearized=True)
    one = noise_displacement_correlation(cfg, 600, threads=1)
    many = noise_displacement_correlation(cfg, 600, threads=4)
    assert one == many
