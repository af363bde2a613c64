import numpy as np
import pytest

from lvflux import (
    FluxParams,
    MomentState,
    NoStationaryPoint,
    closed_form_zero_flux,
    moment_matrix,
    solve_moments,
    steady_state,
)

A = 0.07


def test_matrix_at_classic_point():
    mm = moment_matrix(1.0, 1.0, A)
    assert np.array_equal(
        mm.l, [[0.0, 0.0, -2.0], [0.0, 0.0, 2.0], [1.0, -1.0, 0.0]]
    )
    assert np.array_equal(mm.phi, [A * A, 0.0, 0.0])


def test_matrix_zero_amplitude_kills_source_only():
    mm = moment_matrix(1.0, 1.0, 0.0)
    assert np.array_equal(mm.phi, [0.0, 0.0, 0.0])
    assert np.array_equal(mm.l, moment_matrix(1.0, 1.0, A).l)


def test_matrix_first_row_off_point():
    mm = moment_matrix(1.65, 1.66, A)
    assert mm.l[0] == pytest.approx([2 * (1 - 1.66), 0.0, -2 * 1.65], abs=1e-12)


def test_matrix_homogeneous_part_decays_when_stable():
    # the generator's spectrum is {2*l1, 2*l2, l1+l2}, so a locally stable
    # point must give a decaying homogeneous flow
    analysis = steady_state(FluxParams(1.1, -1.09))
    mm = moment_matrix(analysis.x_st, analysis.y_st, A)
    assert np.max(np.linalg.eigvals(mm.l).real) < 0.0


def test_zero_flux_trace_is_exactly_linear():
    series = solve_moments(FluxParams(0, 0), A, 0.01, 50.0)
    expected = A * A * series.times
    w = series.times > 0
    rel = np.abs(series.trace[w] - expected[w]) / expected[w]
    assert np.max(rel) < 1e-6


def test_zero_flux_matches_closed_form():
    series = solve_moments(FluxParams(0, 0), A, 0.01, 50.0)
    reference = closed_form_zero_flux(A, series.times)
    for got, want in [
        (series.var_x, reference.var_x),
        (series.var_y, reference.var_y),
        (series.cov_xy, reference.cov_xy),
    ]:
        # components touch zero, so measure against each component's scale
        assert np.max(np.abs(got - want)) <= 1e-4 * np.max(np.abs(want))


def test_cauchy_schwarz_along_series():
    for flux in (FluxParams(0, 0), FluxParams(1.1, -1.09), FluxParams(-0.1, 0.3)):
        series = solve_moments(flux, A, 0.01, 30.0)
        assert np.all(series.cov_xy**2 <= series.var_x * series.var_y + 1e-9)
        assert np.all(series.var_x >= 0.0) and np.all(series.var_y >= 0.0)


def test_zero_amplitude_stays_zero():
    series = solve_moments(FluxParams(0, 0), 0.0, 0.05, 10.0)
    assert np.all(series.var_x == 0.0)
    assert np.all(series.var_y == 0.0)
    assert np.all(series.cov_xy == 0.0)


def test_homogeneous_decay_from_nonzero_start():
    initial = MomentState(1e-4, 1e-4, 0.0)
    series = solve_moments(FluxParams(1.1, -1.09), 0.0, 0.05, 400.0, initial=initial)
    norm = np.sqrt(series.var_x**2 + series.var_y**2 + series.cov_xy**2)
    assert norm[-1] < norm[0]


def test_unstable_regime_grows_but_is_not_an_error():
    series = solve_moments(FluxParams(-0.1, 0.0), A, 0.01, 30.0)
    assert series.trace[-1] > series.trace[len(series.times) // 2] > 0.0


def test_requires_stationary_point():
    with pytest.raises(NoStationaryPoint):
        solve_moments(FluxParams(-1, 2), A, 0.05, 1.0)
    with pytest.raises(NoStationaryPoint):
        solve_moments(FluxParams(0, 1.5), A, 0.05, 1.0)


def test_closed_form_values():
    zero = closed_form_zero_flux(A, 0.0)
    assert (zero.var_x, zero.var_y, zero.cov_xy) == (0.0, 0.0, 0.0)
    at_pi = closed_form_zero_flux(A, np.pi)
    assert at_pi.var_x == pytest.approx(A * A * np.pi / 2, rel=1e-12)
    assert at_pi.var_y == pytest.approx(A * A * np.pi / 2, rel=1e-12)
    assert at_pi.cov_xy == pytest.approx(0.0, abs=1e-17)
    t = np.linspace(0.0, 40.0, 4001)
    series = closed_form_zero_flux(A, t)
    assert np.allclose(series.var_x + series.var_y, A * A * t, rtol=1e-14, atol=1e-18)


def test_closed_form_rejects_negative_time():
    with pytest.raises(ValueError):
        closed_form_zero_flux(A, -1.0)
