import numpy as np
import pytest

from lvflux import (
    FluxParams,
    Regime,
    classify,
    eigenvalues,
    regime_diagram,
    steady_state,
)


def _random_fluxes(n, seed=0):
    rng = np.random.default_rng(seed)
    return [FluxParams(bx, by) for bx, by in rng.uniform(-3, 3, size=(n, 2))]


def test_classic_point():
    a = steady_state(FluxParams(0, 0))
    assert a.exists and (a.x_st, a.y_st) == (1.0, 1.0)
    assert a.discriminant == 0.25


def test_sponsored_prey_hunted_predator_point():
    a = steady_state(FluxParams(1.1, -1.09))
    assert a.x_st == pytest.approx(1.65, abs=0.01)
    assert a.y_st == pytest.approx(1.66, abs=0.01)


def test_hunted_prey_sponsored_predator_point():
    a = steady_state(FluxParams(-0.1, 0.3))
    assert a.x_st == pytest.approx(0.64, abs=0.01)
    assert a.y_st == pytest.approx(0.84, abs=0.01)


def test_no_solution_below_discriminant_parabola():
    a = steady_state(FluxParams(-1, 2))  # discriminant = -1
    assert not a.exists
    assert a.discriminant == -1.0
    assert a.x_st is None and a.lambda1 is None
    assert a.regime is Regime.NO_STATIONARY


def test_residuals_vanish_where_point_exists():
    for f in _random_fluxes(300):
        a = steady_state(f)
        if not a.exists:
            continue
        assert abs(a.x_st - a.x_st * a.y_st + f.bx) < 1e-10
        assert abs(a.x_st * a.y_st - a.y_st + f.by) < 1e-10


def test_eigenvalues_classic_point_pure_imaginary():
    l1, l2 = eigenvalues(1.0, 1.0)
    assert abs(l1.real) < 1e-12 and abs(l2.real) < 1e-12
    assert abs(l1.imag - 1.0) < 1e-12 and abs(l2.imag + 1.0) < 1e-12


def test_eigenvalues_slow_stable_focus():
    l1, l2 = eigenvalues(1.65, 1.66)
    assert l1.real == pytest.approx(-0.005, abs=1e-12)
    assert abs(l1.imag) == pytest.approx(1.52, abs=0.005)
    assert l2 == l1.conjugate()


def test_eigenvalues_hunted_prey_unstable():
    # flux (-0.1, 0) puts the point at (1.0, 0.9)
    a = steady_state(FluxParams(-0.1, 0.0))
    assert (a.x_st, a.y_st) == pytest.approx((1.0, 0.9), abs=1e-12)
    l1, l2 = eigenvalues(a.x_st, a.y_st)
    assert l1.real == pytest.approx(0.05, abs=1e-12)
    assert l1.imag != 0.0


def test_vieta_identities():
    for f in _random_fluxes(300, seed=5):
        a = steady_state(f)
        if not a.exists:
            continue
        s = a.lambda1 + a.lambda2
        p = a.lambda1 * a.lambda2
        assert abs(s - (a.x_st - a.y_st)) < 1e-10
        assert abs(p - (a.x_st + a.y_st - 1.0)) < 1e-10


def test_complex_branch_real_part_identity():
    # on the oscillatory branch Re lambda = -(bx+by)/2, so pure rotation
    # lives exactly on the line bx + by = 0
    for f in _random_fluxes(300, seed=9):
        a = steady_state(f)
        if not a.exists or a.lambda1.imag == 0.0:
            continue
        assert a.lambda1.real == pytest.approx(-(f.bx + f.by) / 2.0, abs=1e-10)


REGIME_SPOTS = [
    ((0.0, 0.0), Regime.ZERO_STABILITY),
    ((0.1, 0.0), Regime.STABLE),
    ((-0.1, 0.0), Regime.UNSTABLE),
    ((0.0, 0.1), Regime.STABLE),
    ((0.0, -0.1), Regime.UNSTABLE),
    ((0.0, 1.5), Regime.NON_PHYSICAL),
    ((-1.0, 2.0), Regime.NO_STATIONARY),
]


@pytest.mark.parametrize("flux,want", REGIME_SPOTS)
def test_regime_spots(flux, want):
    assert classify(FluxParams(*flux)) is want


def test_stability_threshold_on_predator_flux_axis():
    # with bx = 0, sponsoring predators stabilizes exactly for 0 < by < 1
    for k in range(-200, 201):
        by = k / 100.0
        got = classify(FluxParams(0.0, by))
        if 0 < k < 100:
            assert got is Regime.STABLE, by
        else:
            assert got is not Regime.STABLE, by


def test_zero_stability_is_pinned_at_origin():
    assert classify(FluxParams(0.0, 0.0)) is Regime.ZERO_STABILITY


def test_diagram_single_cell():
    grid = regime_diagram((0.0, 0.0), (0.0, 0.0), 1.0)
    assert grid.codes.shape == (1, 1)
    assert grid.regime_at(0, 0) is Regime.ZERO_STABILITY


def test_diagram_default_grid_shape_and_spots():
    grid = regime_diagram((-2, 2), (-2, 2), 0.01)
    assert grid.codes.shape == (401, 401)
    assert len(grid.bx_values) == 401 and len(grid.by_values) == 401
    j_plus = np.argmin(np.abs(grid.bx_values - 0.1))
    j_minus = np.argmin(np.abs(grid.bx_values + 0.1))
    i_zero = np.argmin(np.abs(grid.by_values))
    assert grid.regime_at(i_zero, j_plus) is Regime.STABLE
    assert grid.regime_at(i_zero, j_minus) is Regime.UNSTABLE


def test_diagram_matches_pointwise_classify():
    grid = regime_diagram((-1.5, 1.5), (-1.5, 1.5), 0.25)
    for i, by in enumerate(grid.by_values):
        for j, bx in enumerate(grid.bx_values):
            assert grid.regime_at(i, j) is classify(FluxParams(bx, by))


def test_diagram_rejects_bad_ranges():
    with pytest.raises(ValueError):
        regime_diagram((1.0, -1.0), (0.0, 1.0), 0.1)
    with pytest.raises(ValueError):
        regime_diagram((0.0, 1.0), (0.0, 1.0), 0.0)


def test_regime_codes_and_colors_are_pinned():
    assert [r.code for r in Regime] == [0, 1, 2, 3, 4]
    assert Regime.NO_STATIONARY.rgb == (255, 0, 0)
    assert Regime.NON_PHYSICAL.rgb == (0, 0, 0)
    assert Regime.UNSTABLE.rgb == (255, 255, 0)
    assert Regime.ZERO_STABILITY.rgb == (150, 75, 0)
    assert Regime.STABLE.rgb == (0, 200, 0)
