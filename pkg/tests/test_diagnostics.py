import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from timo_pinn.diagnostics import (DecayModel, EnergySeries, classify_decay, discrete_energy,
                                   e_infinity, fit_decay, l2_error_series, relative_error)
from timo_pinn.physics import PhysicalParams
from timo_pinn.sampling import uniform_grid

from oracles import simpson


def loop_energy(xs, ts, fields, p):
    """Term-by-term transcription of the rectangle / forward-difference estimator."""
    phi, psi, th, q = fields
    Nx, Nt = len(xs) - 1, len(ts) - 1
    out = []
    for i in range(Nt):
        ht = ts[i + 1] - ts[i]
        acc = 0.0
        for j in range(Nx):
            hx = xs[j + 1] - xs[j]
            a = (phi[i + 1][j + 1] - phi[i][j + 1]) / ht
            b = (psi[i + 1][j + 1] - psi[i][j + 1]) / ht
            c = (psi[i][j + 1] - psi[i][j]) / hx
            d = (phi[i][j + 1] - phi[i][j]) / hx + psi[i][j + 1]
            acc += (p.rho1 * a * a + p.rho2 * b * b + p.b * c * c + p.k * d * d
                    + p.rho3 * th[i][j + 1] ** 2 + p.tau * q[i][j + 1] ** 2)
        out.append(acc / (2 * Nx))
    return np.array(out)


def exact_grids(grid):
    X, Tm = np.meshgrid(grid.xs, grid.ts)
    u = 4 * np.exp(Tm) * X * (1 - X)
    return [u, u, u, u]


def test_zero_fields():
    g = uniform_grid(4, 5, 1.0)
    z = np.zeros((6, 5))
    E = discrete_energy(g, [z] * 4, PhysicalParams())
    np.testing.assert_array_equal(E.Es, 0.0)
    np.testing.assert_array_equal(E.ts, g.ts[:-1])


def test_constant_theta():
    g = uniform_grid(7, 3, 2.0)
    z = np.zeros((4, 8))
    E = discrete_energy(g, [z, z, np.full_like(z, 3.0), z], PhysicalParams())
    np.testing.assert_allclose(E.Es, 4.5, rtol=1e-15)


def test_matches_loop_transcription():
    rng = np.random.default_rng(0)
    g = uniform_grid(6, 5, 2.5)
    fields = [rng.normal(size=(6, 7)) for _ in range(4)]
    p = PhysicalParams(rho1=2.0, rho2=0.5, rho3=1.5, b=3.0, k=0.7, tau=4.0)
    np.testing.assert_allclose(discrete_energy(g, fields, p).Es,
                               loop_energy(g.xs, g.ts, fields, p), rtol=1e-13)


def test_shape_mismatch():
    g = uniform_grid(4, 4, 1.0)
    with pytest.raises(ValueError):
        discrete_energy(g, [np.zeros((5, 4))] * 4, PhysicalParams())


def analytic_energy_t0():
    # half the integral of the six squared terms for 4x(1-x) at t = 0
    u = lambda x: 4 * x * (1 - x)
    ux = lambda x: 4 * (1 - 2 * x)
    dens = lambda x: u(x) ** 2 * 4 + ux(x) ** 2 + (ux(x) + u(x)) ** 2
    return 0.5 * simpson(dens, 0.0, 1.0, 4001)


def test_analytic_oracle_is_twenty_thirds():
    assert analytic_energy_t0() == pytest.approx(20 / 3, rel=1e-12)
    assert 0.5 * (4 * 8 / 15 + 16 / 3 + 88 / 15) == pytest.approx(20 / 3, rel=1e-15)


def test_energy_of_exact_solution_converges_first_order():
    p = PhysicalParams()
    errs = []
    for n in (250, 500, 1000, 2000):
        g = uniform_grid(n, n, 0.01)
        errs.append(abs(discrete_energy(g, exact_grids(g), p).Es[0] - 20 / 3))
    assert errs[-1] <= 0.02 * 20 / 3
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(abs(r - 2) <= 0.3 for r in ratios), ratios


@settings(max_examples=25)
@given(arrays(np.float64, (4, 4, 5), elements=st.floats(-1e3, 1e3)),
       st.sampled_from([2.0, 0.5, -4.0]))
def test_quadratic_scaling_and_positivity(fields, alpha):
    g = uniform_grid(4, 3, 1.5)
    p = PhysicalParams(rho1=1.7, k=0.3, tau=2.2)
    E = discrete_energy(g, fields, p).Es
    assert np.all(E >= 0)
    # powers of two scale without rounding
    np.testing.assert_array_equal(discrete_energy(g, alpha * fields, p).Es, alpha**2 * E)


def test_scaling_general_factor():
    rng = np.random.default_rng(2)
    g = uniform_grid(10, 8, 1.0)
    fields = rng.normal(size=(4, 9, 11))
    E = discrete_energy(g, fields, PhysicalParams()).Es
    np.testing.assert_allclose(discrete_energy(g, 0.37 * fields, PhysicalParams()).Es,
                               0.37**2 * E, rtol=1e-14)


def series(f, a, b, n=301):
    t = np.linspace(a, b, n)
    return EnergySeries(t, f(t))


def test_exponential_recovery():
    s = series(lambda t: np.exp(-1.2 * t - 1.85), 0, 30)
    fit = fit_decay(s, DecayModel.EXPONENTIAL)
    assert fit.slope == pytest.approx(-1.2, abs=1e-10)
    assert fit.intercept == pytest.approx(-1.85, abs=1e-10)
    assert 1 - fit.r_squared <= 1e-12


def test_polynomial_recovery():
    fit = fit_decay(series(lambda t: t**-2.0, 0.5, 40), "polynomial")
    assert fit.slope == pytest.approx(-2, abs=1e-10)
    assert fit.intercept == pytest.approx(0, abs=1e-10)


def test_logarithmic_recovery():
    fit = fit_decay(series(lambda t: 3 / np.log(t), 5, 30), "logarithmic")
    assert fit.slope == pytest.approx(-1, abs=1e-8)
    assert fit.intercept == pytest.approx(math.log(3), abs=1e-8)
    assert 1 - fit.r_squared <= 1e-12


@pytest.mark.parametrize("f, a, b, want", [
    (lambda t: np.exp(-1.2 * t - 1.85), 0, 30, DecayModel.EXPONENTIAL),
    (lambda t: 1 / t, 0.1, 30, DecayModel.POLYNOMIAL),
    (lambda t: t**-2.0, 0.1, 30, DecayModel.POLYNOMIAL),
    (lambda t: 3 / np.log(t), 5, 30, DecayModel.LOGARITHMIC),
])
def test_classification(f, a, b, want):
    best, fits = classify_decay(series(f, a, b))
    assert best is want
    assert set(fits) == set(DecayModel)


def test_tie_prefers_exponential():
    # constant energy: every model fits with zero slope and R^2 = 1
    best, fits = classify_decay(series(lambda t: 0 * t + 2.0, 2, 30))
    assert best is DecayModel.EXPONENTIAL
    assert all(f.r_squared == 1.0 for f in fits.values())


@settings(max_examples=30)
@given(st.floats(-3, 3), st.floats(-5, 5), st.sampled_from(list(DecayModel)))
def test_regression_recovery_property(a, b, model):
    t = np.linspace(3, 20, 120)
    x = {DecayModel.EXPONENTIAL: t, DecayModel.POLYNOMIAL: np.log(t),
         DecayModel.LOGARITHMIC: np.log(np.log(t))}[model]
    fit = fit_decay(EnergySeries(t, np.exp(a * x + b)), model, t_cut=0.0)
    assert fit.slope == pytest.approx(a, abs=1e-8)
    assert fit.intercept == pytest.approx(b, abs=1e-8)
    if abs(a) > 1e-3:
        assert 1 - fit.r_squared <= 1e-12


def test_fit_drops_nonpositive_with_warning():
    s = series(lambda t: np.exp(-t), 0, 10, 101)
    s.Es[50] = 0.0
    with pytest.warns(UserWarning):
        fit = fit_decay(s, "exponential")
    assert fit.n_points == 79
    assert fit.slope == pytest.approx(-1, abs=1e-10)


def test_fit_needs_three_points():
    with pytest.raises(ValueError):
        fit_decay(EnergySeries([0, 1, 2, 3], [1, 1, 1, 1]), "exponential", t_cut=1.5)
    with pytest.raises(ValueError):
        fit_decay(EnergySeries(np.linspace(0, 1.0, 30), np.ones(30)), "logarithmic")


def test_e_infinity_is_tail_mean():
    s = EnergySeries(np.arange(20.0), np.r_[np.ones(18), 3.0, 5.0])
    assert e_infinity(s) == 4.0
    assert fit_decay(s, "exponential").E_inf == 4.0


def test_relative_error_examples():
    rng = np.random.default_rng(1)
    ex = rng.normal(size=(5, 8))
    assert relative_error(ex, ex) == 0.0
    assert relative_error(2 * ex, ex) == pytest.approx(1.0, rel=1e-15)
    M = 40
    ex = np.full(M, 10.0)  # norm 10 sqrt(M)
    assert relative_error(ex + 0.3, ex) == pytest.approx(0.03, rel=1e-12)
    with pytest.raises(ValueError):
        relative_error(ex, np.zeros(M))
    with pytest.raises(ValueError):
        relative_error(ex, ex[:-1])


def test_l2_error_series_examples():
    g = uniform_grid(9, 4, 1.0)
    ex = np.random.default_rng(0).normal(size=(4, 5, 10))
    np.testing.assert_array_equal(l2_error_series(ex, ex, g), np.zeros((5, 4)))
    c = 0.25
    np.testing.assert_allclose(l2_error_series(ex + c, ex, g), c * math.sqrt(10), rtol=1e-14)
    d = np.random.default_rng(1).normal(size=ex.shape)
    np.testing.assert_allclose(l2_error_series(ex + 2 * d, ex), 2 * l2_error_series(ex + d, ex),
                               rtol=1e-14)
    with pytest.raises(ValueError):
        l2_error_series(ex, ex[:, :-1])
