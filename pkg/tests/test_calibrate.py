import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atomchain.calibrate import BracketError, beta_of_tau, fit_power_law, optimize_tau
from atomchain.reference import TAU

from conftest import calibration


def planted(N, A, beta):
    k = np.arange(1, N)
    return A * (k * (N - k)) ** beta


def test_fit_recovers_planted_law():
    fit = fit_power_law(planted(10, 0.02, 0.5))
    assert fit.A == pytest.approx(0.02, rel=1e-10)
    assert fit.beta == pytest.approx(0.5, abs=1e-10)
    assert fit.f < 1e-12
    assert fit_power_law(planted(8, 1.0, 0.25)).beta == pytest.approx(0.25, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(4, 24), st.floats(1e-3, 1.0), st.floats(0.1, 1.0), st.floats(0, 1e-3),
       st.integers(0, 2**32 - 1))
def test_goodness_bounded_by_perturbation(N, A, beta, delta, seed):
    signs = np.random.default_rng(seed).choice([-1.0, 1.0], N - 1)
    alpha = planted(N, A, beta) + delta * A * signs
    fit = fit_power_law(alpha)
    assert fit.f <= delta * A * (1 + 1e-6) + 1e-13 * alpha.max()


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_power_law([0.1])
    with pytest.raises(ValueError, match="N=3"):
        fit_power_law([0.1, 0.1])
    with pytest.raises(ValueError, match="positive"):
        fit_power_law([0.1, -0.2, 0.1])


def test_beta_of_tau_n4():
    beta, fit, coeffs = beta_of_tau(4, TAU[4])
    assert beta == pytest.approx(0.5, abs=1e-4)
    assert coeffs.N == 4
    with pytest.raises(ValueError):
        beta_of_tau(4, 0.0)


@pytest.mark.parametrize("N", [4, 7, 10, 14, 20])
def test_beta_decreases_with_tau(N):
    taus = np.linspace(2.5, 4.5, 5)
    betas = [beta_of_tau(N, t)[0] for t in taus]
    assert np.all(np.diff(betas) < 0)
    assert betas[0] > 0.5 > betas[-1]


def test_optimize_stub_root():
    res = optimize_tau(4, beta_fn=lambda t: t / 8 + 0.1)
    assert res.tau == pytest.approx(3.2, abs=1e-8)
    assert res.alpha is None


def test_bracket_error_reports_endpoints():
    with pytest.raises(BracketError) as err:
        optimize_tau(4, bracket=(2.5, 2.6), beta_fn=lambda t: t / 8 + 0.1)
    assert err.value.beta_lo == pytest.approx(2.5 / 8 + 0.1)
    assert err.value.beta_hi == pytest.approx(2.6 / 8 + 0.1)


@pytest.mark.parametrize("N", [4, 10])
def test_calibrated_tau(N):
    res = calibration(N)
    assert res.tau == pytest.approx(TAU[N], abs=5e-3)
    assert abs(res.fit.beta - 0.5) < 1e-4
    assert res.alpha.N == N


@pytest.mark.slow
def test_calibration_curve_shape():
    cals = [calibration(N) for N in range(4, 21)]
    taus = np.array([c.tau for c in cals])
    fs = np.array([c.fit.f for c in cals])
    assert np.all(np.diff(taus) > 0)
    assert np.all(fs[:2] < 1e-12)  # N=4,5 have only two distinct coefficients
    assert np.all(np.diff(fs[1:]) > 0)
