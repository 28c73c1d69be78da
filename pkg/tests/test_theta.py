import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from cbfweyl import cbf
from cbfweyl import theta as th
from cbfweyl.errors import DomainError, InternalInconsistencyError

from conftest import FAST

mus = st.floats(0.05, 2000.0)


def _theta_direct(spec, mu):
    """Independent oracle: the original double-log form, integrated by quad
    on both halves with breakpoints, no divided differences."""
    x = mu * mu

    def f(z):
        a = (float(spec.psi(x)) - float(spec.psi(x * z * z))) / (x - x * z * z)
        b = (float(spec.psi(x / (z * z))) - float(spec.psi(x))) / (x / (z * z) - x)
        return math.log(a / b) / (1 - z * z)

    pts = [1e-8, 1e-4, 0.1, 0.5, 0.9, 0.999]
    total = 0.0
    for lo, hi in zip([1e-300] + pts, pts + [1.0 - 1e-7]):
        total += integrate.quad(f, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=500)[0]
    return total / math.pi


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("mu", [0.1, 1.0, 7.0, 100.0, 1000.0])
def test_power_phase_is_constant(alpha, mu):
    assert th.theta(cbf.Power(alpha), mu) == pytest.approx((2 - alpha) * math.pi / 8, abs=1e-9)


def test_cauchy_example():
    assert th.theta(cbf.Power(1), 7.0) == pytest.approx(0.39269908, abs=1e-8)


def test_laplacian_phase_vanishes():
    assert th.theta(cbf.Power(2), 3.0) == 0.0
    assert th.dtheta(cbf.Power(2), 3.0) == 0.0


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("mu", [0.3, 2.0, 11.0])
@pytest.mark.parametrize("spec", [cbf.KleinGordon(), cbf.SumOfPowers(1, 0.5), cbf.Log1p()], ids=str)
def test_theta_matches_direct_quadrature(spec, mu):
    assert th.theta(spec, mu) == pytest.approx(_theta_direct(spec, mu), abs=1e-7)


@pytest.mark.parametrize("mu", [10.0, 100.0, 1000.0])
def test_sum_of_powers_window(mu):
    value = th.theta(cbf.SumOfPowers(1, 0.5), mu)
    base = math.pi / 8
    assert base <= value <= base + 1 / (math.pi * mu**0.5)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_power_dtheta_vanishes(alpha):
    assert abs(th.dtheta(cbf.Power(alpha), 5.0)) < 1e-9


def _fd(spec, mu, h):
    return (th.theta(spec, mu + h, rtol=1e-12) - th.theta(spec, mu - h, rtol=1e-12)) / (2 * h)


def test_klein_gordon_dtheta_finite_difference():
    spec = cbf.KleinGordon()
    assert th.dtheta(spec, 2.0) == pytest.approx(_fd(spec, 2.0, 1e-4), abs=1e-5)


def test_sum_of_powers_dtheta_sign():
    d = th.dtheta(cbf.SumOfPowers(1, 0.5), 10.0)
    assert -0.3 < d < 0
    assert d == pytest.approx(_fd(cbf.SumOfPowers(1, 0.5), 10.0, 1e-3), abs=1e-5)


@given(st.sampled_from(FAST), st.floats(0.1, 200.0))
def test_dtheta_consistency(spec, mu):
    h = 1e-4 * mu
    assert abs(th.dtheta(spec, mu) - _fd(spec, mu, h)) <= 1e-4


@given(st.sampled_from(FAST), mus)
def test_range_sandwich_and_derivative(spec, mu):
    value = th.theta(spec, mu)
    lo, hi = th.theta_bounds(spec, mu)
    assert 0 <= value < math.pi / 2
    assert lo - 1e-9 <= value <= hi + 1e-9
    assert abs(th.dtheta(spec, mu)) < 3 / mu


def test_bounds_laplacian():
    assert th.theta_bounds(cbf.Power(2), 4.0) == (0.0, 0.0)


def test_bounds_cauchy():
    lo, hi = th.theta_bounds(cbf.Power(1), 2.0)
    simple_lower = 2 / math.pi * math.asin(0.5) ** 2
    assert simple_lower == pytest.approx(math.pi / 18, rel=1e-14)
    # P = 1/2, Q = 1/4: the three-term lower bound reduces to arcsin(sqrt(1/2))^2 / pi
    assert lo == pytest.approx(math.pi / 16, rel=1e-14)
    assert simple_lower <= lo <= math.pi / 8 <= hi


def test_bounds_klein_gordon():
    spec = cbf.KleinGordon()
    lo, hi = th.theta_bounds(spec, 10.0)
    assert lo <= th.theta(spec, 10.0) <= hi


@given(st.floats(0, 1), st.floats(0, 1))
def test_bounds_from_pq_are_ordered(p, q):
    q = q * (1 - p)
    lo, hi = th.bounds_from_pq(p, q)
    assert 0 <= lo <= hi + 1e-12 <= math.pi / 2 + 1e-12


def test_bounds_from_pq_rejects_inconsistent_input():
    with pytest.raises(InternalInconsistencyError):
        th.bounds_from_pq(0.8, 0.5)


@pytest.mark.parametrize("bad", [0.0, -2.0, math.inf, math.nan])
def test_rejects_bad_mu(bad):
    with pytest.raises(DomainError):
        th.theta(cbf.Power(1), bad)


def test_phase_bundle():
    r = th.phase(cbf.KleinGordon(), 3.0)
    assert r.lower <= r.theta <= r.upper
    assert r.theta == th.theta(cbf.KleinGordon(), 3.0)


def test_theta_vector():
    v = th.theta_vector(cbf.Power(1), [1.0, 2.0])
    assert np.allclose(v, math.pi / 8, atol=1e-10)


def test_measure_defined_phase_within_bounds():
    spec = cbf.MeasureDefined("log")
    value = th.theta(spec, 2.0)
    lo, hi = th.theta_bounds(spec, 2.0)
    assert lo <= value <= hi
