import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from cbfweyl import cbf
from cbfweyl.errors import ConfigError, DomainError, UnsupportedFamilyError

from conftest import FAST, ids

GRID = np.geomspace(1e-4, 1e6, 61)

# mpmath versions of each symbol, used as independent derivative oracles
MP = {
    "power(0.5)": lambda x: x ** mpmath.mpf("0.25"),
    "power(1)": lambda x: mpmath.sqrt(x),
    "power(1.5)": lambda x: x ** mpmath.mpf("0.75"),
    "power(2)": lambda x: x,
    "klein_gordon": lambda x: mpmath.sqrt(1 + x) - 1,
    "sum_of_powers(1,0.5)": lambda x: mpmath.sqrt(x) + x ** mpmath.mpf("0.25"),
    "log1p": lambda x: mpmath.log(1 + x),
}


@pytest.mark.parametrize(
    "spec, xi, expected",
    [(cbf.Power(1), 4.0, 2.0), (cbf.KleinGordon(), 3.0, 1.0), (cbf.SumOfPowers(1, 0.5), 16.0, 6.0)],
)
def test_evaluate_examples(spec, xi, expected):
    assert cbf.evaluate(spec, xi) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "spec, xi, order, expected",
    [(cbf.Power(1), 4.0, 1, 0.25), (cbf.Power(2), 7.0, 2, 0.0), (cbf.Log1p(), 1.0, 1, 0.5)],
)
def test_deriv_examples(spec, xi, order, expected):
    assert cbf.deriv(spec, xi, order) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("spec", FAST, ids=ids(FAST))
@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivatives_match_mpmath(spec, order):
    f = MP[spec.label()]
    for x in [1e-3, 0.37, 1.0, 12.5, 3e4]:
        want = float(mpmath.diff(f, mpmath.mpf(x), order))
        got = cbf.deriv(spec, x, order)
        assert got == pytest.approx(want, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize(
    "spec, s, expected",
    [(cbf.Power(1), 4.0, (0.0, 2.0)), (cbf.Power(2), 9.0, (-9.0, 0.0)), (cbf.KleinGordon(), 5.0, (-1.0, 2.0))],
)
def test_boundary_value_examples(spec, s, expected):
    u, v = cbf.boundary_values(spec, s)
    assert (u, v) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("spec", FAST, ids=ids(FAST))
def test_boundary_values_against_complex_evaluation(spec):
    # approach the cut from above at high precision
    f = MP[spec.label()]
    with mpmath.workdps(40):
        for s in [0.3, 2.0, 7.5, 150.0]:
            w = f(mpmath.mpc(-s, mpmath.mpf("1e-25")))
            u, v = cbf.boundary_values(spec, s)
            assert u == pytest.approx(float(w.real), rel=1e-10, abs=1e-12)
            assert v == pytest.approx(float(w.imag), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("spec", FAST, ids=ids(FAST))
def test_boundary_value_consistency(spec):
    s = np.geomspace(1e-3, 1e3, 40)
    s = s[np.abs(s - spec.cut_start) > 1e-6]
    u, v = cbf.boundary_values(spec, s)
    assert np.all(v >= 0)
    if spec.label() == "power(2)":
        assert np.all(v == 0)
    u0, v0 = cbf.boundary_values(spec, 1e-40)
    assert abs(u0) < 1e-5 and abs(v0) < 1e-5


@pytest.mark.parametrize("spec", FAST, ids=ids(FAST))
def test_sign_and_bound_chains(spec):
    x = GRID
    p, d1, d2, d3 = spec.psi(x), spec.d1(x), spec.d2(x), spec.d3(x)
    tol = 1e-12 * np.abs(d1)
    assert np.all(p > 0) and np.all(d1 > 0)
    assert np.all(d2 <= tol) and np.all(d3 >= -tol)
    assert np.all(-x * d2 <= 2 * d1 * (1 + 1e-12))
    assert np.all(x * x * d3 <= 6 * d1 * (1 + 1e-12))
    assert np.all(x * d1 <= p * (1 + 1e-12))


@pytest.mark.parametrize("spec", FAST, ids=ids(FAST))
def test_p_plus_q_at_most_one(spec):
    P, Q = cbf.pq(spec, np.sqrt(GRID))
    assert np.all(P >= 0) and np.all(Q >= -1e-15)
    assert np.all(P + Q <= 1 + 1e-12)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
def test_pq_power_closed_form(alpha):
    P, Q = cbf.pq(cbf.Power(alpha), 3.7)
    assert (P, Q) == pytest.approx((alpha / 2, (2 - alpha) / 4), abs=1e-14)


def test_pq_klein_gordon_at_one():
    P, Q = cbf.pq(cbf.KleinGordon(), 1.0)
    with mpmath.workdps(30):
        want_p = 1 / (2 * mpmath.sqrt(2) * (mpmath.sqrt(2) - 1))
    assert P == pytest.approx(float(want_p), rel=1e-14)
    assert Q == pytest.approx(0.125, rel=1e-14)


@given(
    st.sampled_from(FAST),
    st.floats(1e-6, 1e6),
    st.floats(1e-6, 1e6),
)
def test_subadditivity(spec, x, y):
    assert spec.psi(x + y) <= (spec.psi(x) + spec.psi(y)) * (1 + 1e-13)


@given(st.sampled_from(FAST), st.floats(1e-8, 1e8), st.floats(-30, 30))
def test_secant_is_stable_divided_difference(spec, x, logratio):
    # divided difference of psi, compared with mpmath at high precision
    y = x * math.exp(logratio * 1e-2 if abs(logratio) < 1 else logratio / 3)
    f = MP[spec.label()]
    with mpmath.workdps(50):
        X, Y = mpmath.mpf(x), mpmath.mpf(y)
        want = mpmath.diff(f, X) if X == Y else (f(X) - f(Y)) / (X - Y)
    assert float(spec.secant(x, y)) == pytest.approx(float(want), rel=1e-9)


@pytest.mark.parametrize(
    "spec, passes",
    [(cbf.Power(1), True), (cbf.Log1p(), False), (cbf.SumOfPowers(1, 0.5), True), (cbf.KleinGordon(), True)],
)
def test_moderate_growth_probe(spec, passes):
    assert cbf.moderate_growth_probe(spec).passes is passes


def test_moderate_growth_probe_needs_wide_grid():
    with pytest.raises(DomainError):
        cbf.moderate_growth_probe(cbf.Power(1), [1.0, 10.0])


def test_levy_power_one_examples():
    tail = cbf.levy_tail(cbf.Power(1))
    for z in [0.1, 1.0, 7.0]:
        assert float(tail.nu(z)) == pytest.approx(1 / (math.pi * z * z), rel=1e-14)
        assert float(tail.nu_inf(z)) == pytest.approx(1 / (math.pi * z), rel=1e-14)


def test_levy_power_two_is_local():
    tail = cbf.levy_tail(cbf.Power(2))
    assert float(tail.nu(1.3)) == 0.0
    assert float(tail.nu0(0.4)) == 1.0


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_levy_density_reproduces_symbol(alpha):
    # int (1 - cos(xi z)) nu(z) dz over the real line equals psi(xi^2)
    nu = cbf.levy_tail(cbf.Power(alpha)).nu
    xi = 1.7

    def f(z):
        return (1 - math.cos(xi * z)) * float(nu(z))

    def g(z):
        return float(nu(z))

    head = integrate.quad(f, 0, 1, limit=200)[0]
    tail = integrate.quad(g, 1, math.inf)[0] - integrate.quad(g, 1, math.inf, weight="cos", wvar=xi)[0]
    total = 2 * (head + tail)
    assert total == pytest.approx(xi**alpha, rel=1e-6)


@pytest.mark.parametrize("spec", [cbf.Power(1), cbf.KleinGordon(), cbf.SumOfPowers(1, 0.5)], ids=str)
def test_levy_closed_form_matches_subordination(spec):
    closed = cbf.levy_tail(spec)
    generic = cbf.levy_tail(spec, closed_form=False)
    for fn in ("nu", "nu0", "nu_inf"):
        for z in [0.3, 1.0, 2.5]:
            assert float(getattr(generic, fn)(z)) == pytest.approx(float(getattr(closed, fn)(z)), rel=1e-8)


def test_levy_unsupported_family():
    with pytest.raises(UnsupportedFamilyError):
        cbf.levy_tail(cbf.Log1p())


def test_measure_defined_log_density_is_dilogarithm():
    spec = cbf.MeasureDefined("log")
    for x in [0.5, 3.0, 100.0]:
        assert float(spec.psi(x)) == pytest.approx(float(-mpmath.polylog(2, -x)), rel=1e-9)
    # derivative of -Li2(-x) is log(1 + x) / x
    assert float(spec.d1(3.0)) == pytest.approx(math.log(4.0) / 3.0, rel=1e-9)


def test_measure_defined_power_density_reproduces_power():
    spec = cbf.MeasureDefined("power(1)")
    ref = cbf.Power(1)
    x = np.array([0.25, 4.0, 90.0])
    for name in ("psi", "d1", "d2", "d3"):
        assert getattr(spec, name)(x) == pytest.approx(getattr(ref, name)(x), rel=1e-8)
    u, v = spec.boundary(np.array([2.0]))
    assert (float(u[0]), float(v[0])) == pytest.approx((0.0, math.sqrt(2.0)), abs=1e-8)


def test_measure_defined_drift():
    spec = cbf.MeasureDefined("power(1)", c=0.5)
    assert float(spec.psi(4.0)) == pytest.approx(2.0 + 2.0, rel=1e-9)
    assert spec.drift == 0.5


@pytest.mark.parametrize("spec", FAST + [cbf.MeasureDefined("power(1)")], ids=ids(FAST) + ["measure"])
def test_complex_continuation_agrees_on_the_positive_axis(spec):
    x = np.array([0.5, 3.0, 40.0])
    assert np.real(spec.psi_complex(x)) == pytest.approx(spec.psi(x), rel=1e-9)
    w = spec.psi_complex(np.array([1.0 + 2.0j]))
    assert np.imag(w)[0] > 0  # Pick functions map the upper half-plane to itself


@pytest.mark.parametrize(
    "text, expected",
    [
        ("power:1", cbf.Power(1.0)),
        ("sum_of_powers:1,0.5", cbf.SumOfPowers(1.0, 0.5)),
        ("klein_gordon", cbf.KleinGordon()),
        ("log1p", cbf.Log1p()),
    ],
)
def test_parse_psi(text, expected):
    assert cbf.parse_psi(text) == expected


@pytest.mark.parametrize("text", ["power", "power:3", "power:x", "foo:1", "sum_of_powers:1", "measure_defined:weird"])
def test_parse_psi_rejects(text):
    with pytest.raises(ConfigError):
        cbf.parse_psi(text)


@given(st.sampled_from(FAST))
def test_mapping_round_trip(spec):
    assert cbf.spec_from_mapping(spec.to_mapping()) == spec


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_evaluate_rejects_nonpositive(bad):
    with pytest.raises(DomainError):
        cbf.evaluate(cbf.Power(1), bad)


def test_deriv_rejects_order():
    with pytest.raises(DomainError):
        cbf.deriv(cbf.Power(1), 1.0, 4)
