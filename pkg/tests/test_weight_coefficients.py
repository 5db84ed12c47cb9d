from fractions import Fraction

import mpmath
import pytest
from flint import arb
from hypothesis import given, settings
from hypothesis import strategies as st

from polygon_steklov import interval_core as ic
from polygon_steklov import weight_coefficients as wc
from polygon_steklov.errors import DomainViolation, PreconditionViolation

mpmath.mp.dps = 40


def v_oracle(m, a):
    a = mpmath.mpf(a)
    return mpmath.gamma(1 - a) * mpmath.gamma(m + a) * mpmath.rgamma(a) * mpmath.rgamma(m + 1 - a)


def weight(phi, a):
    """Boundary weight with its singularity moved to phi = 0, normalised to mean 1."""
    c = mpmath.gamma(1 - a) ** 2 / mpmath.gamma(1 - 2 * a)
    return abs(2 * mpmath.sin(phi / 2)) ** (-2 * a) * c


def mean_over_circle(f, singular_power):
    """(1/pi) * integral of f over (0, pi]; t = pi*u^p absorbs a t^(-s) singularity at 0."""
    p = 1 / (1 - mpmath.mpf(singular_power))
    g = lambda u: f(mpmath.pi * u**p) * mpmath.pi * p * u ** (p - 1)  # noqa: E731
    return mpmath.quad(g, [0, 1]) / mpmath.pi


def contains(x, value, slack=0):
    v = Fraction(mpmath.nstr(value, 35, min_fixed=-1, max_fixed=1)) if not isinstance(value, Fraction) else value
    return ic.exact_fraction(ic.lower(x)) - slack <= v <= ic.exact_fraction(ic.upper(x)) + slack


# ---- oracle tests -------------------------------------------------------------

def test_fourier_coefficients_match_quadrature_of_the_weight():
    a = mpmath.mpf(1) / 7
    for m in (0, 1, 3):
        f = lambda t: weight(t, a) * mpmath.cos(m * t)  # noqa: E731
        q = mean_over_circle(f, 2 * a)
        assert abs(q - v_oracle(m, a)) < mpmath.mpf(10) ** -12
        assert abs(float(wc.coefficient_v(m, 7).mid()) - float(q)) < 1e-12


def test_parseval_target_matches_quadrature_oracle():
    for n in (5, 9, 17):
        a = mpmath.mpf(1) / n
        q = mean_over_circle(lambda t: weight(t, a) ** 2, 4 * a)
        target = wc.parseval_target(n)
        assert abs(float(target.mid()) - float(q)) < 1e-10


@pytest.mark.parametrize("n", [5, 9, 17])
def test_parseval_identity_intersects(n):
    with ic.working_precision(40):
        s = wc.parseval_sum(n, 4000)
        t = wc.parseval_target(n)
    assert s.overlaps(t)


def test_normalization_constant_examples():
    with ic.working_precision(50):
        c = wc.normalization_constant("1/20")
        oracle = mpmath.gamma(mpmath.mpf("0.95")) ** 2 / mpmath.gamma(mpmath.mpf("0.9"))
        assert contains(c, oracle, slack=Fraction(1, 10**33))
        assert abs(float(c.mid()) - 0.995571) < 1e-6
        tiny = wc.normalization_constant(Fraction(1, 10**9))
        assert abs(float(tiny.mid()) - 1) < 1e-6
        inv = wc.normalization_constant(7) * ic.gamma_enclosure(1 - arb(2) / 7) / ic.gamma_enclosure(1 - arb(1) / 7) ** 2
        assert inv.contains(1)


def test_normalization_constant_domain():
    with pytest.raises(DomainViolation):
        wc.Alpha.from_value("1/2")


def test_coefficient_examples():
    assert wc.coefficient_v(0, 20).contains(1)
    assert wc.coefficient_v(1, 20).overlaps(arb(1) / 19)
    assert wc.coefficient_v(2, 20).overlaps(arb(7) / 247)
    with pytest.raises(PreconditionViolation):
        wc.coefficient_v(-1, 20)


def test_recursive_examples():
    assert wc.coefficient_v_recursive(0, 5).values == (arb(1),)
    t = wc.coefficient_v_recursive(10, 20)
    assert t[2].overlaps(wc.coefficient_v(2, 20))
    s = wc.coefficient_v_recursive(10, 7)
    a = arb(1) / 7
    assert (s[5] / s[4]).overlaps((4 + a) / (5 - a))
    assert s[-3] is s[3]


def test_taylor_coefficients_match_derivative_oracle():
    for m in (1, 2, 3, 7):
        series = mpmath.taylor(lambda a: v_oracle(m, a), 0, 5)
        for j in range(1, 6):
            exact = wc.taylor_coefficient(m, j)
            assert abs(series[j] - mpmath.mpf(exact.numerator) / exact.denominator) < mpmath.mpf(10) ** -15


def test_taylor_coefficient_examples():
    assert all(wc.taylor_coefficient(1, j) == 1 for j in range(1, 6))
    assert wc.taylor_coefficient(6, 1) == Fraction(1, 6)
    assert wc.taylor_coefficient(2, 2) == Fraction(5, 4)
    with pytest.raises(PreconditionViolation):
        wc.taylor_coefficient(0, 1)


def test_vm_constants_match_recorded_values():
    recorded = {"L5": "0.62674153", "C_P": "2.18229934", "V_inf": "1.11529078", "L6": "12.59175302",
                "V1": "4.66448428", "V4": "7.95118350"}
    c = wc.vm_constants().as_dict()
    for name, value in recorded.items():
        assert abs(float(c[name].mid()) - float(value)) < 5e-7, name
    assert 0 < ic.upper(c["D3"]) <= arb("3.683213")


def test_cubic_truncation_error_examples():
    a = arb(1) / 20
    v1 = a / (1 - a)
    direct = abs(v1 - (a + a**2 + a**3))
    bound = wc.cubic_truncation_error(1, 20)
    assert ic.upper(direct) <= ic.lower(bound)
    assert bound.overlaps(wc.vm_constants().V4 * a**4)
    a40 = arb(1) / 40
    diff = abs(wc.coefficient_v(10, 40) - wc.cubic_truncation(10, 40))
    assert ic.upper(diff) <= ic.lower(wc.cubic_truncation_error(10, 40))
    with pytest.raises(PreconditionViolation):
        wc.cubic_truncation_error(3, 19)
    assert a40 > 0


def test_power_envelope_dominates():
    coeffs = wc.coefficient_v_recursive(3000, 3)
    k = wc.power_envelope(3, 1)
    a = arb(1) / 3
    for j in (1, 2, 10, 500, 3000):
        assert ic.upper(coeffs[j]) <= ic.lower(k * ic.power(j, 2 * a - 1))


# ---- properties -------------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(m=st.integers(0, 400), n=st.integers(3, 60))
def test_recurrence_and_direct_intersect(m, n):
    with ic.working_precision(40):
        rec = wc.coefficient_v_recursive(m, n)[m]
        direct = wc.coefficient_v(m, n)
    assert rec.overlaps(direct)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 80))
def test_positive_and_strictly_decreasing(n):
    vals = wc.coefficient_v_recursive(300, n).values
    assert vals[0].contains(1)
    for a, b in zip(vals, vals[1:]):
        assert ic.lower(b) > 0
        assert ic.upper(b) < ic.lower(a)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(20, 200), m=st.integers(1, 2000))
def test_uniform_and_linear_controls(n, m):
    v = wc.coefficient_v(m, n)
    assert ic.upper(v) <= ic.lower(wc.uniform_bound(m, n))
    dev = abs(v - arb(1) / (n * m))
    assert ic.upper(dev) <= ic.lower(wc.linear_control_bound(m, n))


def test_harmonic_numbers_exact_below_limit():
    assert wc.harmonic(4) == Fraction(25, 12)
    assert wc.harmonic(3, 3) == 1 + Fraction(1, 8) + Fraction(1, 27)
