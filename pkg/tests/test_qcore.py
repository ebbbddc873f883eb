import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qvwp.qcore import (DEFAULT_TOL, ConvergenceRegionError, DomainError, PoleError, SeriesValue,
                        Tolerance, phi_series, product_of, qpochhammer_finite, qpochhammer_inf,
                        qpochhammer_multi, qpow, terminating_index, terminating_sum, theta,
                        theta_multi, w8_7)

qs = st.floats(0.05, 0.95)
moduli = st.floats(0.05, 3.0)
angles = st.floats(-math.pi, math.pi)
reals = st.floats(-3, 3)


def cx(r, phi):
    return cmath.rect(r, phi)


# --- qpow ---------------------------------------------------------------------

def test_qpow_examples():
    assert qpow(0.5, 0) == 1
    assert qpow(0.5, 1) == pytest.approx(0.5, rel=1e-15)
    assert qpow(0.25, 0.5) == pytest.approx(0.5, rel=1e-15)


@pytest.mark.parametrize("q", [0, 1, 1.5, -0.3])
def test_qpow_rejects_q(q):
    with pytest.raises(DomainError):
        qpow(q, 1)


@given(qs, reals, reals, reals, reals)
def test_qpow_additive(q, a, b, c, d):
    x, y = complex(a, b), complex(c, d)
    assert oracles.rel(qpow(q, x + y), qpow(q, x) * qpow(q, y)) < 1e-12


# --- Pochhammer symbols ----------------------------------------------------------

def test_finite_pochhammer_examples():
    assert qpochhammer_finite(0.7 + 0.1j, 0.3, 0) == 1
    assert qpochhammer_finite(0.5, 0.5, 2) == pytest.approx(0.375, rel=1e-15)


def test_finite_pochhammer_splits():
    a, q, n, m = 0.3 + 0.2j, 0.6, 3, 4
    lhs = qpochhammer_finite(a, q, n + m)
    rhs = qpochhammer_finite(a, q, n) * qpochhammer_finite(a * q ** n, q, m)
    assert oracles.rel(lhs, rhs) < 1e-15


def test_infinite_pochhammer_examples():
    assert qpochhammer_inf(0, 0.4).value == 1
    assert qpochhammer_inf(1, 0.4).value == 0
    direct = math.prod(1 - 0.5 * 0.5 ** i for i in range(200))
    assert oracles.rel(qpochhammer_inf(0.5, 0.5).value, direct) < 1e-13


def test_multi_pochhammer():
    assert qpochhammer_multi([0.3, 0.8j], 0.4, 0).value == 1
    assert qpochhammer_multi([0.5, 0.25], 0.5, 1).value == pytest.approx(0.375, rel=1e-15)
    a, b, c, q = 0.3 + 0.4j, -1.2, 2.5j, 0.4
    prod3 = qpochhammer_multi([a, b, c], q, math.inf).value
    split = qpochhammer_inf(a, q).value * qpochhammer_inf(b, q).value * qpochhammer_inf(c, q).value
    assert oracles.rel(prod3, split) < 1e-12
    with pytest.raises(DomainError):
        qpochhammer_multi([], q, 3)


def test_pochhammer_term_cap_flags_nonconvergence():
    sv = qpochhammer_inf(5.0, 0.999, Tolerance(term_cap=10))
    assert not sv.converged
    assert sv.terms_used <= 10


@settings(max_examples=200)
@given(moduli, angles, qs)
def test_pochhammer_matches_long_product(r, phi, q):
    a = cx(r, phi)
    assert oracles.rel(qpochhammer_inf(a, q).value, oracles.poch_inf(a, q)) < 1e-11


@settings(max_examples=200)
@given(moduli, angles, qs)
def test_series_value_invariants(r, phi, q):
    tol = DEFAULT_TOL
    for sv in (qpochhammer_inf(cx(r, phi), q, tol), theta(cx(r, phi), q, tol),
               theta_multi([cx(r, phi), cx(r, -phi)], q, tol)):
        if sv.converged:
            assert sv.tail_estimate <= tol.rel_tol * max(1.0, abs(sv.value))
        assert sv.terms_used <= tol.term_cap
        assert math.isfinite(sv.value.real) and math.isfinite(sv.value.imag)


# --- theta ---------------------------------------------------------------------

def test_theta_examples():
    assert abs(theta(0.4, 0.4).value) == 0
    u, q = 0.3 + 0.1j, 0.4
    assert oracles.rel(theta(q * u, q).value, -theta(u, q).value / u) < 1e-12
    assert oracles.rel(theta(-1, 0.5).value, oracles.theta(-1, 0.5, 200)) < 1e-12
    with pytest.raises(DomainError):
        theta(0, 0.5)


def test_theta_multi_examples():
    u, q = 0.7, 0.3
    assert theta_multi([u], q).value == theta(u, q).value
    assert oracles.rel(theta_multi([u, q / u], q).value, theta(u, q).value * theta(q / u, q).value) < 1e-12
    assert theta_multi([], q).value == 1
    with pytest.raises(DomainError):
        theta_multi([0.5, 0], q)


@settings(max_examples=500)
@given(st.floats(0.01, 20), angles, st.floats(0.05, 0.9))
def test_theta_quasi_periodicity(r, phi, q):
    u = cx(r, phi)
    t = theta(u, q).value
    assert abs(theta(q * u, q).value + t / u) <= 1e-10 * max(1.0, abs(t))


# --- phi_series ----------------------------------------------------------------

def test_phi_series_zero_argument():
    assert phi_series([0.3, 0.4], [0.9], 0.5, 0).value == 1


def test_phi_series_two_term_closed_form():
    q, b, c, z = 0.5, 0.3, 0.7, 0.2
    expected = 1 + (1 - 1 / q) * (1 - b) / ((1 - q) * (1 - c)) * z
    sv = phi_series([1 / q, b], [c], q, z)
    assert oracles.rel(sv.value, expected) < 1e-14
    assert sv.terms_used == 2


def test_phi_series_regions_and_poles():
    with pytest.raises(ConvergenceRegionError):
        phi_series([0.3, 0.4], [0.2], 0.5, 1.5)
    # terminating series are fine at any |z|
    assert phi_series([0.5 ** -2, 0.4], [0.2], 0.5, 5.0).converged
    with pytest.raises(PoleError):
        phi_series([0.3, 0.4], [0.5 ** -1], 0.5, 0.5)
    with pytest.raises(DomainError):
        phi_series([0.3], [0.2], 0.5, 0.5)


def test_phi_series_4phi3_matches_brute_force():
    num = [0.3 + 0.2j, -0.5, 0.8j, 0.25]
    den = [0.6, -0.4 + 0.1j, 0.3j]
    q = 0.55
    assert oracles.rel(phi_series(num, den, q, q).value, oracles.phi_series(num, den, q, q)) < 1e-12


def test_phi_series_rounding_estimate_tracks_cancellation():
    # alternating series with large early terms
    sv = phi_series([-40.0, 30.0], [0.01], 0.5, 0.9)
    ref = oracles.phi_series([-40.0, 30.0], [0.01], 0.5, 0.9)
    assert abs(sv.value - ref) <= 10 * sv.error_estimate + 1e-13 * abs(ref)


# --- 8W7 -----------------------------------------------------------------------

def test_w8_7_zero_argument():
    assert w8_7(0.3, 0.1, 0.2, 0.3, 0.4, 0.5, 0.5, 0).value == 1


def test_w8_7_two_term_closed_form():
    q, a0 = 0.5, 0.3 + 0.1j
    alphas = [1 / q, 0.2, -0.4, 0.6j, 0.7]
    z = 0.35
    term = (1 - a0 * q * q) / (1 - a0) * z * (1 - a0) / (1 - q)
    for a in alphas:
        term *= (1 - a) / (1 - q * a0 / a)
    assert oracles.rel(w8_7(a0, *alphas, q, z).value, 1 + term) < 1e-15


def test_w8_7_matches_very_well_poised_phi():
    q, a0 = 0.45, 0.3 + 0.2j
    alphas = [0.5, -0.3 + 0.1j, 0.7j, 0.2, -0.6]
    z = 0.4 - 0.2j
    h = cmath.sqrt(a0)
    num = [a0, q * h, -q * h] + alphas
    den = [h, -h] + [q * a0 / a for a in alphas]
    assert oracles.rel(w8_7(a0, *alphas, q, z).value, phi_series(num, den, q, z).value) < 1e-12


def test_w8_7_errors():
    with pytest.raises(PoleError):
        w8_7(1.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.5, 0.3)
    with pytest.raises(PoleError):
        w8_7(0.5 ** -2, 0.1, 0.2, 0.3, 0.4, 0.5, 0.5, 0.3)
    with pytest.raises(ConvergenceRegionError):
        w8_7(0.3, 0.1, 0.2, 0.3, 0.4, 0.5, 0.5, 1.2)


# --- helpers -------------------------------------------------------------------

def test_terminating_index():
    q = 0.4
    assert terminating_index(q ** -3, q, DEFAULT_TOL) == 3
    assert terminating_index(1.0, q, DEFAULT_TOL) == 0
    assert terminating_index(q ** -3 * (1 + 1e-5), q, DEFAULT_TOL) is None
    assert terminating_index(-q ** -3, q, DEFAULT_TOL) is None


def test_terminating_sum_agrees_with_phi_series():
    q = 0.5
    num, den = [q ** -4, 0.3, -0.2j], [0.6, 0.1]
    assert oracles.rel(terminating_sum(num, den, q, 0.7, 4), phi_series(num, den, q, 0.7).value) < 1e-14


def test_product_of_adds_relative_errors():
    a = SeriesValue(2.0, 3, 2e-14, True, 2e-16)
    b = SeriesValue(4.0, 5, 4e-14, True)
    p = product_of([a, b])
    assert p.value == 8
    assert p.terms_used == 5
    assert p.tail_estimate == pytest.approx(8 * (1e-14 + 1e-14))
    assert p.rounding_estimate == pytest.approx(8 * 1e-16)


def test_tolerance_validation():
    with pytest.raises(ValueError):
        Tolerance(rel_tol=1.5)
    with pytest.raises(ValueError):
        Tolerance(pole_guard=0)
    with pytest.raises(ValueError):
        Tolerance(term_cap=0)
