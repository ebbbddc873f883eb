import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qvwp.awcore import HeckeParams, derive_aw, dual
from qvwp.eigenfun import (E_ROUTES, E_aw, Phi, Psi, St, St_dual, W_fn, aw_polynomial, cfun,
                           phi_tilde, poly_constant_E, poly_constant_phi, spectral_point)
from qvwp.qcore import QSeriesError, qpochhammer_inf, qpow

P = HeckeParams(0.2, -0.1, 0.3, 0.05, 0.5, 1)


def rel(a, b):
    return oracles.rel(a, b)


def random_params(rng, s=None):
    return HeckeParams(*(rng.uniform(-0.7, 0.7) for _ in range(4)), rng.uniform(0.2, 0.8),
                       s if s is not None else rng.choice([Fraction(1), Fraction(2)]))


def random_cx(rng, re=1.5, im=0.3):
    return complex(rng.uniform(-re, re), rng.uniform(-im, im))


# --- W and St ---------------------------------------------------------------------

def test_W_examples():
    p = HeckeParams(0.2, 0.2, 0.2, 0, 0.5, 1)
    assert W_fn(0, 0, p) == pytest.approx(0.5 ** 0.16, rel=1e-15)
    assert W_fn(-0.4, 0.7 + 0.2j, p) == 1


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_W_recurrence(seed):
    rng = random.Random(seed)
    p = random_params(rng)
    x, z = random_cx(rng), random_cx(rng)
    at = derive_aw(p).a_dual
    assert rel(W_fn(x + p.step, z, p), at * qpow(p.q, z) * W_fn(x, z, p)) < 1e-12


def test_St_zero():
    p = HeckeParams(0.3, 0.1, 0.2, -0.1, 0.5, 1)
    assert St(p.kappa + p.lam - p.step, p).value == 0


def test_St_against_factors():
    rng = random.Random(7)
    for _ in range(20):
        p = random_params(rng)
        x = random_cx(rng)
        aw = derive_aw(p)
        Q = p.base
        direct = 1
        for m in (aw.a, aw.b, aw.c, aw.d):
            direct *= oracles.poch_inf(qpow(p.q, p.step + x) / m, Q)
        assert rel(St(x, p).value, direct) < 1e-11
        assert rel(St_dual(x, p).value, St(x, dual(p)).value) < 1e-15


# --- Psi --------------------------------------------------------------------------

def test_Psi_leading_coefficient():
    rng = random.Random(8)
    for _ in range(20):
        p = random_params(rng)
        x = complex(30, rng.uniform(-0.3, 0.3))
        z = random_cx(rng, 0.5)
        gamma0 = qpochhammer_inf(qpow(p.q, p.step + 2 * z), p.base).value
        assert abs(Psi(x, z, p).value - gamma0) <= 100 * abs(qpow(p.q, x)) + 1e-13 * abs(gamma0)


def test_Psi_routes_agree():
    rng = random.Random(9)
    done = 0
    while done < 200:
        p = random_params(rng)
        x, z = random_cx(rng), random_cx(rng, 1.0)
        d = derive_aw(p).d
        if abs(d * qpow(p.q, x)) >= 0.5:
            continue
        try:
            v8 = Psi(x, z, p, route="8W7")
            v4 = Psi(x, z, p, route="4phi3")
        except QSeriesError:
            continue
        done += 1
        # the two-term form can cancel; compare within its own error estimate
        assert abs(v8.value - v4.value) <= 1e-10 * abs(v8.value) + 10 * (v4.error_estimate + v8.error_estimate)


def test_Psi_symmetric_in_c_and_d():
    from qvwp.eigenfun import psi_from_aw
    rng = random.Random(10)
    for _ in range(30):
        p = random_params(rng)
        x, z = random_cx(rng), random_cx(rng, 1.0)
        a, b, c, d, at = p.monomials()
        try:
            one = psi_from_aw(x, z, a, b, c, d, at, p.q, p.step, route="4phi3")
            two = psi_from_aw(x, z, a, b, d, c, at, p.q, p.step, route="4phi3")
        except QSeriesError:
            continue
        assert abs(one.value - two.value) <= 1e-10 * abs(one.value) + 10 * (one.error_estimate + two.error_estimate)


def test_Psi_unknown_route():
    with pytest.raises(ValueError):
        Psi(0.1, 0.2, P, route="bogus")


# --- Phi, c, E ----------------------------------------------------------------------

def test_Phi_definition():
    x, z = 0.4 + 0.1j, -0.3 + 0.05j
    expected = W_fn(x, z, P) * Psi(x, z, P).value / (St(x, P).value * St_dual(z, P).value)
    assert rel(Phi(x, z, P).value, expected) < 1e-13


def test_Phi_at_degree_zero():
    rng = random.Random(11)
    for _ in range(10):
        p = random_params(rng)
        x = random_cx(rng)
        z0 = spectral_point(0, p)
        aw = derive_aw(p)
        const = (oracles.poch_inf(p.base ** 2 / (aw.a * aw.b * aw.c * aw.d), p.base)
                 / St_dual(z0, p).value)
        try:
            val = Phi(x, z0, p).value
        except QSeriesError:
            continue
        assert rel(val, const) < 1e-9


def test_Phi_eigen_and_selfdual():
    from qvwp.awcore import apply_D
    rng = random.Random(12)
    for _ in range(10):
        p = random_params(rng)
        x, z = random_cx(rng), random_cx(rng, 1.0)
        at = derive_aw(p).a_dual
        try:
            f = lambda y: Phi(y, z, p).value  # noqa: E731
            lhs = apply_D(f, x, p)
            fx = f(x)
            fd = Phi(z, x, dual(p)).value
        except QSeriesError:
            continue
        eig = qpow(p.q, z) + qpow(p.q, -z) - at - 1 / at
        assert abs(lhs - eig * fx) <= 1e-8 * max(abs(fx), abs(lhs))
        assert rel(fx, fd) < 1e-8


def test_c_zeros():
    rng = random.Random(13)
    for _ in range(10):
        p = random_params(rng)
        x = random_cx(rng)
        for n in range(3):
            assert abs(cfun(x, p.kappa + p.upsilon + n * p.step, p).value) < 1e-12


def test_c_periodic_and_oracle():
    rng = random.Random(14)
    for _ in range(20):
        p = random_params(rng)
        x, z = random_cx(rng), random_cx(rng)
        c0 = cfun(x, z, p).value
        assert rel(cfun(x + p.step, z, p).value, c0) < 1e-10
        assert rel(cfun(x, z + p.step, p).value, c0) < 1e-10
        aw = derive_aw(p)
        Q, Zi, X = p.base, qpow(p.q, -z), qpow(p.q, x)
        num = 1
        for u in (aw.a_dual * Zi, aw.b_dual * Zi, aw.c_dual * Zi, aw.d * X * Zi / aw.a_dual):
            num *= oracles.theta(u, Q)
        den = oracles.theta(Zi * Zi, Q) * oracles.theta(aw.d * X, Q)
        assert rel(c0, num / den / W_fn(x, z, p)) < 1e-10


def test_c_pole():
    p = P
    # d q^x = q^-s, a zero of theta(d q^x; q^s)
    x = -(p.step / 2 + p.upsilon - p.varsigma) - p.step
    with pytest.raises(QSeriesError):
        cfun(x + 1j * math.pi / math.log(p.q), 0.3, p)


def test_E_degree_zero():
    rng = random.Random(15)
    for _ in range(10):
        p = random_params(rng)
        x = random_cx(rng)
        val = E_aw(x, spectral_point(0, p), p).value
        assert rel(val, poly_constant_E(p)) < 1e-10


def test_E_even_and_expansion():
    rng = random.Random(16)
    seen = 0
    while seen < 10:
        p = random_params(rng)
        x, z = random_cx(rng), random_cx(rng, 1.0)
        try:
            direct = E_aw(x, z, p, route="direct")
            flipped = E_aw(-x, z, p, route="direct")
            expansion = E_aw(x, z, p, route="expansion")
        except QSeriesError:
            continue
        if max(direct.rel_error, flipped.rel_error) > 1e-11:
            continue
        seen += 1
        assert rel(direct.value, flipped.value) < 1e-9
        assert abs(direct.value - expansion.value) <= 1e-8 * abs(direct.value) + 10 * expansion.error_estimate


def test_E_routes():
    assert E_ROUTES[0] == "auto"
    with pytest.raises(ValueError):
        E_aw(0.1, 0.2, P, route="nope")
    # far outside every 8W7 region the auto route still answers
    assert math.isfinite(abs(E_aw(0.3, 3.0, P).value))


def test_phi_tilde_is_product():
    x, z = 0.4 + 0.1j, -0.3 + 0.05j
    assert rel(phi_tilde(x, z, P).value, cfun(x, z, P).value * Phi(x, z, P).value) < 1e-14


# --- polynomials ---------------------------------------------------------------------

def test_P0_and_P1():
    rng = random.Random(17)
    for _ in range(20):
        p = random_params(rng)
        x = random_cx(rng)
        aw = derive_aw(p)
        a, b, c, d, Q = aw.a, aw.b, aw.c, aw.d, p.base
        X = qpow(p.q, x)
        assert aw_polynomial(0, x, p) == 1
        # the 4phi3 argument q^s turns (1 - q^-s) / (1 - q^s) into -1
        p1 = 1 - (1 - a * b * c * d) * (1 - a * X) * (1 - a / X) / ((1 - a * b) * (1 - a * c) * (1 - a * d))
        assert rel(aw_polynomial(1, x, p), p1) < 1e-13
        assert Q < 1


@settings(max_examples=50)
@given(st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_Pn_even(n, seed):
    rng = random.Random(seed)
    p = random_params(rng)
    x = random_cx(rng)
    assert rel(aw_polynomial(n, x, p), aw_polynomial(n, -x, p)) < 1e-10


def test_Pn_rejects_negative_degree():
    with pytest.raises(ValueError):
        aw_polynomial(-1, 0.1, P)


def test_Phi_polynomial_reduction():
    rng = random.Random(18)
    for n in range(5):
        p = random_params(rng)
        x = random_cx(rng)
        z = spectral_point(n, p)
        try:
            lhs = Phi(x, z, p).value
        except QSeriesError:
            continue
        assert rel(lhs, poly_constant_phi(n, p) * aw_polynomial(n, x, p)) < 1e-9
