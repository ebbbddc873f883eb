"""Hecke and Askey-Wilson parameters, and the difference operators D and L."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

from .qcore import DEFAULT_TOL, DomainError, PoleError, Tolerance, qpow

GridFunction = Callable[[complex], complex]


def as_fraction(s) -> Fraction:
    if isinstance(s, Fraction):
        return s
    if isinstance(s, str):
        return Fraction(s.strip())
    if isinstance(s, float):
        return Fraction(s).limit_denominator(10**6)
    return Fraction(s)


@dataclass(frozen=True)
class QPower:
    """A signed power ``sign * q**exponent`` kept in exponent form.

    Products and quotients add exponents exactly instead of multiplying
    rounded values.
    """

    sign: int
    exponent: complex

    def __mul__(self, other):
        if isinstance(other, QPower):
            return QPower(self.sign * other.sign, self.exponent + other.exponent)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, QPower):
            return QPower(self.sign * other.sign, self.exponent - other.exponent)
        return NotImplemented

    def __neg__(self):
        return QPower(-self.sign, self.exponent)

    def inv(self):
        return QPower(self.sign, -self.exponent)

    def shift(self, e) -> "QPower":
        """Multiply by q**e."""
        return QPower(self.sign, self.exponent + e)

    def __call__(self, q: float) -> complex:
        return self.sign * qpow(q, self.exponent)


def qp(e, sign: int = 1) -> QPower:
    return QPower(sign, complex(e))


@dataclass(frozen=True)
class HeckeParams:
    kappa: float
    lam: float
    upsilon: float
    varsigma: float
    q: float
    s: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "s", as_fraction(self.s))
        for name in ("kappa", "lam", "upsilon", "varsigma", "q"):
            v = getattr(self, name)
            if isinstance(v, complex) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real number")
            object.__setattr__(self, name, float(v))
        if not 0 < self.q < 1:
            raise DomainError("q must lie in (0, 1)")
        if self.s <= 0:
            raise DomainError("step size s must be positive")

    @property
    def step(self) -> float:
        return float(self.s)

    @property
    def base(self) -> float:
        """The base q**s of the series."""
        return self.q ** float(self.s)

    def monomials(self):
        """(a, b, c, d, a~) as exponent-form signed powers."""
        k, l, u, v, h = self.kappa, self.lam, self.upsilon, self.varsigma, float(self.s) / 2
        return (qp(k + l), qp(k - l, -1), qp(h + u + v), qp(h + u - v, -1), qp(k + u))

    def as_dict(self) -> dict:
        return {"kappa": self.kappa, "lambda": self.lam, "upsilon": self.upsilon,
                "varsigma": self.varsigma, "q": self.q, "s": str(self.s)}


@dataclass(frozen=True)
class AWParams:
    a: complex
    b: complex
    c: complex
    d: complex
    a_dual: complex
    b_dual: complex
    c_dual: complex
    d_dual: complex


def dual(params: HeckeParams) -> HeckeParams:
    return replace(params, lam=params.upsilon, upsilon=params.lam)


def derive_aw(params: HeckeParams) -> AWParams:
    q = params.q
    a, b, c, d, _ = params.monomials()
    at, bt, ct, dt, _ = dual(params).monomials()
    return AWParams(a(q), b(q), c(q), d(q), at(q), bt(q), ct(q), dt(q))


def specialize_J(kappa: float, lam: float, q: float, s) -> HeckeParams:
    """Hecke tuple (kappa, lam, kappa, lam) with step s."""
    return HeckeParams(kappa, lam, kappa, lam, q, as_fraction(s))


def specialize_R(kappa: float, lam: float, q: float, s) -> HeckeParams:
    """Hecke tuple (kappa, lam, 0, 0) with step s/2.

    The spectral variable must be halved by the caller: Xi_R(x, z) is
    Xi(x, z/2) evaluated at these parameters.
    """
    return HeckeParams(kappa, lam, 0.0, 0.0, q, as_fraction(s) / 2)


def coeff_A(x: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL) -> complex:
    q, s = params.q, params.step
    x = complex(x)
    den1 = 1 - qpow(q, 2 * x)
    den2 = 1 - qpow(q, s + 2 * x)
    if abs(den1) <= tol.pole_guard or abs(den2) <= tol.pole_guard:
        raise PoleError(f"coefficient A has a pole at x = {x}")
    a, b, c, d, at = params.monomials()
    num = 1 + 0j
    for p in (a, b, c, d):
        num *= 1 - p.shift(x)(q)
    return num / (at(q) * den1 * den2)


def apply_D(f: GridFunction, x: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL) -> complex:
    """(D f)(x) = A(x)(f(x+s) - f(x)) + A(-x)(f(x-s) - f(x))."""
    x = complex(x)
    s = params.step
    ap = coeff_A(x, params, tol)
    am = coeff_A(-x, params, tol)
    f0 = f(x)
    return ap * (f(x + s) - f0) + am * (f(x - s) - f0)


def _L_coeff(x: complex, kappa: float, lam: float, q: float, tol: Tolerance) -> complex:
    den = 1 - qpow(q, 2 * x)
    if abs(den) <= tol.pole_guard:
        raise PoleError(f"operator L has a pole at x = {x}")
    return (1 - qpow(q, kappa + lam + x)) * (1 + qpow(q, kappa - lam + x)) / (qpow(q, kappa) * den)


def apply_L(f: GridFunction, x: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL) -> complex:
    """Half-step operator L built from (kappa, lam, q); the step is params.s / 2."""
    x = complex(x)
    h = params.step / 2
    k, l, q = params.kappa, params.lam, params.q
    return _L_coeff(x, k, l, q, tol) * f(x + h) + _L_coeff(-x, k, l, q, tol) * f(x - h)
