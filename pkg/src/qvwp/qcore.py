"""q-series engine: powers of q, q-Pochhammer symbols, theta functions,
basic hypergeometric series and the very-well-poised 8W7 series.

Every infinite sum or product returns a :class:`SeriesValue` carrying
truncation diagnostics. Arithmetic is binary64 complex throughout.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Sequence


class QSeriesError(ArithmeticError):
    """Base class for evaluation failures."""

    kind = "evaluation"


class DomainError(QSeriesError, ValueError):
    kind = "domain"


class PoleError(QSeriesError):
    kind = "pole"


class ConvergenceRegionError(QSeriesError):
    kind = "convergence"


class DegeneracyError(QSeriesError):
    kind = "degeneracy"


@dataclass(frozen=True)
class Tolerance:
    rel_tol: float = 1e-13
    term_cap: int = 10_000
    pole_guard: float = 1e-8

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if not 0 < self.pole_guard < 1:
            raise ValueError("pole_guard must lie in (0, 1)")
        if self.term_cap < 1:
            raise ValueError("term_cap must be positive")


DEFAULT_TOL = Tolerance()

# a few ulps of binary64, per unit of summed magnitude
ROUNDING_UNIT = 4 * 2.0 ** -52


@dataclass(frozen=True)
class SeriesValue:
    """A computed value with truncation diagnostics.

    ``tail_estimate`` is an absolute bound (or estimate, for sums) on the
    omitted part. ``rounding_estimate`` bounds the rounding accumulated
    over summed terms, which dominates when they cancel.
    """

    value: complex
    terms_used: int = 0
    tail_estimate: float = 0.0
    converged: bool = True
    rounding_estimate: float = 0.0

    @property
    def error_estimate(self) -> float:
        return self.tail_estimate + self.rounding_estimate

    @property
    def rel_error(self) -> float:
        if not self.converged:
            return math.inf
        return self.error_estimate / max(abs(self.value), 1e-300)

    def scaled(self, factor: complex) -> "SeriesValue":
        """The value times an exactly known factor."""
        f = abs(factor)
        return SeriesValue(self.value * factor, self.terms_used, self.tail_estimate * f,
                           self.converged, self.rounding_estimate * f)

    def __add__(self, other: "SeriesValue") -> "SeriesValue":
        if not isinstance(other, SeriesValue):
            return NotImplemented
        value = self.value + other.value
        # the sum itself rounds at the scale of its larger summand
        mass = ROUNDING_UNIT * max(abs(self.value), abs(other.value))
        return SeriesValue(value, max(self.terms_used, other.terms_used),
                           self.tail_estimate + other.tail_estimate, self.converged and other.converged,
                           self.rounding_estimate + other.rounding_estimate + mass)

    def reciprocal(self) -> "SeriesValue":
        a = abs(self.value)
        return SeriesValue(1 / self.value, self.terms_used, self.tail_estimate / a ** 2,
                           self.converged, self.rounding_estimate / a ** 2)

    def __complex__(self):
        return complex(self.value)

    def __abs__(self):
        return abs(self.value)

    def combine(self, other: "SeriesValue", value: complex) -> "SeriesValue":
        """Aggregate diagnostics of two factors into a new value."""
        p = product_of([self, other])
        return SeriesValue(value, p.terms_used, p.tail_estimate / max(abs(p.value), 1e-300) * abs(value),
                           p.converged, p.rounding_estimate / max(abs(p.value), 1e-300) * abs(value))


def product_of(parts: Sequence[SeriesValue]) -> SeriesValue:
    """Product of values; relative tail and rounding estimates add."""
    value = 1 + 0j
    terms = 0
    rel = rel_round = 0.0
    ok = True
    for p in parts:
        value *= p.value
        terms = max(terms, p.terms_used)
        size = max(abs(p.value), 1e-300)
        if p.tail_estimate:
            rel += p.tail_estimate / size
        if p.rounding_estimate:
            rel_round += p.rounding_estimate / size
        ok = ok and p.converged
    return SeriesValue(value, terms, rel * abs(value), ok, rel_round * abs(value))


def _split(tol: Tolerance, parts: int) -> Tolerance:
    # share the relative tail budget among the factors of a product
    if parts <= 1:
        return tol
    return replace(tol, rel_tol=tol.rel_tol / parts)


def _check_q(q: float) -> None:
    if not (isinstance(q, (int, float)) and 0.0 < q < 1.0):
        raise DomainError(f"q must be a real number in (0, 1), got {q!r}")


def qpow(q: float, x: complex) -> complex:
    """``q**x`` defined through the real logarithm of ``q``."""
    _check_q(q)
    return cmath.exp(complex(x) * math.log(q))


def qpochhammer_finite(a: complex, q: float, n: int) -> complex:
    if n < 0:
        raise DomainError("n must be nonnegative")
    value = 1 + 0j
    qi = 1.0
    for _ in range(n):
        value *= 1 - a * qi
        qi *= q
    return value


def _inf_product(a: complex, q: float, tol: Tolerance, guard: float | None = None) -> SeriesValue:
    """(a; q)_inf with a certified tail; raises PoleError if ``guard`` is given
    and some factor has modulus below it."""
    a = complex(a)
    value = 1 + 0j
    if a == 0:
        return SeriesValue(value, 0, 0.0, True)
    abs_a = abs(a)
    inv = 1.0 / (1.0 - q)
    qi = 1.0
    i = 0
    while True:
        # omitted factors i, i+1, ...: |log prod| <= 2|a| q^i / (1 - q)
        tail_rel = 2.0 * abs_a * qi * inv
        if abs_a * qi <= 0.5 and tail_rel <= tol.rel_tol:
            return SeriesValue(value, i, tail_rel * abs(value), True)
        if i >= tol.term_cap:
            rel = tail_rel if abs_a * qi <= 0.5 else math.inf
            return SeriesValue(value, i, rel * abs(value), False)
        factor = 1 - a * qi
        if guard is not None and abs(factor) <= guard:
            raise PoleError(f"vanishing factor 1 - ({a})*{q}^{i}")
        if factor == 0:
            return SeriesValue(0j, i + 1, 0.0, True)
        value *= factor
        qi *= q
        i += 1


def qpochhammer_inf(a: complex, q: float, tol: Tolerance = DEFAULT_TOL) -> SeriesValue:
    _check_q(q)
    return _inf_product(a, q, tol)


def qpochhammer_multi(params: Sequence[complex], q: float, n, tol: Tolerance = DEFAULT_TOL) -> SeriesValue:
    """Product of (a; q)_n over ``params``; ``n`` may be ``math.inf``."""
    if len(params) == 0:
        raise DomainError("parameter list must be nonempty")
    _check_q(q)
    if n is None or n == math.inf:
        tol = _split(tol, len(params))
        return product_of([_inf_product(a, q, tol) for a in params])
    value = 1 + 0j
    for a in params:
        value *= qpochhammer_finite(a, q, int(n))
    return SeriesValue(value, int(n), 0.0, True)


def denominator_product(params: Sequence[complex], q: float, tol: Tolerance) -> SeriesValue:
    """Infinite product destined for a denominator: refuses near-zero factors."""
    _check_q(q)
    tol = _split(tol, len(params))
    return product_of([_inf_product(a, q, tol, tol.pole_guard) for a in params])


def theta(u: complex, q: float, tol: Tolerance = DEFAULT_TOL) -> SeriesValue:
    """Modified Jacobi theta function (u, q/u; q)_inf."""
    _check_q(q)
    u = complex(u)
    if u == 0:
        raise DomainError("theta is undefined at u = 0")
    tol = _split(tol, 2)
    return product_of([_inf_product(u, q, tol), _inf_product(q / u, q, tol)])


def theta_multi(us: Sequence[complex], q: float, tol: Tolerance = DEFAULT_TOL) -> SeriesValue:
    tol = _split(tol, len(us))
    return product_of([theta(u, q, tol) for u in us])


def theta_denominator(us: Sequence[complex], q: float, tol: Tolerance) -> SeriesValue:
    """Theta product destined for a denominator: refuses near-zero factors."""
    _check_q(q)
    tol = _split(tol, 2 * len(us))
    parts = []
    for u in us:
        u = complex(u)
        if u == 0:
            raise DomainError("theta is undefined at u = 0")
        parts.append(_inf_product(u, q, tol, tol.pole_guard))
        parts.append(_inf_product(q / u, q, tol, tol.pole_guard))
    return product_of(parts)


def terminating_index(a: complex, q: float, tol: Tolerance) -> int | None:
    """Return n if ``a`` equals q^(-n) within pole_guard (relative), else None."""
    a = complex(a)
    if a == 0 or a.real <= 0:
        return None
    n = round(-math.log(abs(a)) / math.log(q))
    if n < 0 or n > tol.term_cap:
        return None
    target = q ** (-n)
    if abs(a - target) <= tol.pole_guard * target:
        return n
    return None


def _sum_series(ratio, z: complex, stop_after: int | None, tol: Tolerance, leading=None) -> SeriesValue:
    """Sum t_0 = 1, t_{j+1} = t_j * ratio(j).

    ``leading(j)`` optionally multiplies t_j on output (used for the
    very-well-poised factor). ``stop_after`` is the last index of a
    terminating series.
    """
    core = 1 + 0j
    total = (leading(0) if leading else 1) + 0j
    # sum of |terms|, for the rounding part of the error estimate
    mass = abs(total)
    small_run = 0
    j = 0
    last_rho = abs(z)
    while True:
        if stop_after is not None and j >= stop_after:
            return SeriesValue(total, j + 1, 0.0, True, ROUNDING_UNIT * mass)
        if j + 1 >= tol.term_cap:
            tail = abs(core) * last_rho / (1 - last_rho) if last_rho < 1 else math.inf
            return SeriesValue(total, j + 1, tail, False, ROUNDING_UNIT * mass)
        r = ratio(j)
        core *= r
        j += 1
        term = core * leading(j) if leading else core
        total += term
        mass += abs(term)
        if core == 0:
            return SeriesValue(total, j + 1, 0.0, True, ROUNDING_UNIT * mass)
        last_rho = abs(r)
        scale = abs(total)
        if abs(term) <= tol.rel_tol * scale:
            small_run += 1
        else:
            small_run = 0
        if small_run >= 3 and stop_after is None:
            rho = max(last_rho, abs(z)) if last_rho < 1 else last_rho
            if rho < 1:
                tail = abs(term) * rho / (1 - rho)
                if tail <= tol.rel_tol * max(1.0, scale) or abs(term) == 0:
                    return SeriesValue(total, j + 1, tail, True, ROUNDING_UNIT * mass)


def phi_series(num: Sequence[complex], den: Sequence[complex], q: float, z: complex,
               tol: Tolerance = DEFAULT_TOL) -> SeriesValue:
    """The basic hypergeometric series r+1 phi r (num; den; q, z)."""
    _check_q(q)
    num = [complex(a) for a in num]
    den = [complex(b) for b in den]
    if len(num) != len(den) + 1:
        raise DomainError("phi_series needs len(num) == len(den) + 1")
    z = complex(z)
    if z == 0:
        return SeriesValue(1 + 0j, 1, 0.0, True)
    stops = [n for n in (terminating_index(a, q, tol) for a in num) if n is not None]
    stop_after = min(stops) if stops else None
    if stop_after is None and abs(z) >= 1:
        raise ConvergenceRegionError(f"nonterminating series with |z| = {abs(z):.6g} >= 1")
    guard = tol.pole_guard

    def ratio(j):
        qj = q ** j
        top = z
        for a in num:
            top *= 1 - a * qj
        bottom = 1 - q ** (j + 1)
        for b in den:
            f = 1 - b * qj
            if abs(f) <= guard:
                raise PoleError(f"denominator factor 1 - ({b})*{q}^{j} vanishes")
            bottom *= f
        return top / bottom

    return _sum_series(ratio, z, stop_after, tol)


def w8_7(a0: complex, a1: complex, a2: complex, a3: complex, a4: complex, a5: complex,
         q: float, z: complex, tol: Tolerance = DEFAULT_TOL) -> SeriesValue:
    """Very-well-poised 8W7(a0; a1, ..., a5; q, z), summed term by term."""
    _check_q(q)
    a0 = complex(a0)
    alphas = [complex(a) for a in (a1, a2, a3, a4, a5)]
    z = complex(z)
    guard = tol.pole_guard
    if a0 == 0:
        raise DomainError("8W7 requires a0 != 0")
    if any(a == 0 for a in alphas):
        raise DomainError("8W7 requires nonzero numerator parameters")
    lead0 = 1 - a0
    if abs(lead0) <= guard:
        raise PoleError("8W7 with a0 = 1")
    if a0.real > 0 and terminating_index(a0, q, tol) is not None:
        raise PoleError("8W7 with a0 of the form q^-m")
    if z == 0:
        return SeriesValue(1 + 0j, 1, 0.0, True)
    stops = [n for n in (terminating_index(a, q, tol) for a in alphas) if n is not None]
    stop_after = min(stops) if stops else None
    if stop_after is None and abs(z) >= 1:
        raise ConvergenceRegionError(f"nonterminating 8W7 with |z| = {abs(z):.6g} >= 1")
    dens = [q * a0 / a for a in alphas]

    def ratio(r):
        qr = q ** r
        top = z * (1 - a0 * qr)
        bottom = 1 - q * qr
        for a, b in zip(alphas, dens):
            top *= 1 - a * qr
            f = 1 - b * qr
            if abs(f) <= guard:
                raise PoleError(f"8W7 denominator factor 1 - ({b})*{q}^{r} vanishes")
            bottom *= f
        return top / bottom

    def leading(r):
        return (1 - a0 * q ** (2 * r)) / lead0

    return _sum_series(ratio, z, stop_after, tol, leading)


def terminating_sum(num, den, q, z, n: int):
    """Sum the first n+1 terms of r+1 phi r (num; den; q, z) in whatever
    arithmetic the arguments carry (floats, complex, mpmath numbers).

    Used where binary64 cancellation is too severe for :func:`phi_series`.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    term = 1
    total = 1
    for j in range(n):
        qj = q ** j
        top = z
        for a in num:
            top = top * (1 - a * qj)
        bottom = 1 - q ** (j + 1)
        for b in den:
            bottom = bottom * (1 - b * qj)
        if bottom == 0:
            raise PoleError("vanishing denominator in terminating sum")
        term = term * top / bottom
        total = total + term
    return total


def terminating_w8_7(a0, alphas, q, z, n: int):
    """First n+1 terms of 8W7(a0; alphas; q, z) in the arithmetic of the
    arguments; companion of :func:`terminating_sum`."""
    term = 1
    total = 1
    for r in range(n):
        qr = q ** r
        top = z * (1 - a0 * qr)
        bottom = 1 - q ** (r + 1)
        for a in alphas:
            top = top * (1 - a * qr)
            bottom = bottom * (1 - q * a0 / a * qr)
        if bottom == 0:
            raise PoleError("vanishing denominator in terminating 8W7")
        term = term * top / bottom
        total = total + term * (1 - a0 * q ** (2 * r + 2)) / (1 - a0)
    return total
