"""Eigenfunctions of the Askey-Wilson difference operator.

Everything is built from the exponent-form parameters of
:meth:`HeckeParams.monomials`, so quantities such as q^(s+x+z) a / a~ are
formed by adding exponents and calling ``qpow`` once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .awcore import HeckeParams, QPower, dual, qp
from .qcore import (
    DEFAULT_TOL,
    ConvergenceRegionError,
    DegeneracyError,
    PoleError,
    QSeriesError,
    SeriesValue,
    Tolerance,
    denominator_product,
    phi_series,
    product_of,
    qpochhammer_finite,
    qpochhammer_inf,
    ROUNDING_UNIT,
    qpow,
    terminating_index,
    terminating_sum,
    terminating_w8_7,
    theta_denominator,
    theta_multi,
    w8_7,
    _inf_product,
)

# |argument| below which the 8W7 forms are summed directly
CONVERGENCE_MARGIN = 0.9
# relative error estimate accepted without trying other parameter orders
GOOD_ENOUGH = 1e-12


@dataclass(frozen=True)
class EvalPoint:
    x: complex
    z: complex


def _prod(values, Q, tol) -> SeriesValue:
    return product_of([_inf_product(v, Q, tol) for v in values])


def _quotient(num: SeriesValue, den: SeriesValue, series: SeriesValue | None = None) -> SeriesValue:
    parts = [num, den.reciprocal()]
    if series is not None:
        parts.append(series)
    return product_of(parts)


def W_fn(x: complex, z: complex, params: HeckeParams) -> complex:
    p = params
    return qpow(p.q, (p.kappa + p.lam + x) * (p.kappa + p.upsilon + z) / p.step)


def _st(x: complex, params: HeckeParams, tol: Tolerance, guard: bool) -> SeriesValue:
    q, Q = params.q, params.base
    a, b, c, d, _ = params.monomials()
    S = params.step
    vals = [(qp(S + x) / m)(q) for m in (a, b, c, d)]
    if guard:
        return denominator_product(vals, Q, tol)
    return _prod(vals, Q, tol)


def St(x: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL) -> SeriesValue:
    """Singular term (q^(s+x)/a, q^(s+x)/b, q^(s+x)/c, q^(s+x)/d; q^s)_inf."""
    return _st(complex(x), params, tol, guard=False)


def St_dual(z: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL) -> SeriesValue:
    return _st(complex(z), dual(params), tol, guard=False)


# --- Psi -------------------------------------------------------------------

def _psi_8w7(x, z, a, b, c, d, at, q, S, tol) -> SeriesValue:
    Q = q ** S
    bt, ct, dt = a * b / at, a * c / at, a * d / at
    X, Z, Sq = qp(x), qp(z), qp(S)
    dX = (d * X)(q)
    if abs(dX) >= CONVERGENCE_MARGIN:
        raise ConvergenceRegionError("|d q^x| too large for the 8W7 form of Psi")
    SXZ = Sq * X * Z
    num = _prod([(SXZ * a / at)(q), (SXZ * b / at)(q), (SXZ * c / at)(q),
                 (SXZ * at / d)(q), (Sq * Z * Z)(q), dX], Q, tol)
    den = denominator_product([(Sq * Sq * X * Z * Z / d)(q)], Q, tol)
    series = w8_7((Sq * X * Z * Z / d)(q), (Sq * Z / at)(q), (Sq * Z / dt)(q),
                  (bt * Z)(q), (ct * Z)(q), (Sq * X / d)(q), Q, dX, tol)
    return _quotient(num, den, series)


def _phi43(num, den, Q, tol) -> SeriesValue:
    return phi_series(num, den, Q, Q, tol)


def _psi_4phi3(x, z, a, b, c, d, at, q, S, tol) -> SeriesValue:
    Q = q ** S
    bt, ct, dt = a * b / at, a * c / at, a * d / at
    X, Z, Sq = qp(x), qp(z), qp(S)
    SXZ = Sq * X * Z
    first = _quotient(
        _prod([(Sq * X / a)(q), (d * X)(q), (Sq * Z / bt)(q), (Sq * Z / ct)(q),
               (SXZ * a / at)(q), (SXZ * at / d)(q)], Q, tol),
        denominator_product([(d / a)(q)], Q, tol),
        _phi43([(a * X)(q), (Sq * X / d)(q), (bt * Z)(q), (ct * Z)(q)],
               [(SXZ * a / at)(q), (SXZ * at / d)(q), (Sq * a / d)(q)], Q, tol),
    )
    second = _quotient(
        _prod([(a * X)(q), (Sq * X / d)(q), (bt * Z)(q), (ct * Z)(q),
               (SXZ * at / a)(q), (SXZ * dt / a)(q)], Q, tol),
        denominator_product([(a / d)(q)], Q, tol),
        _phi43([(Sq * X / a)(q), (d * X)(q), (Sq * Z / bt)(q), (Sq * Z / ct)(q)],
               [(SXZ * at / a)(q), (SXZ * dt / a)(q), (Sq * d / a)(q)], Q, tol),
    )
    # the two terms can cancel heavily; the sum's rounding estimate shows it
    return first + second


def psi_from_aw(x: complex, z: complex, a: QPower, b: QPower, c: QPower, d: QPower,
                at: QPower, q: float, s: float, tol: Tolerance = DEFAULT_TOL,
                route: str = "auto") -> SeriesValue:
    """Psi at the level of Askey-Wilson parameters (a, b, c, d) and a~.

    The remaining dual parameters follow from a~ b~ = ab, a~ c~ = ac,
    a~ d~ = ad. ``route`` is "auto", "8W7" or "4phi3".
    """
    x, z = complex(x), complex(z)
    if route == "8W7":
        return _psi_8w7(x, z, a, b, c, d, at, q, s, tol)
    if route == "4phi3":
        return _psi_4phi3(x, z, a, b, c, d, at, q, s, tol)
    if route != "auto":
        raise ValueError(f"unknown route {route!r}")
    # Psi is symmetric in (a, b, c, d), so any of them may play the role of d
    # in the 8W7 form; the smallest |d q^x| converges fastest.
    params = (a, b, c, d)
    X = qp(x)
    order = sorted(range(4), key=lambda i: abs((params[i] * X)(q)))
    best, blocked = None, None
    for i in order:
        if abs((params[i] * X)(q)) >= CONVERGENCE_MARGIN:
            break
        rest = [params[j] for j in range(4) if j != i]
        try:
            val = _psi_8w7(x, z, rest[0], rest[1], rest[2], params[i], at, q, s, tol)
        except PoleError as exc:
            blocked = exc
            continue
        if best is None or _rel_error(val) < _rel_error(best):
            best = val
        if _rel_error(best) <= GOOD_ENOUGH:
            return best
    # two-term form: the result depends on which pair plays (a, d) only
    # through rounding, so keep the best conditioned choice
    for i, j in ((0, 3), (0, 2), (0, 1), (1, 3), (1, 2), (2, 3),
                 (3, 0), (2, 0), (1, 0), (3, 1), (2, 1), (3, 2)):
        mid = [params[k] for k in range(4) if k not in (i, j)]
        try:
            val = _psi_4phi3(x, z, params[i], mid[0], mid[1], params[j], at, q, s, tol)
        except PoleError as exc:
            blocked = exc
            continue
        if best is None or _rel_error(val) < _rel_error(best):
            best = val
        if _rel_error(best) <= GOOD_ENOUGH:
            break
    if best is None:
        raise DegeneracyError(f"both routes for Psi are pole-blocked: {blocked}") from blocked
    return best


def _rel_error(v: SeriesValue) -> float:
    if not v.converged:
        return math.inf
    return v.rel_error


def Psi(x: complex, z: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL,
        route: str = "auto") -> SeriesValue:
    a, b, c, d, at = params.monomials()
    return psi_from_aw(x, z, a, b, c, d, at, params.q, params.step, tol, route)


# --- Phi, c-function, E --------------------------------------------------------

def Phi(x: complex, z: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL,
        route: str = "auto") -> SeriesValue:
    """Asymptotically free eigenfunction W Psi / (St St^d)."""
    x, z = complex(x), complex(z)
    psi = Psi(x, z, params, tol, route)
    den = product_of([_st(x, params, tol, guard=True), _st(z, dual(params), tol, guard=True)])
    out = _quotient(psi, den)
    w = W_fn(x, z, params)
    return out.scaled(w)


def cfun(x: complex, z: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL) -> SeriesValue:
    """Normalized c-function, a quotient of theta functions in base q^s."""
    x, z = complex(x), complex(z)
    q, Q = params.q, params.base
    a, b, c, d, at = params.monomials()
    bt, ct = a * b / at, a * c / at
    Zi, X = qp(-z), qp(x)
    num = theta_multi([(at * Zi)(q), (bt * Zi)(q), (ct * Zi)(q), (d * X * Zi / at)(q)], Q, tol)
    den = theta_denominator([(Zi * Zi)(q), (d * X)(q)], Q, tol)
    out = _quotient(num, den)
    w = W_fn(x, z, params)
    return out.scaled(1 / w)


def _E_direct(x: complex, z: complex, params: HeckeParams, tol: Tolerance) -> SeriesValue:
    q, Q, S = params.q, params.base, params.step
    a, b, c, d, at = params.monomials()
    bt, ct, dt = a * b / at, a * c / at, a * d / at
    X, Z, Sq = qp(x), qp(z), qp(S)
    arg = (Sq / (Z * dt))(q)
    alphas = [(a * X)(q), (a / X)(q), (at * Z)(q), (bt * Z)(q), (ct * Z)(q)]
    if abs(arg) >= CONVERGENCE_MARGIN and not any(
            terminating_index(v, Q, tol) is not None for v in alphas):
        raise ConvergenceRegionError("|q^(s-z)/d~| too large for the 8W7 form of E")
    num = _prod([(at * Sq * Z / (d * X))(q), (at * Sq * Z * X / d)(q), (a * b)(q), (a * c)(q),
                 (Sq * a / d)(q)], Q, tol)
    den = denominator_product([(Sq * X / d)(q), (Sq / (X * d))(q), (Sq * Z / dt)(q),
                               (at * bt * ct * Z)(q)], Q, tol)
    a0 = at * bt * ct * Z / Sq
    series = w8_7(a0(q), *alphas, Q, arg, tol)
    if series.rel_error > GOOD_ENOUGH:
        stops = [n for n in (terminating_index(v, Q, tol) for v in alphas) if n is not None]
        if stops:
            # near a polynomial point the sum cancels and reacts strongly to
            # rounding of its parameters, which must keep their exact relations
            series = _terminating_E_series_mp(x, z, params, min(stops))
    return _quotient(num, den, series)


def _mp_monomials(params: HeckeParams):
    """(q, Q, q^s, a, b, c, d, a~) in mpmath, in the current precision."""
    q = mpmath.mpf(params.q)
    S = mpmath.mpf(params.s.numerator) / params.s.denominator
    k, l, u, v = (mpmath.mpf(t) for t in (params.kappa, params.lam, params.upsilon, params.varsigma))
    h = S / 2
    return q, q ** S, q ** S, q ** (k + l), -q ** (k - l), q ** (h + u + v), -q ** (h + u - v), q ** (k + u)


def _terminating_E_series_mp(x: complex, z: complex, params: HeckeParams, n: int) -> SeriesValue:
    with mpmath.workdps(_poly_digits(n, params.base)):
        q, Q, Sq, a, b, c, d, at = _mp_monomials(params)
        bt, ct, dt = a * b / at, a * c / at, a * d / at
        X, Z = q ** mpmath.mpc(x), q ** mpmath.mpc(z)
        total = terminating_w8_7(at * bt * ct * Z / Sq, [a * X, a / X, at * Z, bt * Z, ct * Z],
                                 Q, Sq / (Z * dt), n)
        return SeriesValue(complex(total), n + 1, 0.0, True, ROUNDING_UNIT * abs(complex(total)))


def _E_expansion(x, z, params, tol) -> SeriesValue:
    plus = product_of([cfun(x, z, params, tol), Phi(x, z, params, tol)])
    minus = product_of([cfun(x, -z, params, tol), Phi(x, -z, params, tol)])
    return plus + minus


E_ROUTES = ("auto", "direct", "direct-z", "dual", "dual-x", "expansion")


def E_aw(x: complex, z: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL,
         route: str = "auto") -> SeriesValue:
    """The Askey-Wilson function.

    Routes: "direct" sums the defining 8W7 at (x, z); "direct-z" uses
    evenness in z; "dual" and "dual-x" use selfduality E(x, z) = E^d(z, +-x);
    "expansion" is the c-function expansion. "auto" tries them in that order.
    """
    x, z = complex(x), complex(z)
    attempts = {
        "direct": lambda: _E_direct(x, z, params, tol),
        "direct-z": lambda: _E_direct(x, -z, params, tol),
        "dual": lambda: _E_direct(z, x, dual(params), tol),
        "dual-x": lambda: _E_direct(z, -x, dual(params), tol),
        "expansion": lambda: _E_expansion(x, z, params, tol),
    }
    if route != "auto":
        if route not in attempts:
            raise ValueError(f"unknown route {route!r}")
        return attempts[route]()
    last: QSeriesError | None = None
    for name in ("direct", "direct-z", "dual", "dual-x", "expansion"):
        try:
            return attempts[name]()
        except (ConvergenceRegionError, PoleError, DegeneracyError) as exc:
            last = exc
    raise ConvergenceRegionError(f"no evaluation route for E reaches ({x}, {z}): {last}")


def phi_tilde(x: complex, z: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL) -> SeriesValue:
    return product_of([cfun(x, z, params, tol), Phi(x, z, params, tol)])


# --- polynomial reduction ----------------------------------------------------

def spectral_point(n: int, params: HeckeParams) -> float:
    """z = -kappa - upsilon - n s, where Phi and E reduce to polynomials."""
    return -(params.kappa + params.upsilon) - n * params.step


def _poly_digits(n: int, Q: float) -> int:
    # the terms of the 4phi3 exceed its value by up to about Q^(-n^2/2)
    return 30 + int(n * n * abs(math.log10(Q)) / 2) + 2 * n


def aw_polynomial(n: int, x: complex, params: HeckeParams, tol: Tolerance = DEFAULT_TOL) -> complex:
    """Normalized Askey-Wilson polynomial P_n, a terminating 4phi3 in base q^s.

    The sum cancels catastrophically in binary64 once n >= 4 and q^s is
    small, so it is accumulated with mpmath at a precision chosen from n
    and q^s, then rounded back to a Python complex.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    with mpmath.workdps(_poly_digits(n, params.base)):
        q = mpmath.mpf(params.q)
        S = mpmath.mpf(params.s.numerator) / params.s.denominator
        Q = q ** S
        a, b, c, d = (m.sign * q ** mpmath.mpf(m.exponent.real) for m in params.monomials()[:4])
        X = q ** mpmath.mpc(complex(x))
        den = [a * b, a * c, a * d]
        for k in range(n):
            for v in den:
                if abs(1 - v * Q ** k) <= tol.pole_guard:
                    raise PoleError(f"P_{n}: denominator factor vanishes at k = {k}")
        total = terminating_sum([Q ** -n, Q ** (n - 1) * a * b * c * d, a * X, a / X], den, Q, Q, n)
        return complex(total)


def poly_constant_phi(n: int, params: HeckeParams, tol: Tolerance = DEFAULT_TOL) -> complex:
    """Constant C_n with Phi(x, -kappa-upsilon-ns) = C_n P_n(x)."""
    q, Q, S = params.q, params.base, params.step
    a, b, c, d, _ = params.monomials()
    abcd = a * b * c * d
    top = ((a * a).inv()(q) ** n
           * qpochhammer_finite((a * b)(q), Q, n) * qpochhammer_finite((a * c)(q), Q, n)
           * qpochhammer_finite((a * d)(q), Q, n)
           * qpochhammer_inf((qp(2 * (1 - n) * S) / abcd)(q), Q, tol).value)
    bottom = (qpochhammer_finite((qp((n - 1) * S) * abcd)(q), Q, n)
              * St_dual(spectral_point(n, params), params, tol).value)
    if abs(bottom) <= tol.pole_guard:
        raise PoleError("polynomial reduction constant is singular")
    return top / bottom


def poly_constant_E(params: HeckeParams, tol: Tolerance = DEFAULT_TOL) -> complex:
    """Constant with E(x, -kappa-upsilon-ns) = constant * P_n(x), for every n."""
    q, Q, S = params.q, params.base, params.step
    a, b, c, d, _ = params.monomials()
    num = qpochhammer_inf((a * b)(q), Q, tol).value * qpochhammer_inf((a * c)(q), Q, tol).value
    den = denominator_product([(qp(S) / (a * d))(q)], Q, tol).value
    return num / den
