"""Randomized verification of the identities satisfied by the eigenfunctions.

Each ``check_*`` draws admissible random points, evaluates both sides of
one identity and summarizes the residuals in an :class:`IdentityReport`.
A point is admissible when every evaluation succeeds (no pole, region or
convergence failure) and the identity is numerically well conditioned
there; otherwise it is re-drawn, up to ``max_retries`` times.
"""
from __future__ import annotations

import cmath
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from .awcore import (HeckeParams, apply_D, apply_L, derive_aw, dual, specialize_J,
                     specialize_R)
from .eigenfun import (E_aw, Phi, Psi, W_fn, aw_polynomial, cfun, phi_tilde,
                       poly_constant_E, poly_constant_phi, psi_from_aw, spectral_point)
from .qcore import (DEFAULT_TOL, ConvergenceRegionError, QSeriesError, SeriesValue,
                    Tolerance, qpochhammer_multi, qpow, terminating_sum, theta_multi, w8_7)


class NotConverged(QSeriesError):
    kind = "convergence"


class IllConditioned(QSeriesError):
    kind = "conditioning"


# summands may exceed the compared values by at most this factor; each
# summand carries a relative rounding error of order 1e-13
CONDITION_LIMIT = 1e3
# relative error estimate a series must meet to be compared at all
ACCURACY_LIMIT = 1e-11

# rescaled Hecke tuples (kappa, lam, upsilon, varsigma) / s with trivial monodromy
TRIVIAL_MONODROMY_TUPLES = (
    (0, 0, 0, 0), (0.5, 0.5, 0, 0), (0.5, 0, 0.5, 0), (0.5, 0, 0, 0.5),
    (0, 0.5, 0.5, 0), (0, 0.5, 0, 0.5), (0, 0, 0.5, 0.5), (0.5, 0.5, 0.5, 0.5),
)


@dataclass(frozen=True)
class SamplePolicy:
    q_range: tuple = (0.2, 0.8)
    hecke_range: tuple = (-0.7, 0.7)
    s_choices: tuple = (Fraction(1), Fraction(2))
    re_range: tuple = (-2.0, 2.0)
    # imaginary parts, in units of the period 2 pi / |ln q| of q^x
    im_range: tuple = (-0.3, 0.3)
    n_points: int = 100
    seed: int = 42
    max_retries: int = 50
    check_tol: float = 1e-8
    min_quota: float = 0.8
    max_degree: int | None = None
    # multiplies the left-hand side; nonzero only to demonstrate detection
    perturbation: float = 0.0

    def __post_init__(self):
        for name in ("q_range", "hecke_range", "re_range", "im_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} is empty")
        if not (0 < self.q_range[0] and self.q_range[1] < 1):
            raise ValueError("q_range must lie inside (0, 1)")
        if not self.s_choices:
            raise ValueError("s_choices is empty")


@dataclass
class IdentityReport:
    identity_id: str
    seed: int
    points_requested: int
    points_evaluated: int
    points_skipped: int
    max_abs_residual: float
    max_rel_residual: float
    worst_point: dict | None
    passed: bool
    info: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("info")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "IdentityReport":
        keys = ("identity_id", "seed", "points_requested", "points_evaluated", "points_skipped",
                "max_abs_residual", "max_rel_residual", "worst_point", "passed")
        return cls(**{k: d[k] for k in keys})


def relative_residual(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-30)


def _v(sv: SeriesValue) -> complex:
    if not sv.converged:
        raise NotConverged("series did not converge within the term cap")
    return sv.value


def _v_acc(sv: SeriesValue) -> complex:
    """Like :func:`_v`, but also rejects values whose own error estimate
    (truncation plus rounding under cancellation) is too large."""
    value = _v(sv)
    if sv.rel_error > ACCURACY_LIMIT:
        raise IllConditioned("series cancels too much at this point")
    return value


def _pair(lhs, rhs, *summands):
    """(lhs, rhs) after checking that the summands do not cancel badly."""
    size = max(abs(lhs), abs(rhs))
    scale = max([abs(t) for t in summands], default=0.0)
    if scale > CONDITION_LIMIT * size:
        raise IllConditioned(f"cancellation factor {scale / max(size, 1e-300):.3g}")
    return lhs, rhs


# --- sampling ---------------------------------------------------------------

class Sampler:
    def __init__(self, policy: SamplePolicy, rng: np.random.Generator):
        self.policy = policy
        self.rng = rng

    def uniform(self, lo, hi) -> float:
        return float(self.rng.uniform(lo, hi))

    def q(self) -> float:
        return self.uniform(*self.policy.q_range)

    def s(self) -> Fraction:
        return Fraction(self.policy.s_choices[int(self.rng.integers(len(self.policy.s_choices)))])

    def hecke(self) -> float:
        return self.uniform(*self.policy.hecke_range)

    def params(self, q=None, s=None) -> HeckeParams:
        q = self.q() if q is None else q
        s = self.s() if s is None else s
        return HeckeParams(self.hecke(), self.hecke(), self.hecke(), self.hecke(), q, s)

    def point(self, q: float) -> complex:
        period = 2 * math.pi / abs(math.log(q))
        return complex(self.uniform(*self.policy.re_range), self.uniform(*self.policy.im_range) * period)

    def disc(self, r_lo: float, r_hi: float) -> complex:
        """Random complex number with modulus in [r_lo, r_hi]."""
        return cmath.rect(self.uniform(r_lo, r_hi), self.uniform(-math.pi, math.pi))


def _point_record(x, z, params: HeckeParams | None, q: float | None = None) -> dict:
    if params is None:
        params_d = {"kappa": 0.0, "lambda": 0.0, "upsilon": 0.0, "varsigma": 0.0,
                    "q": q, "s": "1"}
    else:
        params_d = params.as_dict()
    x, z = complex(x), complex(z)
    return {"x": [x.real, x.imag], "z": [z.real, z.imag], "params": params_d}


Evaluation = Callable[[Sampler, Tolerance], tuple]


def _substream(seed: int, identity_id: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(identity_id.encode())]))


def run_identity(identity_id: str, evaluate: Evaluation, policy: SamplePolicy | None,
                 tol: Tolerance | None, info: Callable | None = None) -> IdentityReport:
    """Drive one identity: ``evaluate`` draws a sample and returns
    (record, [(lhs, rhs), ...]) or raises QSeriesError when inadmissible."""
    policy = policy or SamplePolicy()
    tol = tol or DEFAULT_TOL
    sampler = Sampler(policy, _substream(policy.seed, identity_id))
    evaluated = skipped = 0
    max_abs = max_rel = 0.0
    worst = None
    for _ in range(policy.n_points):
        for _attempt in range(policy.max_retries):
            try:
                record, pairs = evaluate(sampler, tol)
            except (QSeriesError, ZeroDivisionError, OverflowError):
                continue
            break
        else:
            skipped += 1
            continue
        evaluated += 1
        for lhs, rhs in pairs:
            lhs = lhs * (1 + policy.perturbation)
            r = relative_residual(lhs, rhs)
            if not math.isfinite(r):
                r = math.inf
            if r > max_rel or worst is None:
                max_rel, worst = max(r, max_rel), record
            max_abs = max(max_abs, abs(lhs - rhs))
    passed = (max_rel <= policy.check_tol
              and evaluated >= policy.min_quota * policy.n_points and evaluated > 0)
    report = IdentityReport(identity_id, policy.seed, policy.n_points, evaluated, skipped,
                            max_abs, max_rel, worst, passed)
    if info is not None:
        report.info = info(policy, tol)
    return report


# --- the identities ---------------------------------------------------------

def _eigen_phi(sp: Sampler, tol):
    p = sp.params()
    x, z = sp.point(p.q), sp.point(p.q)
    at = derive_aw(p).a_dual
    ev = qpow(p.q, z) + qpow(p.q, -z) - at - 1 / at
    f = lambda t: _v(Phi(t, z, p, tol))
    lhs = apply_D(f, x, p, tol)
    f0 = f(x)
    from .awcore import coeff_A
    big = abs(coeff_A(x, p, tol)) * (abs(f(x + p.step)) + abs(f0)) + \
        abs(coeff_A(-x, p, tol)) * (abs(f(x - p.step)) + abs(f0))
    return _point_record(x, z, p), [_pair(lhs, ev * f0, big)]


def check_eigen_phi(policy=None, tol=None):
    return run_identity("eigen_phi", _eigen_phi, policy, tol)


def _selfdual_phi(sp, tol):
    p = sp.params()
    x, z = sp.point(p.q), sp.point(p.q)
    return _point_record(x, z, p), [(_v(Phi(x, z, p, tol)), _v(Phi(z, x, dual(p), tol)))]


def check_selfdual_phi(policy=None, tol=None):
    return run_identity("selfdual_phi", _selfdual_phi, policy, tol)


def _E_series(x, z, p, tol):
    """E through its defining 8W7 at (x, z) or (x, -z), never via duality."""
    try:
        return E_aw(x, z, p, tol, route="direct")
    except ConvergenceRegionError:
        return E_aw(x, z, p, tol, route="direct-z")


def _selfdual_E(sp, tol):
    p = sp.params()
    x, z = sp.point(p.q), sp.point(p.q)
    return _point_record(x, z, p), [(_v(_E_series(x, z, p, tol)), _v(_E_series(z, x, dual(p), tol)))]


def check_selfdual_E(policy=None, tol=None):
    return run_identity("selfdual_E", _selfdual_E, policy, tol)


def _even_E(sp, tol):
    p = sp.params()
    x, z = sp.point(p.q), sp.point(p.q)
    ref = _v(E_aw(x, z, p, tol, route="expansion"))
    flip_x = _v(E_aw(-x, z, p, tol, route="expansion"))
    flip_z = _v(E_aw(x, -z, p, tol, route="expansion"))
    terms = [_v(cfun(x, w, p, tol)) * _v(Phi(x, w, p, tol)) for w in (z, -z)]
    terms += [_v(cfun(-x, w, p, tol)) * _v(Phi(-x, w, p, tol)) for w in (z, -z)]
    return _point_record(x, z, p), [_pair(flip_x, ref, *terms), _pair(flip_z, ref, *terms)]


def check_even_E(policy=None, tol=None):
    return run_identity("even_E", _even_E, policy, tol)


def _c_expansion(sp, tol):
    p = sp.params()
    x, z = sp.point(p.q), sp.point(p.q)
    direct = _v(_E_series(x, z, p, tol))
    t1 = _v(cfun(x, z, p, tol)) * _v(Phi(x, z, p, tol))
    t2 = _v(cfun(x, -z, p, tol)) * _v(Phi(x, -z, p, tol))
    return _point_record(x, z, p), [_pair(direct, t1 + t2, t1, t2)]


def check_c_expansion(policy=None, tol=None):
    return run_identity("c_expansion", _c_expansion, policy, tol)


def _connection(sp, tol):
    p = sp.params()
    pd = dual(p)
    x, z = sp.point(p.q), sp.point(p.q)
    c_xz, c_xmz = _v(cfun(x, z, p, tol)), _v(cfun(x, -z, p, tol))
    cd_zx, cd_zmx = _v(cfun(z, x, pd, tol)), _v(cfun(z, -x, pd, tol))
    phi_p, phi_m = _v(Phi(x, z, p, tol)), _v(Phi(x, -z, p, tol))
    lhs = _v(Phi(-x, z, p, tol))
    t1 = c_xz / cd_zmx * phi_p
    t2 = cd_zx / cd_zmx * phi_p
    t3 = c_xmz / cd_zmx * phi_m
    return _point_record(x, z, p), [_pair(lhs, t1 - t2 + t3, t1, t2, t3)]


def check_connection(policy=None, tol=None):
    return run_identity("connection", _connection, policy, tol)


def _c_quadratic(sp, tol):
    p = sp.params()
    pd = dual(p)
    x, z = sp.point(p.q), sp.point(p.q)
    c = lambda u, w: _v(cfun(u, w, p, tol))
    cd = lambda u, w: _v(cfun(u, w, pd, tol))
    t = [c(x, z) * cd(z, -x) * cd(-z, -x), c(-x, z) * cd(z, x) * cd(-z, -x),
         c(x, z) * c(-x, z) * cd(-z, -x), c(x, z) * c(-x, -z) * cd(z, -x)]
    return _point_record(x, z, p), [_pair(t[0] + t[1], t[2] + t[3], *t)]


def check_c_quadratic(policy=None, tol=None):
    return run_identity("c_quadratic", _c_quadratic, policy, tol)


def _slater_theta(sp, tol):
    p = sp.params(s=Fraction(1))
    q = p.q
    aw = derive_aw(p)
    a, b, c, d = aw.a, aw.b, aw.c, aw.d
    at, bt, ct, dt = aw.a_dual, aw.b_dual, aw.c_dual, aw.d_dual
    x, z = sp.point(q), sp.point(q)
    Q = lambda e: qpow(q, e)
    T = lambda us: _v(theta_multi(us, q, tol))
    r = d / at
    t1 = T([r * Q(x + z), r * Q(x - z), a * Q(x), b * Q(x), c * Q(x), d * Q(-x), Q(2 * z)])
    t2 = T([r * Q(-x + z), r * Q(x + z), at * Q(z), bt * Q(z), ct * Q(z), dt * Q(-z), Q(2 * x)])
    t3 = Q(2 * x) * T([r * Q(-x - z), r * Q(-x + z), a * Q(-x), b * Q(-x), c * Q(-x), d * Q(x), Q(2 * z)])
    t4 = Q(2 * z) * T([r * Q(-x - z), r * Q(x - z), at * Q(-z), bt * Q(-z), ct * Q(-z), dt * Q(z), Q(2 * x)])
    return _point_record(x, z, p), [_pair(t1 - t2, t3 - t4, t1, t2, t3, t4)]


def check_slater_theta(policy=None, tol=None):
    return run_identity("slater_theta", _slater_theta, policy, tol)


def _psi_symmetry(sp, tol):
    p = sp.params()
    x, z = sp.point(p.q), sp.point(p.q)
    a, b, c, d, at = p.monomials()
    ref_sv = Psi(x, z, p, tol)
    if not _accurate(ref_sv):
        raise IllConditioned("reference value of Psi is inaccurate")
    ref = ref_sv.value
    pairs = []
    for perm in ((b, a, c, d), (a, b, d, c), (a, c, b, d), (d, b, c, a)):
        for route in ("8W7", "4phi3"):
            # the forced forms cancel badly for some orderings; a pair is kept
            # only where its own error estimate supports the tolerance
            try:
                sv = psi_from_aw(x, z, *perm, at, p.q, p.step, tol, route=route)
            except (ConvergenceRegionError, QSeriesError):
                continue
            if _accurate(sv):
                pairs.append((sv.value, ref))
    if not pairs:
        raise IllConditioned("no permuted form of Psi is accurate here")
    return _point_record(x, z, p), pairs


def _accurate(sv: SeriesValue, rel: float = ACCURACY_LIMIT) -> bool:
    return sv.rel_error <= rel


def check_psi_symmetry(policy=None, tol=None):
    return run_identity("psi_symmetry", _psi_symmetry, policy, tol)


def _W_recurrence(sp, tol):
    p = sp.params()
    x, z = sp.point(p.q), sp.point(p.q)
    at = derive_aw(p).a_dual
    return _point_record(x, z, p), [(W_fn(x + p.step, z, p), at * qpow(p.q, z) * W_fn(x, z, p))]


def check_W_recurrence(policy=None, tol=None):
    return run_identity("W_recurrence", _W_recurrence, policy, tol)


def _c_periodicity(sp, tol):
    p = sp.params()
    x, z = sp.point(p.q), sp.point(p.q)
    ref = _v(cfun(x, z, p, tol))
    return _point_record(x, z, p), [(_v(cfun(x + p.step, z, p, tol)), ref),
                                    (_v(cfun(x, z + p.step, p, tol)), ref)]


def check_c_periodicity(policy=None, tol=None):
    return run_identity("c_periodicity", _c_periodicity, policy, tol)


def trivial_monodromy_params(tuple_index: int, shifts, q: float, s) -> HeckeParams:
    s = Fraction(s)
    base = TRIVIAL_MONODROMY_TUPLES[tuple_index % len(TRIVIAL_MONODROMY_TUPLES)]
    k, l, u, v = ((t + h) * float(s) for t, h in zip(base, shifts))
    return HeckeParams(k, l, u, v, q, s)


def _trivial_monodromy(sp, tol):
    index = getattr(sp, "_tm_index", 0)
    sp._tm_index = index + 1
    shifts = [int(v) for v in sp.rng.integers(-1, 2, size=4)]
    p = trivial_monodromy_params(index, shifts, sp.q(), sp.s())
    pd = dual(p)
    x, z = sp.point(p.q), sp.point(p.q)
    pt = lambda u, w: _v(phi_tilde(u, w, p, tol))
    pairs = [
        (_v(cfun(x, z, p, tol)), _v(cfun(z, x, pd, tol))),
        (pt(x, z), _v(phi_tilde(z, x, pd, tol))),
        (pt(-x, z), pt(x, -z)),
    ]
    e = _v(E_aw(x, z, p, tol))
    a, b = pt(x, z), pt(-x, z)
    pairs.append(_pair(e, a + b, a, b))
    return _point_record(x, z, p), pairs


def check_trivial_monodromy(policy=None, tol=None):
    return run_identity("trivial_monodromy", _trivial_monodromy, policy, tol)


def _test_function(sp, q):
    coef = [complex(sp.uniform(-1, 1), sp.uniform(-1, 1)) for _ in range(4)]

    def f(t):
        u = qpow(q, t) + qpow(q, -t)
        return coef[0] + coef[1] * u + coef[2] * u * u + coef[3] * (qpow(q, t / 2) + qpow(q, -t / 2))
    return f


def _factorization(sp, tol):
    q, s = sp.q(), sp.s()
    k, l = sp.hecke(), sp.hecke()
    pJ = specialize_J(k, l, q, s)
    x, z = sp.point(q), sp.point(q)
    f = _test_function(sp, q)
    mu = qpow(q, z / 2) + qpow(q, -z / 2)
    g = lambda t: apply_L(f, t, pJ, tol) + mu * f(t)
    lhs = apply_L(g, x, pJ, tol) - mu * g(x)
    shift = -qpow(q, z) - qpow(q, -z) + qpow(q, 2 * k) + qpow(q, -2 * k)
    rhs = apply_D(f, x, pJ, tol) + shift * f(x)
    return _point_record(x, z, pJ), [_pair(lhs, rhs, apply_L(g, x, pJ, tol), mu * g(x))]


def check_factorization(policy=None, tol=None):
    return run_identity("factorization", _factorization, policy, tol)


def _quadratic_phi(sp, tol):
    q, s = sp.q(), sp.s()
    k, l = sp.hecke(), sp.hecke()
    x, z = sp.point(q), sp.point(q)
    pJ, pR = specialize_J(k, l, q, s), specialize_R(k, l, q, s)
    return _point_record(x, z, pJ), [(_v(Phi(x, z, pJ, tol)), _v(Phi(x, z / 2, pR, tol)))]


def check_quadratic_phi(policy=None, tol=None):
    return run_identity("quadratic_phi", _quadratic_phi, policy, tol)


def _poch(values, base, tol):
    return _v(qpochhammer_multi(values, base, math.inf, tol))


def qtrans_8w7_sides(alpha, beta, x, z, q, tol=DEFAULT_TOL):
    """Both sides of the quadratic transformation relating an 8W7 in base q
    to one in base q**2; the 8W7 arguments are -q^(1/2) x and -q alpha x / beta."""
    h, q2 = math.sqrt(q), q * q
    if abs(h * x) >= 1 or abs(q * alpha * x / beta) >= 1:
        raise ConvergenceRegionError("outside the convergence region")
    lhs = (_poch([q * beta * x * z, -q * x * z / beta, q * h * x * z / alpha, -h * alpha * x * z], q, tol)
           / _poch([h * x, -q * h * x * z * z, q2 * beta * x * z * z / alpha], q, tol)
           * _v_acc(w8_7(-h * x * z * z, q * z / alpha, -h * z / beta, -alpha * z, h * beta * z, -h * x,
                     q, -h * x, tol)))
    rhs = (_poch([-q2 * x * z * z / (alpha * beta), -q * alpha * beta * x * z * z, -q * alpha * x / beta],
                 q2, tol)
           / _poch([-q2 * q * beta * x * z ** 4 / alpha], q2, tol)
           * _v_acc(w8_7(-q * beta * x * z ** 4 / alpha, q2 * z * z / alpha ** 2, -q * z * z, -z * z,
                     q * beta ** 2 * z * z, -q * beta * x / alpha, q2, -q * alpha * x / beta, tol)))
    return lhs, rhs


def qtrans_8w7_dual_sides(alpha, beta, x, z, q, tol=DEFAULT_TOL):
    """Dual companion of :func:`qtrans_8w7_sides`; 8W7 arguments
    -q^(1/2) beta z and -q z**2."""
    h, q2 = math.sqrt(q), q * q
    if abs(h * beta * z) >= 1 or abs(q * z * z) >= 1:
        raise ConvergenceRegionError("outside the convergence region")
    lhs = (_poch([-h * alpha * x * z, -h * beta * z, q * h * x * z / alpha], q, tol)
           / _poch([-q * h * x * x * z / beta], q, tol)
           * _v_acc(w8_7(-h * x * x * z / beta, q * x / (alpha * beta), -h * x, -alpha * x / beta, h * x,
                     -h * z / beta, q, -h * beta * z, tol)))
    rhs = (_poch([-q * alpha * beta * x * z * z, q2 * alpha * x * z * z / beta,
                  -q2 * x * z * z / (alpha * beta), q2 * q * beta * x * z * z / alpha], q2, tol)
           / _poch([-q2 * q * x * x * z * z, -q2 * z * z, q2 * x * x * z * z / beta ** 2], q2, tol)
           * _v_acc(w8_7(-q * x * x * z * z, q2 * x / (alpha * beta), -q * beta * x / alpha, -alpha * x / beta,
                     q * alpha * beta * x, -q * z * z, q2, -q * z * z, tol)))
    return lhs, rhs


def _free_quadruple(sp):
    q = sp.q()
    return q, sp.disc(0.3, 1.5), sp.disc(0.3, 1.5), sp.disc(0.1, 1.5), sp.disc(0.1, 1.2)


def _qtrans(sp, tol):
    q, alpha, beta, x, z = _free_quadruple(sp)
    lhs, rhs = qtrans_8w7_sides(alpha, beta, x, z, q, tol)
    return _point_record(x, z, None, q), [(lhs, rhs)]


def check_qtrans_8W7(policy=None, tol=None):
    return run_identity("qtrans_8W7", _qtrans, policy, tol)


def _qtrans_dual(sp, tol):
    q, alpha, beta, x, z = _free_quadruple(sp)
    lhs, rhs = qtrans_8w7_dual_sides(alpha, beta, x, z, q, tol)
    return _point_record(x, z, None, q), [(lhs, rhs)]


def check_qtrans_8W7_dual(policy=None, tol=None):
    return run_identity("qtrans_8W7_dual", _qtrans_dual, policy, tol)


def _poly_reduction(sp, tol, max_degree=4):
    p = sp.params()
    x = sp.point(p.q)
    pairs = []
    for n in range(max_degree + 1):
        zn = spectral_point(n, p)
        pairs.append((_v(Phi(x, zn, p, tol)), poly_constant_phi(n, p, tol) * aw_polynomial(n, x, p, tol)))
    return _point_record(x, spectral_point(max_degree, p), p), pairs


def check_poly_reduction(policy=None, tol=None):
    n = 4 if policy is None or policy.max_degree is None else policy.max_degree
    return run_identity("poly_reduction", lambda sp, t: _poly_reduction(sp, t, n), policy, tol)


def _E_poly(sp, tol, max_degree=4):
    p = sp.params()
    x = sp.point(p.q)
    const = poly_constant_E(p, tol)
    pairs = []
    for n in range(max_degree + 1):
        pairs.append((_v(E_aw(x, spectral_point(n, p), p, tol)), const * aw_polynomial(n, x, p, tol)))
    return _point_record(x, spectral_point(max_degree, p), p), pairs


def check_E_poly(policy=None, tol=None):
    n = 4 if policy is None or policy.max_degree is None else policy.max_degree
    return run_identity("E_poly", lambda sp, t: _E_poly(sp, t, n), policy, tol)


SINGH_DIGITS = 50


def singh_sides(n: int, a: complex, b: complex, x: complex, q: float, dps: int = SINGH_DIGITS):
    """Both terminating 4phi3 sums of the base q / base q**2 quadratic
    transformation, summed in ``dps``-digit arithmetic.

    The base q**2 sum cancels by up to q**(-n**2) in magnitude, far beyond
    binary64 for small q, hence the extended precision.
    """
    with mpmath.workdps(dps):
        q = mpmath.mpf(q)
        a, b = mpmath.mpc(a), mpmath.mpc(b)
        X = mpmath.exp(mpmath.mpc(x) * mpmath.log(q))
        h = mpmath.sqrt(q)
        lhs = terminating_sum([q ** (-2 * n), a * X, a / X, q ** (2 * n) * a * a * b * b],
                              [a * b, q * a * a, q * a * b], q * q, q * q, n)
        rhs = terminating_sum([q ** (-n), a * X, a / X, -(q ** n) * a * b],
                              [a * b, h * a, -h * a], q, q, n)
        return complex(lhs), complex(rhs), float(abs(lhs - rhs) / max(abs(lhs), abs(rhs)))


def _singh(sp, tol, max_degree=6):
    q = sp.q()
    a, b = sp.disc(0.2, 1.2), sp.disc(0.2, 1.2)
    x = sp.point(q)
    pairs = []
    for n in range(max_degree + 1):
        lhs, rhs, _ = singh_sides(n, a, b, x, q)
        pairs.append((lhs, rhs))
    return _point_record(x, 0, None, q), pairs


def check_singh(policy=None, tol=None):
    n = 6 if policy is None or policy.max_degree is None else policy.max_degree
    return run_identity("singh", lambda sp, t: _singh(sp, t, n), policy, tol)


def quadratic_c_members(x, z, kappa, lam, q, s, tol=DEFAULT_TOL):
    """The connection coefficients of the J- and R-specialized eigenfunctions.

    Returns ((first_J, first_R, first_closed_form), (second_J, second_R)).
    """
    pJ, pR = specialize_J(kappa, lam, q, s), specialize_R(kappa, lam, q, s)
    pJd, pRd = dual(pJ), dual(pR)
    S = float(Fraction(s))
    cJ = lambda u, w: _v(cfun(u, w, pJ, tol))
    cJd = lambda u, w: _v(cfun(u, w, pJd, tol))
    # Xi_R(u, w) = Xi(u, w/2) at the R parameters, same for the dual
    cR = lambda u, w: _v(cfun(u, w / 2, pR, tol))
    cRd = lambda u, w: _v(cfun(u, w / 2, pRd, tol))
    Q = lambda e: qpow(q, e)
    first_J = cJ(x, -z) / cJd(z, -x)
    first_R = cR(x, -z) / cRd(z / 2, -2 * x)
    closed = (Q(-4 * kappa * x / S) * Q(2 * (kappa + lam) * z / S)
              * _v(theta_multi([Q(2 * x), Q(S / 2 + 2 * lam + z), Q(2 * kappa + z)], q ** S, tol))
              / _v(theta_multi([Q(z), Q(kappa + lam + x), -Q(kappa - lam + x)], q ** (S / 2), tol)))
    second_J = (cJ(x, z) - cJd(z, x)) / cJd(z, -x)
    second_R = (cR(x, z) - cRd(z / 2, 2 * x)) / cRd(z / 2, -2 * x)
    scale_J = (abs(cJ(x, z)) + abs(cJd(z, x))) / abs(cJd(z, -x))
    scale_R = (abs(cR(x, z)) + abs(cRd(z / 2, 2 * x))) / abs(cRd(z / 2, -2 * x))
    return (first_J, first_R, closed), (second_J, second_R, max(scale_J, scale_R))


def _quadratic_c(sp, tol):
    q, s = sp.q(), sp.s()
    k, l = sp.hecke(), sp.hecke()
    x, z = sp.point(q), sp.point(q)
    (fJ, fR, closed), (sJ, sR, scale) = quadratic_c_members(x, z, k, l, q, s, tol)
    return (_point_record(x, z, specialize_J(k, l, q, s)),
            [(fJ, fR), (fJ, closed), _pair(sJ, sR, scale)])


def check_quadratic_c(policy=None, tol=None):
    return run_identity("quadratic_c", _quadratic_c, policy, tol)


def theta_ident_sides(a, b, c, d, q, tol=DEFAULT_TOL):
    """Both sides of the quadratic theta function identity in the free
    parameters a, b, c, d, with the four theta products returned for scale."""
    q2, h = q * q, math.sqrt(q)
    T = lambda us, base: _v(theta_multi(us, base, tol))
    t1 = T([a * a, b * b * c * c, -b * b, q * b * b * d * d, -q * b * b / (a * c * d), -q * b * b], q2)
    t2 = T([b ** 4, -q * c / (a * d), a * c * d, -a * c / d, q * a * c * d, -q * a / (b * b * c * d)], q2)
    pref = (T([-q * a * b * b * c * d], q2) * T([-b * b], q)
            / (T([q * a * a], q2) * T([-h * a * b * c], q)))
    t3 = pref * T([b * c, -b * c, a * a, h * b * d, -h * b / (a * c), -h * d / b], q)
    t4 = pref * T([b * b, -h * a, a * c * d, -a * c / d, h * a, -h * a / (b * c)], q)
    return t1 - t2, t3 - t4, (t1, t2, t3, t4)


def _theta_ident(sp, tol):
    q = sp.q()
    a, b, c, d = (sp.disc(0.3, 1.5) for _ in range(4))
    lhs, rhs, terms = theta_ident_sides(a, b, c, d, q, tol)
    return _point_record(a, b, None, q), [_pair(lhs, rhs, *terms)]


def check_theta_ident(policy=None, tol=None):
    return run_identity("theta_ident", _theta_ident, policy, tol)


def _L_eigen(sp, tol, which="R"):
    q, s = sp.q(), sp.s()
    k, l = sp.hecke(), sp.hecke()
    pJ, pR = specialize_J(k, l, q, s), specialize_R(k, l, q, s)
    x, z = sp.point(q), sp.point(q)
    if which == "R":
        f = lambda t: _v(E_aw(t, z / 2, pR, tol))
    else:
        f = lambda t: _v(E_aw(t, z, pJ, tol))
    mu = qpow(q, z / 2) + qpow(q, -z / 2)
    lhs = apply_L(f, x, pJ, tol)
    return _point_record(x, z, pJ), [(lhs, mu * f(x))]


def _L_eigen_info(policy: SamplePolicy, tol: Tolerance) -> dict:
    """Informational only: the J-specialized Askey-Wilson function is not an
    L-eigenfunction, and c_J / c_R is not even in z."""
    quick = replace(policy, n_points=min(policy.n_points, 20), perturbation=0.0)
    neg = run_identity("E_J_not_L_eigen", lambda sp, t: _L_eigen(sp, t, "J"), quick, tol)
    info = {"E_J_min_points": neg.points_evaluated, "E_J_max_rel_residual": neg.max_rel_residual}
    sp = Sampler(policy, _substream(policy.seed, "c_ratio_witness"))
    q, s = sp.q(), sp.s()
    k, l = sp.hecke(), sp.hecke()
    x = sp.point(q)
    pJ, pR = specialize_J(k, l, q, s), specialize_R(k, l, q, s)
    period = 2j * math.pi / math.log(q)
    z_w = 2 * l + float(s) / 2 + period
    try:
        ratio = [abs(_v(cfun(x, w, pJ, tol)) / _v(cfun(x, w / 2, pR, tol))) for w in (z_w, -z_w)]
        info["c_ratio_at_witness"], info["c_ratio_at_negated_witness"] = ratio
    except QSeriesError as exc:
        info["c_ratio_error"] = str(exc)
    return info


def check_E_R_is_L_eigen(policy=None, tol=None):
    return run_identity("E_R_is_L_eigen", lambda sp, t: _L_eigen(sp, t, "R"), policy, tol,
                        info=_L_eigen_info)


# identity id -> (check function, description)
CHECKS: dict[str, tuple[Callable, str]] = {
    "eigen_phi": (check_eigen_phi, "Phi solves the Askey-Wilson eigenvalue equation"),
    "selfdual_phi": (check_selfdual_phi, "selfduality Phi(x,z) = Phi^d(z,x)"),
    "selfdual_E": (check_selfdual_E, "selfduality E(x,z) = E^d(z,x)"),
    "even_E": (check_even_E, "evenness E(-x,z) = E(x,z) = E(x,-z)"),
    "c_expansion": (check_c_expansion, "c-function expansion of E"),
    "connection": (check_connection, "connection formula for Phi(-x,z)"),
    "c_quadratic": (check_c_quadratic, "quadratic relation between c and c^d"),
    "slater_theta": (check_slater_theta, "four-term theta identity from evenness of E (s = 1)"),
    "psi_symmetry": (check_psi_symmetry, "Psi symmetric in the Askey-Wilson parameters"),
    "W_recurrence": (check_W_recurrence, "W(x+s,z) = a~ q^z W(x,z)"),
    "c_periodicity": (check_c_periodicity, "c is s-periodic in x and z"),
    "trivial_monodromy": (check_trivial_monodromy, "half-integer parameters: c = c^d and Phi~ relations"),
    "factorization": (check_factorization, "(L - mu)(L + mu) = D_J - q^z - q^-z + q^2k + q^-2k"),
    "quadratic_phi": (check_quadratic_phi, "quadratic transformation Phi_J = Phi_R"),
    "qtrans_8W7": (check_qtrans_8W7, "quadratic transformation of 8W7 series"),
    "qtrans_8W7_dual": (check_qtrans_8W7_dual, "dual quadratic transformation of 8W7 series"),
    "poly_reduction": (check_poly_reduction, "Phi at z = -k-u-ns is a multiple of P_n"),
    "E_poly": (check_E_poly, "E at z = -k-u-ns is a multiple of P_n"),
    "singh": (check_singh, "Singh's quadratic transformation of terminating 4phi3"),
    "quadratic_c": (check_quadratic_c, "connection coefficients under Phi_J = Phi_R"),
    "theta_ident": (check_theta_ident, "quadratic theta function identity"),
    "E_R_is_L_eigen": (check_E_R_is_L_eigen, "E_R is an eigenfunction of L"),
}


def _run_named(args):
    name, policy, tol = args
    return CHECKS[name][0](policy, tol)


def run_all(policy: SamplePolicy | None = None, tol: Tolerance | None = None,
            names=None, jobs: int = 1) -> list[IdentityReport]:
    """Run the selected checks (all by default), each on its own seeded
    sub-stream; the result order follows ``CHECKS`` regardless of ``jobs``."""
    policy = policy or SamplePolicy()
    tol = tol or DEFAULT_TOL
    names = list(CHECKS) if names is None else list(names)
    for n in names:
        if n not in CHECKS:
            raise KeyError(n)
    work = [(n, policy, tol) for n in names]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_named, work))
    return [_run_named(w) for w in work]
