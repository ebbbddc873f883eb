"""Command-line driver: ``qvwp eval``, ``qvwp check`` and ``qvwp list``.

Exit codes: 0 success, 1 identity failure, 2 usage error, 3 evaluation error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys

from .awcore import HeckeParams, apply_D, apply_L, as_fraction
from .eigenfun import (E_ROUTES, E_aw, Phi, Psi, St, St_dual, W_fn, aw_polynomial, cfun,
                       phi_tilde)
from .idcheck import CHECKS, SamplePolicy, run_all
from .qcore import (QSeriesError, SeriesValue, Tolerance, phi_series, qpochhammer_finite,
                    qpochhammer_inf, theta, w8_7)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_EVAL = 0, 1, 2, 3

FUNCTIONS = {
    "theta": "theta(u; q) = (u, q/u; q)_inf  [--u --q]",
    "pochhammer": "(a; q)_n, infinite when --n is omitted  [--a --q --n]",
    "phi_series": "r+1 phi r (num; den; q, z)  [--num --den --q --z]",
    "w8_7": "very-well-poised 8W7(a0; a1..a5; q, z)  [--a0 --alphas --q --z]",
    "W": "plane wave W(x, z)",
    "St": "singular term St(x)",
    "St_dual": "dual singular term St^d(z)",
    "Psi": "Psi(x, z), the series part of Phi",
    "Phi": "asymptotically free eigenfunction Phi(x, z)",
    "Phi_tilde": "c(x, z) Phi(x, z)",
    "E": "Askey-Wilson function E(x, z)",
    "c": "c-function c(x, z)",
    "P_n": "normalized Askey-Wilson polynomial P_n(x)  [--n]",
    "apply_D": "Askey-Wilson operator D applied to --operand at x",
    "apply_L": "half-step operator L applied to --operand at x",
}

ENV_FIELDS = {"seed": ("QVWP_SEED", int), "tol": ("QVWP_TOL", float), "n_points": ("QVWP_POINTS", int)}

_COMPLEX_RE = re.compile(r"^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*([+-]\s*(\d+\.?\d*|\.\d+)?([eE][+-]?\d+)?\s*[ij])?\s*$"
                         r"|^\s*[+-]?((\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?\s*[ij]\s*$")


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """Parse "a+bi", "a-bi", "a", "bi" or "i"; anything else is a usage error."""
    if text is None:
        raise UsageError("missing complex value")
    s = str(text).strip()
    if not _COMPLEX_RE.match(s):
        raise UsageError(f"not a complex number: {text!r} (use the form a+bi)")
    s = s.replace(" ", "").replace("i", "j")
    if s[-1] == "j" and (len(s) == 1 or s[-2] in "+-"):
        s = s[:-1] + "1j"
    try:
        v = complex(s)
    except ValueError as exc:
        raise UsageError(f"not a complex number: {text!r}") from exc
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise UsageError(f"non-finite value: {text!r}")
    return v


def parse_real(text: str, name: str) -> float:
    v = parse_complex(text)
    if v.imag != 0:
        raise UsageError(f"{name} must be real")
    return v.real


def parse_list(text: str | None) -> list[complex]:
    if text is None or not text.strip():
        return []
    return [parse_complex(p) for p in text.split(",")]


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold one JSON object")
    return data


def resolve(field: str, flag_value, config: dict, default, env=None):
    """Flags beat environment variables, which beat the config file."""
    if flag_value is not None:
        return flag_value
    env = os.environ if env is None else env
    if field in ENV_FIELDS:
        var, kind = ENV_FIELDS[field]
        if env.get(var):
            try:
                return kind(env[var])
            except ValueError as exc:
                raise UsageError(f"bad value for {var}: {env[var]!r}") from exc
    if field in config:
        return config[field]
    return default


def _tolerance(args, config) -> Tolerance:
    try:
        return Tolerance(
            rel_tol=float(resolve("rel_tol", args.rel_tol, config, 1e-13)),
            term_cap=int(resolve("term_cap", args.term_cap, config, 10_000)),
            pole_guard=float(resolve("pole_guard", args.pole_guard, config, 1e-8)),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _params(args) -> HeckeParams:
    try:
        s = as_fraction(args.s)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad step size {args.s!r}; use a rational such as 1 or 3/2") from exc
    q = parse_real(args.q, "q")
    if not 0 < q < 1:
        raise UsageError("q must lie in (0, 1)")
    if s <= 0:
        raise UsageError("s must be positive")
    return HeckeParams(parse_real(args.kappa, "kappa"), parse_real(args.lam, "lambda"),
                       parse_real(args.upsilon, "upsilon"), parse_real(args.varsigma, "varsigma"), q, s)


def _as_series(v) -> SeriesValue:
    if isinstance(v, SeriesValue):
        return v
    return SeriesValue(complex(v), 0, 0.0, True)


def evaluate(args, tol: Tolerance) -> SeriesValue:
    name = args.function
    if name == "theta":
        return theta(parse_complex(args.u), parse_real(args.q, "q"), tol)
    if name == "pochhammer":
        a, q = parse_complex(args.a), parse_real(args.q, "q")
        if args.n is None:
            return qpochhammer_inf(a, q, tol)
        return _as_series(qpochhammer_finite(a, q, args.n))
    if name == "phi_series":
        return phi_series(parse_list(args.num), parse_list(args.den), parse_real(args.q, "q"),
                          parse_complex(args.z), tol)
    if name == "w8_7":
        alphas = parse_list(args.alphas)
        if len(alphas) != 5:
            raise UsageError("--alphas needs five comma-separated values")
        return w8_7(parse_complex(args.a0), *alphas, parse_real(args.q, "q"), parse_complex(args.z), tol)

    p = _params(args)
    x, z = parse_complex(args.x), parse_complex(args.z)
    if name == "W":
        return _as_series(W_fn(x, z, p))
    if name == "St":
        return St(x, p, tol)
    if name == "St_dual":
        return St_dual(z, p, tol)
    if name == "Psi":
        return Psi(x, z, p, tol)
    if name == "Phi":
        return Phi(x, z, p, tol)
    if name == "Phi_tilde":
        return phi_tilde(x, z, p, tol)
    if name == "E":
        return E_aw(x, z, p, tol, route=args.route)
    if name == "c":
        return cfun(x, z, p, tol)
    if name == "P_n":
        return _as_series(aw_polynomial(args.n or 0, x, p, tol))
    if name in ("apply_D", "apply_L"):
        operand = {
            "Phi": lambda t: Phi(t, z, p, tol).value,
            "E": lambda t: E_aw(t, z, p, tol).value,
            "P_n": lambda t: aw_polynomial(args.n or 0, t, p, tol),
        }[args.operand]
        op = apply_D if name == "apply_D" else apply_L
        return _as_series(op(operand, x, p, tol))
    raise UsageError(f"unknown function {name!r}")


def cmd_eval(args) -> int:
    config = _load_config(args.config)
    tol = _tolerance(args, config)
    try:
        sv = evaluate(args, tol)
    except QSeriesError as exc:
        print(f"evaluation error ({exc.kind}): {exc}", file=sys.stderr)
        return EXIT_EVAL
    fmt = resolve("format", args.format, config, "json")
    if fmt == "json":
        out = {"value": {"re": sv.value.real, "im": sv.value.imag},
               "diagnostics": {"terms_used": sv.terms_used, "tail_estimate": sv.tail_estimate,
                               "rounding_estimate": sv.rounding_estimate, "converged": sv.converged}}
        print(json.dumps(out, indent=2))
    else:
        print(f"value          {sv.value.real!r} {sv.value.imag:+}i")
        print(f"terms_used     {sv.terms_used}")
        print(f"tail_estimate  {sv.tail_estimate:.3e}")
        print(f"converged      {sv.converged}")
    return EXIT_OK


def _identity_id(name: str) -> str:
    ident = name[len("check_"):] if name.startswith("check_") else name
    if ident not in CHECKS:
        raise UsageError(f"unknown identity {name!r}; see 'qvwp list'")
    return ident


def cmd_check(args) -> int:
    config = _load_config(args.config)
    names = None if args.identity == "all" else [_identity_id(args.identity)]
    seed = resolve("seed", args.seed, config, 42)
    n_points = resolve("n_points", args.n_points, config, 100)
    check_tol = resolve("tol", args.tol, config, 1e-8)
    jobs = resolve("jobs", args.jobs, config, 1)
    try:
        policy = SamplePolicy(seed=int(seed), n_points=int(n_points), check_tol=float(check_tol),
                              max_degree=args.n)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if policy.n_points < 1:
        raise UsageError("n-points must be positive")
    tol = _tolerance(args, config)
    try:
        reports = run_all(policy, tol, names, jobs=int(jobs))
    except QSeriesError as exc:
        print(f"evaluation error ({exc.kind}): {exc}", file=sys.stderr)
        return EXIT_EVAL
    fmt = resolve("format", args.format, config, "json")
    if fmt == "json":
        print(json.dumps([r.to_dict() for r in reports], indent=2))
    else:
        print(f"{'identity':20s} {'result':6s} {'points':>9s} {'max_rel':>10s} {'max_abs':>10s}")
        for r in reports:
            print(f"{r.identity_id:20s} {'pass' if r.passed else 'FAIL':6s} "
                  f"{r.points_evaluated:4d}/{r.points_requested:<4d} "
                  f"{r.max_rel_residual:10.3e} {r.max_abs_residual:10.3e}")
    for r in reports:
        for key, value in r.info.items():
            print(f"{r.identity_id}: {key} = {value}", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_list(args) -> int:
    print("functions:")
    for name, doc in FUNCTIONS.items():
        print(f"  {name} - {doc}")
    print("identities:")
    for ident, (_, doc) in CHECKS.items():
        print(f"  check_{ident} - {doc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qvwp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"))
    common.add_argument("--config", help="JSON file with defaults (same field names as the flags)")
    common.add_argument("--rel-tol", type=float)
    common.add_argument("--term-cap", type=int)
    common.add_argument("--pole-guard", type=float)

    ev = sub.add_parser("eval", parents=[common], help="evaluate one function at a point")
    ev.add_argument("function", choices=tuple(FUNCTIONS))
    ev.add_argument("--kappa", default="0")
    ev.add_argument("--lambda", dest="lam", default="0")
    ev.add_argument("--upsilon", default="0")
    ev.add_argument("--varsigma", default="0")
    ev.add_argument("--q", default="0.5")
    ev.add_argument("--s", default="1", help='step size, a rational such as "1" or "3/2"')
    ev.add_argument("--x", default="0.3+0.1i")
    ev.add_argument("--z", default="0.2-0.1i")
    ev.add_argument("--u", default="0.5")
    ev.add_argument("--a", default="0.5")
    ev.add_argument("--a0", default="0.5")
    ev.add_argument("--alphas", help="five comma-separated complex numbers")
    ev.add_argument("--num", help="comma-separated numerator parameters")
    ev.add_argument("--den", help="comma-separated denominator parameters")
    ev.add_argument("--n", type=int)
    ev.add_argument("--route", choices=E_ROUTES, default="auto")
    ev.add_argument("--operand", choices=("Phi", "E", "P_n"), default="Phi")
    ev.set_defaults(handler=cmd_eval)

    ck = sub.add_parser("check", parents=[common], help="run one identity check, or all")
    ck.add_argument("identity", help='identity name (with or without "check_") or "all"')
    ck.add_argument("--seed", type=int)
    ck.add_argument("--n-points", type=int)
    ck.add_argument("--tol", type=float, help="relative residual tolerance of the checks")
    ck.add_argument("--n", type=int, help="maximal degree for the polynomial and Singh checks")
    ck.add_argument("--jobs", type=int, help="worker processes")
    ck.set_defaults(handler=cmd_check)

    ls = sub.add_parser("list", help="list functions and identities")
    ls.set_defaults(handler=cmd_list)
    return parser


# flags whose values may legitimately start with "-" (negative complex numbers)
_VALUE_FLAGS = {"--kappa", "--lambda", "--upsilon", "--varsigma", "--q", "--s", "--x", "--z",
                "--u", "--a", "--a0", "--alphas", "--num", "--den"}


def _join_values(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_values(argv))
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
