"""Command-line front end.

    fqmzv eval zeta [2] --q 2 --Ninf 40
    fqmzv eval li_star [1] @ [T] --v T --Mv 20
    fqmzv eval star z[1,T] z[1,T]
    fqmzv eval log "G([2,1],[T,1])" @ "[T,1,1,1]"
    fqmzv suite acceptance --format json

The ``eval`` keyword may be omitted.  Exit codes: 0 success, 1 failed check or
domain violation, 2 configuration or parse error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import dataclass, field as dc_field

from .checks import acceptance_suite, field_from_q, invariants_suite, paper_example_suite, run_suite
from .completions import as_place
from .fqarith import (
    FiniteField,
    Index,
    ParseError,
    RatFunc,
    irreducible_check,
    parse_modulus,
    parse_poly,
    parse_ratfunc,
)
from .mzv import Certificate, CertificateError, zeta_inf, zeta_v
from .polylog import li_star_inf, li_star_v_conv, li_star_v_extended
from .stufflealg import H0Error, StuffleAlgebra, parse_element
from .tmodule import DomainError, build_G, eval_log

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

SUITES = {"acceptance", "invariants", "paper-example"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    field: FiniteField
    v: object
    v_explicit: bool
    n_inf: int
    m_v: int
    fmt: str
    jobs: int
    certificates: list = dc_field(default_factory=list)

    def describe(self):
        return {"p": self.field.p, "e": self.field.e, "v": str(self.v),
                "Ninf": self.n_inf, "Mv": self.m_v}


# ----------------------------------------------------------------- config

def parse_q(text):
    """'4' or '2^2' -> (p, e)."""
    m = re.fullmatch(r"\s*(\d+)\s*(?:\^\s*(\d+)\s*)?", text)
    if not m:
        raise ConfigError(f"--q expects p^e or an integer prime power, got {text!r}")
    base, exp = int(m.group(1)), int(m.group(2) or 1)
    try:
        field = field_from_q(base**exp)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return field.p, field.e


def build_config(args):
    p, e = parse_q(args.q)
    modulus = None
    if args.modulus is not None:
        try:
            modulus = parse_modulus(p, args.modulus)
        except (ParseError, ValueError) as exc:
            raise ConfigError(f"--modulus: {exc}") from None
    try:
        field = FiniteField(p, e, modulus)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    v_text = args.v if args.v is not None else "T"
    try:
        v = parse_poly(field, v_text)
    except ParseError as exc:
        raise ConfigError(_parse_message("--v", v_text, exc)) from None
    if v.degree() < 1 or not v.is_monic() or not irreducible_check(v):
        raise ConfigError(f"--v must be monic irreducible of positive degree, got {v_text!r}")
    if args.Ninf < 1 or args.Mv < 1:
        raise ConfigError("precisions must be at least 1")
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    certs = []
    for path in args.certs or []:
        try:
            with open(path, encoding="utf-8") as fh:
                certs.append(Certificate.from_json(fh.read(), field))
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"certificate {path}: {exc}") from None
    return RunConfig(field, v, args.v is not None, args.Ninf, args.Mv, args.format, args.jobs, certs)


def _parse_message(what, text, exc):
    pos = getattr(exc, "pos", 0) or 0
    msg = getattr(exc, "message", str(exc))
    return f"{what}: parse error at position {pos}: {msg}\n  {text}\n  {' ' * pos}^"


# ------------------------------------------------------------ expressions

def _parse_list(text, what):
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ConfigError(f"{what}: expected a bracketed list, got {text!r}")
    inner = text[1:-1].strip()
    return [part.strip() for part in inner.split(",")] if inner else []


def _parse_index(text):
    parts = _parse_list(text, "index")
    try:
        index = Index([int(x) for x in parts])
    except ValueError as exc:
        raise ConfigError(f"index {text!r}: {exc}") from None
    return index


def _parse_point(field, text):
    out = []
    for part in _parse_list(text, "point"):
        try:
            out.append(parse_ratfunc(field, part))
        except ParseError as exc:
            raise ConfigError(_parse_message("point entry", part, exc)) from None
    return out


def _split_at(text):
    if text.count("@") != 1:
        raise ConfigError("expected '<index> @ <point>'")
    left, right = text.split("@")
    return left.strip(), right.strip()


def _render(value):
    return value.render() if hasattr(value, "render") else str(value)


def evaluate(tokens, cfg):
    """Evaluate one expression; returns (lines, record)."""
    if not tokens:
        raise ConfigError("empty expression")
    head, rest = tokens[0], tokens[1:]
    text = " ".join(rest)
    field = cfg.field
    inf_note = f"absolute precision T^-{cfg.n_inf}"
    v_note = f"absolute precision v^{cfg.m_v}, v = {cfg.v}"
    if head == "zeta":
        value = zeta_inf(_parse_index(text), cfg.n_inf, field)
        return [_render(value)], {"value": _render(value), "precision": inf_note}
    if head == "zeta_v":
        index = _parse_index(text)
        cert = next((c for c in cfg.certificates if tuple(c.index) == tuple(index)), None)
        value = zeta_v(index, cfg.v, cfg.m_v, cert=cert, field=field)
        return [_render(value)], {"value": _render(value), "precision": v_note}
    if head in ("li_star", "li_star_v"):
        left, right = _split_at(text)
        index, point = _parse_index(left), _parse_point(field, right)
        if head == "li_star_v":
            value, note = li_star_v_extended(index, point, cfg.v, cfg.m_v), v_note
        elif cfg.v_explicit:
            value, note = li_star_v_conv(index, point, cfg.v, cfg.m_v), v_note
        else:
            value, note = li_star_inf(index, point, cfg.n_inf), inf_note
        return [_render(value)], {"value": _render(value), "precision": note}
    if head == "star":
        if len(rest) != 2:
            raise ConfigError("star takes exactly two elements (quote elements containing spaces)")
        alg = StuffleAlgebra(field, cfg.v)
        elems = []
        for t in rest:
            try:
                elems.append(parse_element(alg, t))
            except ParseError as exc:
                raise ConfigError(_parse_message("element", t, exc)) from None
        value = alg.star(*elems).render()
        return [value], {"value": value, "precision": "exact"}
    if head == "log":
        m = re.fullmatch(r"\s*G\s*\(\s*(\[[^\]]*\])\s*,\s*(\[[^\]]*\])\s*\)\s*@\s*(\[.*\])\s*", text)
        if not m:
            raise ConfigError("expected 'log G([s...],[u...]) @ [x...]'")
        index = _parse_index(m.group(1))
        G = build_G(index, _parse_point(field, m.group(2)))
        point = _parse_point(field, m.group(3))
        if cfg.v_explicit:
            coords, note = eval_log(G, point, as_place(cfg.v), cfg.m_v), v_note
        else:
            coords, note = eval_log(G, point, "inf", cfg.n_inf), inf_note
        values = [_render(c) for c in coords]
        lines = [f"coordinate {k + 1}: {val}" for k, val in enumerate(values)]
        return lines, {"value": values, "precision": note}
    raise ConfigError(f"unknown expression {head!r}; expected zeta, zeta_v, li_star, "
                      "li_star_v, star or log")


# ------------------------------------------------------------------ main

def _common_flags(parser):
    parser.add_argument("--q", default="2", help="field size, e.g. 4 or 2^2 (default 2)")
    parser.add_argument("--modulus", help="defining polynomial of F_q over F_p, in g")
    parser.add_argument("--v", help="monic irreducible place (default T)")
    parser.add_argument("--Ninf", type=int, default=40, help="precision at infinity (default 40)")
    parser.add_argument("--Mv", type=int, default=30, help="v-adic precision (default 30)")
    parser.add_argument("--certs", nargs="+", help="decomposition certificate files (JSON)")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads for suites")


def make_parser():
    parser = argparse.ArgumentParser(prog="fqmzv", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("eval", help="evaluate an expression")
    ev.add_argument("expr", nargs="+")
    _common_flags(ev)
    su = sub.add_parser("suite", help="run a check suite")
    su.add_argument("name", choices=sorted(SUITES))
    _common_flags(su)
    return parser


def _emit(cfg_format, payload, lines, out):
    if cfg_format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True), file=out)
    else:
        for line in lines:
            print(line, file=out)


def run_suite_command(name, cfg, out):
    if name == "acceptance":
        checks = acceptance_suite(cfg.field.q)
    elif name == "invariants":
        checks = invariants_suite(cfg.field.q)
    else:
        checks = paper_example_suite(cfg.field.q, cfg.v, cfg.m_v)
    results = run_suite(checks, cfg.jobs)
    ok = all(r.ok for r in results)
    lines = [f"{'PASS' if r.ok else 'FAIL'} {r.id} [{r.precision_claimed}] "
             f"{r.elapsed_ms:.0f} ms: {r.detail}" for r in results]
    lines.append(f"{sum(r.ok for r in results)}/{len(results)} passed")
    payload = {"suite": name, "config": cfg.describe(), "ok": ok,
               "checks": [r.as_dict() for r in results]}
    _emit(cfg.fmt, payload, lines, out)
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in ("eval", "suite", "-h", "--help"):
        argv.insert(0, "eval")
    try:
        args = make_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = build_config(args)
        if args.command == "suite":
            return run_suite_command(args.name, cfg, out)
        start = time.perf_counter()
        lines, record = evaluate(args.expr, cfg)
        record.update({"expr": " ".join(args.expr),
                       "elapsed_ms": round((time.perf_counter() - start) * 1000, 1)})
        lines.append(f"({record['precision']})")
        _emit(cfg.fmt, record, lines, out)
        return EXIT_OK
    except (DomainError, H0Error) as exc:
        print(f"domain error: {exc}", file=err)
        return EXIT_FAIL
    except ConfigError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CONFIG
    except CertificateError as exc:
        print(f"certificate error: {exc}", file=err)
        return EXIT_CONFIG
    except ParseError as exc:
        print(f"error: {_parse_message('input', getattr(exc, 'text', ''), exc)}", file=err)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
