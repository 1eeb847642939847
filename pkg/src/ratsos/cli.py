"""Command line front end.

Exit codes: 0 certified success, 2 infeasible/unknown/not verified,
1 usage or runtime error.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from fractions import Fraction
from typing import Sequence

from . import document as docs
from .applications import (
    DecompositionError,
    RecoveryError,
    check_ternary,
    lower_bound,
    recover_solution,
    solve_sos,
    sos_in_ideal,
    sosdec_ternary,
)
from .formulate import FormulationError
from .forms import _FORMS, form_names, named_form
from .groebner import buchberger
from .poly import Polynomial, PolynomialSyntaxError, parse_polynomial
from .sdp.external import ENV_VAR

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---- input handling

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_FORM_CALL = re.compile("(" + "|".join(re.escape(n) for n in sorted(_FORMS, key=len, reverse=True))
                        + r")\s*\(")


def _split_top(text: str, seps: str = ",;\n") -> list[str]:
    """Split at separators outside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in seps and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [s.strip() for s in out if s.strip() and not s.strip().startswith("#")]


def _matching_paren(text: str, start: int) -> int:
    depth = 0
    for i in range(start, len(text)):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
            if depth == 0:
                return i
    raise UsageError(f"unbalanced parentheses in {text!r}")


def expand_forms(text: str, ring: Sequence[str]) -> str:
    """Replace calls such as ``Motzkin(x,1,z)`` by the polynomial they name."""
    while True:
        m = _FORM_CALL.search(text)
        if not m:
            return text
        close = _matching_paren(text, m.end() - 1)
        args = _split_top(text[m.end():close], ",")
        values = [parse_polynomial(expand_forms(a, ring), ring) for a in args]
        try:
            f = named_form(m.group(1), values)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        text = text[:m.start()] + "(" + str(f.in_vars(ring)) + ")" + text[close + 1:]


def _identifiers(text: str) -> set[str]:
    text = _FORM_CALL.sub("(", text)
    return set(_IDENT.findall(text))


def _read_target(arg: str | None) -> str:
    if arg is None or arg == "-":
        return sys.stdin.read()
    if arg.startswith("@"):
        return _read_file(arg[1:])
    return arg


def _read_file(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _ideal_texts(arg: str | None) -> list[str]:
    if not arg:
        return []
    text = _read_file(arg) if os.path.isfile(arg) else arg
    return _split_top(text)


def _names(arg: str | None) -> list[str]:
    if not arg:
        return []
    names = [s.strip() for s in arg.split(",") if s.strip()]
    bad = [n for n in names if not n.isidentifier()]
    if bad:
        raise UsageError(f"bad variable name(s): {', '.join(bad)}")
    return names


def _round_tol(text: str):
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        k = int(text)
    except ValueError:
        raise UsageError(f"--round-tol must be an integer or 'inf', got {text!r}") from None
    if k < 1:
        raise UsageError("--round-tol must be positive")
    return k


class _Problem:
    """Parsed ring, target, ideal and parameters of one invocation."""

    def __init__(self, args, need_target: bool = True):
        self.params = _names(getattr(args, "params", None))
        ideal_src = _ideal_texts(getattr(args, "ideal", None))
        target_src = _read_target(args.poly) if need_target else "0"
        if args.ring:
            ring = _names(args.ring)
        else:
            found = set()
            for t in [target_src, *ideal_src]:
                found |= _identifiers(t)
            ring = sorted(found - set(self.params))
        if len(set(ring)) != len(ring):
            raise UsageError("repeated variable in --ring")
        self.xring = tuple(ring)
        self.ring = self.xring + tuple(p for p in self.params if p not in self.xring)
        if not self.xring:
            raise UsageError("no variables; give --ring")
        self.target = self._parse(target_src)
        self.ideal = [self._parse(t).in_vars(self.xring) for t in ideal_src]

    def _parse(self, text: str) -> Polynomial:
        return parse_polynomial(expand_forms(text, self.ring), self.ring)

    def objective(self, text: str | None):
        if not text:
            return None
        if not self.params:
            raise UsageError("--objective needs --params")
        obj = parse_polynomial(text, self.params)
        if obj.degree() > 1:
            raise UsageError("--objective must be linear in the parameters")
        out = {}
        for m, c in obj.items():
            if sum(m):
                out[self.params[m.index(1)]] = c
        return out


# ---- output

def _print_sos(s, out):
    print(str(s), file=out)


def _fmt_value(v) -> str:
    return str(v) if isinstance(v, Fraction) else f"{float(v):.10g}"


def _solver_kw(args) -> dict:
    return {"solver": args.solver, "solver_path": args.solver_path}


def _options(args, **extra) -> dict:
    opts = {"round_tol": "inf" if args.round_tol == math.inf else args.round_tol,
            "solver": args.solver}
    opts.update({k: v for k, v in extra.items() if v is not None})
    return opts


def _finish(args, doc, ok: bool, out) -> int:
    """Verify the document, report, write JSON; return the exit code."""
    if ok:
        doc["verified"] = docs.verify_document(doc)
    print(f"verified: {'true' if doc['verified'] else 'false'}", file=out)
    if args.json:
        try:
            with open(args.json, "w") as fh:
                fh.write(docs.dumps(doc))
        except OSError as exc:
            raise UsageError(f"cannot write {args.json}: {exc.strerror}") from None
    if not ok:
        return EXIT_FAIL
    if args.round_tol == math.inf:
        return EXIT_OK
    return EXIT_OK if doc["verified"] else EXIT_FAIL


def _report_status(res, doc, out):
    print(f"Status: {res.status}", file=out)
    if res.message:
        print(f"note: {res.message}", file=out)
    doc["result"]["status"] = str(res.status)


def _record_sos(res, doc, out) -> bool:
    if not res.ok:
        return False
    if not res.rounded:
        print("certificate: not rounded", file=out)
        return True
    s = res.sos_poly()
    _print_sos(s, out)
    doc["result"].update(docs.sos_fields(s))
    doc["result"].setdefault("parameters", {})
    return True


# ---- subcommands

def cmd_decompose(args, out) -> int:
    pb = _Problem(args)
    ideal = buchberger(pb.ideal) if pb.ideal else None
    res = solve_sos(pb.target, args.degree, ideal=ideal, params=pb.params,
                    objective=pb.objective(args.objective), trace_obj=args.trace_obj,
                    round_tol=args.round_tol, **_solver_kw(args))
    doc = docs.new_document("decompose", pb.ring, pb.target, ideal=pb.ideal, degree=args.degree,
                            options=_options(args, trace_obj=args.trace_obj, params=pb.params or None,
                                             objective=args.objective))
    _report_status(res, doc, out)
    ok = _record_sos(res, doc, out)
    if ok and res.parameters:
        for k, v in res.parameters.items():
            print(f"{k} = {_fmt_value(v)}", file=out)
        if res.rounded:
            doc["result"]["parameters"] = {k: docs.rational_text(v) for k, v in res.parameters.items()}
    return _finish(args, doc, ok, out)


def cmd_in_ideal(args, out) -> int:
    pb = _Problem(args, need_target=False)
    if not pb.ideal:
        raise UsageError("in-ideal needs --ideal")
    if args.degree is None:
        raise UsageError("in-ideal needs --degree")
    ideal = pb.ideal if args.form == "multiplier" else buchberger(pb.ideal)
    res, mults = sos_in_ideal(ideal, args.degree, round_tol=args.round_tol, **_solver_kw(args))
    doc = docs.new_document("in-ideal", pb.xring, Polynomial(pb.xring), ideal=pb.ideal,
                            degree=args.degree, options=_options(args, form=args.form))
    _report_status(res, doc, out)
    ok = _record_sos(res, doc, out)
    if ok and res.rounded and mults is not None:
        doc["result"]["multipliers"] = [str(m) for m in mults]
        print("multipliers: {" + ", ".join(str(m) for m in mults) + "}", file=out)
    return _finish(args, doc, ok, out)


def cmd_ternary(args, out) -> int:
    pb = _Problem(args)
    doc = docs.new_document("ternary", pb.xring, pb.target, options=_options(args))
    try:
        nums, dens = sosdec_ternary(pb.target, round_tol=args.round_tol, **_solver_kw(args))
    except DecompositionError as exc:
        print("Status: unknown", file=out)
        print(f"note: {exc}", file=out)
        return _finish(args, doc, False, out)
    print("Status: SDP solved, primal-dual feasible", file=out)
    doc["result"]["status"] = "SDP solved, primal-dual feasible"
    doc["result"]["numerators"] = [docs.sos_fields(s) for s in nums]
    doc["result"]["denominators"] = [docs.sos_fields(s) for s in dens]
    for label, group in (("numerators", nums), ("denominators", dens)):
        print(f"{label}:", file=out)
        for s in group:
            _print_sos(s, out)
    print(f"identity holds: {str(check_ternary(pb.target, nums, dens)).lower()}", file=out)
    return _finish(args, doc, True, out)


def _bound(args, pb, out, kind):
    if args.form == "multiplier" and not pb.ideal:
        raise UsageError("--form multiplier needs --ideal")
    if pb.ideal:
        if args.degree is None:
            raise UsageError("a degree bound (--degree) is required with --ideal")
        if args.form == "multiplier":
            t, res, mults = lower_bound(pb.target, args.degree, equations=pb.ideal,
                                        round_tol=args.round_tol, **_solver_kw(args))
        else:
            t, res, mults = lower_bound(pb.target, args.degree, ideal=buchberger(pb.ideal),
                                        round_tol=args.round_tol, **_solver_kw(args))
    else:
        t, res, mults = lower_bound(pb.target, args.degree, round_tol=args.round_tol,
                                    **_solver_kw(args))
    doc = docs.new_document(kind, pb.xring, pb.target, ideal=pb.ideal, degree=args.degree,
                            options=_options(args, form=args.form if pb.ideal else None))
    _report_status(res, doc, out)
    ok = _record_sos(res, doc, out)
    if ok:
        print(f"t = {_fmt_value(t)}", file=out)
        if res.rounded:
            doc["result"]["bound"] = docs.rational_text(t)
            doc["result"]["parameters"] = {}
            if mults is not None:
                doc["result"]["multipliers"] = [str(m) for m in mults]
    return res, doc, ok


def cmd_lower_bound(args, out) -> int:
    pb = _Problem(args)
    _, doc, ok = _bound(args, pb, out, "lower-bound")
    return _finish(args, doc, ok, out)


def cmd_recover(args, out) -> int:
    pb = _Problem(args)
    res, doc, ok = _bound(args, pb, out, "recover")
    if ok:
        try:
            point = recover_solution(res, args.rank_tol)
        except RecoveryError as exc:
            print(f"no minimizer recovered: {exc}", file=out)
            _finish(args, doc, ok, out)
            return EXIT_FAIL
        print("point: " + ", ".join(f"{k} = {v:.10g}" for k, v in point.items()), file=out)
        doc["result"]["point"] = {k: repr(v) for k, v in point.items()}
    return _finish(args, doc, ok, out)


def cmd_verify(args, out) -> int:
    doc = docs.loads(_read_file(args.file))
    ok = docs.verify_document(doc)
    claimed = doc.get("verified")
    print(f"verified: {'true' if ok else 'false'}", file=out)
    if claimed is not None and bool(claimed) != ok:
        print(f"note: document claims verified={str(bool(claimed)).lower()}", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_forms(args, out) -> int:
    xyz = [Polynomial.var(("x", "y", "z"), v) for v in ("x", "y", "z")]
    for name in form_names():
        print(f"{name}(x,y,z) = {named_form(name, xyz)}", file=out)
    return EXIT_OK


# ---- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ratsos", description="Exact sum of squares certificates.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, target=True, ideal=True, degree=True):
        if target:
            p.add_argument("poly", nargs="?", help="polynomial text, '@file', or '-' for stdin")
        p.add_argument("--ring", help="comma separated variables, e.g. x,y,z")
        if ideal:
            p.add_argument("--ideal", help="file or comma separated ideal generators")
        if degree:
            p.add_argument("--degree", type=int, help="degree bound 2d")
        p.add_argument("--round-tol", type=_round_tol, default=3, metavar="K|inf")
        p.add_argument("--solver", choices=("builtin", "external"), default="builtin")
        p.add_argument("--solver-path", help=f"external solver executable (default ${ENV_VAR})")
        p.add_argument("--json", metavar="OUT", help="write a certificate document")

    p = sub.add_parser("decompose", help="SOS decomposition (optionally modulo an ideal)")
    common(p)
    p.add_argument("--trace-obj", action="store_true", help="minimize the Gram trace")
    p.add_argument("--params", help="parameters entering the polynomial affinely")
    p.add_argument("--objective", help="linear form in the parameters to minimize")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("in-ideal", help="nonzero SOS in an ideal")
    common(p, target=False)
    p.add_argument("--form", choices=("quotient", "multiplier"), default="quotient")
    p.set_defaults(func=cmd_in_ideal)

    p = sub.add_parser("ternary", help="ternary form as a quotient of SOS forms")
    common(p, ideal=False, degree=False)
    p.set_defaults(func=cmd_ternary)

    for name, func in (("lower-bound", cmd_lower_bound), ("recover", cmd_recover)):
        p = sub.add_parser(name, help="lower bound" if name == "lower-bound" else
                           "lower bound and minimizer")
        common(p)
        p.add_argument("--form", choices=("quotient", "multiplier"), default="quotient")
        if name == "recover":
            p.add_argument("--rank-tol", type=float, default=1e-6)
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="re-check a certificate document")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("forms", help="list the built-in forms")
    p.set_defaults(func=cmd_forms)
    return parser


def run_cli(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("missing subcommand; see --help")
        return args.func(args, out)
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_ERROR
    except (UsageError, docs.DocumentError, PolynomialSyntaxError, FormulationError,
            ValueError, KeyError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
