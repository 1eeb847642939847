"""JSON certificate documents and their solver-free re-verification.

Rationals are stored as "num/den" strings and polynomials as canonical
text, so a document survives a JSON round trip exactly.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .applications import check_ternary
from .certify import verify_certificate
from .groebner import buchberger
from .poly import Polynomial, PolynomialSyntaxError, SOSPoly, expand_sos, parse_polynomial

VERSION = 1
KINDS = ("decompose", "in-ideal", "ternary", "lower-bound", "recover")

_RATIONAL = re.compile(r"^-?\d+/\d+$")


class DocumentError(ValueError):
    """A document that is not a well-formed certificate (distinct from a false one)."""


def rational_text(c) -> str:
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


def parse_rational(text) -> Fraction:
    if not isinstance(text, str) or not _RATIONAL.match(text):
        raise DocumentError(f"expected a 'num/den' string, got {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise DocumentError(f"zero denominator in {text!r}") from None


def sos_fields(s: SOSPoly) -> dict:
    return {"weights": [rational_text(w) for w in s.weights],
            "generators": [str(g) for g in s.generators]}


def new_document(kind: str, ring: Sequence[str], target: Polynomial | None, *,
                 ideal: Sequence[Polynomial] = (), degree: int | None = None,
                 options: Mapping[str, Any] | None = None) -> dict:
    return {
        "version": VERSION,
        "problem": {
            "kind": kind,
            "ring": list(ring),
            "target": None if target is None else str(target),
            "ideal": [str(h) for h in ideal],
            "degree": degree,
            "options": dict(options or {}),
        },
        "result": {"status": "unknown"},
        "verified": False,
    }


def dumps(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"not JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    return doc


def _get(d: Mapping, key: str, kind: type | tuple):
    if not isinstance(d, Mapping) or key not in d:
        raise DocumentError(f"missing field {key!r}")
    v = d[key]
    if not isinstance(v, kind):
        raise DocumentError(f"field {key!r} has the wrong type")
    return v


def _poly(text, ring) -> Polynomial:
    if not isinstance(text, str):
        raise DocumentError(f"expected polynomial text, got {text!r}")
    try:
        return parse_polynomial(text, ring)
    except PolynomialSyntaxError as exc:
        raise DocumentError(f"bad polynomial {text!r}: {exc}") from None


def _sos(d: Mapping, ring) -> SOSPoly:
    weights = [parse_rational(w) for w in _get(d, "weights", list)]
    gens = [_poly(g, ring) for g in _get(d, "generators", list)]
    try:
        return SOSPoly(weights, gens)
    except ValueError as exc:
        raise DocumentError(str(exc)) from None


def verify_document(doc: Mapping) -> bool:
    """Exact re-verification of a certificate document; never runs a solver.

    Returns False for a well-formed document whose certificate does not
    check; raises :class:`DocumentError` when the document is malformed.
    """
    if _get(doc, "version", int) != VERSION:
        raise DocumentError(f"unsupported version {doc['version']!r}")
    prob = _get(doc, "problem", dict)
    res = _get(doc, "result", dict)
    kind = _get(prob, "kind", str)
    if kind not in KINDS:
        raise DocumentError(f"unknown problem kind {kind!r}")
    ring = tuple(_get(prob, "ring", list))
    if not all(isinstance(v, str) and v.isidentifier() for v in ring) or len(set(ring)) != len(ring):
        raise DocumentError("ring must be a list of distinct variable names")
    ideal_gens = [_poly(h, ring) for h in _get(prob, "ideal", list)]
    target = _poly(_get(prob, "target", str), ring)
    if "weights" not in res and kind != "ternary":
        return False

    if kind == "ternary":
        nums = [_sos(s, ring) for s in _get(res, "numerators", list)]
        dens = [_sos(s, ring) for s in _get(res, "denominators", list)]
        if not nums:
            return False
        return check_ternary(target, nums, dens)

    params = {k: parse_rational(v) for k, v in _get(res, "parameters", dict).items()}
    if not set(params) <= set(ring):
        raise DocumentError("parameter names must belong to the ring")
    xring = tuple(v for v in ring if v not in params)
    s = _sos(res, ring)
    mult_texts = res.get("multipliers")
    if kind in ("lower-bound", "recover"):
        t = parse_rational(_get(res, "bound", str))
        target = target - Polynomial.constant(ring, t)
    if params:
        images = {v: Polynomial.var(xring, v) for v in xring}
        images.update(params)
        target = target.substitute(images, xring)
        s = SOSPoly(s.weights, [g.substitute(images, xring) for g in s.generators])
        ideal_gens = [h.substitute(images, xring) for h in ideal_gens]
    if any(g.is_zero() for g in s.generators):
        return False
    if kind == "in-ideal":
        # a nontrivial SOS with sum zero modulo the ideal
        if not s.generators or expand_sos(s, xring).is_zero():
            return False
    if mult_texts is not None:
        mults = [_poly(m, ring).in_vars(xring) for m in mult_texts]
        if len(mults) != len(ideal_gens):
            raise DocumentError("one multiplier per ideal generator is required")
        return verify_certificate(s, target, None, zip(mults, ideal_gens))
    gb = buchberger(ideal_gens) if ideal_gens else None
    return verify_certificate(s, target, gb)
