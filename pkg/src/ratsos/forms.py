"""A small library of nonnegative ternary forms."""

from __future__ import annotations

from typing import Sequence

from .poly import Polynomial, parse_polynomial

_FORMS = {
    "Motzkin": "x^4*y^2 + x^2*y^4 - 3*x^2*y^2*z^2 + z^6",
    "Robinson": ("x^6 + y^6 + z^6 - (x^4*y^2 + x^2*y^4 + x^4*z^2 + x^2*z^4 + y^4*z^2 + y^2*z^4)"
                 " + 3*x^2*y^2*z^2"),
    "Choi-Lam": "x^4*y^2 + y^4*z^2 + z^4*x^2 - 3*x^2*y^2*z^2",
    "Scheiderer": "x^4 + x*y^3 + y^4 - 3*x^2*y*z - 4*x*y^2*z + 2*x^2*z^2 + x*z^3 + y*z^3 + z^4",
}


def form_names() -> list[str]:
    return sorted(_FORMS)


def named_form(name: str, values: Sequence) -> Polynomial:
    """The form ``name`` with its variables replaced by ``values``.

    ``values`` may mix polynomials and numbers, e.g. ``(x, 1, z)``.
    """
    if name not in _FORMS:
        raise KeyError(f"unknown form {name!r}; known: {', '.join(form_names())}")
    if len(values) != 3:
        raise ValueError(f"{name} takes 3 arguments, got {len(values)}")
    names = ("x", "y", "z")
    f = parse_polynomial(_FORMS[name], names)
    polys = [v for v in values if isinstance(v, Polynomial)]
    ring = polys[0].vars if polys else ()
    return f.substitute(dict(zip(names, values)), ring)
