import copy

import pytest

from ratsos.document import (
    DocumentError,
    dumps,
    loads,
    new_document,
    parse_rational,
    rational_text,
    sos_fields,
    verify_document,
)
from ratsos.poly import Polynomial, SOSPoly, variables
from fractions import Fraction


def circle_doc():
    x, y = variables("x,y")
    doc = new_document("decompose", ("x", "y"), 10 - x**2 - y, ideal=[x**2 + y**2 - 1], degree=2)
    doc["result"].update(sos_fields(SOSPoly([Fraction(9), Fraction(35, 36)], [1 - y / 18, y])))
    doc["result"]["parameters"] = {}
    return doc


def test_rationals():
    assert rational_text(Fraction(5)) == "5/1"
    assert rational_text(Fraction(-3, 4)) == "-3/4"
    assert parse_rational("231773/344000") == Fraction(231773, 344000)
    for bad in ["5", "0.5", 5, "1/0", "a/b"]:
        with pytest.raises(DocumentError):
            parse_rational(bad)


def test_circle_document_verifies_and_round_trips():
    doc = circle_doc()
    assert verify_document(doc)
    text = dumps(doc)
    assert dumps(loads(text)) == text


def test_empty_certificate_for_zero():
    doc = new_document("decompose", ("x",), Polynomial(("x",)))
    doc["result"].update(weights=[], generators=[], parameters={})
    assert verify_document(doc)


def test_false_versus_malformed():
    doc = circle_doc()
    wrong = copy.deepcopy(doc)
    wrong["result"]["weights"][1] = "1/1"
    assert verify_document(wrong) is False
    neg = copy.deepcopy(doc)
    neg["result"]["weights"][0] = "-9/1"
    with pytest.raises(DocumentError):
        verify_document(neg)
    for mutate in (lambda d: d.pop("version"),
                   lambda d: d.update(version=2),
                   lambda d: d["problem"].update(kind="other"),
                   lambda d: d["problem"].update(ring=["x", "x"]),
                   lambda d: d["result"]["generators"].append("x +"),
                   lambda d: d["result"].update(parameters={"w": "1/1"})):
        bad = copy.deepcopy(doc)
        mutate(bad)
        with pytest.raises(DocumentError):
            verify_document(bad)


def test_missing_certificate_is_false():
    doc = circle_doc()
    del doc["result"]["weights"]
    assert verify_document(doc) is False


def test_loads_rejects_non_objects():
    with pytest.raises(DocumentError):
        loads("[1, 2]")
    with pytest.raises(DocumentError):
        loads("{")


def test_in_ideal_requires_nontrivial_sos():
    x, y = variables("x,y")
    doc = new_document("in-ideal", ("x", "y"), Polynomial(("x", "y")), ideal=[x**2 + y**2])
    doc["result"].update(weights=[], generators=[], parameters={})
    assert verify_document(doc) is False
    doc["result"].update(sos_fields(SOSPoly([1, 1], [x, y])))
    assert verify_document(doc) is True
