import io
import json
import subprocess
import sys


from ratsos import document as docs
from ratsos.cli import expand_forms, run_cli
from ratsos.poly import parse_polynomial

QUARTIC = "2*x^4+5*y^4-2*x^2*y^2+2*x^3*y"


def run(*argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = run_cli(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_decompose_quartic(tmp_path):
    path = tmp_path / "cert.json"
    code, out, _ = run("decompose", "--ring", "x,y", QUARTIC, "--json", str(path))
    assert code == 0
    assert "Status: SDP solved, primal-dual feasible" in out
    doc = json.loads(path.read_text())
    assert doc["version"] == 1 and doc["verified"] is True
    assert len(doc["result"]["weights"]) == 3
    assert all("/" in w for w in doc["result"]["weights"])
    assert docs.verify_document(doc)
    # byte-stable re-encoding
    assert docs.dumps(docs.loads(path.read_text())) == path.read_text()


def test_stdin_and_file_input(tmp_path, monkeypatch):
    code, out, _ = run("decompose", "--ring", "x,y", stdin=QUARTIC, monkeypatch=monkeypatch)
    assert code == 0
    src = tmp_path / "f.txt"
    src.write_text(QUARTIC + "\n")
    assert run("decompose", "--ring", "x,y", f"@{src}")[0] == 0


def test_ring_inferred():
    code, out, _ = run("decompose", "x^2 + 2*x*y + 2*y^2")
    assert code == 0


def test_lower_bound_motzkin_cli():
    code, out, _ = run("lower-bound", "--ring", "x,z", "--round-tol", "12", "Motzkin(x,1,z)")
    assert code == 0
    assert "t = -729/4096" in out


def test_circle_with_ideal_file(tmp_path):
    ideal = tmp_path / "circle.txt"
    ideal.write_text("# unit circle\nx^2 + y^2 - 1\n")
    code, out, _ = run("decompose", "--ring", "x,y", "--ideal", str(ideal), "--degree", "2",
                       "--trace-obj", "10-x^2-y")
    assert code == 0
    assert "coeffs: {9, 35/36}" in out


def test_infeasible_exit_code(tmp_path):
    path = tmp_path / "m.json"
    code, out, _ = run("decompose", "Motzkin(x,y,z)", "--json", str(path))
    assert code == 2
    assert "Status: infeasible" in out
    doc = json.loads(path.read_text())
    assert doc["verified"] is False and doc["result"]["status"] == "infeasible"
    assert not docs.verify_document(doc)


def test_round_tol_inf_reports_float_result():
    code, out, _ = run("decompose", "--ring", "x,y", "--round-tol", "inf", QUARTIC)
    assert code == 0
    assert "not rounded" in out


def test_in_ideal_and_ternary_and_recover(tmp_path):
    gens = "x^2-4*x+2*y^2, 2*z^2-y^2+2"
    for form in ("quotient", "multiplier"):
        path = tmp_path / f"{form}.json"
        code, out, _ = run("in-ideal", "--ideal", gens, "--degree", "2", "--form", form,
                           "--json", str(path))
        assert code == 0, out
        assert docs.verify_document(json.loads(path.read_text()))
    path = tmp_path / "t.json"
    assert run("ternary", "Motzkin(x,y,z)", "--json", str(path))[0] == 0
    assert docs.verify_document(json.loads(path.read_text()))
    code, out, _ = run("recover", "--ideal", "x^2-x, y^2-y", "--degree", "2", "x-y")
    assert code == 0 and "t = -1" in out and "point:" in out
    code, out, _ = run("lower-bound", "--ideal", "x^2-x, y^2-y", "--degree", "2",
                       "--form", "multiplier", "x-y")
    assert code == 0 and "t = -1" in out


def test_params_and_objective(tmp_path):
    path = tmp_path / "r.json"
    code, out, _ = run("decompose", "--ring", "x,y,z", "--params", "s,t",
                       "Robinson(x,y,z) + s*x^6 + t*y^6", "--json", str(path))
    assert code == 0
    doc = json.loads(path.read_text())
    assert set(doc["result"]["parameters"]) == {"s", "t"}
    assert docs.verify_document(doc)


def test_verify_subcommand(tmp_path):
    path = tmp_path / "cert.json"
    run("decompose", "--ring", "x,y", QUARTIC, "--json", str(path))
    assert run("verify", str(path))[0] == 0
    doc = json.loads(path.read_text())
    g = doc["result"]["generators"]
    g[0] = g[0] + " + x*y"
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(doc))
    code, out, _ = run("verify", str(tampered))
    assert code == 2 and "verified: false" in out
    doc = json.loads(path.read_text())
    doc["result"]["weights"][0] = "-" + doc["result"]["weights"][0]
    tampered.write_text(json.dumps(doc))
    code, _, err = run("verify", str(tampered))
    assert code == 1 and "error" in err


def test_usage_errors(tmp_path):
    assert run()[0] == 1
    assert run("bogus")[0] == 1
    assert run("decompose", "--nope", "x")[0] == 1
    assert run("decompose", "--ring", "x", "x^^2")[0] == 1
    assert run("decompose", "--ring", "x", "--round-tol", "abc", "x^2")[0] == 1
    assert run("verify", str(tmp_path / "missing.json"))[0] == 1
    assert run("in-ideal", "--ring", "x", "--degree", "2")[0] == 1
    assert run("decompose", "--ring", "x", "--objective", "s", "x^2")[0] == 1
    assert run("lower-bound", "--form", "multiplier", "x^2")[0] == 1
    code, _, err = run("decompose", "--ring", "x", "Motzkin(x,1)")
    assert code == 1 and "error" in err


def test_forms_listing():
    code, out, _ = run("forms")
    assert code == 0 and "Motzkin(x,y,z) = " in out


def test_expand_forms():
    ring = ("x", "z")
    text = expand_forms("Motzkin(x,1,z) + 1", ring)
    assert parse_polynomial(text, ring) == parse_polynomial(
        "x^4 + x^2 - 3*x^2*z^2 + z^6 + 1", ring)
    nested = expand_forms("2*Choi-Lam(x, z, 1)", ring)
    assert parse_polynomial(nested, ring).degree() == 6


def test_external_solver_flag(tmp_path):
    code, out, _ = run("decompose", "--ring", "x", "--solver", "external", "--solver-path",
                       str(tmp_path / "none"), "x^2+1")
    assert code == 2 and "Status: unknown" in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ratsos.cli", "decompose", "--ring", "x,y", QUARTIC],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("Status: SDP solved, primal-dual feasible")
