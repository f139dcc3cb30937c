import csv
import io
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from finslerhom import ModelError, parse_model, serialize_model
from finslerhom.cli import MODELS_DIR, main
from finslerhom.commands import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, run_command
from finslerhom.model import load_model, parse_vector
from finslerhom.output import HEADER, ResultRow, emit_results

SHIPPED = sorted(MODELS_DIR.glob("*.fhm"))


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_models_shipped():
    assert len(SHIPPED) >= 5


@pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.name)
def test_round_trip_shipped(path):
    bundle = load_model(path)
    text = serialize_model(bundle)
    again = parse_model(text)
    assert again == bundle
    assert serialize_model(again) == text


@settings(max_examples=60, deadline=None)
@given(
    diag=st.lists(st.floats(0.1, 10.0), min_size=3, max_size=3),
    direction=st.lists(st.floats(-1.0, 1.0), min_size=3, max_size=3),
    scale=st.floats(0.0, 0.95),
    kind=st.sampled_from(["riemannian", "randers", "poly"]),
)
def test_round_trip_random(diag, direction, scale, kind):
    d = np.array(direction)
    if not np.any(d):
        d = np.array([1.0, 0.0, 0.0])
    norm = math.sqrt(float(np.sum(np.array(diag) * d * d)))
    assume(norm > 1e-6)
    x = d * scale / norm
    phi = {"riemannian": "phi riemannian", "randers": "phi randers", "poly": "phi polynomial 1, 1, 0.1\nb0 1"}[kind]
    text = f"algebra su2\nmetric diag {', '.join(map(repr, diag))}\nx {', '.join(repr(float(c)) for c in x)}\n{phi}\n"
    bundle = parse_model(text)
    assert parse_model(serialize_model(bundle)) == bundle


def test_custom_algebra_and_labels():
    bundle = parse_model("dim 3\nlabels X Y Z\nbracket X Y = Z\nbracket Y Z = X; bracket Z X = Y\nx 0.1*X + 0.2*Z\nphi randers")
    np.testing.assert_allclose(bundle.x, [0.1, 0, 0.2])
    assert parse_model(serialize_model(bundle)) == bundle


def test_vector_expressions():
    labels = ["e1", "e2", "e3", "e4"]
    np.testing.assert_allclose(parse_vector("(e2+e4)/√2", labels), [0, 1 / math.sqrt(2), 0, 1 / math.sqrt(2)])
    np.testing.assert_allclose(parse_vector("1,2,3,4", labels), [1, 2, 3, 4])
    np.testing.assert_allclose(parse_vector("0.4*e4 - e1", labels), [-1, 0, 0, 0.4])


@pytest.mark.parametrize("text, code, line", [
    ("algebra su2\nfoo 1", "E_SYNTAX", 2),
    ("dim 3\nbracket e1 e2 = e3 + 0.1*e1\nbracket e2 e3 = e1\nbracket e3 e1 = e2", "E_JACOBI", 2),
    ("algebra su2\nmetric diag 1, -1, 1", "E_NOT_SPD", 2),
    ("algebra su2\n\nx 1.5, 0, 0\nphi randers", "E_X_NORM", 3),
    ("algebra su2\nmetric full 1, 2, 0 | 0, 1, 0 | 0, 0, 1", "E_NOT_SYMMETRIC", 2),
    ("algebra su2\nmetric diag 1, 1", "E_DIMENSION", 2),
    ("dim 3\nbracket e1 e9 = e3", "E_INDEX", 2),
    ("algebra su2\nx 0.6\nphi polynomial 1, 0, -2\nb0 0.7", "E_DIMENSION", 2),
    ("algebra su2\nx 0.6, 0, 0\nphi polynomial 1, 0, -2\nb0 0.7", "E_PHI_CONDITION", 3),
    ("dim 2\nbracket e1 e2 = e2\nh 2\nm 1", "E_DECOMPOSITION", 4),
    ("algebra su2\nx 1, 2", "E_DIMENSION", 2),
])
def test_model_errors(text, code, line):
    with pytest.raises(ModelError) as exc:
        parse_model(text)
    assert exc.value.code == code
    assert exc.value.line == line
    assert exc.value.column >= 1


def test_emit_results_empty_is_header_only():
    assert emit_results([], "csv") == ",".join(HEADER) + "\n"


def test_emit_results_format():
    text = emit_results([ResultRow("a", "x", 0.1, -0.0, 1e-12, True)], "csv")
    assert text == "test_id,inputs,value,residual,tolerance,pass\na,x,0.10000000000000001,0,9.9999999999999998e-13,true\n"
    assert "\r" not in text


def test_cli_check_ok(capsys):
    code, out, _ = run_cli(capsys, "check", "--catalog", "su2", "--format", "csv")
    assert code == EXIT_OK
    rows = csv_rows(out)
    assert rows[0] == list(HEADER)
    assert all(r[5] == "true" for r in rows[1:] if r[0] != "check.berwald_candidate")


def test_cli_validation_exit(capsys):
    code, out, err = run_cli(capsys, "check", "--catalog", "heis3", "--phi", "randers", "--x", "0,0,1.5")
    assert code == EXIT_VALIDATION
    assert "E_X_NORM" in err and out == ""


def test_cli_gv_test(capsys):
    code, out, _ = run_cli(capsys, "gv", "test", "1,2,3", "--catalog", "su2", "--format", "csv")
    assert code == EXIT_OK
    rows = csv_rows(out)
    assert [r[0] for r in rows[1:]] == ["gv.riemannian", "gv.finsler.over_m"]
    assert all(r[5] == "true" for r in rows[1:])


def test_cli_gv_test_degenerate(capsys):
    code, out, _ = run_cli(capsys, "gv", "test", "e3", "--model", "so3_so2.fhm", "--phi", "randers",
                           "--x", "0.2*e1", "--format", "csv")
    assert code == EXIT_OK
    assert csv_rows(out)[2][5] == "degenerate"


def test_cli_flag(capsys):
    code, out, _ = run_cli(capsys, "flag", "e1", "(e2+e4)/√2", "--model", "su2r_randers.fhm", "--format", "csv")
    assert code == EXIT_OK
    rows = {r[0]: r for r in csv_rows(out)[1:]}
    assert float(rows["flag.closed"][2]) == pytest.approx(0.125, abs=1e-12)
    assert float(rows["flag.general"][2]) == pytest.approx(0.125, abs=1e-12)
    assert rows["flag.diff"][5] == "true"


def test_cli_flag_parallel(capsys):
    code, _, err = run_cli(capsys, "flag", "e1", "2*e1", "--catalog", "su2")
    assert code == EXIT_VALIDATION and "E_DEGENERATE" in err


def test_cli_matches_library(capsys):
    bundle = load_model(MODELS_DIR / "heis3_randers.fhm")
    status, rows = run_command(bundle, "gv test", np.array([0.3, -0.2, 0.7]), "g")
    code, out, _ = run_cli(capsys, "gv", "test", "0.3,-0.2,0.7", "--over", "g", "--model", "heis3_randers.fhm",
                           "--format", "csv")
    assert code == status and out == emit_results(rows, "csv")


def test_cli_gv_find_all(capsys):
    code, out, _ = run_cli(capsys, "gv", "find", "--catalog", "su2", "--resolution", "500", "--format", "csv")
    assert code == EXIT_OK
    assert csv_rows(out)[1][0] == "gv.find.all"


def test_cli_verify(capsys):
    code, out, _ = run_cli(capsys, "verify", "--model", "su2r_randers.fhm", "--samples", "50", "--format", "csv")
    assert code == EXIT_OK
    rows = csv_rows(out)[1:]
    assert {"verify.biinvariance_lemma", "verify.flag_closed_vs_general", "verify.g_closed_vs_fd"} <= {r[0] for r in rows}
    assert all(r[5] == "true" for r in rows)


def test_exit_codes_distinct():
    assert len({EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL}) == 3


def test_table_format(capsys):
    code, out, _ = run_cli(capsys, "check", "--catalog", "su2")
    assert code == EXIT_OK
    assert out.splitlines()[0].split() == list(HEADER)


def test_model_path_override(tmp_path, capsys):
    p = tmp_path / "m.fhm"
    p.write_text("algebra heis3\nx 0, 0, 0.5\nphi randers\n", encoding="utf-8")
    code, out, _ = run_cli(capsys, "check", "--model", str(p), "--x", "0,0,0.1", "--format", "csv")
    assert code == EXIT_OK
    assert "(0,0,0.10000000000000001)" in out
