import csv
import io
import json
import math
import subprocess
import sys
from importlib import resources

import pytest

from sgwave.cli import main

jsonschema = pytest.importorskip("jsonschema")

SCHEMA = json.loads(resources.files("sgwave").joinpath("schemas/report.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    doc = json.loads(out) if out else None
    if doc is not None:
        jsonschema.validate(doc, SCHEMA)
    return code, doc, err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def test_schema_is_valid():
    jsonschema.Draft202012Validator.check_schema(SCHEMA)


def test_soliton_metadata(capsys):
    code, doc, _ = run_json(capsys, "soliton", "--gamma", "0.1", "--alpha", "1")
    assert code == 0
    assert doc["family"] == "soliton"
    assert doc["v"] == pytest.approx(0.0783, abs=2e-4)
    assert doc["balance_residual"] <= 1e-8
    assert {"xi", "g", "u", "phi"} <= set(doc["profile"])


def test_soliton_csv_and_meta_file(capsys, tmp_path):
    meta = tmp_path / "meta.json"
    code, out, _ = run(capsys, "soliton", "--gamma", "0.1", "--alpha", "1", "--samples", "11",
                       "--meta", str(meta))
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["xi", "g", "u", "phi"]
    assert len(rows) == 11
    for xi, g, u, f in rows:
        assert f == pytest.approx(g - math.pi, abs=1e-15) and u > 0
    doc = json.loads(meta.read_text())
    jsonschema.validate(doc, SCHEMA)
    assert doc["v"] == pytest.approx(0.0783, abs=2e-4)


def test_constant_rows(capsys):
    code, out, _ = run(capsys, "constant", "--gamma", "0.5")
    assert code == 0
    header, rows = parse_csv(out)
    assert len(rows) == 1 and rows[0][3] == pytest.approx(-math.pi / 6, abs=1e-15)
    code, out, _ = run(capsys, "constant", "--gamma", "0.5", "--include-unstable")
    _, rows = parse_csv(out)
    assert [r[3] for r in rows] == pytest.approx([-math.pi / 6, math.pi / 6 - math.pi])


def test_unit_speed_array(capsys):
    code, doc, _ = run_json(capsys, "array", "--gamma", "2", "--mu", "inf", "--alpha", "1")
    assert code == 0
    assert doc["mu"] == "inf" and doc["v"] == 1
    assert doc["xi_period"] == pytest.approx(2 * math.pi / math.sqrt(3), abs=1e-8)


def test_array_by_xi_period(capsys):
    code, doc, _ = run_json(capsys, "array", "--gamma", "1.5", "--alpha", "1",
                            "--xi-period", "4")
    assert code == 0
    assert doc["xi_period"] == pytest.approx(4.0, abs=1e-8)
    assert doc["periodicity_residual"] <= 1e-8


def test_domain_errors_exit_2(capsys):
    code, out, err = run(capsys, "array", "--gamma", "0.5", "--mu", "inf", "--alpha", "1")
    assert code == 2 and out == ""
    e = json.loads(err)
    assert e["error"] == "MuInfinityRequiresGammaAboveOne" and e["code"]
    code, _, err = run(capsys, "constant", "--gamma", "1")
    assert code == 2 and json.loads(err)["error"] == "GammaOutOfRange"


def test_array_flags_mutually_exclusive(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["array", "--gamma", "0.5", "--alpha", "1", "--mu", "0.2", "--zm", "1"])
    assert exc.value.code == 2


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep-hatmu", "--gammas", "0.3", "0.05", "0.6")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["gamma", "hat_mu", "lower32", "upper32", "mu1"]
    assert [r[0] for r in rows] == [0.05, 0.3, 0.6]
    assert rows[0][1] == pytest.approx(0.03927, rel=0.05)
    assert all(r[2] <= r[1] <= r[3] for r in rows)
    assert all(a[1] < b[1] for a, b in zip(rows, rows[1:]))


def test_sweep_json(capsys):
    code, doc, _ = run_json(capsys, "sweep-hatmu", "--grid", "0.1", "0.3", "3")
    assert code == 0
    assert [r["gamma"] for r in doc["rows"]] == pytest.approx([0.1, 0.2, 0.3])
    assert all(c["passed"] for c in doc["checks"])


def test_fixed_point(capsys):
    code, doc, _ = run_json(capsys, "fixed-point", "--gamma", "0.1")
    assert code == 0
    assert doc["lambda"] == pytest.approx(0.2753, abs=1e-4)
    assert doc["shooting_delta"] <= 1e-7
    assert doc["iterations"] >= 1 and doc["error_bound_mu"] > 0


def test_fixed_point_outside_proven_range(capsys):
    code, out, err = run(capsys, "fixed-point", "--gamma", "0.2")
    assert code == 3 and out == ""
    assert json.loads(err)["error"] == "NotContractive"


@pytest.mark.parametrize("argv", [
    ("constant", "--gamma", "0.3"),
    ("soliton", "--gamma", "0.1"),
])
def test_verify_passes(capsys, argv):
    code, doc, _ = run_json(capsys, "verify", *argv)
    assert code == 0 and doc["passed"]
    if argv[0] == "constant":
        assert doc["residual"]["max_residuals"] == [0, 0, 0]
    else:
        assert 1.9 <= doc["residual"]["order"] <= 2.1


def test_verify_half_array(capsys):
    code, doc, _ = run_json(capsys, "verify", "half-array", "--gamma", "0.1", "--mu", "0.02",
                            "--x-range", "-10", "60")
    assert code == 0 and doc["passed"]
    rate = [c for c in doc["checks"] if c["name"] == "merge rate"][0]
    assert rate["value"] > 0


def test_props(capsys):
    code, doc, _ = run_json(capsys, "props", "-n", "5", "--seed", "7")
    assert code == 0
    assert doc["seed"] == 7 and len(doc["checks"]) == 3


def test_out_file(capsys, tmp_path):
    dest = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep-hatmu", "--gammas", "0.2", "--out", str(dest))
    assert code == 0 and out == ""
    assert dest.read_text().startswith("gamma,hat_mu,lower32,upper32,mu1\n")


def test_byte_identical_reruns():
    argv = [sys.executable, "-m", "sgwave.cli", "array", "--gamma", "0.5", "--alpha", "1",
            "--mu", "0.2", "--samples", "51"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"xi,g,u,phi\n")
