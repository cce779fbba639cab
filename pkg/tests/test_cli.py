import json
import subprocess
import sys

import pytest

from chebband.cli import main, parse_degrees
from chebband.io import dumps, fmt


@pytest.fixture
def files(tmp_path):
    system = tmp_path / "system.json"
    system.write_text(json.dumps({"endpoints": [-1, -0.4, 0.2, 1]}))
    weight = tmp_path / "weight.json"
    weight.write_text(json.dumps({"type": "poly", "roots": [{"re": 0, "im": 1}, {"re": 0, "im": -1}]}))
    return tmp_path, str(system), str(weight)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_degrees():
    assert parse_degrees("2..4,10") == [2, 3, 4, 10]
    with pytest.raises(Exception):
        parse_degrees("0")


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 2.0, 1e-300, -5.5e20):
        assert float(fmt(v)) == v
    assert fmt(float("nan")) == "null"
    assert dumps({"b": 1.0, "a": [1, 2]}).index('"a"') < dumps({"b": 1.0, "a": [1, 2]}).index('"b"')


def test_analyze(files, capsys):
    _, system, weight = files
    code, out, _ = run(["analyze", "--system", system, "--weight", weight], capsys)
    assert code == 0
    data = json.loads(out)
    assert len(data["omega_inf"]) == 2 and data["capacity"] > 0
    assert len(data["L"]) == 1


def test_predict_and_remez(files, capsys):
    tmp, system, _ = files
    code, out, _ = run(["predict", "--system", system, "--n", "20", "--csv", str(tmp / "p.csv")], capsys)
    assert code == 0
    pred = json.loads(out)
    code, out, _ = run(["remez", "--system", system, "--n", "20"], capsys)
    assert code == 0
    rem = json.loads(out)
    assert rem["deviation"] / pred["predicted_deviation"] == pytest.approx(1.0, abs=1e-3)
    assert rem["zeros_per_band"] == pred["zero_counts"]
    assert (tmp / "p.csv").read_text().startswith("x,value\n")


def test_compare_csv(files, capsys):
    tmp, system, _ = files
    out_csv = tmp / "cmp.csv"
    code, out, _ = run(["compare", "--system", system, "--n-list", "10,20", "--out", str(out_csv)], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["rows"] == 2 and summary["failed_rows"] == 0
    assert summary["ratio_monotone"] and summary["zero_counts_match"]
    assert len(out_csv.read_text().splitlines()) == 3


def test_bridge(files, capsys):
    _, system, _ = files
    code, out, _ = run(["bridge", "--system", system, "--n", "6"], capsys)
    assert code == 0
    data = json.loads(out)
    assert "pell_residual" in data and len(data["x"]) == 1


def test_deterministic_output(files, capsys):
    tmp, system, weight = files
    a, b = tmp / "a.json", tmp / "b.json"
    assert main(["remez", "--system", system, "--weight", weight, "--n", "9", "--out", str(a)]) == 0
    assert main(["remez", "--system", system, "--weight", weight, "--n", "9", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors(files, capsys):
    tmp, system, _ = files
    bad = tmp / "bad.json"
    bad.write_text(json.dumps({"endpoints": [-1, 1, 0.5, 2]}))
    code, _, err = run(["analyze", "--system", str(bad)], capsys)
    assert code == 2 and json.loads(err)["exit_code"] == 2
    code, _, _ = run(["analyze", "--system", str(tmp / "missing.json")], capsys)
    assert code == 2
    (tmp / "broken.json").write_text("{not json")
    code, _, _ = run(["analyze", "--system", str(tmp / "broken.json")], capsys)
    assert code == 2
    neg = tmp / "neg.json"
    neg.write_text(json.dumps({"type": "poly", "roots": [{"re": 0.5}]}))
    code, _, _ = run(["analyze", "--system", system, "--weight", str(neg)], capsys)
    assert code == 2
    with pytest.raises(SystemExit):
        main(["remez", "--system", system, "--n", "0"])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "chebband", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("chebband")
