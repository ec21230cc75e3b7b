from __future__ import annotations

import csv
import io
import json
import subprocess
import sys
from importlib.resources import files

import jsonschema
import pytest

from quasispec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    return json.loads(out)


def schema(name):
    return json.loads((files("quasispec") / "schemas" / f"{name}.json").read_text())


def test_generate_fibonacci(capsys):
    js = run_json(capsys, "generate", "--model", "fibonacci", "--length", "8")
    assert js["word"] == "abaababa"
    jsonschema.validate(js, schema("generate"))


def test_generate_sturmian_and_rudin_shapiro(capsys):
    js = run_json(capsys, "generate", "--model", "sturmian", "--alpha", "golden", "--length", "5")
    assert js["word"] == "10110"
    js = run_json(capsys, "generate", "--model", "rudin-shapiro", "--length", "4")
    assert js["word"] == "abac"


def test_generate_csv_header(capsys):
    code, out, _ = run(capsys, "generate", "--model", "fibonacci", "--length", "3", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["site", "symbol", "value"] and len(rows) == 4


@pytest.mark.parametrize("alpha", ["0.618", "cf:1,2,3", "quad:1,1,4,2"])
def test_bad_alpha_exits_2(capsys, alpha):
    code, _, err = run(capsys, "generate", "--model", "sturmian", "--alpha", alpha, "--length", "5")
    assert code == 2 and "error" in err


def test_complexity(capsys):
    js = run_json(capsys, "complexity", "--model", "fibonacci", "--n-max", "20")
    assert js["p"] == list(range(2, 22)) and js["stable"]
    jsonschema.validate(js, schema("complexity"))


def test_complexity_cache(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("QUASISPEC_CACHE", str(tmp_path))
    first = run_json(capsys, "complexity", "--model", "thue-morse", "--n-max", "10")
    assert list(tmp_path.glob("*.pkl"))
    second = run_json(capsys, "complexity", "--model", "thue-morse", "--n-max", "10")
    assert first == second


def test_spectrum(capsys):
    js = run_json(capsys, "spectrum", "--model", "sturmian", "--alpha", "golden",
                  "--lambda", "1", "--level", "5")
    assert len(js["bands"]) == 8
    jsonschema.validate(js, schema("bands"))
    js = run_json(capsys, "spectrum", "--model", "sturmian", "--alpha", "golden",
                  "--lambda", "1", "--level", "6", "--nested", "3")
    jsonschema.validate(js, schema("stage"))


def test_spectrum_substitutions(capsys):
    for model in ("thue-morse", "rudin-shapiro", "binary-non-pisot"):
        js = run_json(capsys, "spectrum", "--model", model, "--lambda", "1", "--level", "4")
        assert js["bands"]


def test_tracemap(capsys):
    js = run_json(capsys, "tracemap", "--model", "sturmian", "--alpha", "golden",
                  "--lambda", "1", "--energy", "10")
    assert js["classification"] == "certified_out"
    jsonschema.validate(js, schema("tracemap"))
    code, _, err = run(capsys, "tracemap", "--model", "rudin-shapiro", "--energy", "0")
    assert code == 2


def test_gordon(capsys):
    js = run_json(capsys, "gordon", "--model", "sturmian", "--alpha", "golden",
                  "--lambda", "1", "--n-max", "6")
    jsonschema.validate(js, schema("gordon"))


def test_lyapunov_and_determinism(capsys):
    args = ("lyapunov", "--model", "sturmian", "--alpha", "golden", "--lambda", "2",
            "--length", "2000", "--emin", "-2", "--emax", "4", "--count", "5", "--seed", "3")
    a = run_json(capsys, *args)
    b = run_json(capsys, *args)
    assert a == b
    jsonschema.validate(a, schema("lyapunov"))


def test_dynamics_small(capsys):
    js = run_json(capsys, "dynamics", "--model", "free", "--N", "200", "--tmin", "2",
                  "--tmax", "40", "--samples", "10")
    jsonschema.validate(js, schema("dynamics"))


def test_out_file(capsys, tmp_path):
    path = tmp_path / "w.json"
    code, out, _ = run(capsys, "generate", "--model", "fibonacci", "--length", "4", "--out", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["word"] == "abaa"


def test_argparse_usage_error():
    proc = subprocess.run([sys.executable, "-m", "quasispec", "generate", "--model", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
