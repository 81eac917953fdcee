import json

import numpy as np
import pytest

from ramml.amml import FitResult
from ramml.cli import (EXIT_ESTIMATOR, EXIT_NON_NUMERIC, EXIT_NOT_FOUND, EXIT_PARSE, EXIT_USAGE, main,
                       parse_sweep_config, expand_sweep, CliError)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fit_bundled_table(capsys):
    code, out, _ = run(capsys, "fit", "--dataset", "starsCYG", "--estimators", "RAMML2")
    assert code == 0
    row = out.splitlines()[1].split()
    assert row[0] == "RAMML2"
    vals = [float(v) for v in row[1:]]
    np.testing.assert_allclose(vals, [-8.0907, 2.9553, 0.3249, 1.1277, 0.3252], atol=0.01)


def test_fit_bundled_json_round_trip(capsys):
    code, out, _ = run(capsys, "fit", "--dataset", "aircraft", "--estimators", "AMML2,MM", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    est = {e["estimator"]: e for e in doc["estimates"]}
    assert est["AMML2"]["scale"] == pytest.approx(6.7367, abs=1e-3)
    assert est["AMML2"]["sep_trim"] == pytest.approx(3.9778, abs=1e-3)
    fr = FitResult.from_dict(est["AMML2"]["fit"])
    assert fr.scale == est["AMML2"]["scale"] and fr.method == "AMML2"


def test_fit_csv_exact_line(tmp_path, capsys):
    p = tmp_path / "line.csv"
    p.write_text("x,y\n1,1\n2,2\n3,3\n")
    code, out, _ = run(capsys, "fit", str(p), "--estimators", "OLS,RAMML1", "--format", "csv")
    assert code == 0
    rows = [l.split(",") for l in out.strip().splitlines()[1:]]
    for r in rows:
        assert float(r[2]) == pytest.approx(1.0) and abs(float(r[3])) < 1e-9 and abs(float(r[4])) < 1e-9


def test_fit_diagnostics(capsys):
    code, out, _ = run(capsys, "fit", "--dataset", "starsCYG", "--estimators", "RAMML1", "--diagnostics",
                       "--format", "json")
    diag = json.loads(out)["diagnostics"]
    assert len(diag) == 47 and {"index", "scaled_residual", "weight"} <= set(diag[0])


def test_column_selection(tmp_path, capsys):
    p = tmp_path / "d.csv"
    rng = np.random.default_rng(0)
    x, z = rng.standard_normal(20), rng.standard_normal(20)
    y = 1 + 2 * x + 0.1 * rng.standard_normal(20)
    p.write_text("y,x,z\n" + "".join(f"{a},{b},{c}\n" for a, b, c in zip(y, x, z)))
    code, out, _ = run(capsys, "fit", str(p), "--response", "y", "--predictors", "x", "--estimators", "OLS",
                       "--format", "json")
    assert code == 0 and json.loads(out)["predictors"] == ["x"]


@pytest.mark.parametrize("content,status,needle", [
    ("x,y\n1,1\n2,abc\n3,3\n4,4\n", EXIT_NON_NUMERIC, "line 3, column 'y'"),
    ("x,y\n1,1\n2,\n3,3\n4,4\n", EXIT_NON_NUMERIC, "missing value"),
    ("x,y\n1,1\n2,2,2\n3,3\n", EXIT_PARSE, "line 3"),
    ("", EXIT_PARSE, "empty"),
])
def test_fit_bad_csv(tmp_path, capsys, content, status, needle):
    p = tmp_path / "bad.csv"
    p.write_text(content)
    code, _, err = run(capsys, "fit", str(p))
    assert code == status and needle in err


def test_fit_missing_file_and_column(tmp_path, capsys):
    code, _, err = run(capsys, "fit", str(tmp_path / "nope.csv"))
    assert code == EXIT_NOT_FOUND
    p = tmp_path / "d.csv"
    p.write_text("x,y\n1,1\n2,2\n3,4\n")
    code, _, err = run(capsys, "fit", str(p), "--response", "w")
    assert code == EXIT_PARSE and "'w'" in err


def test_fit_estimator_failure(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("x,y\n1,1\n1,2\n1,3\n1,4\n1,5\n1,6\n")
    code, _, err = run(capsys, "fit", str(p), "--estimators", "OLS")
    assert code == EXIT_ESTIMATOR and "OLS" in err


def test_fit_usage_errors(capsys):
    assert run(capsys, "fit")[0] == EXIT_USAGE
    assert run(capsys, "fit", "--dataset", "starsCYG", "--estimators", "LMS")[0] == EXIT_USAGE


CONFIG = """# small sweep
n = 30
m = 1, 2
law = normal, t5
contamination = 0, 0.1
leverage = 5
n_rep = 2
estimators = OLS, RAMML1
seed = 4
"""


def test_simulate_is_deterministic(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(CONFIG)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", str(cfg), "-o", str(out1)]) == 0
    monkeypatch.setenv("RAMML_WORKERS", "2")
    assert main(["simulate", str(cfg), "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == "n,m,law,level,leverage,rho,estimator,mse_beta,mse_sigma,failures"
    assert len(lines) == 1 + 2 * 2 * 2 * 2


def test_minimal_simulation(tmp_path, capsys):
    cfg = tmp_path / "one.cfg"
    cfg.write_text("n = 20\nm = 1\nn_rep = 2\nestimators = OLS\n")
    code, out, _ = run(capsys, "simulate", str(cfg))
    rows = out.strip().splitlines()
    assert code == 0 and len(rows) == 2 and np.isfinite(float(rows[1].split(",")[7]))


@pytest.mark.parametrize("text,key", [
    ("n = 30\nm = 1\nlever = 2\n", "lever"),
    ("n = 30\nm = 1\nrho = abc\n", "rho"),
    ("n = 30\nm = 1\nn_rep = 1, 2\n", "n_rep"),
    ("n = 30\nm = 1\ncontamination = 0.7\n", "contamination"),
    ("n = 30\nm = 1\nestimators = LMS\n", "estimators"),
    ("n = 30\n", "m"),
])
def test_config_errors_name_the_key(text, key):
    with pytest.raises(CliError) as exc:
        expand_sweep(parse_sweep_config(text))
    assert f"'{key}'" in str(exc.value) and exc.value.status == EXIT_PARSE


def test_config_expansion():
    cfg = parse_sweep_config("n = 50, 200\nm = 1, 5\nlaw = normal\ncontamination = 0, 0.1, 0.2\nleverage = 5, 10\n")
    specs = expand_sweep(cfg)
    # Clean cells do not multiply over leverage values.
    assert len(specs) == 2 * 2 * (1 + 2 * 2)
