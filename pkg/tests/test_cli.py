import csv
import io
import json

import pytest

from sovlattice import cli, suites
from sovlattice.algebra_core import NonGenericError, PHASE_CONSTRAINT


def write_cfg(tmp_path, **model):
    base = dict(p=3, p_prime=2, n_sites=2, mode="generic", seed=42)
    base.update(model)
    body = "[model]\n" + "".join(f"{k} = {v}\n" for k, v in base.items())
    body += f"[output]\ndir = {tmp_path / 'out'}\n"
    path = tmp_path / "cfg.ini"
    path.write_text(body)
    return path


def test_algebra_suite_exit_zero(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert cli.main(["run", "--config", str(cfg), "--suite", "algebra"]) == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["schema"] == 1
    assert len(rep["checks"]) >= 6
    for c in rep["checks"]:
        assert {"name", "anchor", "residual", "tolerance", "pass"} <= set(c)
    assert "PASS algebra/yang_baxter" in capsys.readouterr().out


@pytest.mark.parametrize("p,pp", [(4, 2), (3, 3)])
def test_bad_phase_exit_two(tmp_path, capsys, p, pp):
    cfg = write_cfg(tmp_path, p=p, p_prime=pp)
    assert cli.main(["run", "--config", str(cfg), "--suite", "algebra"]) == 2
    assert PHASE_CONSTRAINT in capsys.readouterr().err


@pytest.mark.parametrize("field,value", [("mode", "bogus"), ("n_sites", "x"), ("n_sites", 1)])
def test_other_config_errors(tmp_path, field, value):
    cfg = write_cfg(tmp_path, **{field: value})
    assert cli.main(["run", "--config", str(cfg), "--suite", "algebra"]) == 2


def test_missing_and_malformed_config(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "nope.ini"), "--suite", "sov"]) == 2
    bad = tmp_path / "bad.ini"
    bad.write_text("p = 3\n")
    assert cli.main(["run", "--config", str(bad), "--suite", "sov"]) == 2
    assert cli.main(["run", "--config", str(bad), "--suite", "nosuch"]) == 2


def test_retry_exhaustion_exit_three(tmp_path, monkeypatch):
    def boom(settings, suite):
        raise NonGenericError("non-simple B spectrum")
    monkeypatch.setattr(cli, "run", boom)
    assert cli.main(["run", "--config", str(write_cfg(tmp_path)), "--suite", "sov"]) == 3


def test_failing_check_exit_one(tmp_path):
    cfg = write_cfg(tmp_path)
    assert cli.main(["run", "--config", str(cfg), "--suite", "algebra", "--tol", "1e-30"]) == 1
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["passed"] is False
    assert any(c["pass"] is False for c in rep["checks"])


def test_formfactor_csv_and_byte_stability(tmp_path, capsys):
    cfg = write_cfg(tmp_path, mode="chP-curve", seed=3)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", "--config", str(cfg), "--suite", "formfactor", "--out", str(out1)]) == 0
    assert cli.main(["run", "--config", str(cfg), "--suite", "formfactor", "--out", str(out2)]) == 0
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "formfactors.csv").read_bytes() == (out2 / "formfactors.csv").read_bytes()
    rows = list(csv.DictReader(io.StringIO((out1 / "formfactors.csv").read_text())))
    assert len(rows) == 81
    assert list(rows[0]) == cli.CSV_COLUMNS
    capsys.readouterr()
    assert cli.main(["report", "--format", "csv", "--out", str(out1)]) == 0
    assert capsys.readouterr().out == (out1 / "formfactors.csv").read_text()
    assert cli.main(["report", "--format", "json", "--out", str(out1)]) == 0
    assert json.loads(capsys.readouterr().out)["schema"] == 1


def test_empty_report(tmp_path, capsys):
    assert cli.main(["report", "--format", "json", "--out", str(tmp_path / "none")]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep == {"schema": 1, "checks": []}
    assert cli.main(["report", "--format", "csv", "--out", str(tmp_path / "none")]) == 0
    assert capsys.readouterr().out.strip() == ",".join(cli.CSV_COLUMNS)


def test_tolerance_override_from_config(tmp_path):
    cfg = write_cfg(tmp_path)
    cfg.write_text(cfg.read_text() + "[tolerances]\nyang_baxter = 1e-40\n")
    assert cli.main(["run", "--config", str(cfg), "--suite", "algebra"]) == 1
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    yb = next(c for c in rep["checks"] if c["name"] == "yang_baxter")
    assert yb["tolerance"] == 1e-40 and not yb["pass"]


def test_sub_seeds_independent_of_order():
    a = suites.suite_rng(5, "spectrum").random(3)
    b = suites.suite_rng(5, "spectrum").random(3)
    c = suites.suite_rng(5, "scalar").random(3)
    assert (a == b).all() and not (a == c).all()


def test_usage_error_returns_two():
    assert cli.main(["run"]) == 2
