import csv
import json
import math

import numpy as np
import pytest

from exptail import DistributionModel, YoungFunction, io
from exptail.cli import emit_plot_data, main
from exptail.verify import EvidenceRow, EvidenceTable


@pytest.fixture
def configs(tmp_path):
    paths = {}
    for name, obj in [("quad", YoungFunction.quadratic([[1.0]])),
                      ("gauss", DistributionModel.gaussian([[1.0]])),
                      ("exp", DistributionModel.centered_exponential(1))]:
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(obj.to_config()))
        paths[name] = str(p)
    return paths


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_conjugate_prints_value(configs, capsys):
    code, out = run(["conjugate", "--phi", configs["quad"], "--y", "3.0"], capsys)
    assert code == 0 and out.strip() == "4.5"


def test_conjugate_json(configs, capsys):
    code, out = run(["--json", "conjugate", "--phi", configs["quad"], "--y", "3.0"], capsys)
    assert json.loads(out)["result"]["value"] == pytest.approx(4.5, rel=1e-12)


def test_verify_exit_codes(configs, capsys, tmp_path):
    code, _ = run(["verify", "--model", configs["gauss"], "--phi", configs["quad"], "--n", "50000",
                   "--seeds", "1,2", "--out", str(tmp_path / "l.json"),
                   "--evidence-csv", str(tmp_path / "ev")], capsys)
    assert code == 0
    assert (tmp_path / "ev" / "seed2_D.csv").exists()
    code, _ = run(["verify", "--model", configs["exp"], "--phi", configs["quad"], "--n", "50000",
                   "--seeds", "1"], capsys)
    assert code == 1
    code, _ = run(["report", "--in", str(tmp_path / "l.json")], capsys)
    assert code == 0


def test_config_errors(configs, capsys, tmp_path):
    assert main(["conjugate", "--phi", str(tmp_path / "nope.json"), "--y", "1"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "young_function", "family": "quadratic-matrix"}))
    assert main(["conjugate", "--phi", str(bad), "--y", "1"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["verify", "--model", configs["gauss"], "--phi", configs["quad"], "--n", "0"]) == 2


def test_certify(configs, capsys):
    code, out = run(["--json", "certify", "--phi", configs["quad"], "--gamma", "0.5"], capsys)
    res = json.loads(out)["result"]
    assert code == 0
    assert res["I_gamma"] == pytest.approx(1.4472025, rel=1e-6)
    assert res["L"] == "inf"


def test_tail_record(configs, capsys):
    code, out = run(["tail", "--model", configs["gauss"], "--phi", configs["quad"], "--x", "1.0",
                     "--n", "10000", "--seed", "7"], capsys)
    rec = json.loads(out)["result"]
    assert code == 0 and rec["dominated"] and set(rec) >= {"x", "empirical", "half_width", "chernov"}


def test_norm_report_deterministic(configs, capsys, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"n{k}.json"
        assert main(["norm", "--model", configs["gauss"], "--phi", configs["quad"], "--n", "20000",
                     "--seed", "3", "--out", str(path)]) == 0
        doc = json.loads(path.read_text())
        doc.pop("metadata")
        outs.append(json.dumps(doc, sort_keys=True))
    capsys.readouterr()
    assert outs[0] == outs[1]


def test_round_trip_with_nonfinite():
    table = EvidenceTable("D", [EvidenceRow([1.0], math.inf, 2.0, -math.inf), EvidenceRow([0.5], 0.1, 0.2, 0.1)])
    back = io.loads(io.dumps(table))
    assert isinstance(back, EvidenceTable) and io.equal(back, table)
    from exptail.tails import TailEstimate
    est = TailEstimate(np.array([0.5, 0.5]), 0.25, 0.001, (1, -1), 100)
    back = io.loads(io.dumps(est))
    assert np.array_equal(back.x, est.x)
    assert list(back.argmax_orbit) == list(est.argmax_orbit)


def test_plot_data(tmp_path):
    table = EvidenceTable("tail", [EvidenceRow([x], 0.1, 0.5, 0.4, 0.0, 0.01) for x in (0.5, 1.0, 1.5)])
    emit_plot_data(table, tmp_path / "t.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["query", "empirical", "half_width", "bound", "margin"]
    assert len(rows) == 4
    emit_plot_data(EvidenceTable("tail"), tmp_path / "e.csv")
    assert len(list(csv.reader(open(tmp_path / "e.csv")))) == 1


def test_run_config_file(configs, capsys, tmp_path):
    rc = tmp_path / "run.json"
    rc.write_text(json.dumps({"schema_version": 1, "kind": "run", "n": 40000, "seeds": [3],
                              "x_grid": {"product": [[0.5, 1, 2]]}}))
    code, out = run(["verify", "--model", configs["gauss"], "--phi", configs["quad"],
                     "--run-config", str(rc)], capsys)
    assert code == 0 and "seed 3" in out
    rc.write_text(json.dumps({"schema_version": 1, "kind": "distribution", "n": 10}))
    code, _ = run(["verify", "--model", configs["gauss"], "--phi", configs["quad"],
                   "--run-config", str(rc)], capsys)
    assert code == 2
