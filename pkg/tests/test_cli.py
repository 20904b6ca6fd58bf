import csv
import io
import json
import subprocess
import sys

import pytest

from fblab import cli
from fblab.estimate import NormEstimate

NORM_CFG = {
    "space": {"dim": 2, "norm": "l1"},
    "p": 1,
    "task": "norm",
    "payload": {"f": {"op": "delta", "vec": [1, -2]}},
    "budget": {"samples": 48, "restarts": 4, "tuple_max": 4},
    "seed": 0,
}
DIVERGE_CFG = {"space": {"dim": 100, "norm": "l2"}, "p": 2, "task": "diverge", "payload": {"N": 100}, "seed": 0}
PHI_CFG = {
    "space": {"dim": 2, "norm": "l2"},
    "p": 2,
    "task": "phinorm",
    "payload": {"map": {"map": "adjoint", "matrix": [[2, 0], [0, 1]]}},
    "budget": {"samples": 48, "restarts": 4, "tuple_max": 4},
    "seed": 0,
}


def _cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_norm_example(tmp_path):
    out = tmp_path / "res"
    assert cli.main(["norm", "--config", _cfg(tmp_path, NORM_CFG), "--out", str(out)]) == 0
    (row,) = _csv_rows((tmp_path / "res.csv").read_text())
    assert tuple(row) == cli.CSV_FIELDS
    assert float(row["lower"]) >= 2.97
    assert float(row["upper"]) == 3.0
    assert row["task"] == "norm" and row["seed"] == "0"
    res = json.loads((tmp_path / "res.json").read_text())
    assert res["task"] == "norm" and res["seed"] == 0 and res["p"] == 1
    assert res["space"] == NORM_CFG["space"]
    assert res["budget"]["samples"] == 48


def test_diverge_example(tmp_path, capsys):
    assert cli.main(["diverge", "--config", _cfg(tmp_path, DIVERGE_CFG), "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)["result"]["report"]
    cert = dict(rep["certificate"])
    assert cert["K"] == pytest.approx(1.0, abs=1e-12)
    # partial sums L(m) = sqrt(sum_{k<=m} k^{-1/2}) computed directly
    for m in (10, 100):
        assert cert[f"L({m})"] == pytest.approx(sum(k ** -0.5 for k in range(1, m + 1)) ** 0.5, rel=1e-12)
    assert cert["L(10)"] < cert["L(100)"]


def test_phinorm_and_revalidate(tmp_path, capsys):
    cfg = _cfg(tmp_path, PHI_CFG)
    out = tmp_path / "phi"
    assert cli.main(["phinorm", "--config", cfg, "--out", str(out), "--format", "json"]) == 0
    res = json.loads((tmp_path / "phi.json").read_text())
    est = res["result"]["estimate"]
    assert est["lower"] == pytest.approx(2.0, rel=1e-6) and est["upper"] == pytest.approx(2.0, rel=1e-12)
    capsys.readouterr()
    assert cli.main(["verify", "--check", str(tmp_path / "phi.json")]) == 0
    assert capsys.readouterr().out.startswith("PASS revalidate")


def test_revalidate_norm_needs_config(tmp_path, capsys):
    cfg = _cfg(tmp_path, NORM_CFG)
    out = tmp_path / "n"
    assert cli.main(["norm", "--config", cfg, "--out", str(out), "--format", "json"]) == 0
    res_path = str(tmp_path / "n.json")
    assert cli.main(["verify", "--check", res_path, "--config", cfg]) == 0
    assert cli.main(["verify", "--check", res_path]) == 1
    # a tampered lower bound is caught
    res = json.loads((tmp_path / "n.json").read_text())
    res["result"]["estimate"]["lower"] = 3.5
    (tmp_path / "n.json").write_text(json.dumps(res))
    capsys.readouterr()
    assert cli.main(["verify", "--check", res_path, "--config", cfg]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_revalidate_missing_file(tmp_path, capsys):
    assert cli.main(["verify", "--check", str(tmp_path / "nope.json")]) == 1
    assert "config error" in capsys.readouterr().err


def test_malformed_ast_names_node(tmp_path, capsys):
    bad = json.loads(json.dumps(NORM_CFG))
    bad["payload"]["f"] = {"op": "sup", "args": [{"op": "delta", "vec": "oops"}]}
    assert cli.main(["norm", "--config", _cfg(tmp_path, bad)]) == 1
    assert "payload.f.args[0].vec" in capsys.readouterr().err


@pytest.mark.parametrize("mutate, needle", [
    (lambda c: c.pop("space"), "space"),
    (lambda c: c.update(p=0.5), "p"),
    (lambda c: c.update(task="weakp"), "subcommand"),
    (lambda c: c.update(seed="x"), "seed"),
    (lambda c: c.update(budget={"restarts": -1}), "budget"),
])
def test_config_errors_exit_1(tmp_path, capsys, mutate, needle):
    cfg = json.loads(json.dumps(NORM_CFG))
    mutate(cfg)
    assert cli.main(["norm", "--config", _cfg(tmp_path, cfg)]) == 1
    assert needle in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    assert cli.main(["norm", "--config", str(tmp_path / "missing.json")]) == 1
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.main(["norm", "--config", str(p)]) == 1
    p.write_text("[1, 2]")
    assert cli.main(["norm", "--config", str(p)]) == 1


def test_consistency_error_exit_2(tmp_path, capsys, monkeypatch):
    def broken(cfg, budget, seed):
        return {}, NormEstimate(5.0, 1.0, "search_lower", None, True)

    monkeypatch.setitem(cli.RUNNERS, "norm", broken)
    assert cli.main(["norm", "--config", _cfg(tmp_path, NORM_CFG)]) == 2
    assert "consistency violation" in capsys.readouterr().err


def test_no_timing_byte_identical(tmp_path):
    cfg = _cfg(tmp_path, NORM_CFG)
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["norm", "--config", cfg, "--out", str(a), "--no-timing"]) == 0
    assert cli.main(["norm", "--config", cfg, "--out", str(b), "--no-timing"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    (row,) = _csv_rows((tmp_path / "a.csv").read_text())
    assert row["wall_ms"] == ""


def test_timing_present_by_default(tmp_path, capsys):
    assert cli.main(["norm", "--config", _cfg(tmp_path, NORM_CFG), "--format", "csv"]) == 0
    (row,) = _csv_rows(capsys.readouterr().out)
    assert float(row["wall_ms"]) >= 0


def test_seed_override(tmp_path, capsys):
    assert cli.main(["norm", "--config", _cfg(tmp_path, NORM_CFG), "--seed", "7", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["seed"] == 7


def test_output_from_config(tmp_path):
    cfg = dict(NORM_CFG, output=str(tmp_path / "sub" / "r.json"))
    assert cli.main(["norm", "--config", _cfg(tmp_path, cfg), "--format", "both"]) == 0
    assert (tmp_path / "sub" / "r.json").exists() and (tmp_path / "sub" / "r.csv").exists()


@pytest.mark.parametrize("task, cfg", [
    ("weakp", {"space": {"dim": 2, "norm": "l1"}, "p": 1,
               "payload": {"tuple": [[1, 0], [0, 1], [1, 1]]}}),
    ("classify", {"space": {"dim": 1, "norm": "l2"}, "payload": {"f": {"op": "ray", "dir": [1]}}}),
    ("gap", {"space": {"dim": 6, "norm": "l2"}, "p": 1, "payload": {"m": 2, "N": 6, "q": 2}}),
    ("witness", {"space": {"dim": 3, "norm": "l1"}, "p": 1,
                 "payload": {"construction": "sup_deltas", "vectors": [[1, 0, 0], [0, 1, 0]],
                             "scales": [1, 0.5]}}),
    ("extract-phi", {"space": {"dim": 2, "norm": "l2"}, "p": 1,
                     "payload": {"action": {"0": {"op": "delta", "vec": [0, 1]},
                                            "1": {"op": "delta", "vec": [1, 0]}}}}),
])
def test_other_subcommands(tmp_path, capsys, task, cfg):
    cfg = dict(cfg, budget={"samples": 24, "restarts": 2, "tuple_max": 3})
    code = cli.main([task, "--config", _cfg(tmp_path, cfg), "--format", "json", "--no-timing"])
    captured = capsys.readouterr()
    assert code == 0, captured.err
    assert json.loads(captured.out)["task"] == task


def test_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "fblab.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("norm", "diverge", "verify"):
        assert name in proc.stdout
