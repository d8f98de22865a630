import csv
import io
import json
import subprocess
import sys

import pytest

from torusflow.cli import main
from torusflow.report import dumps

from oracles import F1_FAN


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), stream=buf)
    return code, buf.getvalue()


def test_describe(tmp_path, capsys):
    code, out = run("describe", "--model", "cp2")
    assert code == 0 and "fixed points: 3" in out
    assert "[0:1:0]" in out and "[-1, 1]" in out
    fan = tmp_path / "f1.json"
    fan.write_text(json.dumps(F1_FAN))
    code, out = run("describe", "--model", str(fan), "--out", str(tmp_path / "d"))
    assert code == 0 and "fixed points: 4" in out
    assert len(json.loads((tmp_path / "d" / "describe.json").read_text())["fixed_points"]) == 4


def test_describe_rejects_non_smooth_fan(tmp_path, capsys):
    fan = tmp_path / "bad.json"
    fan.write_text(json.dumps({"rank": 2, "rays": [[2, 1], [0, 1], [-1, -1]],
                               "maximal_cones": [[0, 1], [1, 2], [0, 2]]}))
    code, _ = run("describe", "--model", str(fan))
    assert code == 2
    assert "not_smooth" in capsys.readouterr().err


def test_decompose_writes_artifacts(tmp_path):
    out = tmp_path / "r"
    code, text = run("decompose", "--model", "cp2", "--a0", "1/3,1/7", "--samples", "300",
                     "--out", str(out))
    assert code == 0 and "poincare: [1, 0, 1, 0, 1]" in text
    report = json.loads((out / "report.json").read_text())
    assert report["pass"] and report["poincare"] == [1, 0, 1, 0, 1]
    assert report["a0"] == ["1/3", "1/7"]
    assert "limit_detection" in report["tolerances"]
    assert report["orientation"].startswith("a_i > 0")
    dot = (out / "poset.dot").read_text()
    assert '"[0:1:0]" -> "[0:0:1]";' in dot
    rows = list(csv.DictReader((out / "basins.csv").open()))
    assert len(rows) == 300 and {r["forward_limit"] for r in rows} <= {"[1:0:0]", "[0:1:0]", "[0:0:1]"}


def test_decompose_nongeneric_exit_3(capsys):
    code, _ = run("decompose", "--model", "cp2", "--a0", "1/3,1/3")
    assert code == 3
    assert "[-1, 1]" in capsys.readouterr().err


def test_decompose_is_byte_identical_across_processes(tmp_path):
    paths = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        subprocess.run([sys.executable, "-m", "torusflow", "decompose", "--model", "fan:hirzebruch1",
                        "--seed", "7", "--samples", "200", "--out", str(out)],
                       check=True, capture_output=True)
        paths.append(out)
    for name in ("report.json", "poset.dot", "basins.csv"):
        assert (paths[0] / name).read_bytes() == (paths[1] / name).read_bytes()


def test_verify_suites(tmp_path, capsys):
    code, out = run("verify", "all", "--model", "cp1", "--samples", "300", "--out", str(tmp_path))
    assert code == 0 and "FAIL" not in out
    data = json.loads((tmp_path / "verdicts.json").read_text())
    assert data["pass"] and "decay" in data["verdicts"]
    code, out = run("verify", "covering", "--model", "s4")
    assert code == 0 and "PASS covering" in out
    code, out = run("verify", "all", "--model", "s2", "--samples", "200")
    assert code == 0 and "flow_equivariance" not in out
    code, out = run("verify", "hyperbolic", "--model", "cp2", "--a0", "1/3,1/3")
    assert code == 1 and "FAIL hyperbolic" in out and "witness" in out
    assert run("verify", "bogus")[0] == 2
    assert run("verify", "decay", "--model", "s2")[0] == 2
    assert run("verify", "convergence", "--model", "s4")[0] == 2


def _flow_rows(*argv):
    code, text = run("flow", *argv)
    assert code == 0
    return list(csv.DictReader(io.StringIO(text)))


def test_flow_cp1_decays_monotonically():
    rows = _flow_rows("--model", "cp1", "--a0", "1", "--start", "[1:1]", "--s-range", "0,3")
    norms = [float(r["abs_w"]) for r in rows]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert float(rows[0]["s"]) == 0 and float(rows[-1]["s"]) == 3


def test_flow_fixed_point_rows_are_constant():
    rows = _flow_rows("--model", "cp2", "--start", "[0:1:0]", "--s-range", "0,2", "--rows", "5")
    assert {r["x1"] for r in rows} == {"0"} and {r["deviation"] for r in rows} == {"0"}


def test_flow_deviation_column():
    rows = _flow_rows("--model", "cp2", "--a0", "1/3,1/7", "--start", "[1:0.5:-0.7j]",
                      "--s-range=-2,10", "--h", "1e-3")
    assert max(float(r["deviation"]) for r in rows) < 1e-6
    rows = _flow_rows("--model", "fan:hirzebruch1", "--chart", "1", "--start", "0.5,0.3+0.2j",
                      "--s-range", "0,10")
    assert max(float(r["deviation"]) for r in rows) < 1e-6


def test_flow_input_errors(capsys):
    assert run("flow", "--model", "cp2", "--start", "[0:0:0]")[0] == 2
    assert run("flow", "--model", "cp2", "--start", "[1:2]")[0] == 2
    assert run("flow", "--model", "s2", "--start", "north")[0] == 2
    assert run("flow", "--model", "cp2", "--start", "[1:1:1]", "--s-range", "3,1")[0] == 2
    assert run("flow", "--model", "fan:cp2", "--start", "1,2")[0] == 2
    assert run("describe", "--model", "cp2", "--a0", "1/0")[0] == 0  # a0 unused by describe
    assert run("decompose", "--model", "cp2", "--a0", "1/3")[0] == 2
    assert run("nonsense")[0] == 2


def test_config_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "cp1", "a0": "1", "seed": 3,
                               "tolerances": {"limit_detection": 1e-10}}))
    out = tmp_path / "o"
    code, _ = run("decompose", "--config", str(cfg), "--samples", "50", "--out", str(out))
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["seed"] == 3 and report["tolerances"]["limit_detection"] == 1e-10
    cfg.write_text(json.dumps({"tolerances": {"no_such_key": 1}}))
    assert run("describe", "--config", str(cfg))[0] == 2


def test_dumps_formatting():
    text = dumps({"a": 0.1, "b": [1, 2.0, float("inf")], "c": {"d": True, "e": None}, "f": []})
    assert '"a": 0.10000000000000001' in text
    assert '[1, 2.0, "inf"]' in text
    data = json.loads(text)
    assert data["a"] == 0.1 and data["c"] == {"d": True, "e": None}
    with pytest.raises(TypeError):
        dumps({"x": object()})
