import json
import subprocess
import sys
from pathlib import Path

import pytest

from holalg.cli import main

ROOT = Path(__file__).resolve().parents[1]
WORKSPACES = ROOT / "workspaces"


def write(tmp_path, data, name="ws.json") -> str:
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data, encoding="utf-8")
    return str(p)


def so3_workspace(expect="pass", **extra):
    ws = {
        "charts": {"R3": ["x1", "x2", "x3"]},
        "objects": {"pi": {"kind": "multivector", "chart": "R3", "degree": 2,
                           "components": {"1,2": "x3", "2,3": "x1", "3,1": "x2"}}},
        "checks": [{"id": "so3", "op": "is_poisson", "args": {"pi": "pi"}, "expect": expect}],
    }
    ws.update(extra)
    return ws


def run_json(argv, capsys):
    code = main(argv + ["--report", "json"])
    return code, json.loads(capsys.readouterr().out)


class TestExitCodes:
    def test_pass(self, tmp_path, capsys):
        assert main(["run", write(tmp_path, so3_workspace())]) == 0
        assert "so3" in capsys.readouterr().out

    def test_unexpected_outcome(self, tmp_path, capsys):
        code, report = run_json(["run", write(tmp_path, so3_workspace("fail"))], capsys)
        assert code == 1
        assert report["results"][0]["status"] == "fail"
        assert report["results"][0]["observed"] == "pass"

    def test_expected_failure_is_a_pass(self, tmp_path, capsys):
        ws = so3_workspace()
        ws["objects"]["pi"]["components"] = {"1,2": "x3", "1,3": "x1"}
        ws["checks"][0]["expect"] = "fail"
        code, report = run_json(["run", write(tmp_path, ws)], capsys)
        assert code == 0 and report["results"][0]["observed"] == "fail"
        # the observed failure still carries a witness
        assert report["results"][0]["details"]

    def test_bracket_table_workspace(self, capsys):
        assert main(["run", str(WORKSPACES / "bracket_table.json")]) == 0

    def test_undefined_reference(self, capsys):
        assert main(["run", str(WORKSPACES / "undefined_reference.json")]) == 2
        assert "checks[0].args.tensor" in capsys.readouterr().err

    def test_unknown_op(self, tmp_path, capsys):
        ws = so3_workspace()
        ws["checks"][0]["op"] = "is_poissonn"
        assert main(["run", write(tmp_path, ws)]) == 2
        assert "checks[0].op" in capsys.readouterr().err

    def test_missing_expect(self, tmp_path, capsys):
        ws = so3_workspace()
        del ws["checks"][0]["expect"]
        assert main(["run", write(tmp_path, ws)]) == 2
        assert "checks[0]" in capsys.readouterr().err

    def test_bad_expression(self, tmp_path, capsys):
        ws = so3_workspace()
        ws["objects"]["pi"]["components"]["1,2"] = "x3 +"
        assert main(["run", write(tmp_path, ws)]) == 2
        assert "objects.pi" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path, capsys):
        assert main(["run", write(tmp_path, '{"charts": {,}}')]) == 2
        assert "line 1" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "absent.json")]) == 2

    def test_unknown_preset(self, capsys):
        assert main(["run", "paper:nothing"]) == 2

    def test_duplicate_ids(self, tmp_path, capsys):
        ws = so3_workspace()
        ws["checks"].append(dict(ws["checks"][0]))
        assert main(["run", write(tmp_path, ws)]) == 2
        assert "checks[1].id" in capsys.readouterr().err


class TestReport:
    def test_schema(self, tmp_path, capsys):
        code, report = run_json(["run", write(tmp_path, so3_workspace()), "--seed", "7"], capsys)
        assert code == 0
        assert report["version"] == "1" and report["seed"] == 7
        r = report["results"][0]
        assert {"id", "op", "status", "expected", "observed", "details"} <= set(r)
        assert "wall_time" not in r

    def test_timings_opt_in(self, tmp_path, capsys):
        _, report = run_json(["run", write(tmp_path, so3_workspace()), "--timings"], capsys)
        assert report["results"][0]["wall_time"] >= 0

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["run", write(tmp_path, so3_workspace()), "--report", "json", "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        assert json.loads(out.read_text())["results"][0]["id"] == "so3"

    def test_order_follows_declaration(self, capsys):
        _, report = run_json(["run", str(WORKSPACES / "acceptance.json"), "--jobs", "4"], capsys)
        declared = [c["id"] for c in json.loads((WORKSPACES / "acceptance.json").read_text())["checks"]]
        assert [r["id"] for r in report["results"]] == declared

    def test_byte_identical_across_jobs(self, tmp_path):
        outs = []
        for jobs in ("1", "4"):
            out = tmp_path / f"r{jobs}.json"
            main(["run", str(WORKSPACES / "acceptance.json"), "--report", "json", "--out", str(out),
                  "--jobs", jobs, "--seed", "3"])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_quad_override(self, capsys):
        _, report = run_json(["run", "paper:NxN", "--quad", "64x128"], capsys)
        res = {r["id"]: r for r in report["results"]}
        assert res["eta1-integral-oracle"]["status"] == "pass"
        assert "64x128" in json.dumps(report)

    def test_bad_quad(self, capsys):
        with pytest.raises(SystemExit):
            main(["run", "paper:NxN", "--quad", "64"])


class TestPreset:
    def test_runs_clean(self, capsys):
        code, report = run_json(["run", "paper:NxN"], capsys)
        assert code == 0
        res = {r["id"]: r for r in report["results"]}
        assert res["period-group-NxN"]["observed"]["verdict"] == "NotDiscrete"

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "holalg.cli", "run", "paper:NxN"],
                              capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0
        assert "NotDiscrete" in proc.stdout
