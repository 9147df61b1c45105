import json
import os

import pytest

from reachstl import cli, scenarios as sc


def run(argv):
    return cli.main(argv)


def small_scenario_args(tmp_path, name="roundabout", samples=150, extra=()):
    cfg = sc.builtin_config(name)
    cfg["audit"]["samples"] = samples
    cfg["output"]["svg"] = False
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return ["analyze", "--config", str(path), *extra]


class TestGenData:
    def test_writes_deterministic_csv(self, tmp_path, capsys):
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        assert run(["gen-data", "--points", "120", "--seed", "7",
                    "--out", str(p1)]) == 0
        assert run(["gen-data", "--points", "120", "--seed", "7",
                    "--out", str(p2)]) == 0
        assert p1.read_text() == p2.read_text()
        out = capsys.readouterr().out
        assert "T=120" in out and "L*" in out

    def test_point_count_validation(self, tmp_path):
        assert run(["gen-data", "--points", "1",
                    "--out", str(tmp_path / "x.csv")]) == cli.EXIT_VALIDATION


class TestAnalyze:
    def test_report_and_decreasing_volumes(self, tmp_path, capsys):
        out_dir = tmp_path / "rep"
        code = run(small_scenario_args(tmp_path, extra=["--out", str(out_dir)]))
        assert code == cli.EXIT_OK
        lines = (out_dir / "volumes.csv").read_text().splitlines()
        assert lines[0] == "step,representation,constrained_by,volume"
        rows = [ln.split(",") for ln in lines[1:]]
        unc = [float(r[3]) for r in rows if r[1] == "zonotope" and r[2] == "none"]
        phi = [float(r[3]) for r in rows if r[1] == "zonotope" and r[2] == "phi"]
        czp = [float(r[3]) for r in rows
               if r[1] == "constrained_zonotope" and r[2] == "phi"]
        assert sum(unc) > sum(phi) > sum(czp)

    def test_seed_determinism(self, tmp_path):
        a = tmp_path / "ra"
        b = tmp_path / "rb"
        assert run(small_scenario_args(tmp_path, extra=["--out", str(a)])) == 0
        assert run(small_scenario_args(tmp_path, extra=["--out", str(b)])) == 0
        for name in ("volumes.csv", "audit.csv"):
            assert (a / name).read_text() == (b / name).read_text()

    def test_contradiction_exits_3(self, tmp_path):
        cfg = sc.builtin_config("roundabout")
        cfg["audit"]["samples"] = 10
        cfg["output"]["svg"] = False
        cfg["predicates"]["X"] = {
            "kind": "linear", "H": [[1.0, 0.0]], "y": [50.0], "r": [0.1],
        }
        cfg["formula"] = "G[0,4](B) & G[4,10](O) & G[10,14](A) & G[5,6](X)"
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(cfg))
        code = run(["analyze", "--config", str(path),
                    "--out", str(tmp_path / "r")])
        assert code == cli.EXIT_EMPTY

    def test_no_feedback_flag_recorded(self, tmp_path):
        out_dir = tmp_path / "rep"
        code = run(small_scenario_args(
            tmp_path, extra=["--no-feedback", "--out", str(out_dir)]
        ))
        assert code == cli.EXIT_OK
        meta = json.loads((out_dir / "metadata.json").read_text())
        assert meta["feedback"] is False

    def test_missing_config_is_validation_error(self):
        assert run(["analyze"]) == cli.EXIT_VALIDATION

    def test_dump_config(self, tmp_path, capsys):
        assert run(["analyze", "--scenario", "parking", "--dump-config"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["formula"].startswith("G[0,25](P)")


class TestCheck:
    @pytest.fixture()
    def report_dir(self, tmp_path):
        out_dir = tmp_path / "rep"
        assert run(small_scenario_args(
            tmp_path, samples=200, extra=["--out", str(out_dir)]
        )) == 0
        return out_dir

    def test_fresh_report_passes(self, report_dir, capsys):
        assert run(["check", "--report", str(report_dir),
                    "--samples", "200"]) == cli.EXIT_OK
        assert "0 violations" in capsys.readouterr().out

    def test_tampered_sets_detected(self, report_dir):
        sets_path = report_dir / "sets.json"
        doc = json.loads(sets_path.read_text())
        for entry in doc["steps"]:
            for key in ("data_driven", "stl_zonotope", "stl_constrained"):
                if key in entry:
                    entry[key]["generators"] = [
                        [0.2 * v for v in row] for row in entry[key]["generators"]
                    ]
        sets_path.write_text(json.dumps(doc))
        assert run(["check", "--report", str(report_dir),
                    "--samples", "200"]) == cli.EXIT_AUDIT

    def test_zero_samples_rejected(self, report_dir):
        assert run(["check", "--report", str(report_dir),
                    "--samples", "0"]) == cli.EXIT_VALIDATION

    def test_missing_report(self, tmp_path):
        assert run(["check", "--report", str(tmp_path / "nope")]) == \
            cli.EXIT_VALIDATION


class TestVersion:
    def test_prints_version(self, capsys):
        assert run(["version"]) == 0
        from reachstl import __version__
        assert capsys.readouterr().out.strip() == __version__
