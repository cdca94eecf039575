import json

import numpy as np
import pytest

from svymix.cli import main

QUICK_CONFIG = {"burnin": 150, "iters": 300, "thin": 3}


def write_quick_config(tmp_path):
    path = tmp_path / "quick.json"
    path.write_text(json.dumps(QUICK_CONFIG))
    return str(path)


class TestSimulate:
    def test_case1_outputs(self, tmp_path, capsys):
        out = tmp_path / "d"
        code = main(["simulate", "--case", "case1", "--seed", "7",
                     "--out", str(out), "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["rows"] == 1500
        lines = (out / "sample.csv").read_text().splitlines()
        assert lines[0] == "y,stratum,weight"
        assert len(lines) == 1501

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--case", "case2", "--seed", "3", "--out", str(a)]) == 0
        assert main(["simulate", "--case", "case2", "--seed", "3", "--out", str(b)]) == 0
        assert (a / "sample.csv").read_bytes() == (b / "sample.csv").read_bytes()
        assert (a / "sample.meta.json").read_bytes() == (b / "sample.meta.json").read_bytes()

    def test_unknown_case_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["simulate", "--case", "case9", "--out", str(tmp_path)])
        assert err.value.code == 2

    def test_custom_spec(self, tmp_path):
        spec = {
            "total_size": 1000,
            "strata": [
                {"id": 1, "population_size": 600, "sample_size": 60,
                 "density": {"type": "normal_mixture", "components": [[1.0, 0.0, 1.0]]}},
                {"id": 2, "population_size": 400, "sample_size": 40,
                 "density": {"type": "normal_mixture", "components": [[1.0, 3.0, 0.5]]}},
            ],
        }
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec))
        out = tmp_path / "d"
        assert main(["simulate", "--spec", str(spec_path), "--out", str(out)]) == 0
        assert (out / "sample.csv").exists()


class TestFit:
    def test_proposed_on_case1_sample(self, tmp_path, capsys):
        out = tmp_path / "d"
        main(["simulate", "--case", "case1", "--seed", "7", "--out", str(out)])
        capsys.readouterr()
        code = main([
            "fit", "--sample", str(out / "sample.csv"),
            "--method", "proposed", "--grid=-6:6:100",
            "--config", write_quick_config(tmp_path),
            "--seed", "7", "--out", str(out), "--json",
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert "coverage" in payload
        lines = (out / "proposed.csv").read_text().splitlines()
        assert lines[0] == "y,mean,lower,upper,truth"
        assert len(lines) == 101

    def test_no_adjust_switches_method(self, tmp_path, capsys):
        out = tmp_path / "d"
        main(["simulate", "--case", "case1", "--seed", "7", "--out", str(out)])
        capsys.readouterr()
        code = main([
            "fit", "--sample", str(out / "sample.csv"), "--no-adjust",
            "--grid=-6:6:50", "--config", write_quick_config(tmp_path),
            "--seed", "7", "--out", str(out), "--json",
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["method"] == "unadjusted"
        assert (out / "unadjusted.csv").exists()

    def test_missing_sample_exits_2(self, tmp_path):
        code = main(["fit", "--sample", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path)])
        assert code == 2

    def test_trace_written(self, tmp_path):
        out = tmp_path / "d"
        main(["simulate", "--case", "case1", "--seed", "7", "--out", str(out)])
        code = main([
            "fit", "--sample", str(out / "sample.csv"), "--trace",
            "--grid=-6:6:20", "--config", write_quick_config(tmp_path),
            "--seed", "7", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "proposed.trace.jsonl").read_text().splitlines()
        assert len(lines) == QUICK_CONFIG["iters"] // QUICK_CONFIG["thin"]
        record = json.loads(lines[0])
        assert set(record) == {"lambda", "mu", "tau2", "alpha", "lambda_tilde"}
        assert len(record["lambda_tilde"]) == 20


class TestCompare:
    def test_report_directory(self, tmp_path, capsys):
        out = tmp_path / "rep"
        code = main([
            "compare", "--case", "case1", "--methods", "proposed,ht",
            "--config", write_quick_config(tmp_path),
            "--seed", "5", "--out", str(out), "--json",
        ])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert set(payload["methods"]) == {"proposed", "ht"}
        report = json.loads((out / "report.json").read_text())
        for entry in report["methods"].values():
            assert "coverage" in entry
        assert (out / "proposed.csv").exists()
        assert (out / "ht.csv").exists()

    def test_bad_method_exits_2(self, tmp_path):
        code = main(["compare", "--case", "case1", "--methods", "nope",
                     "--out", str(tmp_path)])
        assert code == 2

    def test_idempotent(self, tmp_path):
        cfg = write_quick_config(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["compare", "--case", "case1", "--methods", "ht",
                         "--config", cfg, "--seed", "2", "--out", str(out)]) == 0
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
        assert (a / "ht.csv").read_bytes() == (b / "ht.csv").read_bytes()
