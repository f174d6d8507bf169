import csv
import hashlib
import shutil
import subprocess
import sys

import numpy as np
import pytest

from lssvm_pso import indicators as ind
from lssvm_pso.cli import main
from lssvm_pso.evaluate import parse_report_csv
from lssvm_pso.lssvm import LssvmModel
from lssvm_pso.pipeline import load_csv
from lssvm_pso.synthetic import DATA_DIR, bundled_path


@pytest.fixture
def small_ini(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text("[pso]\nswarm_size = 5\nmax_iters = 3\n")
    return path


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestIndicators:
    def test_rows_and_values(self, tmp_path):
        src = bundled_path("SYN03")
        assert main(["indicators", "--data", str(src), "--out", str(tmp_path)]) == 0
        with open(tmp_path / "SYN03_indicators.csv") as fh:
            rows = list(csv.DictReader(fh))
        series = load_csv(src)
        assert len(rows) == len(series)
        table = ind.compute_all(series.bars)
        for name, column in table.columns.items():
            for t, row in enumerate(rows):
                if t < column.warmup:
                    assert row[name] == ""
                else:
                    assert abs(float(row[name]) - column.values[t]) <= 1e-12 * max(1.0, abs(column.values[t]))
        assert rows[0]["date"] == series.bars[0].date.isoformat()

    def test_stdout(self, capsys):
        assert main(["indicators", "--symbol", "SYN02"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("date,close,rsi") and len(lines) == 1 + 1000

    def test_missing_file(self, tmp_path, capsys):
        code = main(["indicators", "--data", str(tmp_path / "absent.csv")])
        err = capsys.readouterr().err
        assert code != 0 and "file not found" in err and len(err.strip().splitlines()) == 1

    def test_parse_failure(self, tmp_path, capsys):
        bad = tmp_path / "BAD.csv"
        bad.write_text("Date,Open,High,Low,Close,Volume\n2020-01-01,1,2,0.5,oops,10\n")
        assert main(["indicators", "--data", str(bad)]) == 1
        assert "error [parse]" in capsys.readouterr().err


class TestTrain:
    @pytest.mark.slow
    def test_default_config(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["train"]) == 0
        out = tmp_path / "results"
        assert sorted(p.name for p in out.iterdir()) == [
            "SYN01_model.json", "SYN01_pso_trace.csv", "SYN01_report.csv"]

    def test_artifacts_and_rerun(self, tmp_path, small_ini, capsys):
        args = ["train", "--config", str(small_ini), "--symbol", "SYN05", "--seed", "17"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        a, b = tmp_path / "a", tmp_path / "b"
        assert _digest(a / "SYN05_report.csv") == _digest(b / "SYN05_report.csv")
        model = LssvmModel.load(a / "SYN05_model.json")
        assert model.meta["symbol"] == "SYN05" and model.kernel.family == "mlp"
        trace = (a / "SYN05_pso_trace.csv").read_text().splitlines()
        assert trace[0] == "iteration,best_fitness,C,scale,bias" and len(trace) == 5
        assert "pso_lssvm" in capsys.readouterr().out

    def test_val_fraction_error_names_field(self, tmp_path, capsys):
        code = main(["train", "--val-fraction", "1.5", "--out", str(tmp_path)])
        err = capsys.readouterr().err
        assert code == 2 and "val_fraction" in err

    def test_kernel_flag(self, tmp_path, small_ini):
        assert main(["train", "--config", str(small_ini), "--kernel", "rbf", "--out", str(tmp_path)]) == 0
        rows = parse_report_csv((tmp_path / "SYN01_report.csv").read_text())
        assert rows[0]["best_kernel_params"].startswith("sigma=")


class TestBenchmark:
    def test_partial_failure(self, tmp_path, small_ini, capsys):
        data = tmp_path / "data"
        data.mkdir()
        for sym in ("SYN02", "SYN04"):
            shutil.copy(bundled_path(sym), data)
        (data / "CORRUPT.csv").write_text("Date,Open,High,Low,Close,Volume\n2020-01-01,1,2,3\n")
        out = tmp_path / "out"
        assert main(["benchmark", "--config", str(small_ini), "--data", str(data), "--out", str(out)]) == 0
        rows = parse_report_csv((out / "report.csv").read_text())
        scored = {r["symbol"] for r in rows if r["method"] != "failed"}
        failed = [r for r in rows if r["method"] == "failed"]
        assert scored == {"SYN02", "SYN04"} and [r["symbol"] for r in failed] == ["CORRUPT"]
        assert (out / "plot_data.csv").exists() and (out / "report.txt").exists()
        assert "CORRUPT" in capsys.readouterr().err

    def test_all_failed_is_nonzero(self, tmp_path, small_ini):
        bad = tmp_path / "X.csv"
        bad.write_text("Date,Open,High,Low,Close,Volume\n")
        assert main(["benchmark", "--config", str(small_ini), "--data", str(bad), "--out", str(tmp_path)]) == 1

    def test_all_bundled(self, tmp_path, small_ini):
        assert main(["benchmark", "--config", str(small_ini), "--out", str(tmp_path)]) == 0
        rows = parse_report_csv((tmp_path / "report.csv").read_text())
        assert len({r["symbol"] for r in rows}) == 13 and len(rows) == 39
        assert all(np.isfinite(float(r["mse"])) for r in rows)
        assert len((tmp_path / "report.txt").read_text().splitlines()) == 15


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lssvm_pso.cli", "indicators", "--data", str(DATA_DIR / "SYN01.csv"),
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "SYN01_indicators.csv").exists()


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        main(["train", "--kernel", "quadratic"])
    assert err.value.code == 2
