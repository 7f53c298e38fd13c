import csv
import io
import subprocess
import sys

import pytest

import robgap.phase as phase_mod
from robgap import gaussian
from robgap.cli import EXIT_IO, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from robgap.experiments import CSV_HEADER, ExperimentConfig, render_csv, run
from robgap.gaussian import GaussianSpec


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def _run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


class TestGaussianGap:
    def test_stdout_csv(self, capsys):
        code, out = _run(["gaussian-gap", "--eps", "0.5", "--n-min", "1", "--n-max", "5"], capsys)
        assert code == EXIT_OK
        rows = _rows(out)
        assert tuple(rows[0]) == CSV_HEADER
        assert len(rows) == 6
        family, label, n, value, stderr = rows[4]
        assert (family, label, n, stderr) == ("gaussian-gap", "eps=0.5", "4", "")
        assert float(value) == gaussian.exact_gap(GaussianSpec(1.0, (1.0,), (2.0,), 0.5), 4)

    def test_values_round_trip(self, tmp_path):
        out = tmp_path / "g.csv"
        assert main(["gaussian-gap", "--mu", "1,0.5", "--sigma", "2,1", "--eps", "0.3",
                     "--n-max", "30", "--out", str(out)]) == EXIT_OK
        spec = GaussianSpec(1.0, (1.0, 0.5), (2.0, 1.0), 0.3)
        for fam, label, n, v, se in _rows(out.read_text())[1:]:
            assert float(v) == gaussian.exact_gap(spec, int(n))

    def test_line_endings(self, tmp_path):
        out = tmp_path / "g.csv"
        main(["gaussian-gap", "--n-max", "3", "--out", str(out)])
        data = out.read_bytes()
        assert b"\r" not in data and data.endswith(b"\n")

    def test_mc_series(self, capsys):
        code, out = _run(["gaussian-gap", "--eps", "0.5", "--n-min", "4", "--n-max", "4",
                          "--mc", "--trials", "2000", "--seed", "3"], capsys)
        rows = _rows(out)
        assert rows[2][1] == "eps=0.5;mc" and float(rows[2][4]) > 0

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["gaussian-gap", "--eps", "0.5", "--n-max", "6", "--mc", "--trials", "3000", "--seed", "11"]
        main(args + ["--out", str(a)])
        main(args + ["--out", str(b), "--workers", "4"])
        assert a.read_bytes() == b.read_bytes()


class TestOtherFamilies:
    def test_bernoulli_series(self, capsys):
        code, out = _run(["bernoulli-gap", "--tau", "0.5", "--eps", "0.5", "--n-max", "3"], capsys)
        assert code == EXIT_OK
        labels = {r[1] for r in _rows(out)[1:]}
        assert labels == {"tau=0.5;eps=0.5;gap", "tau=0.5;eps=0.5;center", "tau=0.5;eps=0.5;halfwidth"}
        gap3 = [r for r in _rows(out) if r[1].endswith(";gap") and r[2] == "3"][0]
        assert float(gap3[3]) == pytest.approx(0.28125)

    def test_regression_divergent_token(self, capsys):
        code, out = _run(["regression-gap", "--dist", "normal", "--eps", "0.5", "--n-max", "2",
                          "--trials", "500"], capsys)
        assert code == EXIT_OK
        rows = _rows(out)
        assert rows[1][3] == "divergent" and rows[1][4] == ""
        assert float(rows[2][3]) == float(rows[2][3])

    def test_regression_poisson(self, capsys):
        code, out = _run(["regression-gap", "--dist", "poisson", "--lambda", "5", "--eps", "1.5",
                          "--n-max", "1", "--trials", "2000"], capsys)
        assert _rows(out)[1][1] == "poisson(5)+1;eps=1.5"

    def test_test_loss_models(self, capsys):
        for model in ("gaussian", "bernoulli"):
            code, out = _run(["test-loss", "--model", model, "--eps", "0.2", "--n-max", "3"], capsys)
            assert code == EXIT_OK and len(_rows(out)) > 3

    def test_phase_text_and_csv(self, tmp_path, capsys):
        out = tmp_path / "p.csv"
        code, text = _run(["phase", "--eps", "0.5", "--out", str(out)], capsys)
        assert code == EXIT_OK
        assert "regime: Weak" in text and "increasing for n < 6" in text
        rows = _rows(out.read_text())
        until = [r for r in rows if r[1].endswith("increasing_until")][0]
        assert until[2] == "" and float(until[3]) == 6.0

    def test_phase_strong(self, capsys):
        code, text = _run(["phase", "--model", "bernoulli", "--tau", "0.1", "--eps", "0.2"], capsys)
        assert code == EXIT_OK and "regime: Strong" in text


class TestExitCodes:
    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["nonsense"])
        assert exc.value.code == EXIT_USAGE

    def test_bad_number(self):
        with pytest.raises(SystemExit) as exc:
            main(["gaussian-gap", "--mu", "one"])
        assert exc.value.code == EXIT_USAGE

    def test_invalid_range(self, capsys):
        assert main(["gaussian-gap", "--n-min", "5", "--n-max", "2"]) == EXIT_USAGE

    def test_invalid_model_parameters(self, capsys):
        assert main(["bernoulli-gap", "--tau", "1.5"]) == EXIT_USAGE

    def test_io_error(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert main(["gaussian-gap", "--n-max", "2", "--out", str(blocker / "out.csv")]) == EXIT_IO

    def test_numeric_failure(self, monkeypatch, capsys):
        monkeypatch.setattr(phase_mod, "MAX_DOUBLINGS", 0)
        assert main(["phase", "--eps", "0.5"]) == EXIT_NUMERIC

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "robgap", "gaussian-gap", "--n-max", "1"],
                             capture_output=True, text=True)
        assert res.returncode == 0 and res.stdout.startswith("family,param_label,n,value,stderr")


class TestRendering:
    def test_run_without_output_returns_curves(self):
        curves = run(ExperimentConfig(family="gaussian-gap", n_max=4, eps_list=(0.5, 1.0)))
        assert [c.label for c in curves] == ["eps=0.5", "eps=1"]
        assert render_csv(curves).count("\n") == 9

    def test_svg(self, tmp_path):
        pytest.importorskip("matplotlib")
        out = tmp_path / "g.csv"
        main(["gaussian-gap", "--n-max", "20", "--out", str(out), "--plot", "--log-x"])
        svg = out.with_suffix(".svg")
        assert svg.exists() and svg.read_text().lstrip().startswith("<?xml")
