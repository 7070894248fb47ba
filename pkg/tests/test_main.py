import json
import logging
import subprocess
import sys
from pathlib import Path

import pytest

from firefly_bpnn import main as cli
from firefly_bpnn.main import build_parser, collect_values, main

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(autouse=True)
def restore_root_logger():
    """main() reconfigures the root logger; put the test runner's handlers back."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def train_args(data_dir, out_dir, *extra):
    return ["train", "--data-dir", str(data_dir), "--out-dir", str(out_dir), *extra]


class TestParser:
    def test_flags_become_config_keys(self):
        args = build_parser().parse_args(
            ["train", "--algo", "gabpnn", "--pop", "12", "--seed", "3", "--movement-space", "weight-vector"]
        )
        values = collect_values(args)
        assert values == {"algo": "gabpnn", "pop": 12, "seed": 3, "firefly.movement_space": "weight-vector"}

    def test_flags_override_file(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("seed = 5\nfirefly.alpha = 0.1\n")
        args = build_parser().parse_args(["train", "--config", str(config), "--seed", "8"])
        assert collect_values(args) == {"seed": 8, "firefly.alpha": 0.1}


class TestTrainCommand:
    def test_success(self, data_dir, tmp_path, capsys):
        code = main(train_args(data_dir, tmp_path, "--algo", "fabpnn", "--dataset", "iris", "--pop", "20", "--seed", "1", "--iters", "4"))
        assert code == 0
        assert "✅" in capsys.readouterr().out
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["iterations"] == len((tmp_path / "metrics.csv").read_text().splitlines()) - 1

    def test_single_iteration(self, data_dir, tmp_path):
        assert main(train_args(data_dir, tmp_path, "--iters", "1")) == 0
        assert len((tmp_path / "metrics.csv").read_text().splitlines()) == 2

    def test_config_error_exit_code(self, data_dir, tmp_path, capsys):
        assert main(train_args(data_dir, tmp_path, "--topology", "4,6,2")) == 2
        assert "❌" in capsys.readouterr().err

    def test_bad_config_file(self, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("this is not a setting\n")
        assert main(["train", "--config", str(config)]) == 2

    def test_unknown_flag(self):
        assert main(["train", "--nonsense"]) == 2

    def test_data_error_exit_code(self, tmp_path, capsys):
        assert main(train_args(tmp_path / "missing", tmp_path, "--iters", "1")) == 3
        assert "❌" in capsys.readouterr().err

    def test_custom_file_with_schema(self, data_dir, tmp_path):
        code = main([
            "train", "--dataset", "winefile", "--data-file", str(data_dir / "wine.data"),
            "--schema", "label_column=0,label_kind=integer-class", "--algo", "sdbp", "--iters", "2",
            "--out-dir", str(tmp_path),
        ])
        assert code == 0
        assert json.loads((tmp_path / "summary.json").read_text())["topology"] == "13-6-3"


    def test_unexpected_error(self, monkeypatch, capsys):
        def crash(args):
            raise RuntimeError("boom")

        monkeypatch.setitem(cli.COMMANDS, "train", crash)
        assert main(["train"]) == 1
        assert "❌" in capsys.readouterr().err


class TestModuleEntryPoint:
    def test_train_as_module(self, data_dir, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "firefly_bpnn.main", *train_args(data_dir, tmp_path, "--iters", "1")],
            cwd=REPO_ROOT, capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "metrics.csv").exists()
        assert (tmp_path / "summary.json").exists()


class TestCompareAndPlot:
    def test_compare_then_plot(self, data_dir, tmp_path, capsys):
        code = main([
            "compare", "--algos", "fabpnn", "--pops", "5,20", "--seeds", "1,2", "--iters", "2",
            "--data-dir", str(data_dir), "--out-dir", str(tmp_path), "--workers", "2",
        ])
        assert code == 0
        assert "fabpnn-pop20" in capsys.readouterr().out
        curves = [tmp_path / "fabpnn-pop5" / "seed-1" / "metrics.csv", tmp_path / "fabpnn-pop20" / "seed-1" / "metrics.csv"]
        assert main(["plot", *map(str, curves), "-o", str(tmp_path / "curves.svg")]) == 0
        assert (tmp_path / "curves.svg").exists()

    def test_bad_seed_list(self, data_dir, tmp_path):
        assert main(["compare", "--seeds", "one,two", "--data-dir", str(data_dir), "--out-dir", str(tmp_path)]) == 2

    def test_plot_unreadable(self, tmp_path):
        assert main(["plot", str(tmp_path / "absent.csv"), "-o", str(tmp_path / "x.svg")]) == 3


class TestCheckCommand:
    def test_reports(self, data_dir, capsys):
        code = main(["check", "--data-dir", str(data_dir)])
        out = capsys.readouterr().out
        assert code == 0
        assert "3/3" in out

    def test_missing_data(self, tmp_path):
        assert main(["check", "--data-dir", str(tmp_path / "none")]) == 2
