import re

import pytest

from firefly_bpnn.errors import ConfigError, DatasetError
from firefly_bpnn.tools.common import TrainingRecord
from firefly_bpnn.tools.experiment import write_metrics
from firefly_bpnn.tools.plotting import cmd_plot, legend_labels


def fake_metrics(path, n=100, offset=0.0):
    records = [
        TrainingRecord(i, 50.0 / i + offset, 40.0 / i + offset, min(100.0, 40.0 + i * 0.6), 1.05 ** i)
        for i in range(1, n + 1)
    ]
    return write_metrics(records, path)


def count(svg_text, prefix):
    return len(re.findall(rf'id="{prefix}-\d+"', svg_text))


class TestCmdPlot:
    def test_one_file_two_curves(self, tmp_path):
        csv = fake_metrics(tmp_path / "fabpnn.csv")
        svg = cmd_plot([csv], tmp_path / "out.svg").read_text()
        assert count(svg, "curve-correct-rate") == 1
        assert count(svg, "curve-avg-sse") == 1
        assert count(svg, "legend-entry") == 1
        assert "fabpnn" in svg

    def test_three_files(self, tmp_path):
        paths = [fake_metrics(tmp_path / f"{name}.csv", offset=k) for k, name in enumerate(("a", "b", "c"))]
        svg = cmd_plot(paths, tmp_path / "out.svg").read_text()
        assert count(svg, "curve-correct-rate") + count(svg, "curve-avg-sse") == 6
        assert count(svg, "legend-entry") == 3

    def test_byte_identical(self, tmp_path):
        csv = fake_metrics(tmp_path / "run.csv")
        first = cmd_plot([csv], tmp_path / "one.svg").read_bytes()
        second = cmd_plot([csv], tmp_path / "two.svg").read_bytes()
        assert first == second

    def test_blank_eta_is_fine(self, tmp_path):
        records = [TrainingRecord(i, 3.0 / i, 2.0 / i, 60.0, None) for i in range(1, 6)]
        svg = cmd_plot([write_metrics(records, tmp_path / "ga.csv")], tmp_path / "ga.svg").read_text()
        assert count(svg, "curve-avg-sse") == 1

    def test_malformed_csv(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("not,a,metrics,file\n1,2,3,4\n")
        with pytest.raises(DatasetError):
            cmd_plot([bad], tmp_path / "out.svg")
        assert not (tmp_path / "out.svg").exists()

    def test_no_inputs(self, tmp_path):
        with pytest.raises(ConfigError):
            cmd_plot([], tmp_path / "out.svg")


class TestLegendLabels:
    def test_stems(self, tmp_path):
        assert legend_labels([tmp_path / "a.csv", tmp_path / "b.csv"]) == ["a", "b"]

    def test_colliding_stems(self, tmp_path):
        paths = [tmp_path / "pop5" / "metrics.csv", tmp_path / "pop20" / "metrics.csv"]
        assert legend_labels(paths) == ["pop5/metrics", "pop20/metrics"]
