# tools/plotting.py

import logging
import os
from pathlib import Path
from typing import List, Sequence

import matplotlib
from matplotlib.figure import Figure

from ..errors import ConfigError
from .experiment import read_metrics

logger = logging.getLogger(__name__)

SVG_RC = {
    "svg.hashsalt": "firefly-bpnn",
    "svg.fonttype": "none",
    "path.simplify": False,
}


def legend_labels(paths: Sequence[Path]) -> List[str]:
    """
    文件名（不含后缀）；重名时改用公共父目录之下的路径
    (runs/a/seed-1/metrics.csv -> "a/seed-1/metrics")。
    """
    stems = [p.stem for p in paths]
    if len(set(stems)) == len(stems):
        return stems
    resolved = [p.resolve() for p in paths]
    root = Path(os.path.commonpath([p.parent for p in resolved]))
    labels = [p.relative_to(root).with_suffix("").as_posix() for p in resolved]
    seen = {}
    for i, label in enumerate(labels):
        seen[label] = seen.get(label, 0) + 1
        if seen[label] > 1:
            labels[i] = f"{label} ({seen[label]})"
    return labels


def cmd_plot(csv_paths: Sequence, output_path) -> Path:
    """
    绘制 correct_rate 和 avg_sse 随迭代的变化，每个面板中每个指标文件一条
    曲线，保存为一个 SVG。

    每条曲线带有 SVG id ``curve-correct-rate-<i>`` / ``curve-avg-sse-<i>``，
    每个图例标签带有 ``legend-entry-<i>``。

    :param csv_paths: ``train`` 写出的 metrics.csv 文件
    :param output_path: 目标 .svg 文件
    """
    paths = [Path(p) for p in csv_paths]
    if not paths:
        raise ConfigError("plot needs at least one metrics CSV")
    frames = [read_metrics(p) for p in paths]
    labels = legend_labels(paths)

    fig = Figure(figsize=(11, 4.5))
    rate_ax, sse_ax = fig.subplots(1, 2)
    for i, (frame, label) in enumerate(zip(frames, labels)):
        (rate_line,) = rate_ax.plot(frame["iteration"], frame["correct_rate"], label=label, linewidth=1.2)
        rate_line.set_gid(f"curve-correct-rate-{i}")
        (sse_line,) = sse_ax.plot(frame["iteration"], frame["avg_sse"], label=label, linewidth=1.2)
        sse_line.set_gid(f"curve-avg-sse-{i}")

    rate_ax.set_title("Correct classification")
    rate_ax.set_xlabel("iteration")
    rate_ax.set_ylabel("correct rate (%)")
    sse_ax.set_title("Average SSE")
    sse_ax.set_xlabel("iteration")
    sse_ax.set_ylabel("avg SSE")
    for ax in (rate_ax, sse_ax):
        ax.grid(True, linewidth=0.4, alpha=0.5)
    legend = rate_ax.legend(loc="lower right", fontsize="small")
    for i, text in enumerate(legend.get_texts()):
        text.set_gid(f"legend-entry-{i}")
    fig.tight_layout()

    output = Path(output_path)
    output.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(SVG_RC):
        fig.savefig(output, format="svg", metadata={"Date": None})
    logger.info("wrote %d curve(s) to %s", len(frames), output)
    return output
