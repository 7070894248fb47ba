"""
实验框架：运行配置、单次训练、多随机种子比较、指标 CSV / 摘要输出以及
收敛统计。
"""

import concurrent.futures
import json
import logging
import os
import tempfile
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..CONFIG import ALGORITHMS, BUILTIN_SCHEMAS, EXPERIMENT_CONFIG, METRICS_COLUMNS, NETWORK_CONFIG
from ..errors import ConfigError, DatasetError
from ..utils.config_parser import load_config_file, split_sections
from . import firefly, genetic, network
from .common import TrainingRecord
from .dataset_loader import (
    DatasetSchema,
    apply_normalization,
    load_builtin,
    load_csv,
    min_max_normalize,
    split_holdout,
    to_labeled_set,
)
from .firefly import FireflyConfig
from .genetic import GaConfig
from .network import SdbpConfig

logger = logging.getLogger(__name__)

ALGORITHM_BLOCKS = {
    "fabpnn": ("firefly", FireflyConfig),
    "gabpnn": ("ga", GaConfig),
    "sdbp": ("sdbp", SdbpConfig),
}
ITERATION_KEYS = {"fabpnn": "max_iterations", "gabpnn": "max_generations", "sdbp": "max_iterations"}
SECTIONS = ("", "firefly", "ga", "sdbp", "schema", "network")
TOP_LEVEL_KEYS = ("algo", "algorithm", "dataset", "data_file", "data_dir", "seed", "topology", "out_dir", "holdout", "label", "pop", "iters", "schema")
NETWORK_KEYS = ("hidden_size", "hidden_transfer", "output_transfer")


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = EXPERIMENT_CONFIG["algorithm"]
    dataset: str = EXPERIMENT_CONFIG["dataset"]
    data_file: Optional[Path] = None
    data_dir: Optional[Path] = None
    schema: Optional[DatasetSchema] = None
    topology: Optional[Tuple[int, ...]] = None
    hidden_size: int = NETWORK_CONFIG["hidden_size"]
    hidden_transfer: str = NETWORK_CONFIG["hidden_transfer"]
    output_transfer: str = NETWORK_CONFIG["output_transfer"]
    seed: int = EXPERIMENT_CONFIG["seed"]
    firefly: Optional[FireflyConfig] = None
    ga: Optional[GaConfig] = None
    sdbp: Optional[SdbpConfig] = None
    out_dir: Path = EXPERIMENT_CONFIG["out_dir"]
    holdout: float = EXPERIMENT_CONFIG["holdout"]
    label: Optional[str] = None

    @property
    def trainer_config(self):
        return getattr(self, ALGORITHM_BLOCKS[self.algorithm][0])

    @property
    def run_label(self) -> str:
        return self.label or self.algorithm

    def validate(self):
        errors = []
        if self.algorithm not in ALGORITHMS:
            return [f"unknown algorithm '{self.algorithm}' (choose from {', '.join(ALGORITHMS)})"]
        for algorithm, (block, _) in ALGORITHM_BLOCKS.items():
            present = getattr(self, block) is not None
            if algorithm == self.algorithm and not present:
                errors.append(f"missing '{block}' configuration block for {algorithm}")
            if algorithm != self.algorithm and present:
                errors.append(f"'{block}' block does not match algorithm {self.algorithm}")
        if self.trainer_config is not None:
            errors.extend(self.trainer_config.validate())
        if self.data_file is None and self.dataset not in BUILTIN_SCHEMAS:
            errors.append(f"dataset '{self.dataset}' is not builtin; pass --data-file and --schema")
        if self.data_file is not None and self.schema is None and self.dataset not in BUILTIN_SCHEMAS:
            errors.append("a data file needs a schema")
        if not 0 <= self.holdout < 1:
            errors.append(f"holdout must lie in [0, 1): {self.holdout}")
        if not 0 <= self.seed < 2 ** 64:
            errors.append(f"seed must be an unsigned 64-bit integer: {self.seed}")
        if self.topology is not None and (len(self.topology) < 2 or min(self.topology) < 1):
            errors.append(f"invalid topology: {self.topology}")
        if self.hidden_size < 1:
            errors.append(f"hidden_size must be >= 1: {self.hidden_size}")
        return errors


def _parse_int_list(value, what):
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    try:
        return tuple(int(p) for p in str(value).replace("-", ",").split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated integers: {value!r}") from None


def parse_schema_option(value, base: Optional[DatasetSchema] = None) -> DatasetSchema:
    """内置格式名 ("iris")，或行内覆盖项 ("label_column=0,label_kind=integer-class")"""
    text = str(value).strip()
    if "=" not in text:
        return DatasetSchema.builtin(text)
    pairs = {}
    for item in text.split(","):
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"schema override must be key=value: {item!r}")
        pairs[key.strip()] = raw.strip()
    return DatasetSchema.from_mapping(pairs, base)


def build_run_config(values: dict, algorithm: Optional[str] = None) -> RunConfig:
    """
    由带点的扁平键（配置文件与命令行参数合并后）构造 RunConfig。

    ``pop`` 和 ``iters`` 会写入所选算法对应的配置块。
    """
    sections = split_sections(values)
    unknown_sections = sorted(set(sections) - set(SECTIONS))
    if unknown_sections:
        raise ConfigError(f"unknown config section(s): {', '.join(unknown_sections)}")
    top = dict(sections.get("", {}))
    unknown = sorted(set(top) - set(TOP_LEVEL_KEYS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    file_algorithm = top.get("algo", top.get("algorithm", EXPERIMENT_CONFIG["algorithm"]))
    algorithm = str(algorithm or file_algorithm)
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm '{algorithm}' (choose from {', '.join(ALGORITHMS)})")

    blocks = {}
    for name, (block, cls) in ALGORITHM_BLOCKS.items():
        block_values = dict(sections.get(block, {}))
        if name == algorithm:
            if top.get("pop") is not None and name != "sdbp":
                block_values["population_size"] = top["pop"]
            if top.get("iters") is not None:
                block_values[ITERATION_KEYS[name]] = top["iters"]
        # 未选用的算法块也要解析，以便发现拼写错误的键
        blocks[block] = cls.from_mapping(block_values)

    dataset = str(top.get("dataset", EXPERIMENT_CONFIG["dataset"]))
    schema = DatasetSchema.builtin(dataset) if dataset in BUILTIN_SCHEMAS else None
    if "schema" in top:
        schema = parse_schema_option(top["schema"], schema)
    if sections.get("schema"):
        schema = DatasetSchema.from_mapping(sections["schema"], schema)

    net = sections.get("network", {})
    unknown = sorted(set(net) - set(NETWORK_KEYS))
    if unknown:
        raise ConfigError(f"unknown network option(s): {', '.join(unknown)}")

    try:
        cfg = RunConfig(
            algorithm=algorithm,
            dataset=dataset,
            data_file=Path(top["data_file"]) if top.get("data_file") else None,
            data_dir=Path(top["data_dir"]) if top.get("data_dir") else None,
            schema=schema,
            topology=_parse_int_list(top["topology"], "topology") if top.get("topology") else None,
            hidden_size=int(net.get("hidden_size", NETWORK_CONFIG["hidden_size"])),
            hidden_transfer=str(net.get("hidden_transfer", NETWORK_CONFIG["hidden_transfer"])),
            output_transfer=str(net.get("output_transfer", NETWORK_CONFIG["output_transfer"])),
            seed=int(top.get("seed", EXPERIMENT_CONFIG["seed"])),
            out_dir=Path(top.get("out_dir", EXPERIMENT_CONFIG["out_dir"])),
            holdout=float(top.get("holdout", EXPERIMENT_CONFIG["holdout"])),
            label=str(top["label"]) if top.get("label") else None,
            **{ALGORITHM_BLOCKS[algorithm][0]: blocks[ALGORITHM_BLOCKS[algorithm][0]]},
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid run configuration: {e}") from None
    problems = cfg.validate()
    if problems:
        raise ConfigError("; ".join(problems))
    return cfg


def load_run_config(config_file=None, overrides: Optional[dict] = None, algorithm: Optional[str] = None) -> RunConfig:
    """优先级: CONFIG 默认值 < 配置文件 < 覆盖项（值为 None 的覆盖项被忽略）"""
    values = load_config_file(config_file) if config_file else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_run_config(values, algorithm=algorithm)


@dataclass(frozen=True)
class RunSummary:
    algorithm: str
    dataset: str
    seed: int
    topology: str
    iterations: int
    correct_rate_final: float
    correct_rate_max: float
    correct_rate_min: float
    final_avg_sse: float
    final_best_sse: float
    stability_iteration: Optional[int]
    first_reach_iteration: Optional[int]
    wall_time: float
    holdout_correct_rate: Optional[float] = None
    label: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def summary_line(self) -> str:
        stable = self.stability_iteration if self.stability_iteration is not None else "-"
        line = (
            f"{self.label or self.algorithm} on {self.dataset} (seed {self.seed}, {self.topology}): "
            f"correct {self.correct_rate_final:.2f}% (max {self.correct_rate_max:.2f}, min {self.correct_rate_min:.2f}), "
            f"avg SSE {self.final_avg_sse:.4f}, best SSE {self.final_best_sse:.4f}, "
            f"{self.iterations} iterations (stable after {stable}), {self.wall_time:.2f}s"
        )
        if self.holdout_correct_rate is not None:
            line += f", holdout {self.holdout_correct_rate:.2f}%"
        return line


@dataclass(frozen=True)
class RunResult:
    summary: RunSummary
    records: List[TrainingRecord]
    weights: network.WeightSet


def stability_iteration(rates: Sequence[float], band: float = EXPERIMENT_CONFIG["stability_band"]) -> Optional[int]:
    """
    最小的 k（从1开始），使得从第 k 个起每个值都与最终值相差不超过
    ``band`` 个百分点；序列只有一个点时返回 None。
    """
    if len(rates) == 0:
        raise ValueError("stability of an empty series")
    if len(rates) == 1:
        return None
    final = rates[-1]
    k = len(rates)
    for j in range(len(rates) - 1, -1, -1):
        if abs(rates[j] - final) > band + 1e-9:
            break
        k = j + 1
    return k


def first_reach_iteration(rates: Sequence[float]) -> int:
    """序列首次达到其最终值的位置（从1开始）"""
    if len(rates) == 0:
        raise ValueError("empty series")
    final = rates[-1]
    for i, rate in enumerate(rates, start=1):
        if rate >= final - 1e-9:
            return i
    return len(rates)


def resolve_topology(cfg: RunConfig, n_features: int, n_classes: int) -> network.Topology:
    sizes = cfg.topology or (n_features, cfg.hidden_size, n_classes)
    if sizes[0] != n_features or sizes[-1] != n_classes:
        raise ConfigError(
            f"topology {sizes} does not fit the data ({n_features} features, {n_classes} classes)"
        )
    try:
        return network.Topology.build(sizes, hidden=cfg.hidden_transfer, output=cfg.output_transfer)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _load_dataset(cfg: RunConfig):
    if cfg.data_file is not None:
        schema = cfg.schema or DatasetSchema.builtin(cfg.dataset)
        return load_csv(cfg.data_file, schema)
    return load_builtin(cfg.dataset, cfg.data_dir, cfg.schema)


def run_experiment(cfg: RunConfig) -> RunResult:
    """加载、归一化、用所选算法训练并汇总"""
    problems = cfg.validate()
    if problems:
        raise ConfigError("; ".join(problems))
    rng = np.random.default_rng(cfg.seed)

    raw = _load_dataset(cfg)
    test = None
    if cfg.holdout > 0:
        raw, test_raw = split_holdout(raw, cfg.holdout, rng)
    train_set = min_max_normalize(raw)
    data = to_labeled_set(train_set)
    if cfg.holdout > 0:
        test = to_labeled_set(apply_normalization(test_raw, train_set.normalization))
    topology = resolve_topology(cfg, train_set.n_features, train_set.n_classes)

    logger.info("training %s on %s (%d patterns, %s, seed %d)", cfg.algorithm, cfg.dataset, len(data), topology.describe(), cfg.seed)
    trainers = {"fabpnn": firefly.train, "gabpnn": genetic.ga_train, "sdbp": network.sdbp_train}
    start = time.perf_counter()
    weights, records = trainers[cfg.algorithm](data, topology, cfg.trainer_config, rng)
    wall_time = time.perf_counter() - start

    rates = [r.correct_rate for r in records]
    summary = RunSummary(
        algorithm=cfg.algorithm,
        dataset=cfg.dataset if cfg.data_file is None else f"{cfg.dataset}:{Path(cfg.data_file).name}",
        seed=cfg.seed,
        topology=topology.describe(),
        iterations=len(records),
        correct_rate_final=rates[-1],
        correct_rate_max=max(rates),
        correct_rate_min=min(rates),
        final_avg_sse=records[-1].avg_sse,
        final_best_sse=records[-1].best_sse,
        stability_iteration=stability_iteration(rates),
        first_reach_iteration=first_reach_iteration(rates),
        wall_time=wall_time,
        holdout_correct_rate=network.correct_classification_rate(weights, test) if test is not None else None,
        label=cfg.label,
    )
    return RunResult(summary, records, weights)


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def metrics_frame(records: Sequence[TrainingRecord]) -> pd.DataFrame:
    frame = pd.DataFrame([r.as_row() for r in records], columns=METRICS_COLUMNS)
    frame["eta"] = pd.to_numeric(frame["eta"])
    return frame


def write_metrics(records: Sequence[TrainingRecord], path) -> Path:
    """metrics.csv: 表头 iteration,avg_sse,best_sse,correct_rate,eta；不适用时 eta 留空"""
    path = Path(path)
    text = metrics_frame(records).to_csv(
        index=False, float_format=EXPERIMENT_CONFIG["float_format"], na_rep="", lineterminator="\n",
    )
    _atomic_write(path, text)
    return path


def read_metrics(path) -> pd.DataFrame:
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise DatasetError(f"metrics file not found: {path}") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError, OSError, UnicodeDecodeError) as e:
        raise DatasetError(f"cannot read metrics file {path}: {e}") from None
    if list(frame.columns) != METRICS_COLUMNS:
        raise DatasetError(f"{path}: expected header {','.join(METRICS_COLUMNS)}, got {','.join(map(str, frame.columns))}")
    if frame.empty:
        raise DatasetError(f"{path}: no metrics rows")
    numeric = frame[["iteration", "avg_sse", "best_sse", "correct_rate"]]
    if numeric.isna().any().any() or not all(pd.api.types.is_numeric_dtype(t) for t in numeric.dtypes):
        raise DatasetError(f"{path}: non-numeric metrics values")
    return frame


def write_summary(summary: RunSummary, path) -> Path:
    path = Path(path)
    _atomic_write(path, json.dumps(summary.to_dict(), indent=2, ensure_ascii=False) + "\n")
    return path


def cmd_train(cfg: RunConfig) -> RunSummary:
    """运行一个配置，并将 metrics.csv 和 summary.json 写入 cfg.out_dir"""
    result = run_experiment(cfg)
    out_dir = Path(cfg.out_dir)
    write_metrics(result.records, out_dir / EXPERIMENT_CONFIG["metrics_file"])
    write_summary(result.summary, out_dir / EXPERIMENT_CONFIG["summary_file"])
    logger.info("wrote %s and %s to %s", EXPERIMENT_CONFIG["metrics_file"], EXPERIMENT_CONFIG["summary_file"], out_dir)
    return result.summary


def make_compare_configs(
    base_values: dict,
    algorithms: Sequence[str],
    seeds: Sequence[int],
    populations: Optional[Sequence[int]] = None,
) -> List[RunConfig]:
    """每个 (算法[, 种群规模], 随机种子) 组合一个 RunConfig，标签形如 fabpnn-pop20"""
    if not algorithms:
        raise ConfigError("compare needs at least one algorithm")
    if not seeds:
        raise ConfigError("compare needs at least one seed")
    configs = []
    for algorithm in algorithms:
        pops = populations if populations and algorithm != "sdbp" else [None]
        for pop in pops:
            label = f"{algorithm}-pop{pop}" if pop is not None else algorithm
            for seed in seeds:
                values = dict(base_values, seed=seed, label=label)
                if pop is not None:
                    values["pop"] = pop
                configs.append(build_run_config(values, algorithm=algorithm))
    return configs


def comparison_table(summaries: Sequence[RunSummary]) -> pd.DataFrame:
    """按标签统计各随机种子的中位数和离散程度，形式同训练性能表"""
    frame = pd.DataFrame([s.to_dict() for s in summaries])
    frame["label"] = [s.label or s.algorithm for s in summaries]
    for column in ("stability_iteration", "first_reach_iteration"):
        frame[column] = pd.to_numeric(frame[column])
    table = frame.groupby("label", sort=False).agg(
        runs=("seed", "count"),
        median_correct_rate=("correct_rate_final", "median"),
        max_correct_rate=("correct_rate_final", "max"),
        min_correct_rate=("correct_rate_final", "min"),
        peak_correct_rate=("correct_rate_max", "max"),
        floor_correct_rate=("correct_rate_min", "min"),
        median_avg_sse=("final_avg_sse", "median"),
        median_best_sse=("final_best_sse", "median"),
        median_iterations=("iterations", "median"),
        median_stability_iteration=("stability_iteration", "median"),
        median_first_reach_iteration=("first_reach_iteration", "median"),
    )
    return table.reset_index()


def render_table(table: pd.DataFrame, title: str = "") -> str:
    body = table.to_string(index=False, float_format=lambda v: f"{v:.2f}", na_rep="-")
    return (f"# {title}\n\n" if title else "") + body + "\n"


def cmd_compare(configs: Sequence[RunConfig], out_dir, max_workers: Optional[int] = None) -> pd.DataFrame:
    """
    运行每个配置（各自写入 out_dir/<label>/seed-<seed>/），并写出
    comparison.csv、comparison.txt 和 runs.csv。任一运行失败即中止。
    """
    if not configs:
        raise ConfigError("nothing to compare")
    out_dir = Path(out_dir)
    jobs = [replace(c, out_dir=out_dir / c.run_label / f"seed-{c.seed}") for c in configs]
    workers = max_workers or EXPERIMENT_CONFIG["max_workers"]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(cmd_train, job) for job in jobs]
        summaries = [future.result() for future in futures]

    table = comparison_table(summaries)
    datasets = sorted({s.dataset for s in summaries})
    _atomic_write(out_dir / "runs.csv", pd.DataFrame([s.to_dict() for s in summaries]).to_csv(index=False, lineterminator="\n"))
    _atomic_write(out_dir / "comparison.csv", table.to_csv(index=False, float_format="%.4f", lineterminator="\n"))
    _atomic_write(out_dir / "comparison.txt", render_table(table, f"Training performance on {', '.join(datasets)}"))
    logger.info("compared %d runs across %d configurations", len(summaries), len(table))
    return table
