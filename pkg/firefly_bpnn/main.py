#!/usr/bin/env python3
"""
萤火虫反向传播神经网络训练工具 命令行入口

    python -m firefly_bpnn.main train --algo fabpnn --dataset iris --pop 20 --seed 1
    python -m firefly_bpnn.main compare --algos fabpnn,gabpnn --dataset wine --seeds 1,2,3
    python -m firefly_bpnn.main plot runs/a/metrics.csv runs/b/metrics.csv -o curves.svg
    python -m firefly_bpnn.main check
"""

import argparse
import logging
import sys
from pathlib import Path

from .CONFIG import ALGORITHMS, EXIT_CODES, EXPERIMENT_CONFIG, MOVEMENT_SPACES
from .errors import ConfigError, DatasetError, FabpnnError
from .utils.config_parser import load_config_file
from .utils.logging_utils import setup_logging

logger = logging.getLogger(__name__)

# 命令行参数 -> 配置键
FLAG_KEYS = {
    "algo": "algo",
    "dataset": "dataset",
    "data_file": "data_file",
    "data_dir": "data_dir",
    "schema": "schema",
    "topology": "topology",
    "pop": "pop",
    "iters": "iters",
    "seed": "seed",
    "out_dir": "out_dir",
    "holdout": "holdout",
    "movement_space": "firefly.movement_space",
}


def _add_common(parser):
    parser.add_argument("--log-level", default=None, help="日志级别: DEBUG, INFO, WARNING 或 ERROR")
    parser.add_argument("--log-file", default=None, help="日志写入该文件而不是 stderr")


def _add_run_options(parser):
    parser.add_argument("--config", default=None, help="key = value 格式的配置文件，命令行参数优先")
    parser.add_argument("--dataset", default=None, help="内置数据集: iris, wine 或 liver")
    parser.add_argument("--data-file", default=None, help="用该原始CSV文件代替内置数据文件")
    parser.add_argument("--data-dir", default=None, help="存放 iris.data, wine.data, bupa.data 的目录")
    parser.add_argument("--schema", default=None, help="内置格式名，或 key=value,... 形式的覆盖项")
    parser.add_argument("--topology", default=None, help="各层神经元数，例如 4,6,3")
    parser.add_argument("--iters", type=int, default=None, help="最大迭代数 / 代数")
    parser.add_argument("--out-dir", default=None, help=f"输出目录 (默认 {EXPERIMENT_CONFIG['out_dir']})")
    parser.add_argument("--holdout", type=float, default=None, help="留作测试的样本比例")
    parser.add_argument("--movement-space", choices=MOVEMENT_SPACES, default=None)
    _add_common(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="firefly_bpnn", description="萤火虫 / 遗传算法 / 最速下降 神经网络训练")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="训练一个网络，写出 metrics.csv 和 summary.json")
    train.add_argument("--algo", choices=ALGORITHMS, default=None)
    train.add_argument("--pop", type=int, default=None, help="种群规模 (fabpnn, gabpnn)")
    train.add_argument("--seed", type=int, default=None)
    _add_run_options(train)

    compare = sub.add_parser("compare", help="在多个随机种子上比较算法 / 种群规模")
    compare.add_argument("--algos", default=None, help="逗号分隔，例如 fabpnn,gabpnn")
    compare.add_argument("--seeds", default="1", help="逗号分隔的随机种子")
    compare.add_argument("--pops", default=None, help="逗号分隔的种群规模")
    compare.add_argument("--workers", type=int, default=None, help="并行运行数")
    _add_run_options(compare)

    plot = sub.add_parser("plot", help="根据 metrics CSV 文件绘制训练曲线")
    plot.add_argument("metrics", nargs="+", help="metrics.csv 文件")
    plot.add_argument("-o", "--output", default="curves.svg")
    _add_common(plot)

    check = sub.add_parser("check", help="检查依赖、配置和数据文件")
    check.add_argument("--data-dir", default=None)
    _add_common(check)
    return parser


def collect_values(args) -> dict:
    """配置文件中的值，再叠加所有给出的命令行参数"""
    values = load_config_file(args.config) if getattr(args, "config", None) else {}
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            values[key] = value
    return values


def _split_list(text, what, cast=str):
    try:
        items = [cast(p.strip()) for p in str(text).split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"--{what} must be a comma-separated list: {text!r}") from None
    if not items:
        raise ConfigError(f"--{what} is empty")
    return items


def run_train(args) -> int:
    from .tools.experiment import build_run_config, cmd_train

    cfg = build_run_config(collect_values(args))
    summary = cmd_train(cfg)
    print(f"✅ {summary.summary_line()}")
    print(f"✅ 结果已写入 {cfg.out_dir}")
    return EXIT_CODES["ok"]


def run_compare(args) -> int:
    from .tools.experiment import cmd_compare, make_compare_configs, render_table

    values = collect_values(args)
    default_algos = values.pop("algo", None) or ",".join(ALGORITHMS[:2])
    algorithms = _split_list(args.algos or default_algos, "algos")
    seeds = _split_list(args.seeds, "seeds", int)
    pops = _split_list(args.pops, "pops", int) if args.pops else None
    out_dir = Path(values.get("out_dir", EXPERIMENT_CONFIG["out_dir"]))
    configs = make_compare_configs(values, algorithms, seeds, pops)
    table = cmd_compare(configs, out_dir, max_workers=args.workers)
    print(render_table(table))
    print(f"✅ 共 {len(configs)} 次运行，比较表已写入 {out_dir}")
    return EXIT_CODES["ok"]


def run_plot(args) -> int:
    from .tools.plotting import cmd_plot

    output = cmd_plot(args.metrics, args.output)
    print(f"✅ 已生成 {output}")
    return EXIT_CODES["ok"]


def run_check(args) -> int:
    from .check_config import main as check_main

    return EXIT_CODES["ok"] if check_main(args.data_dir) else EXIT_CODES["config"]


COMMANDS = {"train": run_train, "compare": run_compare, "plot": run_plot, "check": run_check}


def main(argv=None) -> int:
    """解析参数，执行子命令，返回进程退出码"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    setup_logging(args.log_level, args.log_file)

    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"❌ 配置错误: {e}", file=sys.stderr)
        return e.exit_code
    except DatasetError as e:
        print(f"❌ 数据错误: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"❌ 读写失败: {e}", file=sys.stderr)
        return EXIT_CODES["data"]
    except FabpnnError as e:
        logger.exception("run failed")
        print(f"❌ 运行失败: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception("unexpected error in %s", args.command)
        print(f"❌ 意外错误: {e}", file=sys.stderr)
        return EXIT_CODES["error"]


if __name__ == "__main__":
    sys.exit(main())
