"""
萤火虫反向传播神经网络训练工具配置文件

训练器、数据集加载器和实验框架使用的全部默认常量都在这里。
"""

from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent

# 数据集配置
DATA_DIR = PROJECT_ROOT.parent / "data"
DATASET_FILES = {
    "iris": "iris.data",
    "wine": "wine.data",
    "liver": "bupa.data",
}

# 原始UCI文件的内置格式（无表头行）
BUILTIN_SCHEMAS = {
    "iris": {
        "delimiter": ",",
        "label_column": "last",
        "label_kind": "string-class",
        "expected_rows": 150,
        "expected_features": 4,
        "expected_classes": 3,
    },
    "wine": {
        "delimiter": ",",
        "label_column": 0,
        "label_kind": "integer-class",
        "expected_rows": 178,
        "expected_features": 13,
        "expected_classes": 3,
    },
    # 前6列为血检/饮酒字段，第7列 selector 作为类别
    "liver": {
        "delimiter": ",",
        "label_column": "last",
        "label_kind": "integer-class",
        "expected_rows": 345,
        "expected_features": 6,
        "expected_classes": 2,
    },
}

# 网络配置
NETWORK_CONFIG = {
    "hidden_size": 6,
    "hidden_transfer": "logsig",
    "output_transfer": "logsig",
}

# 萤火虫训练器配置
FIREFLY_CONFIG = {
    "population_size": 20,
    "l0": 1.0,
    "eta0": 1.0,
    "eta_growth": 0.05,
    "alpha": 0.2,
    "alpha_decay": 0.97,
    "init_scale": 0.5,
    "max_iterations": 100,
    "cc_threshold": 97.0,
    "sse_threshold": 0.45,
    "movement_space": "error-scalar",
    "refine_steps": 0,
    "learning_rate": 0.01,
}

# 遗传算法配置
GA_CONFIG = {
    "population_size": 50,
    "crossover_rate": 0.9,
    "mutation_rate": 0.05,
    "mutation_sigma": 0.1,
    "tournament_size": 3,
    "elite_count": 2,
    "refine_steps": 1,
    "learning_rate": 0.01,
    "max_generations": 100,
    "init_scale": 0.5,
    "cc_threshold": 97.0,
    "sse_threshold": 0.45,
}

# 最速下降配置
SDBP_CONFIG = {
    "learning_rate": 0.01,
    "max_iterations": 100,
    "init_scale": 0.5,
    "cc_threshold": 97.0,
    "sse_threshold": 0.45,
}

# 实验框架配置
EXPERIMENT_CONFIG = {
    "algorithm": "fabpnn",
    "dataset": "iris",
    "seed": 1,
    "out_dir": Path("runs"),
    "holdout": 0.0,
    "stability_band": 0.5,  # 百分点
    "max_workers": 4,
    "metrics_file": "metrics.csv",
    "summary_file": "summary.json",
    "float_format": "%.10g",
}

METRICS_COLUMNS = ["iteration", "avg_sse", "best_sse", "correct_rate", "eta"]

# 日志配置
LOG_CONFIG = {
    "level": "INFO",
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "datefmt": "%Y-%m-%d %H:%M:%S",
    "file": None,
}

# 退出码
EXIT_CODES = {
    "ok": 0,
    "error": 1,
    "config": 2,
    "data": 3,
}

ALGORITHMS = ("fabpnn", "gabpnn", "sdbp")
MOVEMENT_SPACES = ("error-scalar", "weight-vector")
TRANSFER_NAMES = ("logsig", "tansig", "purelin")


def validate_config():
    """验证默认配置的一致性，返回问题列表"""
    errors = []

    for name, block in (("FIREFLY_CONFIG", FIREFLY_CONFIG), ("GA_CONFIG", GA_CONFIG), ("SDBP_CONFIG", SDBP_CONFIG)):
        if not 0 < block["init_scale"] < 1:
            errors.append(f"{name}.init_scale 必须在 (0, 1) 区间内: {block['init_scale']}")
    for key in ("hidden_transfer", "output_transfer"):
        if NETWORK_CONFIG[key] not in TRANSFER_NAMES:
            errors.append(f"NETWORK_CONFIG.{key} 传递函数未知: {NETWORK_CONFIG[key]}")
    if FIREFLY_CONFIG["movement_space"] not in MOVEMENT_SPACES:
        errors.append(f"FIREFLY_CONFIG.movement_space 未知: {FIREFLY_CONFIG['movement_space']}")
    if GA_CONFIG["elite_count"] > GA_CONFIG["population_size"]:
        errors.append("GA_CONFIG.elite_count 超过 population_size")
    if EXPERIMENT_CONFIG["algorithm"] not in ALGORITHMS:
        errors.append(f"EXPERIMENT_CONFIG.algorithm 未知: {EXPERIMENT_CONFIG['algorithm']}")
    if EXPERIMENT_CONFIG["dataset"] not in BUILTIN_SCHEMAS:
        errors.append(f"EXPERIMENT_CONFIG.dataset 没有内置格式: {EXPERIMENT_CONFIG['dataset']}")
    for name in BUILTIN_SCHEMAS:
        if name not in DATASET_FILES:
            errors.append(f"内置格式 '{name}' 在 DATASET_FILES 中没有对应文件")

    return errors


def get_dataset_path(name: str, data_dir=None) -> Path:
    """获取内置数据集文件的完整路径"""
    return Path(data_dir or DATA_DIR) / DATASET_FILES[name]


# 导出配置
__all__ = [
    'PROJECT_ROOT',
    'DATA_DIR',
    'DATASET_FILES',
    'BUILTIN_SCHEMAS',
    'NETWORK_CONFIG',
    'FIREFLY_CONFIG',
    'GA_CONFIG',
    'SDBP_CONFIG',
    'EXPERIMENT_CONFIG',
    'METRICS_COLUMNS',
    'LOG_CONFIG',
    'EXIT_CODES',
    'ALGORITHMS',
    'MOVEMENT_SPACES',
    'TRANSFER_NAMES',
    'validate_config',
    'get_dataset_path',
]
