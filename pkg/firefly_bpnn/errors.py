"""异常层级；每个面向命令行的异常都带有对应的进程退出码。"""

from .CONFIG import EXIT_CODES


class FabpnnError(Exception):
    """工具包所有异常的基类。"""

    exit_code = EXIT_CODES["error"]


class ConfigError(FabpnnError):
    """运行配置、配置文件或命令行参数无效。"""

    exit_code = EXIT_CODES["config"]


class DatasetError(FabpnnError):
    """数据集或指标文件无法读取或格式错误。"""

    exit_code = EXIT_CODES["data"]


class ShapeError(FabpnnError, ValueError):
    """数组之间的维度或拓扑不匹配。"""


class StaleFireflyError(FabpnnError, RuntimeError):
    """萤火虫缓存的误差与其权重不再对应。"""
