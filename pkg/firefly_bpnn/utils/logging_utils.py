import logging

from ..CONFIG import LOG_CONFIG


def setup_logging(level=None, log_file=None):
    """
    根据 LOG_CONFIG 配置根日志记录器。

    :param level: 日志级别名，默认为 LOG_CONFIG["level"]
    :param log_file: 可选的日志文件路径，省略时输出到 stderr
    """
    level = (level or LOG_CONFIG["level"]).upper()
    log_file = log_file or LOG_CONFIG["file"]
    kwargs = dict(
        format=LOG_CONFIG["format"],
        datefmt=LOG_CONFIG["datefmt"],
        level=getattr(logging, level, logging.INFO),
        force=True,
    )
    if log_file:
        kwargs.update(filename=str(log_file), filemode="w")
    logging.basicConfig(**kwargs)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
