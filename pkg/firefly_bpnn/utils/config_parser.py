import re
from pathlib import Path

from ..errors import ConfigError

# 正则表达式说明:
# ^\s*                 可选的前导空白
# ([A-Za-z_][\w.\-]*)  带点的键名，例如 "firefly.alpha" 或 "out_dir"
# \s*=\s*              分隔符
# (.*?)                原始值，去掉末尾空白
# \s*$
KEY_VALUE_PATTERN = re.compile(r"^\s*([A-Za-z_][\w.\-]*)\s*=\s*(.*?)\s*$")
COMMENT_PATTERN = re.compile(r"\s+#.*$")

_TRUE = {"true", "yes", "on"}
_FALSE = {"false", "no", "off"}


def coerce_value(raw: str):
    """
    将配置字符串转换为 int、float、bool 或 str（按此优先顺序）。
    带引号的值始终作为字符串返回。
    """
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1]
    lowered = raw.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    return raw


def parse_config_text(text: str, source: str = "<string>") -> dict:
    """
    将 `key = value` 格式（键名可带点）的文本解析为扁平字典。

    :param text: 文件内容
    :param source: 错误信息中使用的来源名
    """
    values = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = KEY_VALUE_PATTERN.match(COMMENT_PATTERN.sub("", line))
        if not match:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value', got {stripped!r}")
        key, raw = match.groups()
        if key in values:
            raise ConfigError(f"{source}:{line_no}: duplicate key '{key}'")
        values[key] = coerce_value(raw)
    return values


def load_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file '{path}': {e}") from e
    return parse_config_text(text, source=str(path))


def split_sections(values: dict) -> dict:
    """
    按第一段对带点的键名分组:
    {"firefly.alpha": 0.2, "seed": 1} -> {"firefly": {"alpha": 0.2}, "": {"seed": 1}}
    """
    sections = {"": {}}
    for key, value in values.items():
        section, _, name = key.rpartition(".")
        if "." in section:
            raise ConfigError(f"config key nested too deeply: '{key}'")
        sections.setdefault(section, {})[name] = value
    return sections
