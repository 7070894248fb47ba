"""各训练器共用的类型：每次迭代的记录和配置辅助类"""

from dataclasses import MISSING, asdict, dataclass, fields
from typing import Optional

from ..errors import ConfigError


@dataclass(frozen=True)
class TrainingRecord:
    """一次完整外层迭代（或一代遗传算法）的指标"""

    iteration: int
    avg_sse: float
    best_sse: float
    correct_rate: float
    eta: Optional[float] = None

    def as_row(self) -> dict:
        return asdict(self)


def _coerce(name, value, default):
    try:
        if isinstance(default, bool):
            if isinstance(value, str):
                lowered = value.strip().lower()
                if lowered in ("true", "yes", "on", "1"):
                    return True
                if lowered in ("false", "no", "off", "0"):
                    return False
                raise ValueError(value)
            return bool(value)
        if isinstance(default, int):
            as_float = float(value)
            if not as_float.is_integer():
                raise ValueError(value)
            return int(as_float)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, str):
            return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for '{name}': {value!r}") from None
    return value


class ConfigMixin:
    """
    从扁平映射构造不可变的配置数据类。

    子类实现 ``validate() -> list[str]``，空列表表示配置有效。
    """

    @classmethod
    def from_mapping(cls, mapping=None, **overrides):
        values = dict(mapping or {})
        values.update(overrides)
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise ConfigError(f"unknown {cls.__name__} option(s): {', '.join(unknown)}")
        kwargs = {}
        for key, value in values.items():
            default = known[key].default
            kwargs[key] = value if default is MISSING else _coerce(key, value, default)
        return cls(**kwargs)

    def validate(self):
        return []

    def validated(self):
        problems = self.validate()
        if problems:
            raise ConfigError(f"{type(self).__name__}: " + "; ".join(problems))
        return self
