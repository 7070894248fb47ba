# tools/dataset_loader.py

import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..CONFIG import BUILTIN_SCHEMAS, get_dataset_path
from ..errors import ConfigError, DatasetError, ShapeError
from .network import LabeledSet

logger = logging.getLogger(__name__)

LABEL_KINDS = ("string-class", "integer-class")


@dataclass(frozen=True)
class DatasetSchema:
    """如何读取一个原始 UCI 格式的 CSV 文件（无表头行）"""

    delimiter: str = ","
    label_column: Union[int, str] = "last"
    label_kind: str = "string-class"
    expected_rows: Optional[int] = None
    expected_features: Optional[int] = None
    expected_classes: Optional[int] = None

    def validate(self):
        errors = []
        if len(self.delimiter) != 1:
            errors.append(f"delimiter must be a single character: {self.delimiter!r}")
        if self.label_column != "last" and not isinstance(self.label_column, int):
            errors.append(f"label_column must be an index or 'last': {self.label_column!r}")
        if self.label_kind not in LABEL_KINDS:
            errors.append(f"label_kind must be one of {', '.join(LABEL_KINDS)}: {self.label_kind}")
        for name in ("expected_rows", "expected_features", "expected_classes"):
            value = getattr(self, name)
            if value is not None and value < 1:
                errors.append(f"{name} must be >= 1 when set: {value}")
        return errors

    @classmethod
    def builtin(cls, name: str) -> "DatasetSchema":
        if name not in BUILTIN_SCHEMAS:
            raise ConfigError(f"no builtin schema named '{name}' (known: {', '.join(BUILTIN_SCHEMAS)})")
        return cls(**BUILTIN_SCHEMAS[name])

    @classmethod
    def from_mapping(cls, mapping, base: Optional["DatasetSchema"] = None) -> "DatasetSchema":
        """用字符串/数值覆盖 ``base``（或默认值）中的字段"""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ConfigError(f"unknown schema option(s): {', '.join(unknown)}")
        values = dict(vars(base)) if base is not None else {}
        for key, value in mapping.items():
            if key == "label_column":
                text = str(value).strip()
                value = "last" if text.lower() == "last" else _as_int(key, text)
            elif key.startswith("expected_"):
                value = None if str(value).strip().lower() in ("", "none") else _as_int(key, value)
            else:
                value = str(value)
            values[key] = value
        schema = cls(**values)
        problems = schema.validate()
        if problems:
            raise ConfigError("schema: " + "; ".join(problems))
        return schema


def _as_int(key, value):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"schema option '{key}' must be an integer: {value!r}") from None


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    class_names: Tuple[str, ...]
    normalization: Optional[np.ndarray] = None  # (特征数 x 2) 的 (min, max)
    name: str = ""

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, rows) -> "Dataset":
        return Dataset(self.features[rows], self.labels[rows], self.class_names, self.normalization, self.name)


def load_csv(path, schema: DatasetSchema) -> Dataset:
    """
    将原始逗号分隔文件读取为特征未归一化的 Dataset。

    类别名按首次出现的顺序映射为下标。末尾空行会被忽略，其他问题都会抛出
    指明出错行的 DatasetError。

    :param path: 文件路径
    :param schema: 描述分隔符、标签列和期望数量的 DatasetSchema
    """
    path = Path(path)
    problems = schema.validate()
    if problems:
        raise ConfigError("schema: " + "; ".join(problems))
    try:
        frame = pd.read_csv(
            path,
            header=None,
            sep=schema.delimiter,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            engine="python",
        )
    except FileNotFoundError:
        raise DatasetError(f"dataset file not found: {path}") from None
    except pd.errors.EmptyDataError:
        raise DatasetError(f"dataset file is empty: {path}") from None
    except pd.errors.ParserError as e:
        raise DatasetError(f"{path}: malformed row: {e}") from None
    except (OSError, UnicodeDecodeError) as e:
        raise DatasetError(f"cannot read dataset file {path}: {e}") from None

    frame = frame.fillna("").apply(lambda column: column.astype(str).str.strip())
    blank = (frame == "").all(axis=1).to_numpy()
    if blank.all():
        raise DatasetError(f"dataset file has no rows: {path}")
    last_row = int(np.flatnonzero(~blank)[-1])
    frame = frame.iloc[: last_row + 1].reset_index(drop=True)

    n_columns = frame.shape[1]
    incomplete = (frame == "").any(axis=1).to_numpy()
    if incomplete.any():
        row = int(np.flatnonzero(incomplete)[0])
        raise DatasetError(f"{path}: line {row + 1}: expected {n_columns} non-empty fields, got {frame.iloc[row].tolist()}")
    if n_columns < 2:
        raise DatasetError(f"{path}: need at least one feature column and a label column")

    label_column = n_columns - 1 if schema.label_column == "last" else int(schema.label_column)
    if not 0 <= label_column < n_columns:
        raise DatasetError(f"{path}: label column {schema.label_column} outside the {n_columns} columns")
    feature_columns = [c for c in range(n_columns) if c != label_column]

    numeric = frame[feature_columns].apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna().to_numpy()
    if bad.any():
        row, col = (int(v[0]) for v in np.nonzero(bad))
        raise DatasetError(
            f"{path}: line {row + 1}: non-numeric feature {frame.iat[row, feature_columns[col]]!r} in column {feature_columns[col]}"
        )

    raw_labels = frame[label_column]
    if schema.label_kind == "integer-class":
        values = pd.to_numeric(raw_labels, errors="coerce")
        invalid = (values.isna() | (values != values.round())).to_numpy()
        if invalid.any():
            row = int(np.flatnonzero(invalid)[0])
            raise DatasetError(f"{path}: line {row + 1}: label {raw_labels.iat[row]!r} is not an integer class")
        raw_labels = values.astype(int).astype(str)
    class_names = tuple(pd.unique(raw_labels))
    labels = pd.Categorical(raw_labels, categories=list(class_names)).codes.astype(int)

    dataset = Dataset(numeric.to_numpy(dtype=float), labels, class_names, None, path.stem)
    _check_counts(dataset, schema, path)
    logger.info(
        "loaded %s: %d rows, %d features, %d classes",
        path.name, dataset.n_rows, dataset.n_features, dataset.n_classes,
    )
    return dataset


def _check_counts(dataset: Dataset, schema: DatasetSchema, path: Path):
    expected = [
        ("rows", schema.expected_rows, dataset.n_rows),
        ("features", schema.expected_features, dataset.n_features),
        ("classes", schema.expected_classes, dataset.n_classes),
    ]
    for what, want, got in expected:
        if want is not None and want != got:
            raise DatasetError(f"{path}: expected {want} {what}, found {got}")


def load_builtin(name: str, data_dir=None, schema: Optional[DatasetSchema] = None) -> Dataset:
    """从数据目录加载 iris / wine / liver，未指定 schema 时使用内置格式"""
    schema = schema or DatasetSchema.builtin(name)
    dataset = load_csv(get_dataset_path(name, data_dir), schema)
    return Dataset(dataset.features, dataset.labels, dataset.class_names, None, name)


def apply_normalization(d: Dataset, params) -> Dataset:
    """用保存的 (min, max) 缩放；常数特征映射为 0，结果截断到 [0, 1]"""
    params = np.asarray(params, dtype=float)
    if params.shape != (d.n_features, 2):
        raise ShapeError(f"normalization must be ({d.n_features}, 2), got {params.shape}")
    low, high = params[:, 0], params[:, 1]
    span = high - low
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (d.features - low) / safe, 0.0)
    return Dataset(np.clip(scaled, 0.0, 1.0), d.labels.copy(), d.class_names, params, d.name)


def min_max_normalize(d: Dataset) -> Dataset:
    """逐特征计算 (x - min) / (max - min)，并记录 (min, max)"""
    if d.n_rows < 1:
        raise DatasetError("cannot normalize an empty dataset")
    params = np.column_stack([d.features.min(axis=0), d.features.max(axis=0)])
    return apply_normalization(d, params)


def to_labeled_set(d: Dataset) -> LabeledSet:
    """长度为类别数的 one-hot 目标，保持行顺序"""
    if d.normalization is None:
        raise DatasetError(f"dataset '{d.name}' must be normalized before training")
    targets = np.eye(d.n_classes)[d.labels]
    return LabeledSet(d.features.copy(), targets)


def split_holdout(d: Dataset, fraction: float, rng) -> Tuple[Dataset, Dataset]:
    """随机划分 (train, test)，各部分内部保持原有行顺序"""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"holdout fraction must lie in (0, 1), got {fraction}")
    n_test = int(round(d.n_rows * fraction))
    if n_test < 1 or n_test >= d.n_rows:
        raise DatasetError(f"holdout {fraction} leaves an empty part of the {d.n_rows} rows")
    order = rng.permutation(d.n_rows)
    test_rows = np.sort(order[:n_test])
    train_rows = np.sort(order[n_test:])
    return d.subset(train_rows), d.subset(test_rows)
