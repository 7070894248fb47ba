"""
前馈神经网络核心

权重集、前向传播、误差平方和、反向传播敏感度以及批量最速下降 (SDBP)
训练器。第 ``n`` 层（从1开始）按下式变换第 ``n-1`` 层的激活值

    N^n = W^n . p^(n-1) + B^n,    p^n = f^n(N^n)

样本按行存放，批量数组的形状为 ``(样本数, 层大小)``。
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..CONFIG import NETWORK_CONFIG, SDBP_CONFIG
from ..errors import ShapeError
from .common import ConfigMixin, TrainingRecord

logger = logging.getLogger(__name__)


class TransferFunction(str, enum.Enum):
    LOGSIG = "logsig"
    TANSIG = "tansig"
    PURELIN = "purelin"

    @classmethod
    def parse(cls, name) -> "TransferFunction":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        key = _TRANSFER_ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown transfer function: {name!r}") from None

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        if self is TransferFunction.LOGSIG:
            # 1 / (1 + e^-x) 的 tanh 形式，不会溢出
            return 0.5 * (1.0 + np.tanh(0.5 * x))
        if self is TransferFunction.TANSIG:
            return np.tanh(x)
        return x.copy()

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self is TransferFunction.LOGSIG:
            s = self.evaluate(x)
            return s * (1.0 - s)
        if self is TransferFunction.TANSIG:
            t = np.tanh(x)
            return 1.0 - t * t
        return np.ones_like(x)


_TRANSFER_ALIASES = {
    "log-sigmoid": "logsig",
    "tan-sigmoid": "tansig",
    "linear": "purelin",
}


@dataclass(frozen=True)
class Topology:
    """各层大小（输入层在前），每个非输入层一个传递函数"""

    layer_sizes: Tuple[int, ...]
    transfers: Tuple[TransferFunction, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise ShapeError(f"a topology needs at least 2 layers, got {sizes}")
        if any(s < 1 for s in sizes):
            raise ShapeError(f"every layer needs at least one neuron: {sizes}")
        transfers = tuple(TransferFunction.parse(t) for t in self.transfers)
        if len(transfers) != len(sizes) - 1:
            raise ShapeError(f"expected {len(sizes) - 1} transfer functions, got {len(transfers)}")
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "transfers", transfers)

    @classmethod
    def build(cls, sizes: Sequence[int], hidden=None, output=None) -> "Topology":
        hidden = hidden or NETWORK_CONFIG["hidden_transfer"]
        output = output or NETWORK_CONFIG["output_transfer"]
        sizes = tuple(sizes)
        transfers = [hidden] * (len(sizes) - 2) + [output]
        return cls(sizes, tuple(transfers))

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    @property
    def weight_shapes(self) -> List[Tuple[int, int]]:
        return [(self.layer_sizes[n], self.layer_sizes[n - 1]) for n in range(1, len(self.layer_sizes))]

    @property
    def n_params(self) -> int:
        return sum(rows * cols + rows for rows, cols in self.weight_shapes)

    def describe(self) -> str:
        return "-".join(str(s) for s in self.layer_sizes)


def parse_topology(text, hidden=None, output=None) -> Topology:
    """将 "4,6,3"（或 "4-6-3"）解析为 Topology"""
    if isinstance(text, Topology):
        return text
    if isinstance(text, str):
        parts = [p for p in text.replace("-", ",").split(",") if p.strip()]
        try:
            sizes = [int(p) for p in parts]
        except ValueError:
            raise ShapeError(f"topology must be comma-separated integers: {text!r}") from None
    else:
        sizes = [int(s) for s in text]
    return Topology.build(sizes, hidden=hidden, output=output)


def _frozen(array, shape=None):
    out = np.array(array, dtype=float)
    if shape is not None and out.shape != shape:
        raise ShapeError(f"expected shape {shape}, got {out.shape}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class WeightSet:
    """每层的权重矩阵 W^n（行数 = size(n)，列数 = size(n-1)）和偏置向量 B^n"""

    topology: Topology
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]

    def __post_init__(self):
        shapes = self.topology.weight_shapes
        if len(self.weights) != len(shapes) or len(self.biases) != len(shapes):
            raise ShapeError(f"expected {len(shapes)} layers of weights and biases")
        weights = tuple(_frozen(w, shape) for w, shape in zip(self.weights, shapes))
        biases = tuple(_frozen(b, (shape[0],)) for b, shape in zip(self.biases, shapes))
        for array in weights + biases:
            if not np.all(np.isfinite(array)):
                raise ValueError("weight set contains NaN or infinite entries")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    def __eq__(self, other):
        if not isinstance(other, WeightSet) or other.topology != self.topology:
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.weights + self.biases, other.weights + other.biases))

    __hash__ = None

    def flatten(self) -> np.ndarray:
        """按层展开的向量: W^1（行优先）, B^1, W^2, B^2, ..."""
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b)
        return np.concatenate(parts)

    @classmethod
    def from_flat(cls, topology: Topology, vector) -> "WeightSet":
        vector = np.asarray(vector, dtype=float).ravel()
        if vector.size != topology.n_params:
            raise ShapeError(f"expected {topology.n_params} parameters for {topology.describe()}, got {vector.size}")
        weights, biases, offset = [], [], 0
        for rows, cols in topology.weight_shapes:
            weights.append(vector[offset:offset + rows * cols].reshape(rows, cols))
            offset += rows * cols
            biases.append(vector[offset:offset + rows])
            offset += rows
        return cls(topology, tuple(weights), tuple(biases))

    def shifted(self, delta: float) -> "WeightSet":
        """所有权重和偏置都减去同一个标量"""
        return WeightSet(
            self.topology,
            tuple(w - delta for w in self.weights),
            tuple(b - delta for b in self.biases),
        )


@dataclass(frozen=True)
class ForwardTrace:
    """净输入 N^1..N^L 和激活值 p^0..p^L（p^0 为输入样本）"""

    net_inputs: Tuple[np.ndarray, ...]
    activations: Tuple[np.ndarray, ...]

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


@dataclass(frozen=True, eq=False)
class LabeledSet:
    """输入样本 p_j 与 one-hot 目标 t_j，每行一个样本"""

    inputs: np.ndarray
    targets: np.ndarray
    one_hot: bool = field(default=True)

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        targets = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if inputs.ndim != 2 or targets.ndim != 2:
            raise ShapeError("inputs and targets must be 2-D (patterns x values)")
        if inputs.shape[0] != targets.shape[0]:
            raise ShapeError(f"{inputs.shape[0]} inputs but {targets.shape[0]} targets")
        if self.one_hot and targets.size:
            binary = np.isin(targets, (0.0, 1.0)).all()
            if not binary or not np.all(targets.sum(axis=1) == 1.0):
                raise ShapeError("every target must be one-hot")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def input_size(self) -> int:
        return self.inputs.shape[1]

    @property
    def output_size(self) -> int:
        return self.targets.shape[1]

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.targets, axis=1)


def init_weight_set(topology: Topology, a: float, rng: np.random.Generator) -> WeightSet:
    """
    每个权重和偏置取 a * (u - 1/2)，u ~ U[0, 1)。

    :param a: (0, 1) 内的尺度，取值落在 [-a/2, a/2)
    :param rng: numpy Generator，依次抽取 W^1, B^1, W^2, B^2, ...
    """
    if not 0.0 < a < 1.0:
        raise ValueError(f"init scale a must lie in (0, 1), got {a}")
    weights, biases = [], []
    for rows, cols in topology.weight_shapes:
        weights.append(a * (rng.random((rows, cols)) - 0.5))
        biases.append(a * (rng.random(rows) - 0.5))
    return WeightSet(topology, tuple(weights), tuple(biases))


def forward_batch(ws: WeightSet, inputs) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """传播一个 (样本数 x 输入数) 矩阵，返回 (净输入, 激活值)"""
    x = np.asarray(inputs, dtype=float)
    if x.ndim != 2 or x.shape[1] != ws.topology.input_size:
        raise ShapeError(f"expected patterns of length {ws.topology.input_size}, got shape {x.shape}")
    net_inputs, activations = [], [x]
    for w, b, transfer in zip(ws.weights, ws.biases, ws.topology.transfers):
        n = activations[-1] @ w.T + b
        net_inputs.append(n)
        activations.append(transfer.evaluate(n))
    return net_inputs, activations


def network_output(ws: WeightSet, inputs) -> np.ndarray:
    return forward_batch(ws, inputs)[1][-1]


def forward(ws: WeightSet, input) -> ForwardTrace:
    x = np.asarray(input, dtype=float)
    if x.ndim != 1:
        raise ShapeError(f"forward takes a single pattern vector, got shape {x.shape}")
    net_inputs, activations = forward_batch(ws, x[np.newaxis, :])
    return ForwardTrace(tuple(n[0] for n in net_inputs), tuple(a[0] for a in activations))


def _check_data(ws: WeightSet, data: LabeledSet):
    if len(data) == 0:
        raise ValueError("dataset is empty")
    if data.input_size != ws.topology.input_size or data.output_size != ws.topology.output_size:
        raise ShapeError(
            f"data is {data.input_size}->{data.output_size} but network is {ws.topology.describe()}"
        )


def sum_squared_error(ws: WeightSet, data: LabeledSet) -> float:
    """v(x) = 对所有样本求和 (t_j - p_j)^T (t_j - p_j)"""
    _check_data(ws, data)
    error = data.targets - network_output(ws, data.inputs)
    return float(np.sum(error * error))


def classify(ws: WeightSet, input) -> int:
    """最大输出的下标，相等时取最小下标"""
    return int(np.argmax(forward(ws, input).output))


def classify_batch(ws: WeightSet, inputs) -> np.ndarray:
    return np.argmax(network_output(ws, inputs), axis=1)


def correct_classification_rate(ws: WeightSet, data: LabeledSet) -> float:
    """预测类别等于 argmax(target) 的样本百分比"""
    _check_data(ws, data)
    hits = int(np.sum(classify_batch(ws, data.inputs) == data.labels))
    return 100.0 * hits / len(data)


def evaluate(ws: WeightSet, data: LabeledSet) -> Tuple[float, float]:
    """一次前向传播得到 (SSE, 正确分类率)"""
    _check_data(ws, data)
    outputs = network_output(ws, data.inputs)
    error = data.targets - outputs
    hits = int(np.sum(np.argmax(outputs, axis=1) == data.labels))
    return float(np.sum(error * error)), 100.0 * hits / len(data)


def backward_sensitivities(ws: WeightSet, trace: ForwardTrace, target) -> List[np.ndarray]:
    """
    单个样本平方误差的敏感度 s^1..s^L。

    输出层初值为 s^L = -2 f'(N^L) * (t - p^L)，之前各层满足
    s^n = f'(N^n) * ((W^(n+1))^T s^(n+1))。对 W^n 的梯度为 s^n (p^(n-1))^T，
    对 B^n 的梯度为 s^n。
    """
    topology = ws.topology
    if len(trace.net_inputs) != topology.n_layers or len(trace.activations) != topology.n_layers + 1:
        raise ShapeError("trace does not match the weight set's layer count")
    for n, size in enumerate(topology.layer_sizes[1:]):
        if trace.net_inputs[n].shape != (size,):
            raise ShapeError(f"trace layer {n + 1} has shape {trace.net_inputs[n].shape}, expected ({size},)")
    t = np.asarray(target, dtype=float)
    if t.shape != (topology.output_size,):
        raise ShapeError(f"target must have length {topology.output_size}, got shape {t.shape}")

    sens = [None] * topology.n_layers
    last = topology.n_layers - 1
    sens[last] = -2.0 * topology.transfers[last].derivative(trace.net_inputs[last]) * (t - trace.output)
    for n in range(last - 1, -1, -1):
        sens[n] = topology.transfers[n].derivative(trace.net_inputs[n]) * (ws.weights[n + 1].T @ sens[n + 1])
    return sens


def sse_gradient(ws: WeightSet, data: LabeledSet) -> WeightSet:
    """SSE 对所有样本累加的批量梯度，形状与 ws 相同"""
    _check_data(ws, data)
    topology = ws.topology
    net_inputs, activations = forward_batch(ws, data.inputs)
    last = topology.n_layers - 1
    sens = [None] * topology.n_layers
    sens[last] = -2.0 * topology.transfers[last].derivative(net_inputs[last]) * (data.targets - activations[-1])
    for n in range(last - 1, -1, -1):
        sens[n] = topology.transfers[n].derivative(net_inputs[n]) * (sens[n + 1] @ ws.weights[n + 1])
    grad_w = tuple(s.T @ a for s, a in zip(sens, activations[:-1]))
    grad_b = tuple(s.sum(axis=0) for s in sens)
    return WeightSet(topology, grad_w, grad_b)


def flat_gradient(ws: WeightSet, data: LabeledSet) -> np.ndarray:
    return sse_gradient(ws, data).flatten()


def numeric_gradient(ws: WeightSet, data: LabeledSet, h: float = 1e-5) -> np.ndarray:
    """对每个参数按层顺序求中心差分 (SSE(theta+h) - SSE(theta-h)) / 2h"""
    if not 0.0 < h <= 1e-3:
        raise ValueError(f"step h must lie in (0, 1e-3], got {h}")
    theta = ws.flatten()
    grad = np.empty_like(theta)
    for i in range(theta.size):
        plus, minus = theta.copy(), theta.copy()
        plus[i] += h
        minus[i] -= h
        grad[i] = (
            sum_squared_error(WeightSet.from_flat(ws.topology, plus), data)
            - sum_squared_error(WeightSet.from_flat(ws.topology, minus), data)
        ) / (2.0 * h)
    return grad


def sdbp_step(ws: WeightSet, data: LabeledSet, learning_rate: float) -> WeightSet:
    """一次批量最速下降更新: W <- W - lambda * sum s (a)^T, B <- B - lambda * sum s"""
    if not learning_rate > 0:
        raise ValueError(f"learning rate must be positive, got {learning_rate}")
    grad = sse_gradient(ws, data)
    return WeightSet(
        ws.topology,
        tuple(w - learning_rate * g for w, g in zip(ws.weights, grad.weights)),
        tuple(b - learning_rate * g for b, g in zip(ws.biases, grad.biases)),
    )


@dataclass(frozen=True)
class SdbpConfig(ConfigMixin):
    learning_rate: float = SDBP_CONFIG["learning_rate"]
    max_iterations: int = SDBP_CONFIG["max_iterations"]
    init_scale: float = SDBP_CONFIG["init_scale"]
    cc_threshold: float = SDBP_CONFIG["cc_threshold"]
    sse_threshold: float = SDBP_CONFIG["sse_threshold"]

    def validate(self):
        errors = []
        if not self.learning_rate > 0:
            errors.append(f"learning_rate must be > 0: {self.learning_rate}")
        if self.max_iterations < 1:
            errors.append(f"max_iterations must be >= 1: {self.max_iterations}")
        if not 0 < self.init_scale < 1:
            errors.append(f"init_scale must lie in (0, 1): {self.init_scale}")
        if not 0 <= self.cc_threshold <= 100:
            errors.append(f"cc_threshold must lie in [0, 100]: {self.cc_threshold}")
        if self.sse_threshold < 0:
            errors.append(f"sse_threshold must be >= 0: {self.sse_threshold}")
        return errors


def sdbp_train(
    data: LabeledSet,
    topology: Topology,
    cfg: Optional[SdbpConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[WeightSet, List[TrainingRecord]]:
    """普通最速下降反向传播，返回历史最优权重和每次迭代的记录"""
    cfg = (cfg or SdbpConfig()).validated()
    rng = rng if rng is not None else np.random.default_rng()

    ws = init_weight_set(topology, cfg.init_scale, rng)
    best_ws, (best_sse, _) = ws, evaluate(ws, data)
    records = []
    for iteration in range(1, cfg.max_iterations + 1):
        ws = sdbp_step(ws, data, cfg.learning_rate)
        sse, rate = evaluate(ws, data)
        if sse < best_sse:
            best_ws, best_sse = ws, sse
        records.append(TrainingRecord(iteration, sse, best_sse, rate, None))
        logger.debug("sdbp iteration %d: sse=%.6g rate=%.2f", iteration, sse, rate)
        if rate > cfg.cc_threshold or sse <= cfg.sse_threshold:
            logger.info("sdbp converged at iteration %d (rate=%.2f, sse=%.6g)", iteration, rate, sse)
            break
    return best_ws, records
