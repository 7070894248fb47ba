"""
基于萤火虫算法的反向传播训练 (FABPNN)

每只萤火虫是一个候选 WeightSet，其亮度为训练集上的误差平方和（误差越小
吸引力越大）。每次外层迭代中最亮的萤火虫保持不动，较暗的萤火虫逐只向它
移动，调整权重和偏置后重新计算误差。吸收系数每次迭代后增大，使搜索逐步收缩。
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from ..CONFIG import FIREFLY_CONFIG, MOVEMENT_SPACES
from ..errors import ShapeError, StaleFireflyError
from .common import ConfigMixin, TrainingRecord
from .network import LabeledSet, Topology, WeightSet, evaluate, init_weight_set, sdbp_step

logger = logging.getLogger(__name__)

ERROR_SCALAR = "error-scalar"
WEIGHT_VECTOR = "weight-vector"


@dataclass(frozen=True)
class FireflyConfig(ConfigMixin):
    population_size: int = FIREFLY_CONFIG["population_size"]
    l0: float = FIREFLY_CONFIG["l0"]
    eta0: float = FIREFLY_CONFIG["eta0"]
    eta_growth: float = FIREFLY_CONFIG["eta_growth"]
    alpha: float = FIREFLY_CONFIG["alpha"]
    alpha_decay: float = FIREFLY_CONFIG["alpha_decay"]
    init_scale: float = FIREFLY_CONFIG["init_scale"]
    max_iterations: int = FIREFLY_CONFIG["max_iterations"]
    cc_threshold: float = FIREFLY_CONFIG["cc_threshold"]
    sse_threshold: float = FIREFLY_CONFIG["sse_threshold"]
    movement_space: str = FIREFLY_CONFIG["movement_space"]
    refine_steps: int = FIREFLY_CONFIG["refine_steps"]
    learning_rate: float = FIREFLY_CONFIG["learning_rate"]

    def validate(self):
        errors = []
        if self.population_size < 1:
            errors.append(f"population_size must be >= 1: {self.population_size}")
        if not self.l0 > 0:
            errors.append(f"l0 must be > 0: {self.l0}")
        if self.eta0 < 0:
            errors.append(f"eta0 must be >= 0: {self.eta0}")
        if self.eta_growth < 0:
            errors.append(f"eta_growth must be >= 0: {self.eta_growth}")
        if self.alpha < 0:
            errors.append(f"alpha must be >= 0: {self.alpha}")
        if not 0 < self.alpha_decay <= 1:
            errors.append(f"alpha_decay must lie in (0, 1]: {self.alpha_decay}")
        if not 0 < self.init_scale < 1:
            errors.append(f"init_scale must lie in (0, 1): {self.init_scale}")
        if self.max_iterations < 1:
            errors.append(f"max_iterations must be >= 1: {self.max_iterations}")
        if not 0 <= self.cc_threshold <= 100:
            errors.append(f"cc_threshold must lie in [0, 100]: {self.cc_threshold}")
        if self.sse_threshold < 0:
            errors.append(f"sse_threshold must be >= 0: {self.sse_threshold}")
        if self.movement_space not in MOVEMENT_SPACES:
            errors.append(f"movement_space must be one of {', '.join(MOVEMENT_SPACES)}: {self.movement_space}")
        if self.refine_steps < 0:
            errors.append(f"refine_steps must be >= 0: {self.refine_steps}")
        if not self.learning_rate > 0:
            errors.append(f"learning_rate must be > 0: {self.learning_rate}")
        return errors


@dataclass(frozen=True)
class Firefly:
    """候选 WeightSet 及其缓存的 SSE；移动之后、重新计算之前 ``fresh`` 为 False"""

    weights: WeightSet
    error: float
    correct_rate: Optional[float] = None
    fresh: bool = True


Population = List[Firefly]


def evaluate_firefly(weights: WeightSet, data: LabeledSet) -> Firefly:
    error, rate = evaluate(weights, data)
    return Firefly(weights, error, rate, True)


def init_population(data: LabeledSet, topology: Topology, cfg: FireflyConfig, rng) -> Population:
    """权重列表 W^L，附带每个成员的 SSE"""
    return [
        evaluate_firefly(init_weight_set(topology, cfg.init_scale, rng), data)
        for _ in range(cfg.population_size)
    ]


def rank_population(pop: Population) -> Population:
    """按误差稳定排序，最亮的在前"""
    return sorted(pop, key=lambda f: f.error)


def performance_index(errors) -> float:
    """F(v) = 种群中各 SSE 值的平方和"""
    values = np.asarray(errors, dtype=float)
    if values.size == 0:
        raise ValueError("performance index of an empty error list")
    if np.any(values < 0):
        raise ValueError("error values must be non-negative")
    return float(np.sum(values * values))


def firefly_value(firefly: Firefly, space: str):
    if space == ERROR_SCALAR:
        return firefly.error
    return firefly.weights.flatten()


def firefly_distance(fi: Firefly, fj: Firefly, space: str = ERROR_SCALAR) -> float:
    if fi.weights.topology != fj.weights.topology:
        raise ShapeError("fireflies have different topologies")
    if space == ERROR_SCALAR:
        return abs(fi.error - fj.error)
    if space == WEIGHT_VECTOR:
        return float(np.linalg.norm(fi.weights.flatten() - fj.weights.flatten()))
    raise ValueError(f"unknown movement space: {space!r}")


def light_intensity(l0: float, eta: float, d: float) -> float:
    """L = L0 * exp(-eta * d^2)"""
    if not l0 > 0:
        raise ValueError(f"l0 must be positive, got {l0}")
    if eta < 0 or d < 0:
        raise ValueError(f"eta and d must be non-negative, got eta={eta}, d={d}")
    return l0 * math.exp(-eta * d * d)


def move_firefly(fi_value, fj_value, d: float, cfg: FireflyConfig, eta: float, rng, alpha: Optional[float] = None):
    """
    f_i + L0 exp(-eta d^2) (f_j - f_i) + alpha (u - 1/2).

    error-scalar 模式下为标量；weight-vector 模式下为展开的权重向量，
    每个分量使用独立的 u。
    """
    alpha = cfg.alpha if alpha is None else alpha
    fi = np.asarray(fi_value, dtype=float)
    fj = np.asarray(fj_value, dtype=float)
    if fi.shape != fj.shape:
        raise ShapeError(f"cannot move a {fi.shape} value towards a {fj.shape} value")
    attraction = light_intensity(cfg.l0, eta, d)
    u = rng.random() if fi.ndim == 0 else rng.random(fi.shape)
    moved = fi + attraction * (fj - fi) + alpha * (u - 0.5)
    return float(moved) if fi.ndim == 0 else moved


def apply_movement(firefly: Firefly, moved, space: str = ERROR_SCALAR) -> Firefly:
    """
    用移动后的值调整萤火虫的权重，返回的误差已过期。

    error-scalar: 每个元素 W <- W - df, B <- B - df。
    weight-vector: 移动后的向量直接作为新的展开权重。
    """
    if space == ERROR_SCALAR:
        weights = firefly.weights.shifted(float(moved))
    elif space == WEIGHT_VECTOR:
        moved = np.asarray(moved, dtype=float)
        if moved.shape != (firefly.weights.topology.n_params,):
            raise ShapeError(f"moved vector has shape {moved.shape}, expected ({firefly.weights.topology.n_params},)")
        weights = WeightSet.from_flat(firefly.weights.topology, moved)
    else:
        raise ValueError(f"unknown movement space: {space!r}")
    return Firefly(weights, firefly.error, None, False)


def update_absorption(eta: float, delta: float) -> float:
    """eta <- eta * (1 + delta)"""
    if eta < 0 or delta < 0:
        raise ValueError(f"eta and delta must be non-negative, got eta={eta}, delta={delta}")
    return eta * (1.0 + delta)


def train_iteration(
    pop: Population,
    data: LabeledSet,
    cfg: FireflyConfig,
    eta: float,
    rng,
    alpha: Optional[float] = None,
    iteration: int = 1,
) -> Tuple[Population, TrainingRecord]:
    """
    内层循环的一遍。

    误差最小的萤火虫只选一次作为 f_j。其余萤火虫 f_i 按列表顺序处理，仅当
    f_j < f_i 严格成立时向其移动，并在处理下一只之前重新计算 SSE。
    返回重新排序后的种群和本次迭代的记录。
    """
    if not pop:
        raise ValueError("population is empty")
    stale = [k for k, f in enumerate(pop) if not f.fresh]
    if stale:
        raise StaleFireflyError(f"fireflies {stale} have stale errors")
    space = cfg.movement_space
    pop = list(pop)

    j = int(np.argmin([f.error for f in pop]))
    brightest = pop[j]
    fj_value = firefly_value(brightest, space)
    moves = 0
    for k in range(len(pop)):
        if k == j:
            continue
        fi = pop[k]
        if not brightest.error < fi.error:
            continue
        d = firefly_distance(fi, brightest, space)
        moved = move_firefly(firefly_value(fi, space), fj_value, d, cfg, eta, rng, alpha=alpha)
        weights = apply_movement(fi, moved, space).weights
        for _ in range(cfg.refine_steps):
            weights = sdbp_step(weights, data, cfg.learning_rate)
        pop[k] = evaluate_firefly(weights, data)
        moves += 1
        logger.debug("firefly %d: sse %.6g -> %.6g, rate %.2f", k, fi.error, pop[k].error, pop[k].correct_rate)

    ranked = rank_population(pop)
    errors = [f.error for f in ranked]
    record = TrainingRecord(
        iteration=iteration,
        avg_sse=float(np.mean(errors)),
        best_sse=ranked[0].error,
        correct_rate=ranked[0].correct_rate,
        eta=eta,
    )
    logger.debug(
        "iteration %d: %d moves, avg sse %.6g, best %.6g, rate %.2f, eta %.4g",
        iteration, moves, record.avg_sse, record.best_sse, record.correct_rate, eta,
    )
    return ranked, record


def train(
    data: LabeledSet,
    topology: Topology,
    cfg: Optional[FireflyConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[WeightSet, List[TrainingRecord]]:
    """
    运行 FABPNN，直到最优萤火虫的正确率超过 cc_threshold、种群平均 SSE
    达到 sse_threshold 或迭代数达到 max_iterations。

    返回历史最优 WeightSet 以及每次迭代的 TrainingRecord。
    """
    cfg = (cfg or FireflyConfig()).validated()
    rng = rng if rng is not None else np.random.default_rng()

    pop = rank_population(init_population(data, topology, cfg, rng))
    logger.info(
        "initial population of %d fireflies on %s: performance index %.6g, best sse %.6g",
        len(pop), topology.describe(), performance_index([f.error for f in pop]), pop[0].error,
    )
    best_weights, best_sse = pop[0].weights, pop[0].error
    eta, alpha = cfg.eta0, cfg.alpha
    records = []
    for iteration in range(1, cfg.max_iterations + 1):
        pop, record = train_iteration(pop, data, cfg, eta, rng, alpha=alpha, iteration=iteration)
        if pop[0].error < best_sse:
            best_weights, best_sse = pop[0].weights, pop[0].error
        record = replace(record, best_sse=min(record.best_sse, best_sse))
        records.append(record)
        if record.correct_rate > cfg.cc_threshold or record.avg_sse <= cfg.sse_threshold:
            logger.info(
                "converged at iteration %d: rate %.2f%%, avg sse %.6g",
                iteration, record.correct_rate, record.avg_sse,
            )
            break
        eta = update_absorption(eta, cfg.eta_growth)
        alpha *= cfg.alpha_decay
    else:
        logger.info("stopped after %d iterations: best sse %.6g", cfg.max_iterations, best_sse)
    return best_weights, records
