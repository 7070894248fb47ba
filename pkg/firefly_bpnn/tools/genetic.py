"""
基于遗传算法的反向传播训练 (GABPNN)，作为对比基线。

对展开的网络权重做实数编码遗传算法：锦标赛选择、算术交叉、高斯变异和
精英保留。精英个体每代做若干步最速下降（拉马克式细化），反向传播由此
进入遗传循环。
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..CONFIG import GA_CONFIG
from ..errors import ShapeError
from .common import ConfigMixin, TrainingRecord
from .network import LabeledSet, Topology, WeightSet, evaluate, init_weight_set, sdbp_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaConfig(ConfigMixin):
    population_size: int = GA_CONFIG["population_size"]
    crossover_rate: float = GA_CONFIG["crossover_rate"]
    mutation_rate: float = GA_CONFIG["mutation_rate"]
    mutation_sigma: float = GA_CONFIG["mutation_sigma"]
    tournament_size: int = GA_CONFIG["tournament_size"]
    elite_count: int = GA_CONFIG["elite_count"]
    refine_steps: int = GA_CONFIG["refine_steps"]
    learning_rate: float = GA_CONFIG["learning_rate"]
    max_generations: int = GA_CONFIG["max_generations"]
    init_scale: float = GA_CONFIG["init_scale"]
    cc_threshold: float = GA_CONFIG["cc_threshold"]
    sse_threshold: float = GA_CONFIG["sse_threshold"]

    def validate(self):
        errors = []
        if self.population_size < 1:
            errors.append(f"population_size must be >= 1: {self.population_size}")
        if not 0 <= self.crossover_rate <= 1:
            errors.append(f"crossover_rate must lie in [0, 1]: {self.crossover_rate}")
        if not 0 <= self.mutation_rate <= 1:
            errors.append(f"mutation_rate must lie in [0, 1]: {self.mutation_rate}")
        if not self.mutation_sigma > 0:
            errors.append(f"mutation_sigma must be > 0: {self.mutation_sigma}")
        if self.tournament_size < 2:
            errors.append(f"tournament_size must be >= 2: {self.tournament_size}")
        if not 0 <= self.elite_count <= self.population_size:
            errors.append(f"elite_count must lie in [0, population_size]: {self.elite_count}")
        if self.refine_steps < 0:
            errors.append(f"refine_steps must be >= 0: {self.refine_steps}")
        if not self.learning_rate > 0:
            errors.append(f"learning_rate must be > 0: {self.learning_rate}")
        if self.max_generations < 1:
            errors.append(f"max_generations must be >= 1: {self.max_generations}")
        if not 0 < self.init_scale < 1:
            errors.append(f"init_scale must lie in (0, 1): {self.init_scale}")
        if not 0 <= self.cc_threshold <= 100:
            errors.append(f"cc_threshold must lie in [0, 100]: {self.cc_threshold}")
        if self.sse_threshold < 0:
            errors.append(f"sse_threshold must be >= 0: {self.sse_threshold}")
        return errors


@dataclass(frozen=True, eq=False)
class Chromosome:
    """按层顺序展开的权重；评估后 fitness = 1 / (1 + SSE)"""

    genes: np.ndarray
    fitness: Optional[float] = None
    sse: Optional[float] = None
    correct_rate: Optional[float] = None

    def __post_init__(self):
        genes = np.array(self.genes, dtype=float).ravel()
        genes.setflags(write=False)
        object.__setattr__(self, "genes", genes)

    def __eq__(self, other):
        if not isinstance(other, Chromosome):
            return NotImplemented
        return np.array_equal(self.genes, other.genes)

    __hash__ = None


def encode(ws: WeightSet) -> Chromosome:
    return Chromosome(ws.flatten())


def decode(c: Chromosome, topology: Topology) -> WeightSet:
    if c.genes.size != topology.n_params:
        raise ShapeError(f"chromosome has {c.genes.size} genes, {topology.describe()} needs {topology.n_params}")
    return WeightSet.from_flat(topology, c.genes)


def fitness(c: Chromosome, data: LabeledSet, topology: Topology) -> float:
    return evaluate_chromosome(c, data, topology).fitness


def evaluate_chromosome(c: Chromosome, data: LabeledSet, topology: Topology) -> Chromosome:
    sse, rate = evaluate(decode(c, topology), data)
    return Chromosome(c.genes, 1.0 / (1.0 + sse), sse, rate)


def tournament_select(pop: Sequence[Chromosome], k: int, rng) -> Chromosome:
    """随机抽取 k 个不同成员取最优，相同时取种群下标较小者"""
    if not pop:
        raise ValueError("cannot select from an empty population")
    if k < 1:
        raise ValueError(f"tournament size must be >= 1, got {k}")
    if any(c.fitness is None for c in pop):
        raise ValueError("tournament over unevaluated chromosomes")
    entrants = np.sort(rng.choice(len(pop), size=min(k, len(pop)), replace=False))
    winner = max(entrants, key=lambda i: pop[i].fitness)
    return pop[int(winner)]


def arithmetic_crossover(p1: Chromosome, p2: Chromosome, rng) -> Tuple[Chromosome, Chromosome]:
    """child1 = u p1 + (1-u) p2, child2 = (1-u) p1 + u p2，每对父代一个 u"""
    if p1.genes.shape != p2.genes.shape:
        raise ShapeError("parents have different gene counts")
    u = rng.random()
    g1, g2 = p1.genes, p2.genes
    # 写成偏移形式，相同父代可精确复现
    return Chromosome(g2 + u * (g1 - g2)), Chromosome(g1 + u * (g2 - g1))


def gaussian_mutate(c: Chromosome, rate: float, sigma: float, rng) -> Chromosome:
    """每个基因以概率 rate 独立加上 N(0, sigma^2) 噪声"""
    if not 0 <= rate <= 1:
        raise ValueError(f"mutation rate must lie in [0, 1], got {rate}")
    if not sigma > 0:
        raise ValueError(f"mutation sigma must be positive, got {sigma}")
    mask = rng.random(c.genes.size) < rate
    noise = rng.normal(0.0, sigma, c.genes.size)
    return Chromosome(np.where(mask, c.genes + noise, c.genes))


def _refine(c: Chromosome, data: LabeledSet, topology: Topology, cfg: GaConfig) -> Chromosome:
    if cfg.refine_steps == 0:
        return c
    ws = decode(c, topology)
    for _ in range(cfg.refine_steps):
        ws = sdbp_step(ws, data, cfg.learning_rate)
    refined = evaluate_chromosome(encode(ws), data, topology)
    return refined if refined.sse <= c.sse else c


def ga_train(
    data: LabeledSet,
    topology: Topology,
    cfg: Optional[GaConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[WeightSet, List[TrainingRecord]]:
    """带精英保留的世代遗传算法，返回历史最优权重和每代的记录"""
    cfg = (cfg or GaConfig()).validated()
    rng = rng if rng is not None else np.random.default_rng()

    population = [
        evaluate_chromosome(encode(init_weight_set(topology, cfg.init_scale, rng)), data, topology)
        for _ in range(cfg.population_size)
    ]
    best = max(population, key=lambda c: c.fitness)
    logger.info("initial GA population of %d on %s: best sse %.6g", len(population), topology.describe(), best.sse)

    records = []
    for generation in range(1, cfg.max_generations + 1):
        ranked = sorted(population, key=lambda c: -c.fitness)
        elites = [_refine(c, data, topology, cfg) for c in ranked[:cfg.elite_count]]
        population = elites + ranked[cfg.elite_count:]

        leader = max(population, key=lambda c: c.fitness)
        if leader.sse < best.sse:
            best = leader
        record = TrainingRecord(
            iteration=generation,
            avg_sse=float(np.mean([c.sse for c in population])),
            best_sse=best.sse,
            correct_rate=leader.correct_rate,
            eta=None,
        )
        records.append(record)
        logger.debug(
            "generation %d: avg sse %.6g, best %.6g, rate %.2f",
            generation, record.avg_sse, record.best_sse, record.correct_rate,
        )
        if record.correct_rate > cfg.cc_threshold or record.avg_sse <= cfg.sse_threshold:
            logger.info("GA converged at generation %d: rate %.2f%%", generation, record.correct_rate)
            break
        if generation == cfg.max_generations:
            break

        offspring = []
        while len(elites) + len(offspring) < cfg.population_size:
            p1 = tournament_select(population, cfg.tournament_size, rng)
            p2 = tournament_select(population, cfg.tournament_size, rng)
            if rng.random() < cfg.crossover_rate:
                children = arithmetic_crossover(p1, p2, rng)
            else:
                children = (Chromosome(p1.genes), Chromosome(p2.genes))
            for child in children:
                if len(elites) + len(offspring) < cfg.population_size:
                    mutated = gaussian_mutate(child, cfg.mutation_rate, cfg.mutation_sigma, rng)
                    offspring.append(evaluate_chromosome(mutated, data, topology))
        population = elites + offspring

    return decode(best, topology), records
