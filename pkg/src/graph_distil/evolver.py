"""
graph_distil 遗传算法模块
处理基因组（双边门与符合测量序列）的适应度评估、变异、交叉以及精英式演化循环
"""

import asyncio
import json
import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .bell_sim import (
    NOISELESS,
    BellDiagonalState,
    NoiseModel,
    apply_bilateral_gate,
    insert_pair,
    measure_pair,
)
from .config import GAConfig
from .protocol_stats import BellDiagonalInput
from .symplectic import CNOT, CZ, MZ, Gate

logger = logging.getLogger(__name__)

CONVERGENCE_RULE = "best fitness unchanged for convergence_generations consecutive generations"


class GeneKind(str, Enum):
    BCNOT = "BCNOT"
    BCZ = "BCZ"
    MEASURE = "MEASURE"


@dataclass(frozen=True)
class Gene:
    """一个操作：BCNOT(control, target)、BCZ(i, j) 或 MEASURE(i)"""
    kind: GeneKind
    qubits: Tuple[int, ...]

    def __post_init__(self):
        kind = GeneKind(self.kind)
        qubits = tuple(int(q) for q in self.qubits)
        arity = 1 if kind is GeneKind.MEASURE else 2
        if len(qubits) != arity:
            raise ValueError(f"{kind.value} acts on {arity} register(s), got {qubits}")
        if arity == 2 and qubits[0] == qubits[1]:
            raise ValueError(f"{kind.value} needs two distinct registers, got {qubits}")
        if kind is GeneKind.BCZ:
            qubits = tuple(sorted(qubits))
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", qubits)

    def to_gate(self) -> Gate:
        if self.kind is GeneKind.BCNOT:
            return CNOT(*self.qubits)
        if self.kind is GeneKind.BCZ:
            return CZ(*self.qubits)
        return MZ(self.qubits[0])

    def to_json(self) -> dict:
        return {"type": self.kind.value, "q": list(self.qubits)}

    @classmethod
    def from_json(cls, data: dict) -> "Gene":
        return cls(GeneKind(data["type"]), tuple(data["q"]))

    def __str__(self) -> str:
        return f"{self.kind.value}({','.join(str(q) for q in self.qubits)})"


@dataclass(frozen=True)
class Genome:
    """
    门序列以及寄存器宽度、原始对预算和保留对数。前 k 个寄存器为保留对。
    被测寄存器在预算允许时立即用新的原始对重新初始化。
    """
    genes: Tuple[Gene, ...]
    register_width: int
    raw_pair_budget: int
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(self.genes))
        if not 1 <= self.k <= self.register_width <= self.raw_pair_budget:
            raise ValueError(
                f"Need 1 <= k <= register_width <= raw_pair_budget, got "
                f"k={self.k}, width={self.register_width}, budget={self.raw_pair_budget}"
            )

    def __len__(self) -> int:
        return len(self.genes)

    def encoding(self) -> str:
        return ";".join(str(g) for g in self.genes)

    def with_genes(self, genes: Sequence[Gene]) -> "Genome":
        return Genome(tuple(genes), self.register_width, self.raw_pair_budget, self.k)

    def raw_pairs_used(self) -> int:
        used = self.register_width
        for gene in self.genes:
            if gene.kind is GeneKind.MEASURE and used < self.raw_pair_budget:
                used += 1
        return used

    def is_valid(self) -> bool:
        """寄存器在范围内、保留寄存器不被测量、不使用已测且未重新初始化的寄存器"""
        live = [True] * self.register_width
        used = self.register_width
        for gene in self.genes:
            for q in gene.qubits:
                if not 0 <= q < self.register_width or not live[q]:
                    return False
            if gene.kind is GeneKind.MEASURE:
                q = gene.qubits[0]
                if q < self.k:
                    return False
                if used < self.raw_pair_budget:
                    used += 1
                else:
                    live[q] = False
        return used <= self.raw_pair_budget

    def to_json(self) -> dict:
        return {
            "register_width": self.register_width,
            "raw_pair_budget": self.raw_pair_budget,
            "k": self.k,
            "genes": [g.to_json() for g in self.genes],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Genome":
        genes = tuple(Gene.from_json(g) for g in data["genes"])
        return cls(genes, int(data["register_width"]), int(data["raw_pair_budget"]), int(data.get("k", 1)))


def genome_to_circuit(genome: Genome):
    """
    把基因组导出为电路 JSON 所用的 Circuit。

    异常:
        ValueError: 基因组重用了被测寄存器、保留寄存器被测量，或有非保留寄存器未被测量。
    """
    from .circuit_synth import Circuit

    measured = set()
    for gene in genome.genes:
        for q in gene.qubits:
            if q in measured:
                raise ValueError(f"{gene} re-uses measured register {q}; circuits cannot re-initialise pairs")
            if not 0 <= q < genome.register_width:
                raise ValueError(f"{gene} acts outside {genome.register_width} registers")
        if gene.kind is GeneKind.MEASURE:
            if gene.qubits[0] < genome.k:
                raise ValueError(f"{gene} measures kept register {gene.qubits[0]}")
            measured.add(gene.qubits[0])
    missing = set(range(genome.k, genome.register_width)) - measured
    if missing:
        raise ValueError(f"Registers {sorted(missing)} are neither kept nor measured")
    return Circuit(genome.register_width, genome.k, tuple(g.to_gate() for g in genome.genes))


def fitness(genome: Genome, fidelity: float, noise: NoiseModel = NOISELESS) -> float:
    """
    全部符合结果被接受（b=0）时保留对的联合单位系数；无效基因组返回 −inf。
    其余未测寄存器被求迹。
    """
    if not genome.is_valid():
        return float("-inf")
    width = genome.register_width
    werner = BellDiagonalInput.werner(fidelity, 1).pairs[0]
    state = BellDiagonalState.from_input(BellDiagonalInput.werner(fidelity, width))
    slot: List[Optional[int]] = list(range(width))
    used = width
    for gene in genome.genes:
        if gene.kind is GeneKind.MEASURE:
            q = gene.qubits[0]
            removed = slot[q]
            branch = measure_pair(state, removed, noise)[0]
            if branch.state is None:
                return float("-inf")
            state = branch.state
            slot = [s if s is None or s < removed else (None if s == removed else s - 1) for s in slot]
            if used < genome.raw_pair_budget:
                state = insert_pair(state, werner)
                slot[q] = state.m - 1
                used += 1
            continue
        gate = Gate(gene.to_gate().kind, tuple(slot[q] for q in gene.qubits))
        state = apply_bilateral_gate(state, gate, noise)
    index: List = [slice(None)] * (2 * state.m)
    for q in range(genome.k):
        x_axis, z_axis = state.pair_axes(slot[q])
        index[x_axis] = 0
        index[z_axis] = 0
    return float(state._tensor()[tuple(index)].sum() / state.total)


# ---------------------------------------------------------------------------
# Variation

def _gene_kinds(width: int, k: int) -> List[GeneKind]:
    kinds = []
    if width >= 2:
        kinds += [GeneKind.BCNOT, GeneKind.BCZ]
    if width > k:
        kinds.append(GeneKind.MEASURE)
    return kinds


def random_gene(genome: Genome, rng: random.Random, kinds: Optional[Sequence[GeneKind]] = None) -> Optional[Gene]:
    kinds = list(kinds) if kinds is not None else _gene_kinds(genome.register_width, genome.k)
    if not kinds:
        return None
    kind = rng.choice(kinds)
    if kind is GeneKind.MEASURE:
        return Gene(kind, (rng.randrange(genome.k, genome.register_width),))
    return Gene(kind, tuple(rng.sample(range(genome.register_width), 2)))


def random_genome(
    n: int,
    k: int,
    length: int,
    rng: random.Random,
    register_width: Optional[int] = None,
) -> Genome:
    width = n if register_width is None else register_width
    empty = Genome((), width, n, k)
    genes = [random_gene(empty, rng) for _ in range(length)]
    return empty.with_genes([g for g in genes if g is not None])


def mutate(genome: Genome, mutation_type: int, rng: random.Random) -> Genome:
    """
    1 插入随机基因，2 删除随机基因，3 交换两个基因的顺序，4 重新参数化一个基因（门类型或寄存器）。
    """
    genes = list(genome.genes)
    if mutation_type == 1:
        gene = random_gene(genome, rng)
        if gene is not None:
            genes.insert(rng.randint(0, len(genes)), gene)
    elif mutation_type == 2:
        if genes:
            del genes[rng.randrange(len(genes))]
    elif mutation_type == 3:
        if len(genes) >= 2:
            i, j = rng.sample(range(len(genes)), 2)
            genes[i], genes[j] = genes[j], genes[i]
    elif mutation_type == 4:
        if genes:
            i = rng.randrange(len(genes))
            old = genes[i]
            if old.kind is GeneKind.MEASURE:
                genes[i] = random_gene(genome, rng, [GeneKind.MEASURE])
            elif rng.random() < 0.5:
                other = GeneKind.BCZ if old.kind is GeneKind.BCNOT else GeneKind.BCNOT
                genes[i] = Gene(other, old.qubits)
            else:
                genes[i] = random_gene(genome, rng, [old.kind])
    else:
        raise ValueError(f"Unknown mutation type {mutation_type}")
    return genome.with_genes(genes)


def crossover(a: Genome, b: Genome, rng: random.Random) -> Genome:
    """单点拼接：a 的前缀接 b 的后缀"""
    i = rng.randint(0, len(a))
    j = rng.randint(0, len(b))
    return a.with_genes(a.genes[:i] + b.genes[j:])


# ---------------------------------------------------------------------------
# Evolution

async def evaluate_population(
    genomes: Sequence[Genome],
    fidelity: float,
    noise: NoiseModel = NOISELESS,
    workers: int = 1,
) -> List[float]:
    """
    在线程池中并行评估适应度，结果顺序与输入一致。

    参数:
        workers (int): 线程数；结果与之无关。
    """
    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        tasks = [loop.run_in_executor(executor, fitness, g, fidelity, noise) for g in genomes]
        return list(await asyncio.gather(*tasks))


@dataclass
class EvolutionResult:
    """最优基因组、每代最优适应度历史和停止原因"""
    best: Genome
    best_fitness: float
    history: List[float] = field(default_factory=list)
    stop_reason: str = "max_generations"

    @property
    def generations(self) -> int:
        return len(self.history) - 1

    def to_manifest(self, n: int, fidelity: float, noise: NoiseModel, config: GAConfig) -> dict:
        return {
            "version": __version__,
            "n": n,
            "k": self.best.k,
            "fidelity": fidelity,
            "noise": {"p_g": noise.p_g, "p_m": noise.p_m, "measurement_mode": noise.measurement_mode},
            "config": config.model_dump(),
            "seed": config.seed,
            "convergence_rule": CONVERGENCE_RULE,
            "stop_reason": self.stop_reason,
            "best_genome": self.best.to_json(),
            "best_fitness": self.best_fitness,
            "history": self.history,
        }

    def save_manifest(self, path: Path, n: int, fidelity: float, noise: NoiseModel, config: GAConfig):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_manifest(n, fidelity, noise, config), f, ensure_ascii=False, indent=2)


def _rank(genomes: Sequence[Genome], cache: Dict[str, float], size: int) -> List[Genome]:
    unique: Dict[str, Genome] = {}
    for g in genomes:
        unique.setdefault(g.encoding(), g)
    ordered = sorted(unique.values(), key=lambda g: (-cache[g.encoding()], g.encoding()))
    return ordered[:size]


async def run_evolution(
    n: int,
    k: int,
    fidelity: float,
    noise: NoiseModel = NOISELESS,
    config: Optional[GAConfig] = None,
    register_width: Optional[int] = None,
    workers: int = 1,
) -> EvolutionResult:
    """
    精英式遗传算法。每代由当前种群、随机父母对的交叉子代以及每个个体每种类型的突变体组成，
    评估后按 (−适应度, 编码) 排序截断到种群大小。
    """
    config = config or GAConfig()
    rng = random.Random(config.seed)
    cache: Dict[str, float] = {}

    async def evaluate(candidates: Sequence[Genome]):
        fresh: Dict[str, Genome] = {}
        for g in candidates:
            if g.encoding() not in cache:
                fresh.setdefault(g.encoding(), g)
        scores = await evaluate_population(list(fresh.values()), fidelity, noise, workers)
        cache.update(zip(fresh.keys(), scores))

    def admissible(g: Genome) -> bool:
        return len(g) <= config.max_genome_length and g.raw_pairs_used() <= g.raw_pair_budget

    initial_length = min(n + 2, config.max_genome_length)
    population = [random_genome(n, k, initial_length, rng, register_width) for _ in range(config.population)]
    await evaluate(population)
    population = _rank(population, cache, config.population)
    best = population[0]
    history = [cache[best.encoding()]]
    stop_reason = "max_generations"
    started = time.monotonic()
    unchanged = 0

    for generation in range(1, config.max_generations + 1):
        offspring: List[Genome] = []
        if len(population) >= 2:
            for _ in range(config.parent_pairs):
                a, b = rng.sample(population, 2)
                offspring.extend(crossover(a, b, rng) for _ in range(config.children_per_pair))
        for individual in population:
            for mutation_type in range(1, config.mutation_types + 1):
                offspring.extend(mutate(individual, mutation_type, rng) for _ in range(config.mutants_per_type))
        offspring = [g for g in offspring if admissible(g)]
        await evaluate(offspring)
        population = _rank(population + offspring, cache, config.population)
        score = cache[population[0].encoding()]
        unchanged = unchanged + 1 if score == history[-1] else 0
        best = population[0]
        history.append(score)
        logger.info("generation %d: best %.12f (%s)", generation, score, best.encoding())
        if unchanged >= config.convergence_generations:
            stop_reason = "converged"
            break
        if config.wallclock_budget is not None and time.monotonic() - started > config.wallclock_budget:
            stop_reason = "wallclock"
            break

    return EvolutionResult(best, history[-1], history, stop_reason)


def evolve(
    n: int,
    k: int,
    fidelity: float,
    noise: NoiseModel = NOISELESS,
    config: Optional[GAConfig] = None,
    register_width: Optional[int] = None,
    workers: int = 1,
) -> EvolutionResult:
    """run_evolution 的同步入口"""
    return asyncio.run(run_evolution(n, k, fidelity, noise, config, register_width, workers))
