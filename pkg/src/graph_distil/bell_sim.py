"""
graph_distil Bell对角模拟模块
处理Bell对角态在双局域门、门噪声与测量噪声下的精确演化（完整保留各对之间的关联）
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import SizeLimitError
from .protocol_stats import BellDiagonalInput, PAIR_TABLE_ORDER
from .symplectic import Gate, GateKind, gate_generator

logger = logging.getLogger(__name__)

MAX_PAIRS = 12


@dataclass(frozen=True)
class NoiseModel:
    """
    p_g：双比特门去极化概率；p_m：测量结果翻转概率。
    measurement_mode 为 "parity" 时奇偶校验位以 p_m 翻转，"per_party" 时两方各自以 p_m 翻转。
    """
    p_g: float = 0.0
    p_m: float = 0.0
    measurement_mode: str = "parity"

    def __post_init__(self):
        for name in ("p_g", "p_m"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.measurement_mode not in ("parity", "per_party"):
            raise ValueError(f"Unknown measurement mode {self.measurement_mode!r}")

    @property
    def flip_probability(self) -> float:
        if self.measurement_mode == "per_party":
            return 2.0 * self.p_m * (1.0 - self.p_m)
        return self.p_m

    @classmethod
    def from_config(cls, config) -> "NoiseModel":
        return cls(config.p_g, config.p_m, config.measurement_mode)


NOISELESS = NoiseModel()


@dataclass(frozen=True, eq=False)
class BellDiagonalState:
    """
    m 对的联合Bell标签分布，下标为 x | z<<m；每对的标签 (x,z)：(0,0)=Φ⁺，(1,0)=Ψ⁺，(0,1)=Φ⁻，(1,1)=Ψ⁻。
    """
    m: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (1 << (2 * self.m),):
            raise ValueError(f"Expected {1 << (2 * self.m)} probabilities, got shape {probs.shape}")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_input(cls, value: BellDiagonalInput) -> "BellDiagonalState":
        if value.n > MAX_PAIRS:
            raise SizeLimitError(f"Simulation limited to {MAX_PAIRS} pairs, got {value.n}")
        return cls(value.n, value.joint_distribution())

    @classmethod
    def uniform(cls, m: int) -> "BellDiagonalState":
        size = 1 << (2 * m)
        return cls(m, np.full(size, 1.0 / size))

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def _tensor(self) -> np.ndarray:
        return self.probs.reshape((2,) * (2 * self.m))

    def _axis(self, bit: int) -> int:
        return 2 * self.m - 1 - bit

    def pair_axes(self, i: int) -> Tuple[int, int]:
        """第 i 对的 (x 轴, z 轴)"""
        return self._axis(i), self._axis(self.m + i)


@lru_cache(maxsize=32)
def _permutation(gate: Gate, m: int) -> np.ndarray:
    labels = np.arange(1 << (2 * m), dtype=np.uint64)
    return gate_generator(gate, m).apply_array(labels).astype(np.int64)


def _check_pairs(state: BellDiagonalState, qubits: Sequence[int]):
    for q in qubits:
        if not 0 <= q < state.m:
            raise IndexError(f"Pair {q} out of range for {state.m} pairs")


def apply_label_map(state: BellDiagonalState, gate: Gate) -> BellDiagonalState:
    """无噪声的标签置换：new[M v] = probs[v]"""
    _check_pairs(state, gate.qubits)
    out = np.empty_like(state.probs)
    out[_permutation(gate, state.m)] = state.probs
    return BellDiagonalState(state.m, out)


def depolarize_pairs(state: BellDiagonalState, pairs: Sequence[int], p: float) -> BellDiagonalState:
    """以概率 p 把给定各对的条件分布替换为均匀分布，保留其余部分的边缘"""
    if p == 0.0:
        return state
    tensor = state._tensor()
    axes = tuple(a for q in pairs for a in state.pair_axes(q))
    marginal = tensor.sum(axis=axes, keepdims=True) / float(1 << (2 * len(pairs)))
    mixed = (1.0 - p) * tensor + p * np.broadcast_to(marginal, tensor.shape)
    return BellDiagonalState(state.m, mixed.reshape(-1))


def apply_bilateral_gate(
    state: BellDiagonalState,
    gate: Gate,
    noise: NoiseModel = NOISELESS,
) -> BellDiagonalState:
    """
    双边CNOT或CZ：先做标签置换（BCNOT：x_j ^= x_i，z_i ^= z_j），再以 p_g 对两对做去极化。

    异常:
        IndexError: 对下标越界。
        ValueError: 不是双比特门。
    """
    if not gate.is_two_qubit:
        raise ValueError(f"{gate} is not a bilateral two-pair gate")
    permuted = apply_label_map(state, gate)
    return depolarize_pairs(permuted, gate.qubits, noise.p_g)


@dataclass(frozen=True)
class MeasurementBranch:
    """测量的一个分支；概率为零时 state 为 None"""
    bit: int
    probability: float
    state: Optional[BellDiagonalState]


def measure_pair(state: BellDiagonalState, i: int, noise: NoiseModel = NOISELESS) -> List[MeasurementBranch]:
    """
    Z基测量第 i 对，报告符合位（标签的 x 分量），以翻转概率出错。
    返回两个分支，后验态去掉了被测的对。
    """
    _check_pairs(state, (i,))
    tensor = state._tensor()
    x_axis, z_axis = state.pair_axes(i)
    flip = noise.flip_probability
    by_x = [np.take(tensor, bit, axis=x_axis) for bit in (0, 1)]
    # z axes sit before x axes, so dropping x_axis leaves z_axis in place
    reduced = [part.sum(axis=z_axis) for part in by_x]
    branches = []
    for reported in (0, 1):
        weight_true = 1.0 - flip
        weights = (weight_true, flip) if reported == 0 else (flip, weight_true)
        posterior = weights[0] * reduced[0] + weights[1] * reduced[1]
        probability = float(posterior.sum())
        if probability > 0.0:
            after = BellDiagonalState(state.m - 1, (posterior / probability).reshape(-1))
        else:
            after = None
        branches.append(MeasurementBranch(reported, probability, after))
    return branches


def insert_pair(state: BellDiagonalState, coefficients: Sequence[float]) -> BellDiagonalState:
    """
    追加一个新的原始对（系数 (p_I, p_X, p_Y, p_Z)），作为第 m 对，与已有各对独立。
    """
    if state.m + 1 > MAX_PAIRS:
        raise SizeLimitError(f"Simulation limited to {MAX_PAIRS} pairs")
    table = np.array([coefficients[i] for i in PAIR_TABLE_ORDER], dtype=float).reshape(2, 2)
    # table[z, x] for the new pair
    size = 1 << state.m
    old = state.probs.reshape(size, size)
    joint = np.einsum("ab,cd->cadb", old, table)
    return BellDiagonalState(state.m + 1, joint.reshape(-1))


@dataclass
class SimulationResult:
    """每个症状的 (概率, 4^k 输出系数)；保留对按原编号升序排列"""
    n: int
    k: int
    kept: Tuple[int, ...]
    measured: Tuple[int, ...]
    branches: Dict[int, Tuple[float, np.ndarray]]

    def probability(self, b: int = 0) -> float:
        return self.branches[b][0]

    def coefficients(self, b: int = 0) -> np.ndarray:
        return self.branches[b][1]

    def fidelity(self, b: int = 0) -> float:
        p, coeffs = self.branches[b]
        if p <= 0.0:
            raise ValueError(f"Syndrome {b} occurs with probability zero")
        return float(coeffs[0])


def simulate(
    circuit,
    value: Union[float, BellDiagonalInput],
    noise: NoiseModel = NOISELESS,
) -> SimulationResult:
    """
    对电路的全部症状做精确分支树求值。H、S 为无噪声标签映射，CZ/CNOT 为带噪双边门，MZ 为带噪测量。

    参数:
        circuit (Circuit): 要模拟的电路。
        value: Werner 保真度或一般Bell对角输入。

    异常:
        SizeLimitError: 超过 12 对。
    """
    n = circuit.n
    if n > MAX_PAIRS:
        raise SizeLimitError(f"Simulation limited to {MAX_PAIRS} pairs, got {n}")
    if not isinstance(value, BellDiagonalInput):
        value = BellDiagonalInput.werner(float(value), n)
    if value.n != n:
        raise ValueError(f"Input describes {value.n} pairs, circuit uses {n}")
    measured = circuit.measured
    kept = circuit.kept
    bit_of = {q: j for j, q in enumerate(measured)}

    # each branch: (syndrome, probability, state, position of each circuit qubit)
    branches = [(0, 1.0, BellDiagonalState.from_input(value), list(range(n)))]
    for gate in circuit.gates:
        next_branches = []
        for syndrome, probability, state, position in branches:
            if state is None:
                next_branches.append((syndrome, probability, state, position))
                continue
            if gate.kind is GateKind.MZ:
                q = gate.qubits[0]
                slot = position[q]
                for branch in measure_pair(state, slot, noise):
                    new_position = [p if p is None or p < slot else (None if p == slot else p - 1) for p in position]
                    next_branches.append(
                        (syndrome | (branch.bit << bit_of[q]), probability * branch.probability, branch.state, new_position)
                    )
                continue
            mapped = Gate(gate.kind, tuple(position[q] for q in gate.qubits))
            if gate.is_two_qubit:
                state = apply_bilateral_gate(state, mapped, noise)
            else:
                state = apply_label_map(state, mapped)
            next_branches.append((syndrome, probability, state, position))
        branches = next_branches

    k = len(kept)
    result: Dict[int, Tuple[float, np.ndarray]] = {
        b: (0.0, np.zeros(1 << (2 * k))) for b in range(1 << len(measured))
    }
    for syndrome, probability, state, position in branches:
        if state is None or probability <= 0.0:
            continue
        order = [position[q] for q in kept]
        coeffs = _reorder(state, order)
        result[syndrome] = (probability, coeffs)
    logger.debug("simulated %d gates, %d branches", len(circuit.gates), len(branches))
    return SimulationResult(n, k, kept, measured, result)


def _reorder(state: BellDiagonalState, order: List[int]) -> np.ndarray:
    """把剩余各对按 order 重新排列成 x | z<<k 布局"""
    k = state.m
    if order == list(range(k)):
        return state.probs.copy()
    tensor = state._tensor()
    axes = [state._axis(k + order[i]) for i in reversed(range(k))]
    axes += [state._axis(order[i]) for i in reversed(range(k))]
    return np.transpose(tensor, axes).reshape(-1).copy()


def evaluate_fixture(
    circuit_id: str,
    fidelity: float,
    noise: NoiseModel = NOISELESS,
) -> float:
    """
    电路夹具在 Werner 输入下 b=0 的输出保真度。

    异常:
        FixtureError: 未知夹具。
    """
    from .fixtures import get_circuit

    circuit = get_circuit(circuit_id)
    return simulate(circuit, fidelity, noise).fidelity(0)
