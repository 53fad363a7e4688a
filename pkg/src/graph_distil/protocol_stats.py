"""
graph_distil 蒸馏统计模块
处理陪集权重计数器、各症状下的成功概率与输出系数、MacWilliams变换、码距以及Werner/一般Bell对角输入的求值
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import SizeLimitError
from .symplectic import (
    CNOT,
    H,
    S,
    SubgroupKind,
    SubgroupSpec,
    SymplecticMatrix,
    gate_generator,
    invert,
    kept_label_vector,
    pauli_label,
    span_array,
    syndrome_vector,
    weights_array,
)

logger = logging.getLogger(__name__)

MAX_ALL_SYNDROMES = 12
MAX_TRIVIAL_SYNDROME = 20
MAX_COSET_LOG2 = 24
MAX_SYMPLECTIC_GROUP_K = 2
MAX_PAIRWISE_GROUP_K = 4


@dataclass(frozen=True)
class WeightEnumerator:
    """陪集中各权重元素的个数 E_0..E_n（精确整数）"""
    counts: Tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"Weight enumerator entries must be nonnegative, got {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def n(self) -> int:
        return len(self.counts) - 1

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __getitem__(self, w: int) -> int:
        return self.counts[w]

    def __len__(self) -> int:
        return len(self.counts)

    def evaluate(self, x: float, y: float) -> float:
        """多项式 Σ E_w x^(n−w) y^w"""
        n = self.n
        return float(sum(c * x ** (n - w) * y ** w for w, c in enumerate(self.counts)))

    def werner(self, fidelity: float) -> float:
        return self.evaluate(fidelity, (1.0 - fidelity) / 3.0)


@dataclass(frozen=True)
class Syndrome:
    """被测量的 n−k 对上的奇偶校验串；第 j 位对应被测对 k+j"""
    value: int
    length: int

    def __post_init__(self):
        if self.length < 0 or not 0 <= self.value < (1 << self.length):
            raise ValueError(f"Syndrome {self.value} does not fit {self.length} bits")

    @classmethod
    def from_string(cls, bits: str) -> "Syndrome":
        if any(ch not in "01" for ch in bits):
            raise ValueError(f"Syndrome string must be binary, got {bits!r}")
        return cls(sum(1 << j for j, ch in enumerate(bits) if ch == "1"), len(bits))

    def __str__(self) -> str:
        return "".join(str((self.value >> j) & 1) for j in range(self.length))


SyndromeLike = Union[int, Syndrome]


def _syndrome_value(b: SyndromeLike, n: int, k: int) -> int:
    if isinstance(b, Syndrome):
        if b.length != n - k:
            raise ValueError(f"Syndrome has {b.length} bits, expected {n - k}")
        return b.value
    b = int(b)
    if not 0 <= b < (1 << (n - k)):
        raise ValueError(f"Syndrome {b} out of range for n-k={n - k}")
    return b


def syndrome_string(value: int, length: int) -> str:
    return str(Syndrome(value, length))


# Per-qubit table index is x | z<<1, i.e. (I, X, Z, Y).
PAIR_TABLE_ORDER = (0, 1, 3, 2)


@dataclass(frozen=True)
class BellDiagonalInput:
    """
    每个输入对的系数 (p_I, p_X, p_Y, p_Z)；联合分布为各对的乘积。
    """
    pairs: Tuple[Tuple[float, float, float, float], ...]

    def __post_init__(self):
        pairs = tuple(tuple(float(p) for p in pair) for pair in self.pairs)
        for pair in pairs:
            if len(pair) != 4:
                raise ValueError(f"Each pair needs 4 coefficients, got {pair}")
            if min(pair) < -1e-12:
                raise ValueError(f"Negative Bell coefficient in {pair}")
            if abs(sum(pair) - 1.0) > 1e-9:
                raise ValueError(f"Bell coefficients must sum to 1, got {sum(pair)}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def werner(cls, fidelity: float, n: int) -> "BellDiagonalInput":
        e = (1.0 - fidelity) / 3.0
        return cls(tuple((fidelity, e, e, e) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.pairs)

    def tables(self) -> np.ndarray:
        """形状 (n, 4)，列按 x | z<<1 排序"""
        return np.array([[pair[i] for i in PAIR_TABLE_ORDER] for pair in self.pairs], dtype=float)

    def probabilities(self, vectors: np.ndarray) -> np.ndarray:
        """一组 n 比特Pauli向量的乘积概率 p_v"""
        vectors = np.asarray(vectors, dtype=np.uint64)
        n = self.n
        tables = self.tables()
        out = np.ones(vectors.shape, dtype=float)
        one = np.uint64(1)
        for i in range(n):
            x = (vectors >> np.uint64(i)) & one
            z = (vectors >> np.uint64(n + i)) & one
            out *= tables[i][(x | (z << one)).astype(np.int64)]
        return out

    def joint_distribution(self) -> np.ndarray:
        """长度 4^n 的联合分布，下标为 x | z<<n"""
        return self.probabilities(np.arange(1 << (2 * self.n), dtype=np.uint64))


InputLike = Union[float, BellDiagonalInput]


def _as_input(value: InputLike, n: int) -> BellDiagonalInput:
    if isinstance(value, BellDiagonalInput):
        if value.n != n:
            raise ValueError(f"Input describes {value.n} pairs, protocol uses {n}")
        return value
    return BellDiagonalInput.werner(float(value), n)


def werner_weights(fidelity: float, n: int) -> np.ndarray:
    """F^(n−w) ((1−F)/3)^w，w = 0..n"""
    w = np.arange(n + 1)
    return np.power(float(fidelity), n - w) * np.power((1.0 - float(fidelity)) / 3.0, w)


def parse_pauli_label(label: Union[int, str], k: int) -> int:
    """k 比特Pauli标签（'XZ' 或整数下标 x | z<<k）转为下标"""
    if isinstance(label, str):
        if len(label) != k:
            raise ValueError(f"Label {label!r} does not have {k} characters")
        index = 0
        for i, ch in enumerate(label.upper()):
            if ch not in "IXYZ":
                raise ValueError(f"Invalid Pauli character {ch!r}")
            if ch in "XY":
                index |= 1 << i
            if ch in "ZY":
                index |= 1 << (k + i)
        return index
    index = int(label)
    if not 0 <= index < (1 << (2 * k)):
        raise ValueError(f"Label index {index} out of range for k={k}")
    return index


# ---------------------------------------------------------------------------
# Coset sweeps

def _coset_images(minv: SymplecticMatrix, generators: Sequence[int], shift: int) -> np.ndarray:
    images = [minv.apply(g) for g in generators]
    return span_array(images, minv.apply(shift))


def coset_weight_enumerator(M: SymplecticMatrix, sub: SubgroupSpec, shift: int = 0) -> WeightEnumerator:
    """
    计算 { M⁻¹(u + shift) : u ∈ span(sub) } 的权重计数器。

    参数:
        M (SymplecticMatrix): 协议矩阵。
        sub (SubgroupSpec): 𝒫_k 或 ℬ_k。
        shift (int): 平移向量（如 v_b 或 v_P + v_b）。
    """
    if sub.n != M.n:
        raise ValueError(f"Subgroup on {sub.n} qubits, matrix on {M.n}")
    generators = sub.generators()
    if len(generators) > MAX_COSET_LOG2:
        raise SizeLimitError(f"Coset of size 2^{len(generators)} is too large")
    shift = shift.bits if hasattr(shift, "bits") else int(shift)
    vectors = _coset_images(invert(M), generators, shift)
    counts = np.bincount(weights_array(vectors, M.n), minlength=M.n + 1)
    return WeightEnumerator(tuple(int(c) for c in counts))


def success_probability(M: SymplecticMatrix, b: SyndromeLike, value: InputLike, k: int) -> float:
    """
    Σ_{v ∈ M⁻¹(𝒫_k + v_b)} p_v。Werner 输入（浮点 F）走权重计数器多项式。
    """
    n = M.n
    b = _syndrome_value(b, n, k)
    shift = syndrome_vector(b, n, k)
    if not isinstance(value, BellDiagonalInput):
        enumerator = coset_weight_enumerator(M, SubgroupSpec(SubgroupKind.PK_SPAN, n, k), shift)
        return enumerator.werner(float(value))
    state = _as_input(value, n)
    vectors = _coset_images(invert(M), SubgroupSpec(SubgroupKind.PK_SPAN, n, k).generators(), shift)
    return float(state.probabilities(vectors).sum())


def output_coefficients(M: SymplecticMatrix, b: SyndromeLike, value: InputLike, k: int) -> Tuple[float, np.ndarray]:
    """
    某一症状下的成功概率与全部 4^k 个归一化输出系数（下标 x | z<<k）。

    异常:
        ValueError: 该症状的成功概率为零。
    """
    n = M.n
    b = _syndrome_value(b, n, k)
    state = _as_input(value, n)
    raw = _label_sums(invert(M), n, k, b, state.probabilities)
    p = float(raw.sum())
    if p <= 0.0:
        raise ValueError(f"Syndrome {b} occurs with probability zero")
    return p, raw / p


def output_coefficient(
    M: SymplecticMatrix,
    b: SyndromeLike,
    label: Union[int, str],
    value: InputLike,
    k: int,
) -> float:
    """
    F_P^b：给定症状 b 后输出处于Pauli标签 P 的概率。P 为单位时即输出保真度 F^b。
    """
    _, coeffs = output_coefficients(M, b, value, k)
    return float(coeffs[parse_pauli_label(label, k)])


def _label_shifts(minv: SymplecticMatrix, n: int, k: int) -> np.ndarray:
    generators = [kept_label_vector(1 << i, n, k) for i in range(2 * k)]
    return span_array([minv.apply(g) for g in generators])


def _syndrome_shifts(minv: SymplecticMatrix, n: int, k: int) -> np.ndarray:
    return span_array([minv.apply(syndrome_vector(1 << j, n, k)) for j in range(n - k)])


def _label_sums(minv: SymplecticMatrix, n: int, k: int, b: int, weigh) -> np.ndarray:
    base = _coset_images(minv, SubgroupSpec(SubgroupKind.BK_SPAN, n, k).generators(), 0)
    shift = np.uint64(minv.apply(syndrome_vector(b, n, k)))
    images = _label_shifts(minv, n, k)[:, None] ^ base[None, :] ^ shift
    return weigh(images).sum(axis=1)


@dataclass
class DistillationStatistics:
    """
    全部（或仅 b=0）症状下的精确统计。numerators[s, P, w] 是症状 syndromes[s]、标签 P 的 ℬ_k 陪集权重计数。
    """
    n: int
    k: int
    syndromes: Tuple[int, ...]
    numerators: np.ndarray = field(repr=False)

    @property
    def num_labels(self) -> int:
        return 1 << (2 * self.k)

    @property
    def denominators(self) -> np.ndarray:
        return self.numerators.sum(axis=1)

    def _row(self, b: SyndromeLike) -> int:
        value = _syndrome_value(b, self.n, self.k)
        try:
            return self.syndromes.index(value)
        except ValueError:
            raise KeyError(f"Syndrome {value} was not computed") from None

    def denominator(self, b: SyndromeLike = 0) -> WeightEnumerator:
        return WeightEnumerator(tuple(self.denominators[self._row(b)]))

    def numerator(self, b: SyndromeLike, label: Union[int, str]) -> WeightEnumerator:
        return WeightEnumerator(tuple(self.numerators[self._row(b), parse_pauli_label(label, self.k)]))

    def stabilizer_enumerator(self) -> WeightEnumerator:
        """b=0、P=I 的 ℬ_k 陪集即基码稳定子群"""
        return self.numerator(0, 0)

    def normalizer_enumerator(self) -> WeightEnumerator:
        return self.denominator(0)

    def success_probability(self, fidelity: float, b: SyndromeLike = 0) -> float:
        return float(self.denominators[self._row(b)] @ werner_weights(fidelity, self.n))

    def coefficients(self, fidelity: float, b: SyndromeLike = 0) -> np.ndarray:
        """Werner 输入下的归一化输出系数（长度 4^k）"""
        raw = self.numerators[self._row(b)] @ werner_weights(fidelity, self.n)
        total = raw.sum()
        if total <= 0:
            raise ValueError(f"Syndrome {b} occurs with probability zero at F={fidelity}")
        return raw / total

    def fidelity(self, fidelity: float, b: SyndromeLike = 0) -> float:
        return float(self.coefficients(fidelity, b)[0])

    def branches(self, fidelity: float) -> Iterator[Tuple[int, float, np.ndarray]]:
        """依次给出 (症状, 概率, 系数)；概率为零的症状给出全零系数"""
        weights = werner_weights(fidelity, self.n)
        for row, b in enumerate(self.syndromes):
            raw = self.numerators[row] @ weights
            total = float(raw.sum())
            yield b, total, (raw / total if total > 0 else np.zeros_like(raw))

    def rows(self) -> Iterator[List]:
        """CSV行：syndrome, pauli_label, E_0..E_n"""
        length = self.n - self.k
        for row, b in enumerate(self.syndromes):
            for label in range(self.num_labels):
                counts = self.numerators[row, label]
                yield [syndrome_string(b, length), pauli_label(label, self.k)] + [int(c) for c in counts]


def full_statistics(M: SymplecticMatrix, n: int, k: int, syndromes: str = "all") -> DistillationStatistics:
    """
    计算所有症状（或仅 b=0）下全部 4^k 个标签的分子计数器。

    参数:
        syndromes (str): "all" 或 "trivial"。

    异常:
        SizeLimitError: "all" 时 n+k > 12，"trivial" 时 n+k > 20。
    """
    if M.n != n:
        raise ValueError(f"Matrix acts on {M.n} qubits, expected {n}")
    if not 0 <= k <= n:
        raise ValueError(f"Need 0 <= k <= n, got n={n}, k={k}")
    if syndromes == "all":
        if n + k > MAX_ALL_SYNDROMES:
            raise SizeLimitError(f"All-syndrome statistics limited to n+k <= {MAX_ALL_SYNDROMES}, got {n + k}")
        values = tuple(range(1 << (n - k)))
    elif syndromes == "trivial":
        if n + k > MAX_TRIVIAL_SYNDROME:
            raise SizeLimitError(f"b=0 statistics limited to n+k <= {MAX_TRIVIAL_SYNDROME}, got {n + k}")
        values = (0,)
    else:
        raise ValueError(f"Unknown syndrome mode {syndromes!r}")

    minv = invert(M)
    base = _coset_images(minv, SubgroupSpec(SubgroupKind.BK_SPAN, n, k).generators(), 0)
    labels = _label_shifts(minv, n, k)
    b_shifts = _syndrome_shifts(minv, n, k)
    num_labels = len(labels)
    offsets = (np.arange(num_labels, dtype=np.int64) * (n + 1))[:, None]
    table = np.zeros((len(values), num_labels, n + 1), dtype=np.int64)
    for row, b in enumerate(values):
        images = labels[:, None] ^ base[None, :] ^ b_shifts[b]
        flat = (weights_array(images, n) + offsets).ravel()
        table[row] = np.bincount(flat, minlength=num_labels * (n + 1)).reshape(num_labels, n + 1)
    logger.debug("full_statistics n=%d k=%d syndromes=%d", n, k, len(values))
    return DistillationStatistics(n, k, values, table)


def bell_diagonal_statistics(
    M: SymplecticMatrix,
    k: int,
    value: BellDiagonalInput,
    syndromes: str = "all",
) -> Dict[int, Tuple[float, np.ndarray]]:
    """
    一般Bell对角输入下每个症状的 (成功概率, 未归一化前除以概率的系数)。概率为零的症状给出全零系数。
    """
    n = M.n
    state = _as_input(value, n)
    if syndromes == "all" and n + k > MAX_ALL_SYNDROMES:
        raise SizeLimitError(f"All-syndrome statistics limited to n+k <= {MAX_ALL_SYNDROMES}")
    if syndromes == "trivial" and n + k > MAX_TRIVIAL_SYNDROME:
        raise SizeLimitError(f"b=0 statistics limited to n+k <= {MAX_TRIVIAL_SYNDROME}")
    values = range(1 << (n - k)) if syndromes == "all" else (0,)
    minv = invert(M)
    result = {}
    for b in values:
        raw = _label_sums(minv, n, k, b, state.probabilities)
        p = float(raw.sum())
        result[b] = (p, raw / p if p > 0 else np.zeros_like(raw))
    return result


# ---------------------------------------------------------------------------
# MacWilliams, distance, leading order

def _krawtchouk(n: int, w: int, w_prime: int) -> int:
    return sum(
        (-1) ** s * 3 ** (w - s) * comb(w_prime, s) * comb(n - w_prime, w - s)
        for s in range(w + 1)
    )


def macwilliams_transform(E_B: Union[WeightEnumerator, Sequence[int]], n: int, k: int) -> WeightEnumerator:
    """
    由稳定子陪集计数器求对偶（𝒫_k 陪集）计数器：2^(n−k) E_w(P) = Σ_{w'} K_w(w') E_{w'}(B)。

    异常:
        ValueError: 输入总和不是 2^(n−k)，或结果不是非负整数。
    """
    counts = tuple(E_B.counts if isinstance(E_B, WeightEnumerator) else (int(c) for c in E_B))
    if len(counts) != n + 1:
        raise ValueError(f"Expected {n + 1} entries, got {len(counts)}")
    scale = 1 << (n - k)
    if sum(counts) != scale:
        raise ValueError(f"Stabilizer enumerator sums to {sum(counts)}, expected {scale}")
    out = []
    for w in range(n + 1):
        total = sum(_krawtchouk(n, w, wp) * c for wp, c in enumerate(counts))
        if total % scale or total < 0:
            raise ValueError(f"Inconsistent enumerator: entry {w} would be {Fraction(total, scale)}")
        out.append(total // scale)
    return WeightEnumerator(tuple(out))


def code_distance(E_B: WeightEnumerator, E_P: WeightEnumerator) -> int:
    """使 E_w(B) = E_w(P) 对所有 w < d 成立的最大 d；两者完全相同时为 n+1"""
    if len(E_B) != len(E_P):
        raise ValueError("Enumerators have different lengths")
    for w in range(len(E_B)):
        if E_B[w] != E_P[w]:
            return w
    return len(E_B)


def leading_order_fidelity(E_B: WeightEnumerator, E_P: WeightEnumerator, d: int) -> Fraction:
    """
    F_out = 1 − c(1−F)^d + O((1−F)^(d+1)) 中的 c = (E_d(P) − E_d(B)) / 3^d。

    异常:
        ValueError: d 超出 1..n。
    """
    if not 1 <= d <= E_B.n:
        raise ValueError(f"Leading order defined for 1 <= d <= {E_B.n}, got {d}")
    return Fraction(E_P[d] - E_B[d], 3 ** d)


# ---------------------------------------------------------------------------
# Canonical keys

def _label_map(matrix: SymplecticMatrix) -> Tuple[int, ...]:
    return tuple(matrix.apply(label) for label in range(1 << (2 * matrix.n)))


def _swap_map(k: int, i: int, j: int) -> Tuple[int, ...]:
    def swap(label: int) -> int:
        out = label
        for a, b in ((i, j), (k + i, k + j)):
            if ((label >> a) & 1) != ((label >> b) & 1):
                out ^= (1 << a) | (1 << b)
        return out

    return tuple(swap(label) for label in range(1 << (2 * k)))


def _closure(generators: Sequence[Tuple[int, ...]], size: int) -> np.ndarray:
    identity = tuple(range(size))
    seen = {identity}
    queue = [identity]
    while queue:
        current = queue.pop()
        for g in generators:
            composed = tuple(g[c] for c in current)
            if composed not in seen:
                seen.add(composed)
                queue.append(composed)
    return np.array(sorted(seen), dtype=np.int64)


@lru_cache(maxsize=None)
def label_group(k: int, group: str = "symplectic") -> np.ndarray:
    """
    作用在 k 对保留对的Pauli标签上的置换群，每行一个置换。

    参数:
        group (str): "symplectic" 为 Sp(2k, F₂)；"pairwise" 为每对 S₃ 与对置换 S_k。
    """
    size = 1 << (2 * k)
    if k == 0:
        return np.zeros((1, 1), dtype=np.int64)
    local = [_label_map(gate_generator(H(i), k)) for i in range(k)]
    local += [_label_map(gate_generator(S(i), k)) for i in range(k)]
    if group == "symplectic":
        if k > MAX_SYMPLECTIC_GROUP_K:
            raise SizeLimitError(f"Sp(2k) canonicalization supported for k <= {MAX_SYMPLECTIC_GROUP_K}")
        entangling = [
            _label_map(gate_generator(CNOT(i, j), k)) for i in range(k) for j in range(k) if i != j
        ]
        perms = _closure(local + entangling, size)
    elif group == "pairwise":
        if k > MAX_PAIRWISE_GROUP_K:
            raise SizeLimitError(f"Pairwise canonicalization supported for k <= {MAX_PAIRWISE_GROUP_K}")
        swaps = [_swap_map(k, i, i + 1) for i in range(k - 1)]
        perms = _closure(local + swaps, size)
    else:
        raise ValueError(f"Unknown dedup group {group!r}")
    logger.debug("label group %s for k=%d has %d elements", group, k, len(perms))
    return perms


def canonical_table(table: np.ndarray, k: int, group: str = "symplectic") -> np.ndarray:
    """在标签置换群下按字典序最小化 (4^k, n+1) 分子表"""
    perms = label_group(k, group)
    candidates = np.arange(len(perms))
    rows = []
    for r in range(table.shape[0]):
        values = table[perms[candidates, r]]
        for w in range(table.shape[1]):
            column = values[:, w]
            keep = column == column.min()
            candidates = candidates[keep]
            values = values[keep]
        rows.append(values[0])
    return np.array(rows, dtype=np.int64)


def dedup_key(
    stats: DistillationStatistics,
    b: SyndromeLike = 0,
    group: str = "symplectic",
    exact: bool = False,
) -> Tuple:
    """
    规范去重键：症状 b 下的 4^k 分子表在保留对局部操作下的字典序最小代表。

    参数:
        exact (bool): 为 True 时不做规范化，直接使用原始表。
    """
    table = stats.numerators[stats._row(b)]
    if not exact:
        table = canonical_table(table, stats.k, group)
    return (stats.n, stats.k, tuple(tuple(int(c) for c in row) for row in table))


# ---------------------------------------------------------------------------
# Corrections and summaries

def best_corrected_coefficients(coeffs: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    施加使单位系数最大的Pauli修正：new[L] = coeffs[L ⊕ c]。

    返回:
        (修正后的系数, 修正标签 c)
    """
    coeffs = np.asarray(coeffs, dtype=float)
    correction = int(np.argmax(coeffs))
    index = np.arange(len(coeffs)) ^ correction
    return coeffs[index], correction


@dataclass
class StatisticsSummary:
    """Werner输入下按保真度网格采样的协议摘要"""
    n: int
    k: int
    f_grid: List[float]
    p_succ: List[float]
    f_out: List[Optional[float]]
    distance: int
    leading_order: Optional[str]
    stabilizer_enumerator: List[int]
    normalizer_enumerator: List[int]

    def to_json(self) -> dict:
        return asdict(self)

    def save(self, path: Path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_json(), f, ensure_ascii=False, indent=2)


def evaluate_werner(stats: DistillationStatistics, f_grid: Sequence[float]) -> StatisticsSummary:
    """
    在保真度网格上求 b=0 的成功概率与输出保真度，并附上码距与领头系数。
    """
    e_b = stats.stabilizer_enumerator()
    e_p = stats.normalizer_enumerator()
    d = code_distance(e_b, e_p)
    c = leading_order_fidelity(e_b, e_p, d) if d <= stats.n else None
    p_succ, f_out = [], []
    for fidelity in f_grid:
        p = stats.success_probability(fidelity, 0)
        p_succ.append(p)
        f_out.append(stats.fidelity(fidelity, 0) if p > 0 else None)
    return StatisticsSummary(
        n=stats.n,
        k=stats.k,
        f_grid=[float(f) for f in f_grid],
        p_succ=p_succ,
        f_out=f_out,
        distance=d,
        leading_order=str(c) if c is not None else None,
        stabilizer_enumerator=list(e_b.counts),
        normalizer_enumerator=list(e_p.counts),
    )
