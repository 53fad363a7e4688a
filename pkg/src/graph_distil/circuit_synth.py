"""
graph_distil 电路综合模块
处理由 (n,k)-图和有效标记生成双局域Clifford电路、电路指标（双比特门数、深度、保留门数）、
对易关系改写以及启发式搜索
"""

import json
import logging
import random
from dataclasses import asdict, dataclass
from enum import Enum
from itertools import combinations, permutations
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InvalidCodeError, ParseError, UnsupportedGateError
from .graph_code import (
    Labeling,
    NKGraph,
    codeword_generators,
    edge_flip,
    find_valid_labeling,
    is_valid_labeling,
    local_complement,
    require_valid_labeling,
)
from .symplectic import CNOT, CZ, MZ, Gate, GateKind, H, gf2_rref

logger = logging.getLogger(__name__)

EXACT_COLOURING_EDGES = 20
DEPTH_FRONTIER_CAP = 5000
REFINEMENT_ROUNDS = 50


@dataclass(frozen=True)
class Circuit:
    """
    单侧表示的协议电路：每个量子比特代表一对；前 keep 个量子比特保留。
    """
    n: int
    keep: int
    gates: Tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not 0 <= self.keep <= self.n:
            raise ValueError(f"Need 0 <= keep <= n, got keep={self.keep}, n={self.n}")
        measured_at: Dict[int, int] = {}
        for index, gate in enumerate(self.gates):
            for q in gate.qubits:
                if not 0 <= q < self.n:
                    raise ValueError(f"Gate {gate} acts outside {self.n} qubits")
                if q in measured_at:
                    raise ValueError(f"Gate {gate} at position {index} acts on measured qubit {q}")
            if gate.kind is GateKind.MZ:
                measured_at[gate.qubits[0]] = index

    @property
    def measured(self) -> Tuple[int, ...]:
        return tuple(sorted(g.qubits[0] for g in self.gates if g.kind is GateKind.MZ))

    @property
    def kept(self) -> Tuple[int, ...]:
        measured = set(self.measured)
        return tuple(q for q in range(self.n) if q not in measured)

    def to_json(self) -> dict:
        return {"n": self.n, "keep": self.keep, "gates": [g.to_dict() for g in self.gates]}

    @classmethod
    def from_json(cls, data: dict) -> "Circuit":
        try:
            gates = tuple(Gate.from_dict(g) for g in data["gates"])
            return cls(int(data["n"]), int(data["keep"]), gates)
        except UnsupportedGateError:
            raise
        except (KeyError, TypeError) as e:
            raise ParseError(f"Malformed circuit JSON: {e}") from e

    def encoding(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def save(self, path: Path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_json(), f, ensure_ascii=False, indent=2)

    @classmethod
    def load(cls, path: Path) -> "Circuit":
        with open(path, 'r', encoding='utf-8') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}: {e}") from e
        return cls.from_json(data)

    @classmethod
    def from_genome(cls, genome) -> "Circuit":
        from .evolver import genome_to_circuit

        return genome_to_circuit(genome)

    def inverse(self) -> "Circuit":
        """Clifford部分的逆（测量被去掉）；H、S、CNOT、CZ 的辛作用都是对合"""
        body = [g for g in self.gates if g.kind is not GateKind.MZ]
        return Circuit(self.n, self.keep, tuple(reversed(body)))

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise ValueError("Circuits act on different qubit counts")
        return Circuit(self.n, self.keep, self.gates + other.gates)


# ---------------------------------------------------------------------------
# Synthesis

def synthesize(graph: NKGraph, labeling: Optional[Labeling] = None) -> Circuit:
    """
    由图和有效标记生成电路：输出诱导子图的每条边一个CZ，
    RREF(𝐀) 第 i 行每个非主元的非零元 (i, j) 一个 CNOT(控制 j, 目标 i)，最后对被测比特做 H 和 Z 测量。

    异常:
        InvalidCodeError: 标记无效。
    """
    labeling = labeling or find_valid_labeling(graph)
    require_valid_labeling(graph, labeling)
    n, k = graph.n_out, graph.k_in
    position = {v: i for i, v in enumerate(labeling.output_order)}
    gates: List[Gate] = []
    edges = sorted(
        tuple(sorted((position[u], position[v])))
        for u, v in graph.edges()
        if u in position and v in position
    )
    gates.extend(CZ(i, j) for i, j in edges)
    if k:
        rref, _ = gf2_rref(codeword_generators(graph, labeling).to_array())
        for i in range(k):
            for j in range(k, n):
                if rref[i, j]:
                    gates.append(CNOT(j, i))
    gates.extend(H(q) for q in range(k, n))
    gates.extend(MZ(q) for q in range(k, n))
    return Circuit(n, k, tuple(gates))


# ---------------------------------------------------------------------------
# Commutation

def gates_commute(a: Gate, b: Gate) -> bool:
    """
    按CZ/CNOT对易关系判断两个门是否对易；共享比特的单比特门一律视为不对易。
    """
    shared = set(a.qubits) & set(b.qubits)
    if not shared:
        return True
    kinds = {a.kind, b.kind}
    if kinds == {GateKind.CZ}:
        return True
    if kinds == {GateKind.CZ, GateKind.CNOT}:
        cz, cnot = (a, b) if a.kind is GateKind.CZ else (b, a)
        return cnot.qubits[1] not in cz.qubits
    if kinds == {GateKind.CNOT}:
        return a.qubits[0] != b.qubits[1] and b.qubits[0] != a.qubits[1]
    return False


class RewriteDirection(str, Enum):
    CNOT_FIRST = "cnot_first"
    CZ_FIRST = "cz_first"


def _split_tail(circuit: Circuit) -> Tuple[List[Gate], List[Gate]]:
    cut = len(circuit.gates)
    while cut > 0 and circuit.gates[cut - 1].kind in (GateKind.H, GateKind.MZ):
        cut -= 1
    body, tail = list(circuit.gates[:cut]), list(circuit.gates[cut:])
    for gate in body:
        if not gate.is_two_qubit:
            raise UnsupportedGateError(f"{gate} inside the CZ/CNOT body cannot be rewritten")
    return body, tail


def _cnot_matrix(cnots: Sequence[Gate], n: int) -> np.ndarray:
    """CNOT块在 x 分量上的线性映射 G"""
    g = np.eye(n, dtype=np.int64)
    for gate in cnots:
        c, t = gate.qubits
        g[t] ^= g[c]
    return g


def _frame(body: Sequence[Gate], n: int) -> Tuple[List[Gate], np.ndarray]:
    """把 body 写成 CNOT 块后接邻接矩阵 Γ 的CZ层"""
    cnots: List[Gate] = []
    gamma = np.zeros((n, n), dtype=np.int64)
    for gate in body:
        if gate.kind is GateKind.CZ:
            i, j = gate.qubits
            gamma[i, j] ^= 1
            gamma[j, i] ^= 1
        else:
            c, t = gate.qubits
            g_t = np.eye(n, dtype=np.int64)
            g_t[c, t] = 1
            gamma = (g_t @ gamma @ g_t.T) % 2
            cnots.append(gate)
    return cnots, gamma


def _cz_gates(gamma: np.ndarray) -> List[Gate]:
    n = gamma.shape[0]
    return [CZ(i, j) for i in range(n) for j in range(i + 1, n) if gamma[i, j]]


def _drop_keep_block(gamma: np.ndarray, keep: int) -> np.ndarray:
    gamma = gamma.copy()
    gamma[:keep, :keep] = 0
    return gamma


def rewrite_commute(circuit: Circuit, direction: RewriteDirection = RewriteDirection.CNOT_FIRST) -> Circuit:
    """
    用对易关系把CZ/CNOT主体改写为 CNOT 在前或 CZ 在前的形式。
    两个保留比特之间的CZ只改变输出的局部Clifford，被去掉。

    异常:
        UnsupportedGateError: 主体中出现 CZ/CNOT 以外的门。
    """
    direction = RewriteDirection(direction)
    body, tail = _split_tail(circuit)
    cnots, gamma = _frame(body, circuit.n)
    gamma = _drop_keep_block(gamma, circuit.keep)
    if direction is RewriteDirection.CNOT_FIRST:
        gates = cnots + _cz_gates(gamma)
    else:
        g = _cnot_matrix(cnots, circuit.n)
        gates = _cz_gates((g.T @ gamma @ g) % 2) + cnots
    return Circuit(circuit.n, circuit.keep, tuple(gates + tail))


def insert_meas_cnot(circuit: Circuit, i: int, j: int) -> Circuit:
    """
    在测量层前加入 CNOT(控制 j, 目标 i)（i、j 均为被测比特），再改写为 CNOT 在前的形式。
    症状被一个可逆线性映射重新标记，统计量作为多重集不变。

    异常:
        ValueError: i 或 j 是保留比特，或 i == j。
    """
    if i == j:
        raise ValueError("CNOT needs two distinct qubits")
    for q in (i, j):
        if q < circuit.keep or q >= circuit.n:
            raise ValueError(f"Qubit {q} is not a measured qubit")
    body, tail = _split_tail(circuit)
    extended = Circuit(circuit.n, circuit.keep, tuple(body + [CNOT(j, i)] + tail))
    return rewrite_commute(extended, RewriteDirection.CNOT_FIRST)


def relocate_cz(circuit: Circuit, edge: Tuple[int, int], after: bool = True) -> Circuit:
    """
    把单个CZ穿过CNOT块。after=True 时从 CZ 在前的形式中把 edge 移到CNOT之后（变为 G^{-T} E G^{-1}，
    去掉保留比特之间的边）；after=False 时从 CNOT 在前的形式中把 edge 移到CNOT之前（变为 Gᵀ E G）。

    异常:
        ValueError: 对应形式中不存在该CZ。
    """
    i, j = sorted(edge)
    body, tail = _split_tail(circuit)
    cnots, gamma = _frame(body, circuit.n)
    gamma = _drop_keep_block(gamma, circuit.keep)
    g = _cnot_matrix(cnots, circuit.n)
    e = np.zeros_like(gamma)
    e[i, j] = e[j, i] = 1
    if after:
        front = (g.T @ gamma @ g) % 2
        if not front[i, j]:
            raise ValueError(f"CZ{(i, j)} is not in the CZ-first block")
        g_inv = _cnot_matrix(list(reversed(cnots)), circuit.n)
        moved = _drop_keep_block((g_inv.T @ e @ g_inv) % 2, circuit.keep)
        gates = _cz_gates(front ^ e) + cnots + _cz_gates(moved)
    else:
        if not gamma[i, j]:
            raise ValueError(f"CZ{(i, j)} is not in the CNOT-first block")
        moved = (g.T @ e @ g) % 2
        gates = _cz_gates(moved) + cnots + _cz_gates(gamma ^ e)
    return Circuit(circuit.n, circuit.keep, tuple(gates + tail))


# ---------------------------------------------------------------------------
# Edge colouring

def _vertex_colours(colour: Dict[FrozenSet[int], int], v: int) -> set:
    return {c for e, c in colour.items() if v in e}


def _free_colour(colour: Dict[FrozenSet[int], int], v: int, palette: int) -> int:
    used = _vertex_colours(colour, v)
    return next(c for c in range(palette) if c not in used)


def misra_gries_colouring(edges: Sequence[Tuple[int, int]]) -> Dict[FrozenSet[int], int]:
    """
    Misra–Gries 边着色，至多使用 Δ+1 种颜色。

    返回:
        dict: 边（frozenset）到颜色的映射。
    """
    edge_set = [frozenset(e) for e in {tuple(sorted(e)) for e in edges}]
    adjacency: Dict[int, set] = {}
    for e in edge_set:
        u, v = tuple(e)
        adjacency.setdefault(u, set()).add(v)
        adjacency.setdefault(v, set()).add(u)
    if not edge_set:
        return {}
    palette = max(len(nb) for nb in adjacency.values()) + 1
    colour: Dict[FrozenSet[int], int] = {}

    def is_free(c: int, v: int) -> bool:
        return c not in _vertex_colours(colour, v)

    def is_fan(u: int, fan: List[int]) -> bool:
        if frozenset((u, fan[0])) in colour:
            return False
        for a, b in zip(fan, fan[1:]):
            c = colour.get(frozenset((u, b)))
            if c is None or not is_free(c, a):
                return False
        return True

    for e in sorted(edge_set, key=lambda s: tuple(sorted(s))):
        u, v = sorted(e)
        fan = [v]
        extended = True
        while extended:
            extended = False
            for x in sorted(adjacency[u]):
                if x in fan:
                    continue
                c = colour.get(frozenset((u, x)))
                if c is not None and is_free(c, fan[-1]):
                    fan.append(x)
                    extended = True
                    break
        c = _free_colour(colour, u, palette)
        d = _free_colour(colour, fan[-1], palette)

        # invert the cd-path starting at u
        path = []
        current, want, other = u, d, c
        visited = {u}
        while True:
            nxt = next(
                (y for y in adjacency[current] if colour.get(frozenset((current, y))) == want and y not in visited),
                None,
            )
            if nxt is None:
                break
            path.append(frozenset((current, nxt)))
            visited.add(nxt)
            current, want, other = nxt, other, want
        for p in path:
            colour[p] = c if colour[p] == d else d

        w_index = next(
            i for i in range(len(fan)) if is_free(d, fan[i]) and is_fan(u, fan[: i + 1])
        )
        for i in range(w_index):
            colour[frozenset((u, fan[i]))] = colour.pop(frozenset((u, fan[i + 1])))
        colour[frozenset((u, fan[w_index]))] = d
    return colour


def _exact_colourable(edges: List[Tuple[int, int]], palette: int) -> bool:
    assignment: List[int] = []

    def search(index: int) -> bool:
        if index == len(edges):
            return True
        u, v = edges[index]
        used = {assignment[i] for i in range(index) if set(edges[i]) & {u, v}}
        limit = min(palette, max(assignment, default=-1) + 2)
        for c in range(limit):
            if c in used:
                continue
            assignment.append(c)
            if search(index + 1):
                return True
            assignment.pop()
        return False

    return search(0)


def chromatic_index(edges: Sequence[Tuple[int, int]]) -> Tuple[int, bool]:
    """
    简单图的边色数。至多 20 条边时精确回溯（Δ 或 Δ+1），否则返回 Misra–Gries 的颜色数。

    返回:
        (颜色数, 是否精确)
    """
    distinct = sorted({tuple(sorted(e)) for e in edges})
    if not distinct:
        return 0, True
    degree: Dict[int, int] = {}
    for u, v in distinct:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    delta = max(degree.values())
    if len(distinct) <= EXACT_COLOURING_EDGES:
        return (delta if _exact_colourable(distinct, delta) else delta + 1), True
    colouring = misra_gries_colouring(distinct)
    used = len(set(colouring.values()))
    return used, used == delta


# ---------------------------------------------------------------------------
# Metrics

@dataclass(frozen=True)
class CircuitMetrics:
    """电路指标；depth_exact 为 False 时 depth 是上界"""
    two_qubit_count: int
    depth: int
    keep_gate_count: int
    cz_depth: int
    depth_exact: bool

    def to_json(self) -> dict:
        data = asdict(self)
        data["depth_kind"] = "exact" if self.depth_exact else "bound"
        return data


def _qubit_mask(gate: Gate) -> int:
    return sum(1 << q for q in gate.qubits)


def _predecessors(gates: Sequence[Gate]) -> List[int]:
    preds = []
    for b, gb in enumerate(gates):
        mask = 0
        for a in range(b):
            if not gates_commute(gates[a], gb):
                mask |= 1 << a
        preds.append(mask)
    return preds


def _maximal_layers(available: List[int], masks: List[int]) -> Iterator[int]:
    def search(index: int, chosen: int, used: int) -> Iterator[int]:
        if index == len(available):
            if all((masks[g] & used) for g in available if not (chosen >> g) & 1):
                yield chosen
            return
        g = available[index]
        if not masks[g] & used:
            yield from search(index + 1, chosen | (1 << g), used | masks[g])
        yield from search(index + 1, chosen, used)

    yield from search(0, 0, 0)


def _drop_dominated(states: set) -> List[int]:
    ordered = sorted(states, key=lambda s: -bin(s).count("1"))
    kept: List[int] = []
    for s in ordered:
        if not any(s & t == s for t in kept):
            kept.append(s)
    return kept


def exact_depth(gates: Sequence[Gate], frontier_cap: int = DEPTH_FRONTIER_CAP) -> Optional[int]:
    """
    在门依赖关系（共享比特且不对易）下按极大层做广度优先搜索，返回最小层数；
    前沿超过 frontier_cap 时返回 None。
    """
    gates = list(gates)
    if not gates:
        return 0
    masks = [_qubit_mask(g) for g in gates]
    preds = _predecessors(gates)
    full = (1 << len(gates)) - 1
    level = [0]
    depth = 0
    while True:
        if any(done == full for done in level):
            return depth
        successors = set()
        for done in level:
            available = [g for g in range(len(gates)) if not (done >> g) & 1 and preds[g] & ~done == 0]
            for layer in _maximal_layers(available, masks):
                successors.add(done | layer)
            if len(successors) > 4 * frontier_cap:
                return None
        level = _drop_dominated(successors)
        if len(level) > frontier_cap:
            return None
        depth += 1


def list_schedule_depth(gates: Sequence[Gate]) -> int:
    """按原顺序的ASAP层数"""
    last: Dict[int, int] = {}
    depth = 0
    for gate in gates:
        layer = 1 + max((last.get(q, 0) for q in gate.qubits), default=0)
        for q in gate.qubits:
            last[q] = layer
        depth = max(depth, layer)
    return depth


def _block_schedule_depth(gates: Sequence[Gate]) -> Optional[int]:
    """CZ块着色 + 其余门的顺序调度；仅当所有CZ都在其余双比特门之前时适用"""
    cz = [g for g in gates if g.kind is GateKind.CZ]
    rest = [g for g in gates if g.kind is not GateKind.CZ]
    first_other = next((i for i, g in enumerate(gates) if g.is_two_qubit and g.kind is not GateKind.CZ), len(gates))
    if any(g.kind is GateKind.CZ for g in gates[first_other:]):
        return None
    colours, _ = chromatic_index([g.qubits for g in cz])
    return colours + list_schedule_depth(rest)


def metrics(circuit: Circuit, exact_depth_limit: int = 20) -> CircuitMetrics:
    """
    计算双比特门数、深度（含单比特H层，不含测量）、保留门数与CZ层深度（不同CZ对的边色数）。
    """
    unitary = [g for g in circuit.gates if g.kind is not GateKind.MZ]
    two_qubit = [g for g in unitary if g.is_two_qubit]
    keep_gates = sum(1 for g in two_qubit if any(q < circuit.keep for q in g.qubits))
    cz_depth, _ = chromatic_index([g.qubits for g in two_qubit if g.kind is GateKind.CZ])
    depth: Optional[int] = None
    if len(two_qubit) <= exact_depth_limit:
        depth = exact_depth(unitary)
    exact = depth is not None
    if depth is None:
        bounds = [list_schedule_depth(unitary)]
        block = _block_schedule_depth(unitary)
        if block is not None:
            bounds.append(block)
        depth = min(bounds)
    return CircuitMetrics(len(two_qubit), depth, keep_gates, cz_depth, exact)


# ---------------------------------------------------------------------------
# Heuristic search

class Objective(str, Enum):
    TWO_QUBIT = "two_qubit"
    DEPTH = "depth"
    KEEP_GATES = "keep_gates"


def objective_key(circuit: Circuit, objective: Objective, exact_depth_limit: int = 20) -> Tuple:
    m = metrics(circuit, exact_depth_limit)
    objective = Objective(objective)
    if objective is Objective.TWO_QUBIT:
        primary = (m.two_qubit_count, m.depth, m.keep_gate_count)
    elif objective is Objective.DEPTH:
        primary = (m.depth, m.two_qubit_count, m.keep_gate_count)
    else:
        primary = (m.keep_gate_count, m.two_qubit_count, m.depth)
    return primary + (circuit.encoding(),)


def valid_labelings(graph: NKGraph, limit: int = 64) -> List[Labeling]:
    """按字典序列出至多 limit 个有效标记（保留比特取自输出的 k 元子集）"""
    outputs = graph.outputs
    found = []
    for keep in combinations(outputs, graph.k_in):
        rest = tuple(v for v in outputs if v not in keep)
        labeling = Labeling(tuple(keep) + rest, graph.k_in)
        if is_valid_labeling(graph, labeling):
            found.append(labeling)
            if len(found) >= limit:
                break
    return found


def candidate_circuits(graph: NKGraph, search_labelings: bool = False) -> List[Circuit]:
    """直接综合及两种改写形式"""
    try:
        labelings = valid_labelings(graph) if search_labelings else [find_valid_labeling(graph)]
    except InvalidCodeError:
        return []
    candidates = []
    for labeling in labelings:
        direct = synthesize(graph, labeling)
        candidates.append(direct)
        candidates.append(rewrite_commute(direct, RewriteDirection.CNOT_FIRST))
        candidates.append(rewrite_commute(direct, RewriteDirection.CZ_FIRST))
    return candidates


def refinement_neighbours(circuit: Circuit) -> Iterator[Circuit]:
    """单个测量前CNOT插入以及单个CZ穿过CNOT块的所有邻居"""
    measured = range(circuit.keep, circuit.n)
    for i, j in permutations(measured, 2):
        yield insert_meas_cnot(circuit, i, j)
    cz_first = rewrite_commute(circuit, RewriteDirection.CZ_FIRST)
    for gate in cz_first.gates:
        if gate.kind is GateKind.CZ:
            yield relocate_cz(circuit, gate.qubits, after=True)
    cnot_first = rewrite_commute(circuit, RewriteDirection.CNOT_FIRST)
    for gate in cnot_first.gates:
        if gate.kind is GateKind.CZ:
            yield relocate_cz(circuit, gate.qubits, after=False)


def refine(circuit: Circuit, key: Callable[[Circuit], Tuple], rounds: int = REFINEMENT_ROUNDS) -> Circuit:
    """爬山：反复移动到最优的更好邻居"""
    best, best_key = circuit, key(circuit)
    for _ in range(rounds):
        improved = False
        for neighbour in refinement_neighbours(best):
            neighbour_key = key(neighbour)
            if neighbour_key < best_key:
                best, best_key, improved = neighbour, neighbour_key, True
        if not improved:
            break
    return best


def _random_move(graph: NKGraph, rng: random.Random) -> NKGraph:
    if graph.k_in >= 2 and rng.random() < 0.25:
        u, v = rng.sample(list(graph.inputs), 2)
        return edge_flip(graph, u, v)
    return local_complement(graph, rng.randrange(graph.num_vertices))


def heuristic_search(
    graph: NKGraph,
    objective: Objective = Objective.TWO_QUBIT,
    budget: int = 200,
    seed: int = 0,
    search_labelings: bool = False,
    exact_depth_limit: int = 20,
) -> Circuit:
    """
    随机局部补/输入边翻转游走，对每个邻居尝试直接综合和两种改写，并对新的最优解做插入CNOT与单CZ移动的细化。
    目标值对相同 seed 随 budget 单调不增；budget=0 时返回直接综合。

    异常:
        InvalidCodeError: 图不编码 k 个量子比特。
    """
    objective = Objective(objective)
    direct = synthesize(graph)
    if budget <= 0:
        return direct

    def key(c: Circuit) -> Tuple:
        return objective_key(c, objective, exact_depth_limit)

    best = min(candidate_circuits(graph, search_labelings), key=key)
    best = refine(best, key)
    best_key = key(best)
    rng = random.Random(seed)
    current = graph
    for step in range(budget):
        current = _random_move(current, rng)
        candidates = candidate_circuits(current, search_labelings)
        if not candidates:
            continue
        candidate = min(candidates, key=key)
        candidate_key = key(candidate)
        if candidate_key < best_key:
            candidate = refine(candidate, key)
            best, best_key = candidate, key(candidate)
            logger.info("step %d: new incumbent %s", step, best_key[:3])
    return best
