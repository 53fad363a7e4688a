"""
graph_distil 图码模块
处理 (n,k)-图、等价变换（局部补、输入边翻转、(n,k)-置换）、码字生成元、有效性、有效标记、
规范形式与局部补轨道，以及输入/输出扩展
"""

import json
import logging
from collections import OrderedDict, deque
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, product
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .exceptions import InvalidCodeError, ParseError, SizeLimitError
from .symplectic import gf2_rank, gf2_rref, iter_bits

logger = logging.getLogger(__name__)

MAX_ORBIT_VERTICES = 12
MAX_CLASS_VERTICES = 9


@dataclass(frozen=True)
class NKGraph:
    """
    (n,k)-图：n_out+k_in 个顶点的简单图，其中 inputs 为 k_in 个输入顶点。
    邻接关系以每个顶点的位掩码保存。
    """
    n_out: int
    k_in: int
    adjacency: Tuple[int, ...]
    inputs: Tuple[int, ...]

    def __post_init__(self):
        size = self.n_out + self.k_in
        adjacency = tuple(int(a) for a in self.adjacency)
        inputs = tuple(sorted(int(v) for v in self.inputs))
        object.__setattr__(self, "adjacency", adjacency)
        object.__setattr__(self, "inputs", inputs)
        if len(adjacency) != size:
            raise ValueError(f"Expected {size} adjacency rows, got {len(adjacency)}")
        if len(inputs) != self.k_in or len(set(inputs)) != self.k_in:
            raise ValueError(f"Expected {self.k_in} distinct input vertices, got {inputs}")
        if any(not 0 <= v < size for v in inputs):
            raise ValueError(f"Input vertices {inputs} out of range 0..{size - 1}")
        for v, row in enumerate(adjacency):
            if row >> size:
                raise ValueError(f"Vertex {v} has neighbours outside the graph")
            if (row >> v) & 1:
                raise ValueError(f"Vertex {v} has a loop")
            for u in iter_bits(row):
                if not (adjacency[u] >> v) & 1:
                    raise ValueError(f"Adjacency not symmetric at ({v}, {u})")

    @classmethod
    def from_edges(
        cls,
        n_out: int,
        k_in: int,
        edges: Sequence[Tuple[int, int]],
        inputs: Optional[Sequence[int]] = None,
    ) -> "NKGraph":
        """从边列表构造；inputs 默认为最后 k_in 个顶点"""
        size = n_out + k_in
        rows = [0] * size
        for u, v in edges:
            if u == v:
                raise ValueError(f"Loop at vertex {u}")
            if not (0 <= u < size and 0 <= v < size):
                raise ValueError(f"Edge ({u}, {v}) out of range")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        if inputs is None:
            inputs = range(n_out, size)
        return cls(n_out, k_in, tuple(rows), tuple(inputs))

    @property
    def num_vertices(self) -> int:
        return self.n_out + self.k_in

    @property
    def outputs(self) -> Tuple[int, ...]:
        input_set = set(self.inputs)
        return tuple(v for v in range(self.num_vertices) if v not in input_set)

    def neighbors(self, v: int) -> List[int]:
        return list(iter_bits(self.adjacency[v]))

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.adjacency[u] >> v) & 1)

    def edges(self) -> List[Tuple[int, int]]:
        return [(u, v) for u in range(self.num_vertices) for v in iter_bits(self.adjacency[u]) if u < v]

    def output_adjacency(self, order: Sequence[int]) -> np.ndarray:
        """按给定输出顺序的输出诱导子图邻接矩阵"""
        size = len(order)
        mat = np.zeros((size, size), dtype=np.uint8)
        for i, u in enumerate(order):
            for j, v in enumerate(order):
                if self.has_edge(u, v):
                    mat[i, j] = 1
        return mat

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        input_set = set(self.inputs)
        for v in range(self.num_vertices):
            g.add_node(v, role="input" if v in input_set else "output")
        g.add_edges_from(self.edges())
        return g

    @classmethod
    def from_networkx(cls, g: nx.Graph, inputs: Sequence[int] = ()) -> "NKGraph":
        nodes = sorted(g.nodes())
        index = {v: i for i, v in enumerate(nodes)}
        edges = [(index[u], index[v]) for u, v in g.edges()]
        input_idx = [index[v] for v in inputs]
        return cls.from_edges(len(nodes) - len(input_idx), len(input_idx), edges, input_idx)

    def to_graph6(self) -> str:
        return nx.to_graph6_bytes(self.to_networkx(), header=False).decode("ascii").strip()

    def to_json(self) -> dict:
        return {"graph6": self.to_graph6(), "inputs": list(self.inputs)}

    def describe(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def graph_from_graph6(text: str, inputs: Sequence[int] = ()) -> NKGraph:
    """解析 graph6 字符串（可带 >>graph6<< 头）"""
    data = text.strip()
    if data.startswith(">>graph6<<"):
        data = data[len(">>graph6<<"):]
    try:
        g = nx.from_graph6_bytes(data.encode("ascii"))
    except (nx.NetworkXError, ValueError, UnicodeEncodeError) as e:
        raise ParseError(f"Malformed graph6 string {text!r}: {e}") from e
    try:
        return NKGraph.from_networkx(g, inputs)
    except ValueError as e:
        raise ParseError(str(e)) from e


def graph_from_json(data: Mapping) -> NKGraph:
    """解析 {"graph6": str, "inputs": [...]} 包络"""
    if not isinstance(data, Mapping) or "graph6" not in data:
        raise ParseError("Graph envelope must be an object with a 'graph6' field")
    return graph_from_graph6(str(data["graph6"]), data.get("inputs", []))


def load_graph(path) -> NKGraph:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return graph_from_graph6(text)
    return graph_from_json(data)


# ---------------------------------------------------------------------------
# Moves

def local_complement(graph: NKGraph, v: int) -> NKGraph:
    """
    在顶点 v 处做局部补：翻转 N_v 内部的所有边。

    异常:
        IndexError: 顶点越界。
    """
    if not 0 <= v < graph.num_vertices:
        raise IndexError(f"Vertex {v} out of range")
    rows = list(graph.adjacency)
    nb = rows[v]
    for u in iter_bits(nb):
        rows[u] ^= nb & ~(1 << u)
    return NKGraph(graph.n_out, graph.k_in, tuple(rows), graph.inputs)


def edge_flip(graph: NKGraph, u: int, v: int) -> NKGraph:
    """
    翻转两个输入顶点之间的边。

    异常:
        ValueError: 任一顶点为输出顶点或 u == v。
    """
    if u == v:
        raise ValueError("Edge flip needs two distinct vertices")
    if u not in graph.inputs or v not in graph.inputs:
        raise ValueError(f"Edge flips are only allowed between input vertices, got ({u}, {v})")
    rows = list(graph.adjacency)
    rows[u] ^= 1 << v
    rows[v] ^= 1 << u
    return NKGraph(graph.n_out, graph.k_in, tuple(rows), graph.inputs)


def apply_nk_permutation(
    graph: NKGraph,
    pi_in: Mapping[int, int],
    pi_out: Mapping[int, int],
) -> NKGraph:
    """
    分别置换输入顶点和输出顶点；未出现在映射中的顶点保持不动。

    异常:
        ValueError: 置换跨越输入/输出划分或不是双射。
    """
    input_set = set(graph.inputs)
    output_set = set(graph.outputs)
    perm = list(range(graph.num_vertices))
    for mapping, part, name in ((pi_in, input_set, "input"), (pi_out, output_set, "output")):
        if not set(mapping) <= part or not set(mapping.values()) <= part:
            raise ValueError(f"{name} permutation must stay within the {name} vertices")
        if sorted(mapping) != sorted(mapping.values()):
            raise ValueError(f"{name} permutation is not a bijection")
        for src, dst in mapping.items():
            perm[src] = dst
    rows = [0] * graph.num_vertices
    for v, row in enumerate(graph.adjacency):
        rows[perm[v]] = sum(1 << perm[u] for u in iter_bits(row))
    return NKGraph(graph.n_out, graph.k_in, tuple(rows), graph.inputs)


# ---------------------------------------------------------------------------
# Codewords and labelings

@dataclass(frozen=True)
class Labeling:
    """输出顶点的排列：前 k 个为保留的 V_keep，其余为被测量的 V_meas"""
    output_order: Tuple[int, ...]
    k: int

    @property
    def keep(self) -> Tuple[int, ...]:
        return self.output_order[:self.k]

    @property
    def measured(self) -> Tuple[int, ...]:
        return self.output_order[self.k:]


@dataclass(frozen=True)
class CodewordMatrix:
    """k 行、每行一个输入顶点在输出上的邻域（第 j 位对应标记中的第 j 个输出）"""
    rows: Tuple[int, ...]
    n: int

    def to_array(self) -> np.ndarray:
        mat = np.zeros((len(self.rows), self.n), dtype=np.uint8)
        for i, row in enumerate(self.rows):
            for j in iter_bits(row):
                mat[i, j] = 1
        return mat

    @property
    def rank(self) -> int:
        return gf2_rank(self.to_array()) if self.rows else 0


def natural_labeling(graph: NKGraph) -> Labeling:
    return Labeling(graph.outputs, graph.k_in)


def codeword_generators(graph: NKGraph, labeling: Optional[Labeling] = None) -> CodewordMatrix:
    """第 i 行是第 i 个输入顶点与输出顶点的邻接，按标记顺序排列"""
    labeling = labeling or natural_labeling(graph)
    rows = []
    for u in graph.inputs:
        rows.append(sum(1 << j for j, v in enumerate(labeling.output_order) if graph.has_edge(u, v)))
    return CodewordMatrix(tuple(rows), len(labeling.output_order))


def is_valid_code(graph: NKGraph) -> bool:
    """rank(𝐀) = k"""
    if graph.k_in == 0:
        return True
    return codeword_generators(graph).rank == graph.k_in


def is_valid_labeling(graph: NKGraph, labeling: Labeling) -> bool:
    """RREF 的主元恰好落在前 k 列"""
    if sorted(labeling.output_order) != list(graph.outputs) or labeling.k != graph.k_in:
        return False
    if graph.k_in == 0:
        return True
    _, pivots = gf2_rref(codeword_generators(graph, labeling).to_array())
    return pivots == list(range(graph.k_in))


def require_valid_labeling(graph: NKGraph, labeling: Labeling) -> None:
    if not is_valid_labeling(graph, labeling):
        raise InvalidCodeError(f"Labeling {labeling.output_order} is not valid for this graph")


def find_valid_labeling(graph: NKGraph) -> Labeling:
    """
    从左到右扫描输出列，把提供主元的列移到前面。

    异常:
        InvalidCodeError: rank(𝐀) < k。
    """
    outputs = graph.outputs
    if graph.k_in == 0:
        return Labeling(outputs, 0)
    _, pivots = gf2_rref(codeword_generators(graph).to_array())
    if len(pivots) < graph.k_in:
        raise InvalidCodeError(
            f"Codeword generators have rank {len(pivots)} < k={graph.k_in}; the graph encodes fewer qubits"
        )
    rest = [v for j, v in enumerate(outputs) if j not in pivots]
    return Labeling(tuple(outputs[p] for p in pivots) + tuple(rest), graph.k_in)


# ---------------------------------------------------------------------------
# Canonical labeling

@dataclass(frozen=True)
class CanonicalForm:
    """规范键、从规范位置到原顶点的映射以及规范图"""
    key: Tuple
    order: Tuple[int, ...]
    graph: NKGraph


def _refine(adjacency: Sequence[int], cells: List[List[int]]) -> List[List[int]]:
    while True:
        masks = [sum(1 << v for v in cell) for cell in cells]
        refined: List[List[int]] = []
        changed = False
        for cell in cells:
            if len(cell) == 1:
                refined.append(cell)
                continue
            signature = {
                v: tuple(bin(adjacency[v] & m).count("1") for m in masks) for v in cell
            }
            groups = sorted(set(signature.values()))
            if len(groups) > 1:
                changed = True
            for group in groups:
                refined.append([v for v in cell if signature[v] == group])
        cells = refined
        if not changed:
            return cells


def _twins(adjacency: Sequence[int], u: int, w: int) -> bool:
    return adjacency[u] & ~(1 << w) == adjacency[w] & ~(1 << u)


def _encode(adjacency: Sequence[int], order: Sequence[int]) -> Tuple[int, ...]:
    position = {v: i for i, v in enumerate(order)}
    return tuple(sum(1 << position[u] for u in iter_bits(adjacency[v])) for v in order)


def canonical_form(graph: NKGraph) -> CanonicalForm:
    """
    输入/输出划分内的规范标记：等色细化加个体化搜索，取最小的叶子编码。
    规范顺序中输出在前（位置 0..n-1），输入在后。
    """
    adjacency = graph.adjacency
    initial = [list(part) for part in (graph.outputs, graph.inputs) if part]
    best: List = [None, None]

    def search(cells: List[List[int]]):
        cells = _refine(adjacency, cells)
        target = next((i for i, cell in enumerate(cells) if len(cell) > 1), None)
        if target is None:
            order = [cell[0] for cell in cells]
            code = _encode(adjacency, order)
            if best[0] is None or code < best[0]:
                best[0], best[1] = code, order
            return
        cell = cells[target]
        explored: List[int] = []
        for v in sorted(cell):
            if any(_twins(adjacency, v, u) for u in explored):
                continue
            explored.append(v)
            rest = [u for u in cell if u != v]
            search(cells[:target] + [[v], rest] + cells[target + 1:])

    if not initial:
        order: List[int] = []
        code: Tuple[int, ...] = ()
    else:
        search(initial)
        code, order = best
    canonical = NKGraph(graph.n_out, graph.k_in, code, tuple(range(graph.n_out, graph.num_vertices)))
    return CanonicalForm((graph.n_out, graph.k_in, code), tuple(order), canonical)


def graph_from_key(key: Tuple) -> NKGraph:
    n_out, k_in, code = key
    return NKGraph(n_out, k_in, code, tuple(range(n_out, n_out + k_in)))


# ---------------------------------------------------------------------------
# Orbits

@dataclass(frozen=True)
class OrbitResult:
    """
    轨道规范形式：representative 为轨道中键最小的规范图，members 为轨道内全部同构类的规范键。
    """
    representative: NKGraph
    key: Tuple
    orbit_size: int
    members: FrozenSet[Tuple]


def orbit_moves(graph: NKGraph) -> Iterator[NKGraph]:
    """所有顶点处的局部补以及所有输入对上的边翻转"""
    for v in range(graph.num_vertices):
        if graph.adjacency[v]:
            yield local_complement(graph, v)
    for u, v in combinations(graph.inputs, 2):
        yield edge_flip(graph, u, v)


@lru_cache(maxsize=1 << 16)
def _orbit_of_key(start_key: Tuple) -> OrbitResult:
    seen = {start_key}
    queue = deque([start_key])
    while queue:
        current = graph_from_key(queue.popleft())
        for neighbour in orbit_moves(current):
            key = canonical_form(neighbour).key
            if key not in seen:
                seen.add(key)
                queue.append(key)
    rep_key = min(seen)
    members = frozenset(seen)
    result = OrbitResult(graph_from_key(rep_key), rep_key, len(seen), members)
    for key in seen:
        if key != start_key:
            _remember_seed(key, result)
    return result


# 轨道成员 → 结果，容量与 _orbit_of_key 的缓存相同，按最近使用淘汰
_ORBIT_SEED_LIMIT = 1 << 16
_orbit_seed: "OrderedDict[Tuple, OrbitResult]" = OrderedDict()


def _remember_seed(key: Tuple, result: OrbitResult):
    if key in _orbit_seed:
        _orbit_seed.move_to_end(key)
        return
    _orbit_seed[key] = result
    while len(_orbit_seed) > _ORBIT_SEED_LIMIT:
        _orbit_seed.popitem(last=False)


def clear_orbit_cache():
    """清空轨道缓存"""
    _orbit_seed.clear()
    _orbit_of_key.cache_clear()


def orbit_canonical_form(graph: NKGraph, max_vertices: int = MAX_ORBIT_VERTICES) -> OrbitResult:
    """
    局部补、输入边翻转与 (n,k)-置换下的轨道规范形式。两个图局部等价当且仅当键相同。

    异常:
        SizeLimitError: n+k 超过 max_vertices。
    """
    if graph.num_vertices > max_vertices:
        raise SizeLimitError(f"Orbit search limited to {max_vertices} vertices, got {graph.num_vertices}")
    key = canonical_form(graph).key
    cached = _orbit_seed.get(key)
    if cached is not None:
        _orbit_seed.move_to_end(key)
        return cached
    result = _orbit_of_key(key)
    logger.debug("orbit of %s has %d classes", key[:2], result.orbit_size)
    return result


# ---------------------------------------------------------------------------
# Extensions and class catalogues

class ExtensionKind(str, Enum):
    OUTPUT = "OutputExtension"
    INPUT = "InputExtension"


def _outputs_first(graph: NKGraph) -> NKGraph:
    order = list(graph.outputs) + list(graph.inputs)
    position = {v: i for i, v in enumerate(order)}
    rows = [0] * graph.num_vertices
    for v, row in enumerate(graph.adjacency):
        rows[position[v]] = sum(1 << position[u] for u in iter_bits(row))
    return NKGraph(graph.n_out, graph.k_in, tuple(rows), tuple(range(graph.n_out, graph.num_vertices)))


def extend(graph: NKGraph, kind: ExtensionKind, max_vertices: int = 16) -> List[NKGraph]:
    """
    添加一个新顶点并枚举其所有非空邻域。
    输出扩展得到 2^(n+k)−1 个图（新输出顶点位于下标 n）；输入扩展得到 2^n−1 个图（新输入顶点在末尾，只连输出）。
    """
    kind = ExtensionKind(kind)
    if graph.num_vertices + 1 > max_vertices:
        raise SizeLimitError(f"Extension would exceed {max_vertices} vertices")
    base = _outputs_first(graph)
    n, k = base.n_out, base.k_in
    size = n + k
    results = []
    if kind is ExtensionKind.OUTPUT:
        # shift inputs up by one to make room for the new output at index n
        def shifted(mask: int) -> int:
            low = mask & ((1 << n) - 1)
            high = mask >> n
            return low | (high << (n + 1))

        old_rows = [shifted(row) for row in base.adjacency]
        old_index = list(range(n)) + list(range(n + 1, size + 1))
        for subset in range(1, 1 << size):
            new_mask = shifted(subset)
            rows = [0] * (size + 1)
            for v, row in zip(old_index, old_rows):
                rows[v] = row | ((1 << n) if (new_mask >> v) & 1 else 0)
            rows[n] = new_mask
            results.append(NKGraph(n + 1, k, tuple(rows), tuple(range(n + 1, size + 1))))
    else:
        for subset in range(1, 1 << n):
            rows = list(base.adjacency) + [subset]
            for v in iter_bits(subset):
                rows[v] |= 1 << size
            results.append(NKGraph(n, k + 1, tuple(rows), tuple(range(n, size + 1))))
    return results


@lru_cache(maxsize=None)
def connected_lc_classes(num_vertices: int) -> Tuple[NKGraph, ...]:
    """
    N 个顶点的连通图在局部补与同构下的类代表（k=0）。
    由 N−1 顶点代表的输出扩展生成，N=1..7 的类数为 1, 1, 1, 2, 4, 11, 26。
    """
    if num_vertices < 1:
        raise ValueError("Need at least one vertex")
    if num_vertices > MAX_CLASS_VERTICES:
        raise SizeLimitError(f"Self-generated class lists are limited to {MAX_CLASS_VERTICES} vertices")
    if num_vertices == 1:
        return (NKGraph(1, 0, (0,), ()),)
    reps: Dict[Tuple, NKGraph] = {}
    for rep in connected_lc_classes(num_vertices - 1):
        for candidate in extend(rep, ExtensionKind.OUTPUT):
            orbit = orbit_canonical_form(candidate)
            reps.setdefault(orbit.key, orbit.representative)
    logger.info("%d LC classes of connected graphs on %d vertices", len(reps), num_vertices)
    return tuple(reps[key] for key in sorted(reps))


def _integer_partitions(total: int, largest: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    largest = total if largest is None else largest
    if total == 0:
        yield ()
        return
    for part in range(min(total, largest), 0, -1):
        for rest in _integer_partitions(total - part, part):
            yield (part,) + rest


def disjoint_union(graphs: Sequence[NKGraph]) -> NKGraph:
    """k=0 图的不交并"""
    rows: List[int] = []
    offset = 0
    for g in graphs:
        rows.extend(row << offset for row in g.adjacency)
        offset += g.num_vertices
    return NKGraph(offset, 0, tuple(rows), ())


def lc_classes(
    num_vertices: int,
    include_disconnected: bool = False,
    class_source=connected_lc_classes,
) -> List[NKGraph]:
    """
    局部补类代表。非连通类是各连通分量类代表的多重集。

    参数:
        class_source: 返回给定顶点数连通类代表的可调用对象（例如轨道数据库）。
    """
    if not include_disconnected:
        return list(class_source(num_vertices))
    result: List[NKGraph] = []
    for partition in _integer_partitions(num_vertices):
        per_size = []
        for size in sorted(set(partition), reverse=True):
            count = partition.count(size)
            per_size.append(list(combinations_with_replacement(class_source(size), count)))
        for choice in product(*per_size):
            parts = [g for group in choice for g in group]
            result.append(parts[0] if len(parts) == 1 else disjoint_union(parts))
    return result


def with_inputs(graph: NKGraph, inputs: Sequence[int]) -> NKGraph:
    """把 k=0 图的一组顶点指定为输入，并重排为输出在前"""
    base = NKGraph(graph.num_vertices - len(inputs), len(inputs), graph.adjacency, tuple(inputs))
    return _outputs_first(base)
