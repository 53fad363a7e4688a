"""
graph_distil 夹具模块
以数据形式保存已知的图和电路（按标识检索），顶点与比特在此处从0开始编号
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

from .exceptions import FixtureError
from .graph_code import NKGraph
from .symplectic import CNOT, CZ, MZ, Gate, H


@dataclass(frozen=True)
class FixtureInfo:
    """夹具的标识、类别与简短说明"""
    fixture_id: str
    kind: str
    description: str


def _graph(n_out: int, output_edges: Sequence[Tuple[int, int]], inputs: Sequence[Sequence[int]]) -> NKGraph:
    """一基编号的输出边和输入邻域；输入顶点排在输出之后"""
    edges = [(u - 1, v - 1) for u, v in output_edges]
    for index, neighbourhood in enumerate(inputs):
        edges.extend((n_out + index, v - 1) for v in neighbourhood)
    return NKGraph.from_edges(n_out, len(inputs), edges)


def _circuit(n: int, keep: int, body: Sequence[Tuple[str, int, int]]) -> "Circuit":
    """一基编号的CZ/CNOT主体，之后对被测比特 keep+1..n 做 H 和测量"""
    from .circuit_synth import Circuit

    gates: List[Gate] = []
    for kind, a, b in body:
        gates.append(CZ(a - 1, b - 1) if kind == "CZ" else CNOT(a - 1, b - 1))
    gates.extend(H(q) for q in range(keep, n))
    gates.extend(MZ(q) for q in range(keep, n))
    return Circuit(n, keep, tuple(gates))


def code_422_graph() -> NKGraph:
    # [[4,2,2]]: 4-cycle with each input on one pair of opposite edges' endpoints
    return _graph(4, [(1, 2), (2, 3), (3, 4), (4, 1)], [(1, 2), (3, 4)])


def shared_inputs_graph() -> NKGraph:
    return _graph(4, [(2, 3), (3, 4), (4, 1), (1, 3)], [(1, 2), (1, 2)])


def four_two_graph() -> NKGraph:
    return _graph(4, [(1, 2), (2, 3), (3, 4)], [(1, 3, 4), (2, 3)])


def four_two_lc_graph() -> NKGraph:
    """four-two 图在输出顶点 2 处局部补后的图"""
    return _graph(4, [(1, 2), (2, 3), (3, 4), (1, 3)], [(1, 3, 4), (1, 2)])


def five_qubit_wheel() -> NKGraph:
    return _graph(5, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)], [(1, 2, 3, 4, 5)])


def five_qubit_labeled() -> NKGraph:
    return _graph(
        5,
        [(1, 4), (4, 2), (2, 5), (3, 1), (3, 4), (3, 2), (3, 5)],
        [(1, 3, 5)],
    )


def ten_seven_graph() -> NKGraph:
    return _graph(
        10,
        [(1, 10), (2, 6), (3, 6), (3, 9), (4, 9), (5, 7), (5, 8), (7, 8)],
        [
            (1, 5),
            (1, 2, 4, 5, 6, 7, 10),
            (1, 2, 3, 10),
            (1, 2, 3, 4, 8, 10),
            (3, 4, 5, 8, 9, 10),
            (5, 6, 8),
            (1, 2, 4, 5, 7, 8, 9, 10),
        ],
    )


GRAPHS: Dict[str, Tuple[Callable[[], NKGraph], str]] = {
    "code-422": (code_422_graph, "[[4,2,2]] graph code, 4->2"),
    "shared-inputs": (shared_inputs_graph, "(4,2)-graph whose inputs share a neighbourhood; encodes one qubit"),
    "four-two": (four_two_graph, "4->2 graph with codeword generators Z1Z3Z4 and Z2Z3"),
    "four-two-lc": (four_two_lc_graph, "local complement of four-two at output 2"),
    "fivequbit": (five_qubit_wheel, "five-qubit code as a wheel graph, 5->1"),
    "fivequbit-labeled": (five_qubit_labeled, "five-qubit code graph used for circuit rewriting, 5->1"),
    "ten-seven": (ten_seven_graph, "10->7 graph used for encoded teleportation"),
}


CIRCUITS: Dict[str, Tuple[Callable[[], "Circuit"], str]] = {
    "four-two": (
        lambda: _circuit(4, 2, [
            ("CZ", 2, 3), ("CZ", 1, 2), ("CZ", 3, 4),
            ("CNOT", 3, 1), ("CNOT", 4, 1), ("CNOT", 3, 2),
        ]),
        "circuit synthesized from the four-two graph",
    ),
    "fivequbit-c1": (
        lambda: _circuit(5, 1, [
            ("CZ", 1, 3), ("CZ", 2, 5), ("CZ", 2, 3), ("CZ", 3, 4), ("CZ", 1, 4), ("CZ", 2, 4), ("CZ", 3, 5),
            ("CNOT", 3, 1), ("CNOT", 5, 1),
        ]),
        "direct circuit of the labeled five-qubit graph",
    ),
    "fivequbit-c3": (
        lambda: _circuit(5, 1, [
            ("CNOT", 3, 1), ("CNOT", 5, 1), ("CNOT", 4, 3),
            ("CZ", 1, 3), ("CZ", 2, 5), ("CZ", 2, 3), ("CZ", 4, 5),
        ]),
        "depth-reduced five-qubit circuit with an extra CNOT before measurement",
    ),
    "ten-seven": (
        lambda: _circuit(10, 7, [
            ("CZ", 2, 6), ("CZ", 7, 8), ("CZ", 1, 10), ("CZ", 4, 9), ("CNOT", 9, 6),
            ("CZ", 5, 7), ("CZ", 3, 6), ("CNOT", 10, 7), ("CZ", 5, 8), ("CNOT", 9, 2),
            ("CNOT", 10, 3), ("CNOT", 9, 1), ("CNOT", 8, 4), ("CNOT", 9, 5), ("CNOT", 8, 6),
        ]),
        "10->7 circuit with 15 two-qubit gates and depth 6",
    ),
    "noisy-n4": (
        lambda: _circuit(4, 1, [
            ("CNOT", 4, 1), ("CNOT", 4, 2), ("CZ", 1, 2), ("CZ", 2, 3),
        ]),
        "4->1 circuit",
    ),
    "noisy-n5": (
        lambda: _circuit(5, 1, [
            ("CNOT", 2, 1), ("CNOT", 3, 1), ("CNOT", 4, 2),
            ("CZ", 1, 2), ("CZ", 2, 5), ("CZ", 3, 4), ("CZ", 3, 5),
        ]),
        "5->1 circuit",
    ),
    "noisy-n6": (
        lambda: _circuit(6, 1, [
            ("CNOT", 2, 1), ("CNOT", 5, 1), ("CNOT", 4, 5),
            ("CZ", 1, 5), ("CZ", 3, 5), ("CZ", 2, 3), ("CZ", 2, 4), ("CZ", 5, 6),
        ]),
        "6->1 circuit",
    ),
    "noisy-n7": (
        lambda: _circuit(7, 1, [
            ("CNOT", 4, 1), ("CNOT", 7, 1), ("CNOT", 7, 3),
            ("CZ", 1, 3), ("CZ", 2, 3), ("CZ", 2, 6), ("CZ", 3, 6), ("CZ", 4, 5), ("CZ", 3, 5), ("CZ", 2, 4),
        ]),
        "7->1 circuit",
    ),
    "noisy-n8": (
        lambda: _circuit(8, 1, [
            ("CNOT", 4, 1), ("CNOT", 7, 1), ("CNOT", 8, 2),
            ("CZ", 1, 2), ("CZ", 7, 8), ("CZ", 2, 3), ("CZ", 2, 6), ("CZ", 3, 6), ("CZ", 4, 5),
            ("CZ", 3, 5), ("CZ", 3, 4), ("CZ", 5, 7), ("CZ", 4, 6),
        ]),
        "8->1 circuit",
    ),
    "noisy-n9": (
        lambda: _circuit(9, 1, [
            ("CNOT", 4, 1), ("CNOT", 8, 9), ("CNOT", 7, 1),
            ("CZ", 1, 3), ("CZ", 1, 2), ("CZ", 2, 9), ("CZ", 5, 9), ("CZ", 7, 9), ("CZ", 4, 9),
            ("CZ", 3, 6), ("CZ", 3, 5), ("CZ", 6, 7), ("CZ", 6, 8), ("CZ", 5, 7), ("CZ", 4, 6),
        ]),
        "9->1 circuit",
    ),
}

NOISY_CIRCUIT_IDS = tuple(f"noisy-n{n}" for n in range(4, 10))


def get_graph(fixture_id: str) -> NKGraph:
    """
    按标识返回夹具图。

    异常:
        FixtureError: 未知标识。
    """
    try:
        factory, _ = GRAPHS[fixture_id]
    except KeyError:
        raise FixtureError(f"Unknown graph fixture {fixture_id!r}; known: {sorted(GRAPHS)}") from None
    return factory()


def get_circuit(fixture_id: str):
    """
    按标识返回夹具电路。

    异常:
        FixtureError: 未知标识。
    """
    try:
        factory, _ = CIRCUITS[fixture_id]
    except KeyError:
        raise FixtureError(f"Unknown circuit fixture {fixture_id!r}; known: {sorted(CIRCUITS)}") from None
    return factory()


def list_fixtures() -> List[FixtureInfo]:
    infos = [FixtureInfo(key, "graph", desc) for key, (_, desc) in GRAPHS.items()]
    infos += [FixtureInfo(key, "circuit", desc) for key, (_, desc) in CIRCUITS.items()]
    return infos
