"""The exceptional SU(4) level-4 module: graph and printed U-cell blocks.

Vertices are ``1..12``.  The doubled edges ``3 -> 5`` and ``5 -> 4`` are
named ``a1, a2`` and ``b1, b2``.  Every U block below is written as a
matrix whose rows and columns follow the listed sequence of midpoints
(or, for the doubled edges, the listed edge names); the orderings are
part of the data, not a convention.
"""

from __future__ import annotations

import math

import numpy as np

from .cells import CellSystem
from .graph import DirectedGraph, fp_eigenvector
from .qarith import Params, quantum_integer

EDGES: list[tuple[int, int, str]] = [
    (1, 3, ""), (2, 3, ""), (3, 5, "a1"), (3, 5, "a2"),
    (4, 1, ""), (4, 2, ""), (4, 6, ""), (4, 7, ""),
    (5, 4, "b1"), (5, 4, "b2"), (5, 8, ""), (5, 10, ""),
    (6, 3, ""), (6, 9, ""), (6, 11, ""),
    (7, 3, ""), (7, 9, ""), (7, 11, ""),
    (8, 6, ""), (8, 7, ""),
    (9, 5, ""), (9, 12, ""),
    (10, 6, ""), (10, 7, ""),
    (11, 5, ""), (11, 12, ""),
    (12, 8, ""), (12, 10, ""),
]  # fmt: skip


def level4_graph() -> DirectedGraph:
    labels = {}
    edges = []
    for n, (s, t, name) in enumerate(EDGES):
        edges.append((n, s, t))
        labels[n] = name or f"{s}->{t}"
    return DirectedGraph(range(1, 13), edges, {v: str(v) for v in range(1, 13)}, labels)


def expected_lambda(params: Params | None = None) -> dict[int, float]:
    qi = _qi(params or Params(4, 4))
    values = [1, 1, qi(4), qi(4), qi(3) * qi(4) / qi(2), qi(3), qi(3), qi(2), qi(2), qi(2), qi(2), qi(4) / qi(2)]
    return dict(zip(range(1, 13), values))


def _qi(params: Params):
    return lambda n: quantum_integer(n, params)


def printed_blocks(params: Params | None = None) -> dict[tuple[int, int], tuple[list[str], np.ndarray]]:
    """The printed U blocks keyed by (source, target) with their step labels.

    A step label is either a midpoint vertex (``"6"``) or a pair of edge
    names for the doubled edges (``"a1b2"``) or a single doubled edge name
    (``"a1"``) when only one leg is doubled.
    """
    qi = _qi(params or Params(4, 4))
    q2, q3, q4 = qi(2), qi(3), qi(4)
    r3 = math.sqrt(q3)
    i = 1j

    u34 = np.zeros((4, 4), dtype=complex)
    u34[np.diag_indices(4)] = [q3 / q4 - r3 / q2, q3 / q4, q3 / q4, q3 / q4 + r3 / q2]
    u34[0, 3] = u34[3, 0] = -1 / q4
    u34[1, 2] = u34[2, 1] = q3 / q4

    u43 = np.array(
        [
            [q3 / q4, -1 / q4, -r3 / q4, -r3 / q4],
            [-1 / q4, q3 / q4, i * r3 / q4, -i * r3 / q4],
            [-r3 / q4, -i * r3 / q4, q3 / q4, i / q4],
            [-r3 / q4, i * r3 / q4, -i / q4, q3 / q4],
        ]
    )

    dp = q3 / q4 + 1 / math.sqrt(q3 * q4**2)
    dm = q3 / q4 - 1 / math.sqrt(q3 * q4**2)
    c = 1 / math.sqrt(q2 * q4)
    d = math.sqrt(q4) / math.sqrt(q2 * q3)
    u56 = np.array([[dp, -c, 0, -d], [-c, dm, -d, 0], [0, -d, dp, c], [-d, 0, c, dm]], dtype=complex)
    u75 = np.array([[dp, c, -d, 0], [c, dm, 0, -i * d], [-d, 0, dm, -i * c], [0, i * d, i * c, dp]])

    def two(a, b, off):
        return np.array([[a, off], [np.conj(off), b]], dtype=complex)

    s = r3 / math.sqrt(q2 * q4)
    m_10_11 = two(q3 / q4 + r3 / q2, q3 / q4 - r3 / q2, -1 / q4)
    m_1_5 = two((q3 - r3) / q4, (q3 + r3) / q4, i * s)
    m_8_9 = two(q3 / q4 - r3 / q2, q3 / q4 + r3 / q2, i / q4)
    m_3_8 = two((q3 + r3) / q4, (q3 - r3) / q4, -s)
    m_8_11 = two(q3 / q4, q3 / q4, -q3 / q4)
    m_2_5 = two((q3 - r3) / q4, (q3 + r3) / q4, -i * s)
    m_9_8 = two(1 / q2, q3 / q2, -r3 / q2)
    m_3_10 = two((q3 + r3) / q4, (q3 - r3) / q4, s)
    m_11_10 = two(1 / q2, q3 / q2, r3 / q2)
    m_10_9 = two(q3 / q4, q3 / q4, i * q3 / q4)

    data = {
        (3, 4): (["a1b1", "a1b2", "a2b1", "a2b2"], u34),
        (4, 3): (["1", "2", "6", "7"], u43),
        (5, 6): (["b1", "b2", "8", "10"], u56),
        (6, 5): (["a1", "a2", "9", "11"], u56),
        (5, 7): (["10", "8", "b1", "b2"], u56),
        (7, 5): (["a1", "a2", "9", "11"], u75),
        (10, 11): (["6", "7"], m_10_11),
        (1, 5): (["a1", "a2"], m_1_5),
        (4, 9): (["7", "6"], m_1_5),
        (5, 1): (["b1", "b2"], m_1_5),
        (7, 12): (["11", "9"], m_1_5),
        (8, 3): (["7", "6"], m_1_5),
        (10, 3): (["6", "7"], m_1_5),
        (8, 9): (["6", "7"], m_8_9),
        (3, 8): (["a1", "a2"], m_3_8),
        (4, 11): (["7", "6"], m_3_8),
        (6, 12): (["11", "9"], m_3_8),
        (9, 4): (["b1", "b2"], m_3_8),
        (12, 6): (["10", "8"], m_3_8),
        (12, 7): (["8", "10"], m_3_8),
        (8, 11): (["6", "7"], m_8_11),
        (2, 5): (["a1", "a2"], m_2_5),
        (5, 2): (["b1", "b2"], m_2_5),
        (9, 8): (["5", "12"], m_9_8),
        (9, 10): (["12", "5"], m_9_8),
        (11, 8): (["12", "5"], m_9_8),
        (3, 10): (["a1", "a2"], m_3_10),
        (11, 4): (["b1", "b2"], m_3_10),
        (11, 10): (["5", "12"], m_11_10),
        (10, 9): (["6", "7"], m_10_9),
    }
    return data


def _resolve(graph: DirectedGraph, v: int, w: int, label: str) -> tuple[int, int]:
    """Turn a step label into the length-two edge path ``v -> w`` it names."""
    by_name = {graph.edge_label(e.id): e for e in graph.edges}
    if label.isdigit():
        m = int(label)
        (e1,) = graph.edges_between(v, m)
        (e2,) = graph.edges_between(m, w)
        return (e1.id, e2.id)
    names = [label[n : n + 2] for n in range(0, len(label), 2)]
    if len(names) == 2:
        return (by_name[names[0]].id, by_name[names[1]].id)
    e = by_name[names[0]]
    if e.src == v:
        (rest,) = graph.edges_between(e.dst, w)
        return (e.id, rest.id)
    (first,) = graph.edges_between(v, e.src)
    return (first.id, e.id)


def level4_cells(params: Params | None = None) -> CellSystem:
    """U cells only; B cells come from the linear solver."""
    params = params or Params(4, 4, 0)
    graph = level4_graph()
    u_cells = {}
    for (v, w), (labels, mat) in printed_blocks(params).items():
        paths = [_resolve(graph, v, w, lab) for lab in labels]
        for r, p in enumerate(paths):
            for c, q in enumerate(paths):
                u_cells[(v, w, p, q)] = complex(mat[r, c])
    return CellSystem(params, graph, fp_eigenvector(graph), u_cells, None)
