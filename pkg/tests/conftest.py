from __future__ import annotations

import math

import numpy as np
import pytest

from kwcell.cells import CellSystem
from kwcell.families import cc_cells
from kwcell.graph import DirectedGraph, fp_eigenvector
from kwcell.level4 import level4_cells
from kwcell.qarith import Params


def single_vertex(loops: int) -> DirectedGraph:
    return DirectedGraph([0], [(e, 0, 0) for e in range(loops)])


def two_cycle() -> DirectedGraph:
    return DirectedGraph([0, 1], [(0, 0, 1), (1, 1, 0)])


def directed_cycle(n: int) -> DirectedGraph:
    return DirectedGraph(range(n), [(i, i, (i + 1) % n) for i in range(n)])


def a3_graph() -> DirectedGraph:
    """The A3 Dynkin diagram with each edge doubled into both directions."""
    return DirectedGraph([0, 1, 2], [(0, 0, 1), (1, 1, 0), (2, 1, 2), (3, 2, 1)])


def temperley_lieb_cells(graph: DirectedGraph, params: Params, with_b: bool = True) -> CellSystem:
    """Jones-projection cells for N = 2: nonzero only on ``v -> m -> v`` loops."""
    fp = fp_eigenvector(graph)
    lam = fp.lam
    two = 2 * math.cos(math.pi / params.level_sum)
    u_cells = {}
    for v in graph.vertices:
        for p in graph.forward_paths(2, v):
            w = graph.path_end(v, p)
            for q in graph.forward_paths(2, v, w):
                if v == w:
                    mp, mq = graph.path_vertices(v, p)[1], graph.path_vertices(v, q)[1]
                    u_cells[(v, w, p, q)] = math.sqrt(lam[mp] * lam[mq]) / lam[v]
                else:
                    u_cells[(v, w, p, q)] = 0.0
    b_cells = None
    if with_b:
        b_cells = {}
        for v in graph.vertices:
            for path in graph.forward_paths(2, v, v):
                m = graph.path_vertices(v, path)[1]
                b_cells[(v, path)] = math.sqrt(lam[m] / (lam[v] * two))
    return CellSystem(params, graph, fp, u_cells, b_cells)


@pytest.fixture(scope="session")
def level4():
    return level4_cells()


@pytest.fixture(scope="session")
def cc2():
    return cc_cells(2)


@pytest.fixture(scope="session")
def a3_tl():
    # A3 has norm sqrt(2) = [2]_q at N + k = 4; RI at N = 2 needs omega = -1
    return temperley_lieb_cells(a3_graph(), Params(2, 2, 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_morphism(graph: DirectedGraph, source, target, rng: np.random.Generator, density: float = 0.5):
    """A sparse random morphism with complex Gaussian coefficients."""
    from kwcell.ogpa import Morphism, all_paths

    sources, targets = all_paths(graph, source), all_paths(graph, target)
    terms = {}
    for p in sources:
        for q in targets:
            if p.start == q.start and p.end == q.end and rng.random() < density:
                terms[(p, q)] = complex(rng.normal(), rng.normal())
    return Morphism(tuple(source), tuple(target), terms)


def random_word(rng: np.random.Generator, max_len: int = 3) -> tuple[int, ...]:
    return tuple(int(s) for s in rng.choice([1, -1], size=int(rng.integers(0, max_len + 1))))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":").rstrip("ab"))):
            terminalreporter.write_line(line)
