"""Directed multigraphs, signed paths and Frobenius-Perron data."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Edge:
    id: int
    src: int
    dst: int


@dataclass(frozen=True)
class SignedEdge:
    """An edge traversed forwards (``sign=+1``) or backwards (``sign=-1``)."""

    edge: Edge
    sign: int

    @property
    def start(self) -> int:
        return self.edge.src if self.sign > 0 else self.edge.dst

    @property
    def end(self) -> int:
        return self.edge.dst if self.sign > 0 else self.edge.src


@dataclass(frozen=True)
class EpsilonPath:
    """A path in the signed doubling; the empty path is just its start vertex."""

    start: int
    steps: tuple[SignedEdge, ...] = ()

    def __post_init__(self) -> None:
        here = self.start
        for step in self.steps:
            if step.start != here:
                raise ValueError("path steps are not endpoint compatible")
            here = step.end

    @property
    def end(self) -> int:
        return self.steps[-1].end if self.steps else self.start

    @property
    def word(self) -> tuple[int, ...]:
        return tuple(step.sign for step in self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def concat(self, other: "EpsilonPath") -> "EpsilonPath":
        if self.end != other.start:
            raise ValueError("paths do not meet")
        return EpsilonPath(self.start, self.steps + other.steps)

    def reversed_dual(self) -> "EpsilonPath":
        """Traverse the same edges backwards with flipped signs."""
        steps = tuple(SignedEdge(s.edge, -s.sign) for s in reversed(self.steps))
        return EpsilonPath(self.end, steps)

    def key(self) -> tuple:
        return (self.start, tuple((s.edge.id, s.sign) for s in self.steps))


class DirectedGraph:
    """A finite directed graph with parallel edges and self-loops allowed.

    Vertex and edge ids are integers; optional labels carry display names.
    Iteration order is insertion order throughout.
    """

    def __init__(
        self,
        vertices: Iterable[int],
        edges: Iterable[tuple[int, int, int]],
        vertex_labels: dict[int, str] | None = None,
        edge_labels: dict[int, str] | None = None,
    ) -> None:
        self.vertices: tuple[int, ...] = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("vertex ids must be unique")
        vset = set(self.vertices)
        built = []
        for eid, src, dst in edges:
            if src not in vset or dst not in vset:
                raise ValueError(f"edge {eid} references an unknown vertex")
            built.append(Edge(eid, src, dst))
        self.edges: tuple[Edge, ...] = tuple(built)
        if len({e.id for e in self.edges}) != len(self.edges):
            raise ValueError("edge ids must be unique")
        self.vertex_labels = dict(vertex_labels or {})
        self.edge_labels = dict(edge_labels or {})
        self.index = {v: n for n, v in enumerate(self.vertices)}
        self.edge_by_id = {e.id: e for e in self.edges}
        self._out: dict[int, list[Edge]] = {v: [] for v in self.vertices}
        self._in: dict[int, list[Edge]] = {v: [] for v in self.vertices}
        for e in sorted(self.edges, key=lambda e: e.id):
            self._out[e.src].append(e)
            self._in[e.dst].append(e)

    def __repr__(self) -> str:
        return f"DirectedGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and self.vertex_labels == other.vertex_labels
            and self.edge_labels == other.edge_labels
        )

    def __hash__(self) -> int:
        return hash((self.vertices, self.edges))

    def label(self, v: int) -> str:
        return self.vertex_labels.get(v, str(v))

    def edge_label(self, eid: int) -> str:
        return self.edge_labels.get(eid, str(eid))

    def out_edges(self, v: int) -> list[Edge]:
        return self._out[v]

    def in_edges(self, v: int) -> list[Edge]:
        return self._in[v]

    def edges_between(self, v: int, w: int) -> list[Edge]:
        return [e for e in self._out[v] if e.dst == w]

    def check_vertex(self, v: int) -> None:
        if v not in self.index:
            raise KeyError("unknown vertex")

    @cached_property
    def adjacency(self) -> np.ndarray:
        n = len(self.vertices)
        a = np.zeros((n, n), dtype=int)
        for e in self.edges:
            a[self.index[e.src], self.index[e.dst]] += 1
        return a

    def is_strongly_connected(self) -> bool:
        if not self.vertices:
            return False
        for forward in (True, False):
            seen = {self.vertices[0]}
            stack = [self.vertices[0]]
            while stack:
                v = stack.pop()
                for e in self._out[v] if forward else self._in[v]:
                    w = e.dst if forward else e.src
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            if len(seen) != len(self.vertices):
                return False
        return True

    # -- forward (+)^n paths -------------------------------------------------

    def forward_paths(self, n: int, start: int, end: int | None = None) -> list[tuple[int, ...]]:
        """All (+)^n paths from ``start`` as edge-id tuples (lexicographic by edge id)."""
        paths: list[tuple[tuple[int, ...], int]] = [((), start)]
        for _ in range(n):
            paths = [(p + (e.id,), e.dst) for p, here in paths for e in self._out[here]]
        return [p for p, here in paths if end is None or here == end]

    def path_end(self, start: int, path: Sequence[int]) -> int:
        here = start
        for eid in path:
            e = self.edge_by_id[eid]
            if e.src != here:
                raise ValueError("path is not connected")
            here = e.dst
        return here

    def path_vertices(self, start: int, path: Sequence[int]) -> list[int]:
        out = [start]
        for eid in path:
            out.append(self.edge_by_id[eid].dst)
        return out


def enumerate_paths(graph: DirectedGraph, word: Sequence[int], start: int, end: int) -> list[EpsilonPath]:
    """All epsilon-paths with sign ``word`` from ``start`` to ``end``."""
    graph.check_vertex(start)
    graph.check_vertex(end)
    partial = [EpsilonPath(start)]
    for sign in word:
        grown = []
        for path in partial:
            here = path.end
            options = graph.out_edges(here) if sign > 0 else graph.in_edges(here)
            for e in options:
                grown.append(EpsilonPath(path.start, path.steps + (SignedEdge(e, 1 if sign > 0 else -1),)))
        partial = grown
    return [p for p in partial if p.end == end]


def enumerate_U_loops(graph: DirectedGraph) -> list[tuple[int, int, tuple[int, int], tuple[int, int]]]:
    """Pairs of parallel length-two forward paths, as ``(v, w, p, q)``."""
    loops = []
    for v in graph.vertices:
        by_end: dict[int, list[tuple[int, ...]]] = {}
        for p in graph.forward_paths(2, v):
            by_end.setdefault(graph.path_end(v, p), []).append(p)
        for w in graph.vertices:
            block = by_end.get(w, [])
            loops.extend((v, w, p, q) for p in block for q in block)
    return loops


def enumerate_B_loops(graph: DirectedGraph, N: int) -> list[tuple[int, tuple[int, ...]]]:
    """Closed forward N-paths with their basepoint."""
    if N < 2:
        raise ValueError("N must be at least 2")
    return [(v, p) for v in graph.vertices for p in graph.forward_paths(N, v, v)]


@dataclass(frozen=True)
class FPData:
    """Positive eigenvector (minimum entry 1) and eigenvalue of the adjacency matrix."""

    lam: dict[int, float]
    eigenvalue: float
    tolerance: float = 1e-12
    residual: float = field(default=0.0, compare=False)

    def ratio(self, v: int, w: int) -> float:
        return self.lam[v] / self.lam[w]


def fp_eigenvector(graph: DirectedGraph, tolerance: float = 1e-13, max_iterations: int = 200000) -> FPData:
    """Power iteration from the all-ones vector with sup-norm renormalisation.

    The shifted matrix ``A + I`` is iterated so that periodic (bipartite)
    graphs still converge; the shift does not move the eigenvector.
    """
    if not graph.is_strongly_connected():
        raise ValueError("graph not strongly connected")
    a = graph.adjacency.astype(float)
    shifted = a + np.eye(len(a))
    x = np.ones(len(a))
    residual = np.inf
    for _ in range(max_iterations):
        y = shifted @ x
        y /= np.abs(y).max()
        mu = float((a @ y) @ y / (y @ y))
        residual = float(np.abs(a @ y - mu * y).max() / np.abs(y).max())
        x = y
        if residual <= tolerance:
            break
    else:
        raise RuntimeError(f"power iteration did not converge, last residual {residual:.3e}")
    x = x / x.min()
    mu = float((a @ x) @ x / (x @ x))
    lam = {v: float(x[graph.index[v]]) for v in graph.vertices}
    return FPData(lam, mu, tolerance, residual)
