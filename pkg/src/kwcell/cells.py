"""KW cell systems: storage, embedding, relation residuals and gauge changes.

Relations are evaluated in operator form on blocks of forward path spaces.
For a vertex pair ``(v, w)`` the U block is the matrix ``U^v_w`` whose rows
and columns are the length-two paths ``v -> w``.  The B block for ``(a, b)``
has rows the length-two paths ``a -> b`` and columns the length ``N-2``
paths ``b -> a``.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable, Mapping

import numpy as np

from .graph import DirectedGraph, FPData, enumerate_B_loops, enumerate_U_loops
from .ogpa import Morphism, PathSpace, forward_path
from .qarith import Params, quantum_integer

ULoop = tuple[int, int, tuple[int, ...], tuple[int, ...]]
BLoop = tuple[int, tuple[int, ...]]
Block = tuple[list[tuple[int, ...]], np.ndarray]

RELATIONS = ("R1", "R2", "R3", "Hecke", "RI", "BA", "N")
U_RELATIONS = ("R1", "R2", "R3", "Hecke")
B_RELATIONS = ("RI", "BA", "N")


@dataclass(frozen=True)
class CellSystem:
    params: Params
    graph: DirectedGraph
    fp: FPData
    u_cells: Mapping[ULoop, complex]
    b_cells: Mapping[BLoop, complex] | None = None

    @cached_property
    def u_blocks(self) -> dict[tuple[int, int], Block]:
        space = PathSpace(self.graph, 2)
        out = {}
        for key, paths in space.blocks.items():
            v, w = key
            mat = np.zeros((len(paths), len(paths)), dtype=complex)
            for r, p in enumerate(paths):
                for c, q in enumerate(paths):
                    mat[r, c] = self.u_cells.get((v, w, p, q), 0.0)
            out[key] = (paths, mat)
        return out

    @cached_property
    def b_blocks(self) -> dict[tuple[int, int], Block]:
        """B as matrices: rows = 2-paths a->b, columns = (N-2)-paths b->a."""
        if self.b_cells is None:
            raise ValueError("B cells are not populated")
        return {
            key: (rows, np.array([[self.b_cells.get((key[0], r + c), 0.0) for c in cols] for r in rows], dtype=complex).reshape(len(rows), len(cols)))
            for key, (rows, cols) in self.b_layout.items()
        }

    @cached_property
    def b_layout(self) -> dict[tuple[int, int], tuple[list[tuple[int, ...]], list[tuple[int, ...]]]]:
        g, N = self.graph, self.params.N
        layout = {}
        for a in g.vertices:
            for b in g.vertices:
                rows = g.forward_paths(2, a, b)
                cols = g.forward_paths(N - 2, b, a)
                if rows and cols:
                    layout[(a, b)] = (rows, cols)
        return layout

    def with_params(self, params: Params) -> "CellSystem":
        return replace(self, params=params)

    def with_b(self, b_cells: Mapping[BLoop, complex] | None) -> "CellSystem":
        return replace(self, b_cells=b_cells)

    def loop_label(self, v: int, path: Iterable[int]) -> str:
        g = self.graph
        names = "".join(g.label(x) + "," for x in g.path_vertices(v, list(path)))
        return "(" + names.rstrip(",") + ")"

    def block_label(self, v: int, w: int) -> str:
        return f"{self.graph.label(v)}->{self.graph.label(w)}"


# -- embeddings ---------------------------------------------------------------


def embed_U(cells: CellSystem) -> Morphism:
    g = cells.graph
    terms = {}
    for (v, _w, p, q), c in cells.u_cells.items():
        terms[(forward_path(g, v, p), forward_path(g, v, q))] = c
    return Morphism((1, 1), (1, 1), terms)


def embed_B(cells: CellSystem) -> Morphism:
    if cells.b_cells is None:
        raise ValueError("B cells are not populated")
    g = cells.graph
    terms = {}
    for (v, path), c in cells.b_cells.items():
        terms[(forward_path(g, v, ()), forward_path(g, v, path))] = c
    return Morphism((), (1,) * cells.params.N, terms)


# -- operators on path spaces ----------------------------------------------------


def local_operator(
    space: PathSpace,
    position: int,
    local: Mapping[tuple[int, int], Block],
) -> dict[tuple[int, int], np.ndarray]:
    """``id^position (x) X (x) id^rest`` for a two-strand block operator ``X``."""
    g = space.graph
    lookup = {key: ({p: i for i, p in enumerate(paths)}, paths, mat) for key, (paths, mat) in local.items()}
    out = {}
    for key, paths in space.blocks.items():
        start = key[0]
        pos = space.position[key]
        mat = np.zeros((len(paths), len(paths)), dtype=complex)
        for r, p in enumerate(paths):
            verts = g.path_vertices(start, p)
            v, w = verts[position], verts[position + 2]
            index, alternatives, block = lookup[(v, w)]
            row = index[p[position : position + 2]]
            head, tail = p[:position], p[position + 2 :]
            for c, alt in enumerate(alternatives):
                value = block[row, c]
                if value != 0:
                    mat[r, pos[head + alt + tail]] = value
        out[key] = mat
    return out


def block_apply(f: Callable[[np.ndarray], np.ndarray], blocks: Mapping[tuple[int, int], Block]) -> dict[tuple[int, int], Block]:
    return {key: (paths, f(mat)) for key, (paths, mat) in blocks.items()}


# -- verification report ------------------------------------------------------------


@dataclass
class RelationResult:
    name: str
    max_residual: float
    argmax: str
    count: int
    tol: float
    seconds: float = 0.0
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        self.passed = bool(self.max_residual <= self.tol)


@dataclass
class VerificationReport:
    results: list[RelationResult]
    tol: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> RelationResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = [f"tolerance\t{self.tol:.3e}"]
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            out.append(f"{r.name}\t{status}\t{r.max_residual:.3e}\t{r.count}\t{r.argmax}\t{r.seconds:.3f}s")
        return out


class _Tracker:
    def __init__(self) -> None:
        self.worst = 0.0
        self.where = "-"
        self.count = 0

    def add(self, value: float, where: Callable[[], str], count: int = 1) -> None:
        self.count += count
        if self.where == "-" or value > self.worst:
            self.worst = float(value)
            self.where = where()


def _result(name: str, tracker: _Tracker, tol: float, started: float) -> RelationResult:
    return RelationResult(name, tracker.worst, tracker.where, tracker.count, tol, time.perf_counter() - started)


# -- U relations --------------------------------------------------------------------


def residual_R1(cells: CellSystem, tol: float = 1e-9) -> RelationResult:
    """Both lambda-weighted partial traces of U equal ``[N-1] delta_ij``."""
    started = time.perf_counter()
    g, lam, params = cells.graph, cells.fp.lam, cells.params
    target = quantum_integer(params.N - 1, params)
    index = {key: {p: i for i, p in enumerate(paths)} for key, (paths, _m) in cells.u_blocks.items()}
    tracker = _Tracker()
    for v in g.vertices:
        for w in g.vertices:
            parallel = g.edges_between(v, w)
            if not parallel:
                continue
            right = np.zeros((len(parallel), len(parallel)), dtype=complex)
            left = np.zeros_like(right)
            for a, ei in enumerate(parallel):
                for b, ej in enumerate(parallel):
                    for e in g.out_edges(w):
                        x = e.dst
                        paths, mat = cells.u_blocks[(v, x)]
                        pos = index[(v, x)]
                        right[a, b] += lam[x] / lam[w] * mat[pos[(ei.id, e.id)], pos[(ej.id, e.id)]]
                    for e in g.in_edges(v):
                        y = e.src
                        paths, mat = cells.u_blocks[(y, w)]
                        pos = index[(y, w)]
                        left[a, b] += lam[y] / lam[v] * mat[pos[(e.id, ei.id)], pos[(e.id, ej.id)]]
            expected = target * np.eye(len(parallel))
            for side, mat in (("right", right), ("left", left)):
                dev = float(np.abs(mat - expected).max())
                tracker.add(dev, lambda side=side: f"{side} trace on {cells.block_label(v, w)}", mat.size)
    return _result("R1", tracker, tol, started)


def residual_R2(cells: CellSystem, tol: float = 1e-9) -> RelationResult:
    started = time.perf_counter()
    tracker = _Tracker()
    for (v, w), (paths, mat) in cells.u_blocks.items():
        tracker.add(float(np.abs(mat - mat.conj().T).max()), lambda: f"U block {cells.block_label(v, w)}", mat.size)
    return _result("R2", tracker, tol, started)


def residual_Hecke(cells: CellSystem, tol: float = 1e-9) -> RelationResult:
    started = time.perf_counter()
    two = quantum_integer(2, cells.params)
    tracker = _Tracker()
    for (v, w), (paths, mat) in cells.u_blocks.items():
        tracker.add(float(np.abs(mat @ mat - two * mat).max()), lambda: f"U block {cells.block_label(v, w)}", mat.size)
    return _result("Hecke", tracker, tol, started)


def residual_R3(cells: CellSystem, tol: float = 1e-9) -> RelationResult:
    started = time.perf_counter()
    space = PathSpace(cells.graph, 3)
    u1 = local_operator(space, 0, cells.u_blocks)
    u2 = local_operator(space, 1, cells.u_blocks)
    tracker = _Tracker()
    for key in space.blocks:
        a, b = u1[key], u2[key]
        lhs = a @ b @ a - a
        rhs = b @ a @ b - b
        tracker.add(float(np.abs(lhs - rhs).max()), lambda: f"3-path block {cells.block_label(*key)}", a.size)
    return _result("R3", tracker, tol, started)


# -- B relations --------------------------------------------------------------------


def rotate_loop(cells: CellSystem, loop: BLoop) -> BLoop:
    v, path = loop
    first = cells.graph.edge_by_id[path[0]]
    return (first.dst, path[1:] + path[:1])


def residual_RI(cells: CellSystem, tol: float = 1e-9) -> RelationResult:
    """``(-1)^(N+1) omega B(L) = (lambda_{v1}/lambda_{v0}) B(rot L)``.

    ``rot L`` starts one step further along ``L`` (at ``v1``, the end of the
    first edge) and moves the first edge to the end.
    """
    started = time.perf_counter()
    if cells.b_cells is None:
        raise ValueError("B cells are not populated")
    N, omega, lam = cells.params.N, cells.params.omega, cells.fp.lam
    phase = (-1) ** (N + 1) * omega
    tracker = _Tracker()
    for loop in enumerate_B_loops(cells.graph, N):
        rot = rotate_loop(cells, loop)
        value = phase * cells.b_cells.get(loop, 0.0) - lam[rot[0]] / lam[loop[0]] * cells.b_cells.get(rot, 0.0)
        tracker.add(abs(value), lambda: f"loop {cells.loop_label(*loop)}")
    return _result("RI", tracker, tol, started)


def residual_BA(cells: CellSystem, tol: float = 1e-9) -> RelationResult:
    started = time.perf_counter()
    two = quantum_integer(2, cells.params)
    tracker = _Tracker()
    for (a, b), (rows, bmat) in cells.b_blocks.items():
        umat = cells.u_blocks[(a, b)][1]
        tracker.add(float(np.abs(umat @ bmat - two * bmat).max()), lambda: f"B block {cells.block_label(a, b)}", bmat.size)
    return _result("BA", tracker, tol, started)


def vertex_norms(cells: CellSystem) -> dict[int, float]:
    if cells.b_cells is None:
        raise ValueError("B cells are not populated")
    norms = {v: 0.0 for v in cells.graph.vertices}
    for (v, path) in enumerate_B_loops(cells.graph, cells.params.N):
        norms[v] += abs(cells.b_cells.get((v, path), 0.0)) ** 2
    return norms


def residual_N(cells: CellSystem, tol: float = 1e-9) -> RelationResult:
    """Per-basepoint norm: the closed N-loops at each vertex have total weight 1."""
    started = time.perf_counter()
    norms = vertex_norms(cells)
    tracker = _Tracker()
    has_loop = {v for v, _p in enumerate_B_loops(cells.graph, cells.params.N)}
    for v, total in norms.items():
        value = abs(total - 1.0) if v in has_loop else float("inf")
        tracker.add(value, lambda: f"vertex {cells.graph.label(v)}" + ("" if v in has_loop else " has no closed N-loop"))
    return _result("N", tracker, tol, started)


# -- trace constraints --------------------------------------------------------------


def residual_trace_constraints(
    cells: CellSystem,
    G2: np.ndarray,
    G3: np.ndarray | None = None,
    tol: float = 1e-6,
) -> list[RelationResult]:
    g = cells.graph
    n = len(g.vertices)
    G2 = np.asarray(G2)
    if G2.shape != (n, n) or (G3 is not None and np.asarray(G3).shape != (n, n)):
        raise ValueError("fusion matrix dimension does not match the graph")
    two = quantum_integer(2, cells.params)
    results = []
    started = time.perf_counter()
    tracker = _Tracker()
    for v in g.vertices:
        for w in g.vertices:
            block = cells.u_blocks.get((v, w))
            trace = np.trace(block[1]) if block else 0.0
            expected = G2[g.index[v], g.index[w]] * two
            tracker.add(abs(trace - expected), lambda: f"pair {cells.block_label(v, w)}")
    results.append(_result("TrU1", tracker, tol, started))
    if G3 is not None:
        G3 = np.asarray(G3)
        started = time.perf_counter()
        G1 = g.adjacency
        other = G1 @ G2 - G3
        space = PathSpace(g, 3)
        u1 = local_operator(space, 0, cells.u_blocks)
        u2 = local_operator(space, 1, cells.u_blocks)
        tracker = _Tracker()
        for v in g.vertices:
            for w in g.vertices:
                key = (v, w)
                trace = np.trace(u1[key] @ u2[key]) if key in u1 else 0.0
                i, j = g.index[v], g.index[w]
                expected = G3[i, j] * two**2 + other[i, j]
                tracker.add(abs(trace - expected), lambda: f"pair {cells.block_label(v, w)}")
        results.append(_result("TrU1U2", tracker, tol, started))
    return results


# -- gauge ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaugeTransform:
    """Unitary matrices on each bundle of parallel edges ``v -> w``.

    Rows and columns follow ``graph.edges_between(v, w)``.
    """

    blocks: Mapping[tuple[int, int], np.ndarray]

    def check(self, graph: DirectedGraph, tol: float = 1e-9) -> None:
        for (v, w), mat in self.blocks.items():
            n = len(graph.edges_between(v, w))
            if mat.shape != (n, n):
                raise ValueError(f"gauge block {v}->{w} has the wrong size")
            if np.abs(mat @ mat.conj().T - np.eye(n)).max() > tol or np.abs(mat.conj().T @ mat - np.eye(n)).max() > tol:
                raise ValueError(f"gauge block {v}->{w} is not unitary")

    def edge_matrix(self, graph: DirectedGraph) -> dict[int, list[tuple[int, complex]]]:
        """``edge id -> [(edge id', V[e, e'])]`` over parallel edges."""
        out: dict[int, list[tuple[int, complex]]] = {}
        for e in graph.edges:
            parallel = graph.edges_between(e.src, e.dst)
            mat = self.blocks.get((e.src, e.dst))
            r = parallel.index(e)
            if mat is None:
                out[e.id] = [(e.id, 1.0)]
            else:
                out[e.id] = [(f.id, mat[r, c]) for c, f in enumerate(parallel) if mat[r, c] != 0]
        return out


def identity_gauge(graph: DirectedGraph) -> GaugeTransform:
    blocks = {}
    for e in graph.edges:
        key = (e.src, e.dst)
        if key not in blocks:
            blocks[key] = np.eye(len(graph.edges_between(*key)), dtype=complex)
    return GaugeTransform(blocks)


def random_gauge(graph: DirectedGraph, rng: np.random.Generator) -> GaugeTransform:
    """Haar-ish random unitaries from QR of complex Gaussian matrices."""
    blocks = {}
    for e in graph.edges:
        key = (e.src, e.dst)
        if key in blocks:
            continue
        n = len(graph.edges_between(*key))
        z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        qmat, rmat = np.linalg.qr(z)
        blocks[key] = qmat * (np.diag(rmat) / np.abs(np.diag(rmat)))
    return GaugeTransform(blocks)


def _expand(edge_map: dict[int, list[tuple[int, complex]]], path: tuple[int, ...]) -> list[tuple[tuple[int, ...], complex]]:
    out: list[tuple[tuple[int, ...], complex]] = [((), 1.0)]
    for eid in path:
        out = [(p + (f,), c * d) for p, c in out for f, d in edge_map[eid]]
    return out


def apply_gauge(cells: CellSystem, gauge: GaugeTransform, tol: float = 1e-9) -> CellSystem:
    """``U -> W U W^dagger`` with ``W = V (x) V``; ``B -> V^(x)N B``."""
    gauge.check(cells.graph, tol)
    edge_map = gauge.edge_matrix(cells.graph)
    u_new = {}
    for v, w, p, q in enumerate_U_loops(cells.graph):
        total = 0j
        for p2, cp in _expand(edge_map, p):
            for q2, cq in _expand(edge_map, q):
                total += cp * np.conj(cq) * cells.u_cells.get((v, w, p2, q2), 0.0)
        u_new[(v, w, p, q)] = total
    b_new = None
    if cells.b_cells is not None:
        b_new = {}
        for v, path in enumerate_B_loops(cells.graph, cells.params.N):
            b_new[(v, path)] = sum(c * cells.b_cells.get((v, p2), 0.0) for p2, c in _expand(edge_map, path))
    return replace(cells, u_cells=u_new, b_cells=b_new)


# -- aggregate ---------------------------------------------------------------------

RESIDUALS: dict[str, Callable[..., RelationResult]] = {
    "R1": residual_R1,
    "R2": residual_R2,
    "R3": residual_R3,
    "Hecke": residual_Hecke,
    "RI": residual_RI,
    "BA": residual_BA,
    "N": residual_N,
}


def verify(cells: CellSystem, relations: Iterable[str] = RELATIONS, tol: float = 1e-9, workers: int = 1) -> VerificationReport:
    """Evaluate the requested relations; with ``workers > 1`` they run in a thread pool."""
    relations = list(relations)
    for name in relations:
        if name not in RESIDUALS:
            raise ValueError(f"unknown relation {name!r}")
    # touch the shared caches once so worker threads only read them
    cells.u_blocks
    if any(name in B_RELATIONS for name in relations) and cells.b_cells is not None:
        cells.b_blocks
    if workers > 1 and len(relations) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda name: RESIDUALS[name](cells, tol), relations))
    else:
        results = [RESIDUALS[name](cells, tol) for name in relations]
    return VerificationReport(results, tol)
