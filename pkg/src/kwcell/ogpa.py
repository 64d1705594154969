"""The oriented graph planar algebra on the path basis.

A morphism ``w1 -> w2`` is a sparse linear combination of pairs ``(p, q)``
where ``p`` is a ``w1``-path and ``q`` a ``w2``-path with the same endpoints.
Pairs behave as matrix units indexed by (source path, target path), so
``compose(f, g)`` (first ``f``, then ``g``) is the matrix product ``F @ G``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graph import DirectedGraph, EpsilonPath, FPData, SignedEdge, enumerate_paths

PRUNE = 1e-15

Word = tuple[int, ...]
Key = tuple[EpsilonPath, EpsilonPath]


def dual_word(word: Sequence[int]) -> Word:
    return tuple(-s for s in reversed(word))


@dataclass
class Morphism:
    source: Word
    target: Word
    terms: dict[Key, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.source = tuple(self.source)
        self.target = tuple(self.target)
        clean = {}
        for (p, q), c in self.terms.items():
            if p.word != self.source or q.word != self.target:
                raise ValueError("path words do not match the morphism boundary")
            if p.start != q.start or p.end != q.end:
                raise ValueError("path pair endpoints differ")
            if abs(c) > PRUNE:
                clean[(p, q)] = complex(c)
        self.terms = clean

    def __add__(self, other: "Morphism") -> "Morphism":
        _same_boundary(self, other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, 0) + c
        return Morphism(self.source, self.target, terms)

    def __sub__(self, other: "Morphism") -> "Morphism":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "Morphism":
        return Morphism(self.source, self.target, {k: c * v for k, v in self.terms.items()})

    def coefficient(self, p: EpsilonPath, q: EpsilonPath) -> complex:
        return self.terms.get((p, q), 0.0)

    def max_abs(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def distance(self, other: "Morphism") -> float:
        return (self - other).max_abs()


def _same_boundary(f: Morphism, g: Morphism) -> None:
    if f.source != g.source or f.target != g.target:
        raise ValueError("morphisms have different boundary words")


def zero(source: Sequence[int], target: Sequence[int]) -> Morphism:
    return Morphism(tuple(source), tuple(target), {})


def all_paths(graph: DirectedGraph, word: Sequence[int]) -> list[EpsilonPath]:
    """Every ``word``-path in the graph, grouped by start vertex."""
    out = []
    for v in graph.vertices:
        for w in graph.vertices:
            out.extend(enumerate_paths(graph, word, v, w))
    return out


def identity(graph: DirectedGraph, word: Sequence[int]) -> Morphism:
    word = tuple(word)
    return Morphism(word, word, {(p, p): 1.0 for p in all_paths(graph, word)})


def compose(f: Morphism, g: Morphism) -> Morphism:
    """First ``f`` then ``g``: ``(p, q) . (q, r) = (p, r)``."""
    if f.target != g.source:
        raise ValueError("cannot compose: word mismatch")
    by_source: dict[EpsilonPath, list[tuple[EpsilonPath, complex]]] = defaultdict(list)
    for (q, r), c in g.terms.items():
        by_source[q].append((r, c))
    acc: dict[Key, complex] = defaultdict(complex)
    for (p, q), c in f.terms.items():
        for r, d in by_source.get(q, ()):
            acc[(p, r)] += c * d
    return Morphism(f.source, g.target, acc)


def tensor(f: Morphism, g: Morphism) -> Morphism:
    """Concatenate path pairs whose middle vertices agree."""
    by_start: dict[int, list[tuple[Key, complex]]] = defaultdict(list)
    for (p, q), c in g.terms.items():
        by_start[p.start].append(((p, q), c))
    acc: dict[Key, complex] = defaultdict(complex)
    for (p, q), c in f.terms.items():
        for (p2, q2), d in by_start.get(p.end, ()):
            acc[(p.concat(p2), q.concat(q2))] += c * d
    return Morphism(f.source + g.source, f.target + g.target, acc)


def dagger(f: Morphism) -> Morphism:
    return Morphism(f.target, f.source, {(q, p): np.conj(c) for (p, q), c in f.terms.items()})


@dataclass(frozen=True)
class DualityMaps:
    ev_pm: Morphism  # (+,-) -> ()
    coev_mp: Morphism  # () -> (-,+)
    ev_mp: Morphism  # (-,+) -> ()
    coev_pm: Morphism  # () -> (+,-)

    def ev(self, first_sign: int) -> Morphism:
        return self.ev_pm if first_sign > 0 else self.ev_mp

    def coev(self, first_sign: int) -> Morphism:
        return self.coev_pm if first_sign > 0 else self.coev_mp


def duality_maps(graph: DirectedGraph, fp: FPData) -> DualityMaps:
    ev_pm, coev_mp, ev_mp, coev_pm = {}, {}, {}, {}
    for e in graph.edges:
        up = np.sqrt(fp.lam[e.dst] / fp.lam[e.src])
        down = 1.0 / up
        fwd, back = SignedEdge(e, 1), SignedEdge(e, -1)
        at_s, at_t = EpsilonPath(e.src), EpsilonPath(e.dst)
        pm = EpsilonPath(e.src, (fwd, back))
        mp = EpsilonPath(e.dst, (back, fwd))
        ev_pm[(pm, at_s)] = up
        coev_pm[(at_s, pm)] = up
        ev_mp[(mp, at_t)] = down
        coev_mp[(at_t, mp)] = down
    return DualityMaps(
        Morphism((1, -1), (), ev_pm),
        Morphism((), (-1, 1), coev_mp),
        Morphism((-1, 1), (), ev_mp),
        Morphism((), (1, -1), coev_pm),
    )


def partial_trace_right(f: Morphism, graph: DirectedGraph, fp: FPData, maps: DualityMaps | None = None) -> Morphism:
    """Close the rightmost strand of an endomorphism."""
    if f.source != f.target or not f.source:
        raise ValueError("word too short to close a strand")
    maps = maps or duality_maps(graph, fp)
    rest, last = f.source[:-1], f.source[-1]
    cap_open = tensor(identity(graph, rest), maps.coev(last))
    cap_close = tensor(identity(graph, rest), maps.ev(last))
    middle = tensor(f, identity(graph, (-last,)))
    return compose(compose(cap_open, middle), cap_close)


def partial_trace_left(f: Morphism, graph: DirectedGraph, fp: FPData, maps: DualityMaps | None = None) -> Morphism:
    """Close the leftmost strand of an endomorphism."""
    if f.source != f.target or not f.source:
        raise ValueError("word too short to close a strand")
    maps = maps or duality_maps(graph, fp)
    first, rest = f.source[0], f.source[1:]
    cap_open = tensor(maps.coev(-first), identity(graph, rest))
    cap_close = tensor(maps.ev(-first), identity(graph, rest))
    middle = tensor(identity(graph, (-first,)), f)
    return compose(compose(cap_open, middle), cap_close)


@dataclass(frozen=True)
class TraceResult:
    per_vertex: dict[int, complex]
    scalar: complex | None


def categorical_trace(f: Morphism, graph: DirectedGraph, fp: FPData, tol: float = 1e-9) -> TraceResult:
    """Close every strand on the right; the result lives in the span of vertices."""
    maps = duality_maps(graph, fp)
    current = f
    while current.source:
        current = partial_trace_right(current, graph, fp, maps)
    per_vertex = {v: 0j for v in graph.vertices}
    for (p, _q), c in current.terms.items():
        per_vertex[p.start] += c
    values = list(per_vertex.values())
    scalar = values[0] if values and all(abs(x - values[0]) <= tol for x in values) else None
    return TraceResult(per_vertex, scalar)


def inner_product(f: Morphism, g: Morphism, graph: DirectedGraph, fp: FPData) -> complex:
    """``tr(f^dagger . g)`` summed over vertices with the FP weights."""
    closed = categorical_trace(compose(g, dagger(f)), graph, fp)
    return sum(fp.lam[v] * c for v, c in closed.per_vertex.items())


# -- dense blocks on forward path spaces --------------------------------------


class PathSpace:
    """(+)^n paths grouped by endpoints, with stable indices inside each block."""

    def __init__(self, graph: DirectedGraph, n: int) -> None:
        self.graph = graph
        self.n = n
        self.blocks: dict[tuple[int, int], list[tuple[int, ...]]] = {}
        for v in graph.vertices:
            for p in graph.forward_paths(n, v):
                self.blocks.setdefault((v, graph.path_end(v, p)), []).append(p)
        self.position = {
            key: {p: i for i, p in enumerate(paths)} for key, paths in self.blocks.items()
        }

    def identity(self) -> dict[tuple[int, int], np.ndarray]:
        return {key: np.eye(len(paths), dtype=complex) for key, paths in self.blocks.items()}

    def dimension(self) -> int:
        return sum(len(p) for p in self.blocks.values())


def forward_path(graph: DirectedGraph, start: int, edges: Iterable[int]) -> EpsilonPath:
    return EpsilonPath(start, tuple(SignedEdge(graph.edge_by_id[e], 1) for e in edges))


def blocks_to_morphism(space: PathSpace, blocks: dict[tuple[int, int], np.ndarray]) -> Morphism:
    word = (1,) * space.n
    terms = {}
    for (v, w), mat in blocks.items():
        paths = [forward_path(space.graph, v, p) for p in space.blocks[(v, w)]]
        rows, cols = np.nonzero(np.abs(mat) > PRUNE)
        for r, c in zip(rows, cols):
            terms[(paths[r], paths[c])] = mat[r, c]
    return Morphism(word, word, terms)


def morphism_to_blocks(space: PathSpace, f: Morphism) -> dict[tuple[int, int], np.ndarray]:
    word = (1,) * space.n
    if f.source != word or f.target != word:
        raise ValueError("morphism is not an endomorphism of the forward word")
    out = {key: np.zeros((len(p), len(p)), dtype=complex) for key, p in space.blocks.items()}
    for (p, q), c in f.terms.items():
        key = (p.start, p.end)
        edges_p = tuple(s.edge.id for s in p.steps)
        edges_q = tuple(s.edge.id for s in q.steps)
        out[key][space.position[key][edges_p], space.position[key][edges_q]] = c
    return out
