"""Export every relation instance as a polynomial equation in named unknowns.

Grammar (one equation per line)::

    SUM <term> <term> ... = <re>,<im>
    term   := (<re>,<im>)*<atom>[*<atom>...]   |   (<re>,<im>)
    atom   := u[v:w:e.e:e.e] | b[v:e.e...] | conj(u[...]) | conj(b[...])

Each relation group is preceded by ``# relation <name> count <n>``.  The
counts equal the constraint counts of the matching residual functions.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterator

from .graph import DirectedGraph, FPData, enumerate_B_loops
from .ogpa import PathSpace
from .qarith import Params, quantum_integer

Monomial = tuple[str, ...]


class Poly:
    """Sparse polynomial: monomial (sorted atom names) -> coefficient."""

    def __init__(self, terms: dict[Monomial, complex] | None = None) -> None:
        self.terms: dict[Monomial, complex] = defaultdict(complex)
        for mono, c in (terms or {}).items():
            self.terms[mono] += c

    @classmethod
    def atom(cls, name: str, coeff: complex = 1.0) -> "Poly":
        return cls({(name,): coeff})

    @classmethod
    def const(cls, value: complex) -> "Poly":
        return cls({(): value})

    def __add__(self, other: "Poly") -> "Poly":
        out = Poly(self.terms)
        for mono, c in other.terms.items():
            out.terms[mono] += c
        return out

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "Poly":
        return Poly({m: c * v for m, v in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        out = Poly()
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out.terms[tuple(sorted(m1 + m2))] += c1 * c2
        return out

    def pruned(self, eps: float = 0.0) -> dict[Monomial, complex]:
        return {m: c for m, c in self.terms.items() if abs(c) > eps}


def u_name(v: int, w: int, p: tuple[int, ...], q: tuple[int, ...]) -> str:
    return f"u[{v}:{w}:{'.'.join(map(str, p))}:{'.'.join(map(str, q))}]"


def b_name(v: int, path: tuple[int, ...]) -> str:
    return f"b[{v}:{'.'.join(map(str, path))}]"


def conj(name: str) -> str:
    return f"conj({name})"


def _num(z: complex) -> str:
    return f"({z.real:.17g},{z.imag:.17g})"


def format_equation(lhs: Poly, rhs: complex = 0.0) -> str:
    """``lhs = rhs`` with constants of ``lhs`` moved to the right."""
    terms = lhs.pruned()
    const = complex(rhs) - terms.pop((), 0.0)
    body = " ".join(_num(c) + "".join("*" + a for a in mono) for mono, c in sorted(terms.items())) or _num(0j)
    return f"SUM {body} = {const.real:.17g},{const.imag:.17g}"


def _u_matrix(space: PathSpace, key: tuple[int, int]) -> list[list[Poly]]:
    v, w = key
    paths = space.blocks[key]
    return [[Poly.atom(u_name(v, w, p, q)) for q in paths] for p in paths]


def _local(space3: PathSpace, graph: DirectedGraph, key: tuple[int, int], position: int) -> list[list[Poly]]:
    """``U (x) id`` (position 0) or ``id (x) U`` (position 1) as a matrix of polynomials."""
    v, _w = key
    paths = space3.blocks[key]
    out = []
    for P in paths:
        row = []
        for Q in paths:
            if position == 0 and P[2] == Q[2]:
                mid = graph.path_end(v, P[:2])
                row.append(Poly.atom(u_name(v, mid, P[:2], Q[:2])))
            elif position == 1 and P[0] == Q[0]:
                start = graph.edge_by_id[P[0]].dst
                row.append(Poly.atom(u_name(start, graph.path_end(start, P[1:]), P[1:], Q[1:])))
            else:
                row.append(Poly())
        out.append(row)
    return out


def _matmul(a: list[list[Poly]], b: list[list[Poly]]) -> list[list[Poly]]:
    n = len(a)
    out = [[Poly() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for k in range(n):
            if not a[i][k].terms:
                continue
            for j in range(n):
                if b[k][j].terms:
                    out[i][j] = out[i][j] + a[i][k] * b[k][j]
    return out


def equations(graph: DirectedGraph, params: Params, fp: FPData, relations=("R1", "R2", "Hecke", "R3", "RI", "BA", "N")) -> Iterator[str]:
    lam, N = fp.lam, params.N
    two = quantum_integer(2, params)
    space2 = PathSpace(graph, 2)
    groups: dict[str, list[str]] = {}
    if "R1" in relations:
        lines = []
        target = quantum_integer(N - 1, params)
        for v in graph.vertices:
            for w in graph.vertices:
                parallel = graph.edges_between(v, w)
                for side in ("right", "left"):
                    for ei in parallel:
                        for ej in parallel:
                            poly = Poly()
                            if side == "right":
                                for e in graph.out_edges(w):
                                    poly = poly + Poly.atom(u_name(v, e.dst, (ei.id, e.id), (ej.id, e.id)), lam[e.dst] / lam[w])
                            else:
                                for e in graph.in_edges(v):
                                    poly = poly + Poly.atom(u_name(e.src, w, (e.id, ei.id), (e.id, ej.id)), lam[e.src] / lam[v])
                            lines.append(format_equation(poly, target if ei.id == ej.id else 0.0))
        groups["R1"] = lines
    if "R2" in relations:
        lines = []
        for (v, w), paths in space2.blocks.items():
            for p in paths:
                for q in paths:
                    lines.append(format_equation(Poly.atom(u_name(v, w, p, q)) - Poly.atom(conj(u_name(v, w, q, p)))))
        groups["R2"] = lines
    if "Hecke" in relations:
        lines = []
        for key in space2.blocks:
            mat = _u_matrix(space2, key)
            sq = _matmul(mat, mat)
            for r in range(len(mat)):
                for c in range(len(mat)):
                    lines.append(format_equation(sq[r][c] - mat[r][c].scale(two)))
        groups["Hecke"] = lines
    if "R3" in relations:
        lines = []
        space3 = PathSpace(graph, 3)
        for key in space3.blocks:
            a, b = _local(space3, graph, key, 0), _local(space3, graph, key, 1)
            aba, bab = _matmul(_matmul(a, b), a), _matmul(_matmul(b, a), b)
            for r in range(len(a)):
                for c in range(len(a)):
                    lines.append(format_equation(aba[r][c] - a[r][c] - bab[r][c] + b[r][c]))
        groups["R3"] = lines
    loops = enumerate_B_loops(graph, N) if N >= 2 else []
    if "RI" in relations:
        lines = []
        phase = (-1) ** (N + 1) * params.omega
        for v, path in loops:
            start = graph.edge_by_id[path[0]].dst
            rot = path[1:] + path[:1]
            poly = Poly.atom(b_name(v, path), phase) - Poly.atom(b_name(start, rot), lam[start] / lam[v])
            lines.append(format_equation(poly))
        groups["RI"] = lines
    if "BA" in relations:
        lines = []
        for (a, b), rows in space2.blocks.items():
            cols = graph.forward_paths(N - 2, b, a)
            for r in rows:
                for c in cols:
                    poly = Poly.atom(b_name(a, r + c), -two)
                    for s in rows:
                        poly = poly + Poly.atom(u_name(a, b, r, s)) * Poly.atom(b_name(a, s + c))
                    lines.append(format_equation(poly))
        groups["BA"] = lines
    if "N" in relations:
        lines = []
        for v in graph.vertices:
            poly = Poly()
            for base, path in loops:
                if base == v:
                    poly = poly + Poly.atom(b_name(v, path)) * Poly.atom(conj(b_name(v, path)))
            lines.append(format_equation(poly, 1.0))
        groups["N"] = lines
    for name in relations:
        if name in groups:
            yield f"# relation {name} count {len(groups[name])}"
            yield from groups[name]
