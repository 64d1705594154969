"""Closed-form SU(4) charge-conjugation cell systems and their variants.

Vertices of the base family are integer pairs ``a = (i, j)`` with
``i >= 1``, ``j >= 1`` and ``i + 2j <= k + 3``.  Writing ``abar_1 = i + j``
and ``abar_2 = j`` (and ``abar_{-m} = -abar_m``), the four moves are

    eps_1 = (1, 0)   eps_-1 = (-1, 0)   eps_2 = (-1, 1)   eps_-2 = (1, -1)

so that ``eps_m`` raises ``abar_|m|`` by ``sign(m)`` and fixes the other
coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .cells import CellSystem
from .graph import DirectedGraph, fp_eigenvector
from .qarith import Params, quantum_factorial, quantum_integer

MOVES: dict[int, tuple[int, int]] = {-2: (1, -1), -1: (-1, 0), 1: (1, 0), 2: (-1, 1)}
ORDER = (-2, -1, 1, 2)
ZERO_TOL = 1e-12


class FormulaError(ZeroDivisionError):
    """A closed-form denominator vanished."""


@dataclass(frozen=True)
class CCVertex:
    a: tuple[int, int]
    delta: int | None = None
    chi: int | None = None

    def label(self) -> str:
        parts = [f"{self.a[0]},{self.a[1]}"]
        if self.delta is not None:
            parts.append("+" if self.delta > 0 else "-")
        if self.chi is not None:
            parts.append(f"x{'+' if self.chi > 0 else '-'}")
        return "(" + ";".join(parts) + ")"


@dataclass
class Family:
    """A built family graph with coordinate lookups in both directions."""

    name: str
    k: int
    graph: DirectedGraph
    coords: dict[int, CCVertex]

    @property
    def ids(self) -> dict[CCVertex, int]:
        return {c: v for v, c in self.coords.items()}


def shift(a: tuple[int, int], *moves: int) -> tuple[int, int]:
    i, j = a
    for m in moves:
        di, dj = MOVES[m]
        i, j = i + di, j + dj
    return (i, j)


def abar(a: tuple[int, int], m: int) -> int:
    i, j = a
    value = i + j if abs(m) == 1 else j
    return value if m > 0 else -value


def sign(m: int) -> int:
    return 1 if m > 0 else -1


class CCFormulas:
    """Quantum-integer helpers shared by the family constructions."""

    def __init__(self, params: Params) -> None:
        self.params = params

    def qi(self, n: int) -> float:
        return quantum_integer(n, self.params)

    def lam(self, a: tuple[int, int]) -> float:
        b1, b2 = abar(a, 1), abar(a, 2)
        return self.qi(b1) * self.qi(b2) * self.qi(b1 - b2) * self.qi(b1 + b2)

    def div(self, num: float, den: float, where: str) -> float:
        if abs(den) < ZERO_TOL:
            raise FormulaError(f"vanishing quantum integer in denominator at {where}")
        return num / den

    def w(self, a: tuple[int, int], i: int) -> float:
        qi, b = self.qi, lambda m: abar(a, m)
        if abs(qi(2 * b(i) + 1)) > ZERO_TOL:
            return (self.lam(a) * qi(2 * b(i) + 2) + self.lam(shift(a, i))) / qi(2 * b(i) + 1)
        total = self.lam(a) * qi(2 * b(i) - 2)
        for j in ORDER:
            if j != i:
                total -= self.div(qi(b(i) + b(j) - 3), qi(b(i) + b(j) + 1), f"a={a}, i={i}") * self.lam(shift(a, j))
        return self.div(total, qi(2 * b(i) - 3), f"a={a}, i={i}")

    # -- U displays -----------------------------------------------------------

    def u_mixed(self, a: tuple[int, int], i: int, j: int) -> np.ndarray:
        """``U^a_{a+eps_i+eps_j}`` for ``i != +-j``, ordered (via a+eps_i, via a+eps_j)."""
        qi = self.qi
        x = abar(a, i) - abar(a, j)
        # the off-diagonal carries sign(i)sign(j); with the bare positive root
        # the braid-type relation fails as soon as both midpoints exist
        off = sign(i) * sign(j) * _sqrt(qi(x + 1) * qi(x - 1))
        mat = np.array([[qi(x + 1), off], [off, qi(x - 1)]])
        return mat / self._nonzero(qi(x), f"a={a}, i={i}, j={j}")

    def u_diag_entry(self, a: tuple[int, int], r: int, c: int) -> float:
        """Entry ``(r, c)`` of ``U^a_a`` (paths through a+eps_r and a+eps_c)."""
        lam, qi = self.lam, self.qi
        if r == c:
            return self.w(a, r) / lam(a)
        sgn = U_DIAG_SIGNS[frozenset((r, c))]
        den = self._nonzero(qi(abar(a, r) + abar(a, c) + 1), f"a={a}, i={r}, j={c}")
        return sgn * _sqrt(lam(shift(a, r)) * lam(shift(a, c))) / den / lam(a)

    # -- B displays -----------------------------------------------------------

    def b_mixed(self, a: tuple[int, int], i: int, j: int) -> np.ndarray:
        """``B_{a,_,a+eps_i+eps_j,_}``; rows/columns ordered (a+eps_i, a+eps_j)."""
        qi, lam = self.qi, self.lam
        bi, bj = abar(a, i), abar(a, j)
        far = lam(shift(a, i, j)) / lam(a)
        d_i = self.div(qi(bj - bi - 1), qi(bj - bi), f"a={a}, i={i}") * _sqrt(far)
        d_j = self.div(qi(bi - bj - 1), qi(bi - bj), f"a={a}, j={j}") * _sqrt(far)
        s = bi + bj
        ratio = self.div(qi(s) * qi(s + 2), qi(s + 1) ** 2, f"a={a}, i={i}, j={j}")
        off = _sqrt(ratio) * _sqrt(lam(shift(a, i)) * lam(shift(a, j)) / lam(a) ** 2)
        pref = sign(i) * sign(j) / math.sqrt(quantum_factorial(4, self.params))
        return pref * np.array([[d_i, off], [off, d_j]])

    def b_diag_entry(self, a: tuple[int, int], r: int, c: int) -> float:
        """Entry ``(r, c)`` of ``B_{a,_,a,_}``."""
        qi, lam = self.qi, self.lam
        b1, b2 = abar(a, 1), abar(a, 2)
        pref = 1.0 / (lam(a) * math.sqrt(quantum_factorial(4, self.params)))
        if r == c:
            diag = {
                -2: -qi(b2) * (qi(b1 + 1) * qi(b1 - b2) - qi(b1 - 1) * qi(b1 + b2)),
                -1: -qi(b1) * (qi(b2 + 1) * qi(b1 - b2) + qi(b2 - 1) * qi(b1 + b2)),
                1: qi(b1) * (qi(b2 - 1) * qi(b1 - b2) + qi(b2 + 1) * qi(b1 + b2)),
                2: qi(b2) * (qi(b1 - 1) * qi(b1 - b2) - qi(b1 + 1) * qi(b1 + b2)),
            }
            return pref * diag[r]
        sgn = B_DIAG_SIGNS[frozenset((r, c))]
        if sgn == 0:
            return 0.0
        s = abar(a, r) + abar(a, c)
        ratio = self.div(qi(s), qi(s + 1), f"a={a}, i={r}, j={c}")
        return pref * sgn * _sqrt(lam(shift(a, r)) * lam(shift(a, c))) * ratio

    def _nonzero(self, value: float, where: str) -> float:
        if abs(value) < ZERO_TOL:
            raise FormulaError(f"vanishing quantum integer in denominator at {where}")
        return value


U_DIAG_SIGNS = {
    frozenset((-2, -1)): 1,
    frozenset((-2, 1)): -1,
    frozenset((-2, 2)): -1,
    frozenset((-1, 1)): -1,
    frozenset((-1, 2)): -1,
    frozenset((1, 2)): 1,
}
B_DIAG_SIGNS = {
    frozenset((-2, -1)): 1,
    frozenset((-2, 1)): -1,
    frozenset((-2, 2)): 0,
    frozenset((-1, 1)): 0,
    frozenset((-1, 2)): -1,
    frozenset((1, 2)): 1,
}


def _sqrt(x: float) -> float:
    # positive branch; tiny negative values come from rounding of exact zeros
    if x < 0:
        if x > -1e-12:
            return 0.0
        raise FormulaError(f"square root of negative quantity {x}")
    return math.sqrt(x)


# -- charge-conjugation family -------------------------------------------------------


def cc_domain(k: int) -> list[tuple[int, int]]:
    if k < 1:
        raise ValueError("k must be at least 1")
    return [(i, j) for j in range(1, k + 2) for i in range(1, k + 2) if i + 2 * j <= k + 3]


def _build(name: str, k: int, coords: list[CCVertex], adjacent: Callable[[CCVertex, CCVertex], bool]) -> Family:
    ids = {c: n for n, c in enumerate(coords)}
    edges = []
    for c in coords:
        for m in ORDER:
            target = shift(c.a, m)
            for d in coords:
                if d.a == target and adjacent(c, d):
                    edges.append((len(edges), ids[c], ids[d]))
    labels = {ids[c]: c.label() for c in coords}
    graph = DirectedGraph(range(len(coords)), edges, labels)
    return Family(name, k, graph, {ids[c]: c for c in coords})


def build_cc_family(k: int) -> Family:
    return _build("cc", k, [CCVertex(a) for a in cc_domain(k)], lambda c, d: True)


def build_cc_graph(k: int) -> DirectedGraph:
    return build_cc_family(k).graph


def _move_between(a: tuple[int, int], b: tuple[int, int]) -> int:
    for m, (di, dj) in MOVES.items():
        if (a[0] + di, a[1] + dj) == b:
            return m
    raise ValueError(f"{a} and {b} are not adjacent")


def _cells_from_coordinates(family: Family, params: Params, u_entry, b_entry) -> CellSystem:
    """Assemble cells by reading each loop through a callback on move sequences."""
    g = family.graph
    fp = fp_eigenvector(g)
    u_cells = {}
    for v in g.vertices:
        for p in g.forward_paths(2, v):
            w = g.path_end(v, p)
            for q in g.forward_paths(2, v, w):
                u_cells[(v, w, p, q)] = u_entry(v, p, q)
    b_cells = {}
    for v in g.vertices:
        for path in g.forward_paths(4, v, v):
            b_cells[(v, path)] = b_entry(v, path)
    return CellSystem(params, g, fp, u_cells, b_cells)


def cc_u_from_moves(formulas: CCFormulas, a: tuple[int, int], pm: Sequence[int], qm: Sequence[int]) -> float:
    """U entry for the loop leaving ``a`` by move word ``pm`` and returning by ``qm``."""
    (p1, p2), (q1, _q2) = pm, qm
    if p1 == p2:
        return 0.0
    if p1 == -p2:
        return formulas.u_diag_entry(a, p1, q1)
    i, j = sorted((p1, p2))
    mat = formulas.u_mixed(a, i, j)
    return mat[0 if p1 == i else 1, 0 if q1 == i else 1]


def cc_b_from_moves(formulas: CCFormulas, a: tuple[int, int], moves: Sequence[int]) -> float:
    m1, m2, _m3, m4 = moves
    if m1 == m2:
        return 0.0
    if m1 == -m2:
        return formulas.b_diag_entry(a, m1, -m4)
    i, j = sorted((m1, m2))
    mat = formulas.b_mixed(a, i, j)
    # the column is the midpoint a + eps_c of the return path b -> a
    return mat[0 if m1 == i else 1, 0 if -m4 == i else 1]


def _moves_reader(family: Family):
    g = family.graph

    def moves_of(v: int, path: tuple[int, ...]) -> list[int]:
        verts = [family.coords[x].a for x in g.path_vertices(v, path)]
        return [_move_between(x, y) for x, y in zip(verts, verts[1:])]

    return moves_of


def _cc_entries(family: Family, formulas: CCFormulas):
    moves_of = _moves_reader(family)

    def u_entry(v: int, p: tuple[int, ...], q: tuple[int, ...]) -> float:
        return cc_u_from_moves(formulas, family.coords[v].a, moves_of(v, p), moves_of(v, q))

    def b_entry(v: int, path: tuple[int, ...]) -> float:
        return cc_b_from_moves(formulas, family.coords[v].a, moves_of(v, path))

    return u_entry, b_entry


def cc_cells(k: int, params: Params | None = None) -> CellSystem:
    family = build_cc_family(k)
    params = params or Params(4, k, 0)
    u_entry, b_entry = _cc_entries(family, CCFormulas(params))
    return _cells_from_coordinates(family, params, u_entry, b_entry)


# -- unfolded Z2 family ---------------------------------------------------------------


def _parity_sign(a: tuple[int, int]) -> int:
    """``+1`` when ``abar_1 - abar_2`` is odd, else ``-1``."""
    return 1 if (abar(a, 1) - abar(a, 2)) % 2 else -1


def _unfolded_edge(c: CCVertex, d: CCVertex) -> bool:
    return c.delta * d.delta == _parity_sign(c.a)


def build_unfolded_family(k: int) -> Family:
    coords = [CCVertex(a, delta) for a in cc_domain(k) for delta in (1, -1)]
    return _build("unfolded", k, coords, _unfolded_edge)


def build_unfolded_graph(k: int) -> DirectedGraph:
    return build_unfolded_family(k).graph


def unfolded_cells(k: int, params: Params | None = None) -> CellSystem:
    """Cells copied from the charge-conjugation family by forgetting the tags."""
    family = build_unfolded_family(k)
    params = params or Params(4, k, 0)
    u_entry, b_entry = _cc_entries(family, CCFormulas(params))
    return _cells_from_coordinates(family, params, u_entry, b_entry)


# -- Z4 orbifold family ----------------------------------------------------------------


def z4_domain(k: int) -> list[CCVertex]:
    if k < 2 or k % 2:
        raise ValueError("the Z4 family needs an even level k >= 2")
    line = (k + 4) // 2
    coords = []
    for a in cc_domain(k):
        for delta in (1, -1):
            if abar(a, 1) < line:
                coords.append(CCVertex(a, delta))
            elif abar(a, 1) == line:
                coords.extend(CCVertex(a, delta, chi) for chi in (1, -1))
    return coords


def _z4_edge(c: CCVertex, d: CCVertex) -> bool:
    if not _unfolded_edge(c, d):
        return False
    if c.chi is None or d.chi is None:
        return True
    twisted = c.delta == -1 and _parity_sign(c.a) == -1
    return c.chi * d.chi == (-1 if twisted else 1)


def build_z4_family(k: int) -> Family:
    return _build("z4", k, z4_domain(k), _z4_edge)


def build_z4_graph(k: int) -> DirectedGraph:
    return build_z4_family(k).graph


def _z4_u_entry(family: Family, formulas: CCFormulas):
    """U cells on the Z4 graph.

    Loops avoiding split vertices keep their charge-conjugation value.  The
    rest follow the three regimes of ``abar_1`` next to the fixed line
    ``abar_1 = (k+4)/2``; each branch asserts the local shape it expects.
    """
    g, coords, k = family.graph, family.coords, family.k
    moves_of = _moves_reader(family)
    line = (k + 4) // 2
    root2 = math.sqrt(2.0)

    def split(v: int) -> bool:
        return coords[v].chi is not None

    def entry(v: int, p: tuple[int, ...], q: tuple[int, ...]) -> float:
        a = coords[v].a
        pm, qm = moves_of(v, p), moves_of(v, q)
        mp, mq = g.path_vertices(v, p)[1], g.path_vertices(v, q)[1]
        end = g.path_end(v, p)
        touched = [x for x in (v, mp, mq, end) if split(x)]
        if not touched:
            return cc_u_from_moves(formulas, a, pm, qm)
        level = abar(a, 1)
        if not split(v):
            if level == line - 2:
                _expect(pm == qm == [1, 1], "two steps onto the fixed line", a)
                return 0.0
            _expect(level == line - 1, "split vertex within two steps", a)
            if split(end):
                _expect(1 in pm and pm[0] != -pm[1], "mixed block onto a split vertex", a)
                return cc_u_from_moves(formulas, a, pm, qm)
            _expect(coords[end].a == a, "return block through a split midpoint", a)
            halving = sum(1 for x in (mp, mq) if split(x))
            return formulas.u_diag_entry(a, pm[0], qm[0]) / root2**halving
        if pm[0] == pm[1]:
            return 0.0
        if pm[0] != -pm[1]:
            _expect(-1 in pm, "mixed block leaving the fixed line", a)
            return cc_u_from_moves(formulas, a, pm, qm)
        _expect(split(end) and coords[end].a == a, "return block on the fixed line", a)
        through_line = any(split(g.path_vertices(v, x)[1]) for x in g.forward_paths(2, v, end))
        if coords[v].chi * coords[end].chi == -coords[v].delta:
            _expect(pm == [-1, 1] and not through_line, "one-path return block via the line below", a)
            return formulas.qi(2)
        r, c = pm[0], qm[0]
        base = formulas.u_diag_entry(a, r, c)
        if r == c == -1:
            return base + formulas.u_diag_entry(a, -1, 1)
        if (r == -1) != (c == -1):
            return base * root2
        return base

    return entry


def _expect(condition: bool, shape: str, a: tuple[int, int]) -> None:
    if not condition:
        raise FormulaError(f"unexpected Z4 loop shape at a={a}: expected {shape}")


def _z4_b_entry(family: Family, formulas: CCFormulas):
    """B cells on the Z4 graph, scaled from the base family by regime."""
    g, coords, k = family.graph, family.coords, family.k
    moves_of = _moves_reader(family)
    line = (k + 4) // 2
    root2 = math.sqrt(2.0)

    def split(v: int) -> bool:
        return coords[v].chi is not None

    def entry(v: int, path: tuple[int, ...]) -> float:
        a = coords[v].a
        moves = moves_of(v, path)
        verts = g.path_vertices(v, path)
        mids, far = (verts[1], verts[3]), verts[2]
        base = cc_b_from_moves(formulas, a, moves)
        if not any(split(x) for x in (v, verts[1], far, verts[3])):
            return base
        if moves[0] == moves[1]:
            return 0.0
        halving = sum(1 for x in mids if split(x))
        if not split(v):
            _expect(abar(a, 1) == line - 1, "B loop next to the fixed line", a)
            if split(far):
                return base / root2
            _expect(coords[far].a == a, "B return block through a split midpoint", a)
            return base / root2**halving
        if moves[0] == -moves[1]:
            _expect(halving <= 1, "at most one split midpoint on a fixed-line B loop", a)
            return base * root2**halving
        _expect(-1 in moves[:2], "B block leaving the fixed line", a)
        # keeps the base sign(i)sign(j); a bare sign(+-2) breaks rotation invariance
        return root2 * base

    return entry


def z4_cells(k: int, params: Params | None = None) -> CellSystem:
    family = build_z4_family(k)
    params = params or Params(4, k, 0)
    formulas = CCFormulas(params)
    return _cells_from_coordinates(family, params, _z4_u_entry(family, formulas), _z4_b_entry(family, formulas))
