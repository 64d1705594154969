"""Linear B-cell solving, antisymmetrizer projections, fusion and braid data."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cells import Block, BLoop, CellSystem, RelationResult, local_operator, residual_R1, residual_R2, residual_R3, residual_Hecke
from .graph import enumerate_B_loops
from .ogpa import Morphism, PathSpace, blocks_to_morphism
from .qarith import quantum_integer

BlockOp = dict[tuple[int, int], np.ndarray]


class NoSolutionError(RuntimeError):
    pass


@dataclass
class BSolveResult:
    dimension: int
    representative: dict[BLoop, complex] | None
    basis: list[dict[BLoop, complex]]
    singular_values: np.ndarray
    gauge_note: str
    vertex_norm_spread: float = 0.0


def b_system(cells: CellSystem) -> tuple[np.ndarray, list[BLoop]]:
    """Rows: every rotation constraint, then every eigenmatrix entry."""
    N, omega, lam = cells.params.N, cells.params.omega, cells.fp.lam
    loops = enumerate_B_loops(cells.graph, N)
    index = {loop: n for n, loop in enumerate(loops)}
    rows: list[np.ndarray] = []
    phase = (-1) ** (N + 1) * omega
    for loop in loops:
        v, path = loop
        first = cells.graph.edge_by_id[path[0]]
        rot = (first.dst, path[1:] + path[:1])
        row = np.zeros(len(loops), dtype=complex)
        row[index[loop]] += phase
        row[index[rot]] -= lam[rot[0]] / lam[v]
        rows.append(row)
    two = quantum_integer(2, cells.params)
    for (a, b), (two_paths, col_paths) in cells.b_layout.items():
        umat = cells.u_blocks[(a, b)][1] - two * np.eye(len(two_paths))
        for r in range(len(two_paths)):
            for c in col_paths:
                row = np.zeros(len(loops), dtype=complex)
                for s, p in enumerate(two_paths):
                    if umat[r, s] != 0:
                        row[index[(a, p + c)]] += umat[r, s]
                rows.append(row)
    return np.array(rows), loops


def nullspace(matrix: np.ndarray, rtol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal kernel basis (columns) by SVD with a relative cut-off."""
    _u, s, vh = np.linalg.svd(matrix, full_matrices=True)
    cut = rtol * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cut))
    return vh[rank:].conj().T, s


def solve_b_cells(cells: CellSystem, rtol: float = 1e-8, check_u: bool = True, tol: float = 1e-8) -> BSolveResult:
    if check_u:
        failing = [r.name for r in (residual_R1(cells, tol), residual_R2(cells, tol), residual_R3(cells, tol), residual_Hecke(cells, tol)) if not r.passed]
        if failing:
            raise ValueError(f"U cells fail {', '.join(failing)}")
    matrix, loops = b_system(cells)
    kernel, svals = nullspace(matrix, rtol)
    basis = [dict(zip(loops, kernel[:, m])) for m in range(kernel.shape[1])]
    if kernel.shape[1] == 0:
        raise NoSolutionError("no B-cell solution")
    if kernel.shape[1] > 1:
        return BSolveResult(kernel.shape[1], None, basis, svals, "dimension > 1: basis returned unnormalised")
    vec = kernel[:, 0]
    norms = {v: 0.0 for v in cells.graph.vertices}
    for (v, _p), x in zip(loops, vec):
        norms[v] += abs(x) ** 2
    values = np.array(list(norms.values()))
    spread = float(values.max() / values.min() - 1) if values.min() > 0 else float("inf")
    vec = vec / np.sqrt(values.mean())
    lead = next(x for x in vec if abs(x) > 1e-8 * np.abs(vec).max())
    vec = vec * (abs(lead) / lead)
    rep = {loop: complex(x) for loop, x in zip(loops, vec)}
    note = "scaled to unit norm at every basepoint; first nonzero loop made real positive"
    return BSolveResult(1, rep, basis, svals, note, spread)


# -- projections ---------------------------------------------------------------------


def y_blocks(cells: CellSystem, under: bool = False) -> dict[tuple[int, int], Block]:
    """``q^-1 U - 1`` (or its inverse ``q U - 1``) on each length-two block."""
    q = cells.params.q
    factor = q if under else 1 / q
    return {key: (paths, factor * mat - np.eye(len(paths))) for key, (paths, mat) in cells.u_blocks.items()}


def _matmul(a: BlockOp, b: BlockOp) -> BlockOp:
    return {key: a[key] @ b[key] for key in a}


def jw_projection_blocks(cells: CellSystem, i: int) -> tuple[PathSpace, BlockOp]:
    """``p_i = (p_{i-1} (x) 1) . sum_j Y_{i-1} ... Y_{i-j}`` over ``sum_j q^{-2j}``."""
    N = cells.params.N
    if not 1 <= i <= N + 1:
        raise ValueError(f"projection index must lie in 1..{N + 1}")
    q = cells.params.q
    ylocal = y_blocks(cells)
    space = PathSpace(cells.graph, 1)
    current = space.identity()
    for m in range(2, i + 1):
        space = PathSpace(cells.graph, m)
        denom = sum(q ** (-2 * j) for j in range(m))
        if abs(denom) < 1e-12:
            raise ZeroDivisionError("recursion denominator zero")
        lifted = _extend_right(cells, space, current)
        ys = [local_operator(space, pos, ylocal) for pos in range(m - 1)]
        total = space.identity()
        chain = space.identity()
        for j in range(1, m):
            chain = _matmul(chain, ys[m - 1 - j])
            for key in total:
                total[key] = total[key] + chain[key]
        current = {key: lifted[key] @ total[key] / denom for key in space.blocks}
    return space, current


def _extend_right(cells: CellSystem, space: PathSpace, previous: BlockOp) -> BlockOp:
    """``f (x) id_(+)`` for an operator on (n-1)-paths, as blocks on n-paths."""
    g = cells.graph
    out = {}
    prev_space = PathSpace(g, space.n - 1)
    for key, paths in space.blocks.items():
        start = key[0]
        pos = space.position[key]
        mat = np.zeros((len(paths), len(paths)), dtype=complex)
        for r, p in enumerate(paths):
            head, last = p[:-1], p[-1]
            mid = g.path_end(start, head)
            sub = previous[(start, mid)]
            row = prev_space.position[(start, mid)][head]
            for c, alt in enumerate(prev_space.blocks[(start, mid)]):
                if sub[row, c] != 0:
                    mat[r, pos[alt + (last,)]] = sub[row, c]
        out[key] = mat
    return out


def jw_projection(cells: CellSystem, i: int) -> Morphism:
    space, blocks = jw_projection_blocks(cells, i)
    return blocks_to_morphism(space, blocks)


def joint_eigenspace_projection(cells: CellSystem, i: int, tol: float = 1e-8) -> BlockOp:
    """Orthogonal projection onto the common ``[2]``-eigenspace of all ``U_j``.

    Independent of the recursion; used as its oracle.
    """
    space = PathSpace(cells.graph, i)
    two = quantum_integer(2, cells.params)
    ops = [local_operator(space, pos, cells.u_blocks) for pos in range(i - 1)]
    out = {}
    for key, paths in space.blocks.items():
        n = len(paths)
        if not ops:
            out[key] = np.eye(n, dtype=complex)
            continue
        stacked = np.vstack([op[key] - two * np.eye(n) for op in ops])
        kernel, _s = nullspace(stacked, tol) if stacked.size else (np.eye(n), None)
        out[key] = kernel @ kernel.conj().T
    return out


def block_traces(space: PathSpace, blocks: BlockOp, graph) -> np.ndarray:
    n = len(graph.vertices)
    out = np.zeros((n, n))
    for (v, w), mat in blocks.items():
        out[graph.index[v], graph.index[w]] = np.trace(mat).real
    return out


def weighted_traces(cells: CellSystem, blocks: BlockOp) -> dict[int, float]:
    """Categorical trace per vertex: ``sum_w (lambda_w/lambda_v) Tr(block v->w)``."""
    lam = cells.fp.lam
    out = {v: 0.0 for v in cells.graph.vertices}
    for (v, w), mat in blocks.items():
        out[v] += (lam[w] / lam[v]) * np.trace(mat).real
    return out


# -- fusion matrices ---------------------------------------------------------------------


@dataclass
class FusionMatrix:
    entries: np.ndarray
    labels: list[str] = field(default_factory=list)

    @property
    def rounded(self) -> np.ndarray:
        return np.rint(self.entries).astype(int)

    @property
    def max_deviation(self) -> float:
        return float(np.abs(self.entries - np.rint(self.entries)).max()) if self.entries.size else 0.0

    @property
    def nonnegative(self) -> bool:
        return bool((self.rounded >= 0).all())


def fusion_matrix(cells: CellSystem, i: int) -> FusionMatrix:
    space, blocks = jw_projection_blocks(cells, i)
    labels = [cells.graph.label(v) for v in cells.graph.vertices]
    return FusionMatrix(block_traces(space, blocks, cells.graph), labels)


def conjugate_partition(partition: Sequence[int]) -> list[int]:
    parts = [p for p in partition if p > 0]
    if any(a < b for a, b in zip(parts, parts[1:])):
        raise ValueError("partition must be weakly decreasing")
    return [sum(1 for p in parts if p > r) for r in range(parts[0])] if parts else []


def commuting_determinant(entries: list[list[np.ndarray]], size: int) -> np.ndarray:
    """Leibniz determinant of a matrix whose entries are commuting matrices.

    Expanded row by row over subsets of used columns.
    """
    n = len(entries)
    if n == 0:
        return np.eye(size)
    partial: dict[int, np.ndarray] = {0: np.eye(size)}
    for r in range(n):
        grown: dict[int, np.ndarray] = {}
        for used, acc in partial.items():
            for c in range(n):
                if used & (1 << c):
                    continue
                inversions = bin(used >> (c + 1)).count("1")
                term = acc @ entries[r][c]
                if inversions % 2:
                    term = -term
                key = used | (1 << c)
                grown[key] = grown[key] + term if key in grown else term
        partial = grown
    return partial[(1 << n) - 1]


def fusion_matrix_partition(cells: CellSystem, partition: Sequence[int]) -> FusionMatrix:
    if sum(partition) > 12:
        raise ValueError("partitions are capped at weight 12")
    N = cells.params.N
    n = len(cells.graph.vertices)
    cache: dict[int, np.ndarray] = {}

    def G(j: int) -> np.ndarray:
        if j == 0:
            return np.eye(n)
        if j < 0 or j > N:
            return np.zeros((n, n))
        if j not in cache:
            cache[j] = fusion_matrix(cells, j).entries
        return cache[j]

    conj = conjugate_partition(partition)
    entries = [[G(conj[r] - r + c) for c in range(len(conj))] for r in range(len(conj))]
    labels = [cells.graph.label(v) for v in cells.graph.vertices]
    return FusionMatrix(commuting_determinant(entries, n), labels)


# -- braids --------------------------------------------------------------------------------


def braid_generators(cells: CellSystem, n: int, under: bool = False) -> tuple[PathSpace, list[BlockOp]]:
    """``Y_i`` (or its inverse) on (+)^n path blocks, ``i = 1..n-1``."""
    if n < 2:
        raise ValueError("need at least two strands")
    space = PathSpace(cells.graph, n)
    local = y_blocks(cells, under)
    return space, [local_operator(space, pos, local) for pos in range(n - 1)]


def braid_residuals(cells: CellSystem, n: int) -> dict[str, float]:
    space, ys = braid_generators(cells, n)
    _s, inv = braid_generators(cells, n, under=True)
    out = {"braid": 0.0, "far": 0.0, "inverse": 0.0}
    for key in space.blocks:
        eye = np.eye(len(space.blocks[key]))
        for i in range(n - 1):
            out["inverse"] = max(out["inverse"], float(np.abs(ys[i][key] @ inv[i][key] - eye).max()))
            if i + 1 < n - 1:
                a, b = ys[i][key], ys[i + 1][key]
                out["braid"] = max(out["braid"], float(np.abs(a @ b @ a - b @ a @ b).max()))
            for j in range(i + 2, n - 1):
                a, b = ys[i][key], ys[j][key]
                out["far"] = max(out["far"], float(np.abs(a @ b - b @ a).max()))
    return out


def spectrum_distance(matrix: np.ndarray, allowed: Sequence[complex]) -> float:
    if matrix.size == 0:
        return 0.0
    eig = np.linalg.eigvals(matrix)
    return float(max(min(abs(e - a) for a in allowed) for e in eig))
