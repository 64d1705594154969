from __future__ import annotations

import numpy as np
import pytest

from kwcell.cells import CellSystem, residual_BA, residual_N, residual_RI, verify
from kwcell.families import cc_cells
from kwcell.graph import DirectedGraph, enumerate_B_loops, fp_eigenvector
from kwcell.ogpa import PathSpace, compose, dagger, identity, morphism_to_blocks, tensor
from kwcell.qarith import Params, quantum_integer
from kwcell.solver import (
    NoSolutionError,
    b_system,
    braid_generators,
    braid_residuals,
    conjugate_partition,
    commuting_determinant,
    fusion_matrix,
    fusion_matrix_partition,
    joint_eigenspace_projection,
    jw_projection,
    jw_projection_blocks,
    nullspace,
    solve_b_cells,
    spectrum_distance,
    weighted_traces,
    y_blocks,
)


def _scaled(cells: CellSystem, factor: float) -> CellSystem:
    return CellSystem(cells.params, cells.graph, cells.fp, {k: factor * v for k, v in cells.u_cells.items()}, None)


def test_nullspace_certificate():
    m = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    kernel, s = nullspace(m)
    assert kernel.shape == (3, 1)
    assert np.abs(m @ kernel).max() < 1e-14
    assert len(s) == 2


@pytest.mark.parametrize("omega_index", range(4))
def test_level4_b_solve(level4, omega_index):
    cells = level4.with_params(level4.params.with_omega(omega_index))
    result = solve_b_cells(cells)
    assert result.dimension == 1
    merged = cells.with_b(result.representative)
    for fn in (residual_RI, residual_BA, residual_N):
        assert fn(merged, 1e-8).passed


def test_b_representative_phase_convention(level4):
    result = solve_b_cells(level4)
    loops = enumerate_B_loops(level4.graph, 4)
    lead = next(result.representative[l] for l in loops if abs(result.representative[l]) > 1e-8)
    assert abs(lead.imag) < 1e-14 and lead.real > 0


def test_cc_closed_form_is_reproduced_up_to_scale():
    cells = cc_cells(3)
    closed = cells.b_cells
    result = solve_b_cells(cells.with_b(None))
    assert result.dimension == 1
    ratios = [result.representative[l] / closed[l] for l in closed if abs(closed[l]) > 1e-9]
    assert max(abs(r - ratios[0]) for r in ratios) < 1e-9
    assert all(abs(result.representative[l]) < 1e-9 for l in closed if abs(closed[l]) <= 1e-9)


def test_invalid_u_has_no_solution(level4):
    bad = _scaled(level4, 1.01)
    with pytest.raises(ValueError, match="U cells fail"):
        solve_b_cells(bad)
    with pytest.raises(NoSolutionError, match="no B-cell solution"):
        solve_b_cells(bad, check_u=False)


def test_b_system_shape(level4):
    matrix, loops = b_system(level4)
    assert matrix.shape[1] == len(loops) == len(enumerate_B_loops(level4.graph, 4))


def test_first_projection_is_identity(level4):
    p1 = jw_projection(level4, 1)
    assert p1.distance(identity(level4.graph, (1,))) < 1e-15


def test_second_projection_is_rescaled_u(level4):
    space, blocks = jw_projection_blocks(level4, 2)
    two = quantum_integer(2, level4.params)
    for key, (paths, mat) in level4.u_blocks.items():
        assert np.abs(blocks[key] - mat / two).max() < 1e-12


@pytest.mark.parametrize("i", [2, 3, 4])
def test_projection_matches_eigenspace_oracle(level4, i):
    _space, blocks = jw_projection_blocks(level4, i)
    oracle = joint_eigenspace_projection(level4, i)
    for key in blocks:
        assert np.abs(blocks[key] - oracle[key]).max() < 1e-9


@pytest.mark.parametrize("i", [2, 3, 4])
def test_projection_idempotent_selfadjoint_nested(level4, i):
    g = level4.graph
    p = jw_projection(level4, i)
    assert compose(p, p).distance(p) < 1e-8
    assert dagger(p).distance(p) < 1e-8
    nxt = jw_projection(level4, i + 1)
    assert compose(tensor(p, identity(g, (1,))), nxt).distance(nxt) < 1e-8


def test_projection_traces(level4):
    for i, expected in ((1, quantum_integer(4, level4.params)), (4, 1.0), (5, 0.0)):
        _space, blocks = jw_projection_blocks(level4, i)
        for value in weighted_traces(level4, blocks).values():
            assert value == pytest.approx(expected, abs=1e-6)


def test_projection_index_bounds(level4):
    with pytest.raises(ValueError):
        jw_projection_blocks(level4, 6)


def test_recursion_denominator_zero():
    # at N + k = 3 the three-term sum 1 + q^-2 + q^-4 vanishes
    g = DirectedGraph([0], [(0, 0, 0)])
    cells = CellSystem(Params(2, 1), g, fp_eigenvector(g), {(0, 0, (0, 0), (0, 0)): 1.0})
    jw_projection_blocks(cells, 2)
    with pytest.raises(ZeroDivisionError, match="recursion denominator zero"):
        jw_projection_blocks(cells, 3)


def test_fusion_first_is_adjacency(level4):
    fm = fusion_matrix(level4, 1)
    assert np.array_equal(fm.rounded, level4.graph.adjacency)
    assert fm.max_deviation < 1e-12


def test_fusion_second_decomposes_square(level4):
    g2 = fusion_matrix(level4, 2)
    assert g2.max_deviation < 1e-6 and g2.nonnegative
    # the symmetric square is id - p2 on 2-paths, computed independently
    space = PathSpace(level4.graph, 2)
    two = quantum_integer(2, level4.params)
    sym = np.zeros_like(g2.entries)
    for (v, w), (paths, mat) in level4.u_blocks.items():
        sym[level4.graph.index[v], level4.graph.index[w]] = np.trace(np.eye(len(paths)) - mat / two).real
    a = level4.graph.adjacency
    assert np.abs(a @ a - g2.entries - sym).max() < 1e-9
    assert space.dimension() == int((a @ a).sum())


def test_fusion_top_is_permutation(level4):
    g4 = fusion_matrix(level4, 4).rounded
    assert (g4.sum(axis=0) == 1).all() and (g4.sum(axis=1) == 1).all()


def test_conjugate_partition():
    assert conjugate_partition([3, 1]) == [2, 1, 1]
    assert conjugate_partition([1, 1]) == [2]
    assert conjugate_partition([]) == []
    with pytest.raises(ValueError):
        conjugate_partition([1, 2])


def test_commuting_determinant_matches_numpy_for_scalars(rng):
    for n in range(1, 5):
        m = rng.normal(size=(n, n))
        entries = [[np.array([[m[r, c]]]) for c in range(n)] for r in range(n)]
        assert commuting_determinant(entries, 1)[0, 0] == pytest.approx(np.linalg.det(m), abs=1e-12)


def test_jacobi_trudi_low_partitions(level4):
    g1 = fusion_matrix(level4, 1).entries
    g2 = fusion_matrix(level4, 2).entries
    assert np.abs(fusion_matrix_partition(level4, [1]).entries - g1).max() < 1e-12
    assert np.abs(fusion_matrix_partition(level4, [1, 1]).entries - g2).max() < 1e-12
    assert np.abs(fusion_matrix_partition(level4, [2]).entries - (g1 @ g1 - g2)).max() < 1e-6
    with pytest.raises(ValueError, match="capped"):
        fusion_matrix_partition(level4, [13])


def test_partition_21_is_integral(level4):
    fm = fusion_matrix_partition(level4, [2, 1])
    assert fm.max_deviation < 1e-6 and fm.nonnegative


def test_y_spectrum(level4):
    q = level4.params.q
    for _key, (paths, mat) in y_blocks(level4).items():
        assert spectrum_distance(mat, (-1.0, q**-2)) < 1e-6
    for _key, (paths, mat) in y_blocks(level4, under=True).items():
        assert spectrum_distance(mat, (-1.0, q**2)) < 1e-6


def test_two_strand_generator(level4):
    space, ys = braid_generators(level4, 2)
    assert len(ys) == 1 and set(ys[0]) == set(space.blocks)
    with pytest.raises(ValueError):
        braid_generators(level4, 1)


@pytest.mark.parametrize("n", [3, 4])
def test_braid_relations(level4, cc2, n):
    for cells in (level4, cc2):
        res = braid_residuals(cells, n)
        assert res["braid"] < 1e-8 and res["far"] < 1e-8 and res["inverse"] < 1e-10


def test_u_spectrum_after_solve(level4):
    merged = level4.with_b(solve_b_cells(level4).representative)
    assert verify(merged, tol=1e-8).passed
    two = quantum_integer(2, level4.params)
    for _key, (_paths, mat) in merged.u_blocks.items():
        assert spectrum_distance(mat, (0.0, two)) < 1e-6
