from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kwcell.families import build_cc_graph, CCFormulas
from kwcell.graph import DirectedGraph, EpsilonPath, SignedEdge, enumerate_B_loops, enumerate_paths, enumerate_U_loops, fp_eigenvector
from kwcell.level4 import expected_lambda, level4_graph
from kwcell.qarith import Params, quantum_integer

from conftest import directed_cycle, single_vertex, two_cycle


def test_graph_validation():
    with pytest.raises(ValueError):
        DirectedGraph([0, 0], [])
    with pytest.raises(ValueError):
        DirectedGraph([0], [(0, 0, 1)])
    with pytest.raises(ValueError):
        DirectedGraph([0, 1], [(0, 0, 1), (0, 1, 0)])


def test_signed_edge_endpoints():
    g = two_cycle()
    a = g.edge_by_id[0]
    assert (SignedEdge(a, 1).start, SignedEdge(a, 1).end) == (0, 1)
    assert (SignedEdge(a, -1).start, SignedEdge(a, -1).end) == (1, 0)
    with pytest.raises(ValueError):
        EpsilonPath(0, (SignedEdge(a, -1),))


def test_enumerate_paths_single_loop():
    g = single_vertex(1)
    paths = enumerate_paths(g, (1, 1), 0, 0)
    assert [tuple(s.edge.id for s in p.steps) for p in paths] == [(0, 0)]


def test_enumerate_paths_empty_word():
    g = two_cycle()
    assert enumerate_paths(g, (), 0, 0) == [EpsilonPath(0)]
    assert enumerate_paths(g, (), 0, 1) == []


def test_enumerate_paths_mixed_word():
    g = two_cycle()
    paths = enumerate_paths(g, (1, -1), 0, 0)
    assert len(paths) == 1
    assert [(s.edge.id, s.sign) for s in paths[0].steps] == [(0, 1), (0, -1)]


def test_enumerate_paths_unknown_vertex():
    with pytest.raises(KeyError, match="unknown vertex"):
        enumerate_paths(two_cycle(), (1,), 0, 7)


@st.composite
def graphs(draw, max_vertices=5, max_edges=10):
    n = draw(st.integers(1, max_vertices))
    m = draw(st.integers(0, max_edges))
    pairs = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=m, max_size=m))
    return DirectedGraph(range(n), [(e, s, t) for e, (s, t) in enumerate(pairs)])


@settings(max_examples=60, deadline=None)
@given(graphs(), st.lists(st.sampled_from([1, -1]), max_size=4))
def test_paths_are_compatible_and_sorted(g, word):
    word = tuple(word)
    for v in g.vertices:
        for w in g.vertices:
            paths = enumerate_paths(g, word, v, w)
            for p in paths:
                assert p.word == word and p.start == v and p.end == w
            keys = [tuple(s.edge.id for s in p.steps) for p in paths]
            assert keys == sorted(keys)


@settings(max_examples=60, deadline=None)
@given(graphs(), st.integers(0, 4))
def test_transfer_matrix_identity(g, n):
    A = g.adjacency
    power = np.linalg.matrix_power(A, n)
    for v in g.vertices:
        for w in g.vertices:
            assert len(enumerate_paths(g, (1,) * n, v, w)) == power[g.index[v], g.index[w]]


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_loop_counts(g):
    A = g.adjacency
    assert len(enumerate_U_loops(g)) == int((np.linalg.matrix_power(A, 2) ** 2).sum())
    for N in (2, 3, 4):
        assert len(enumerate_B_loops(g, N)) == int(np.trace(np.linalg.matrix_power(A, N)))


def test_u_loop_examples():
    chain = DirectedGraph([0, 1, 2], [(0, 0, 1), (1, 1, 2)])
    assert enumerate_U_loops(chain) == [(0, 2, (0, 1), (0, 1))]
    square = DirectedGraph([0, 1, 2, 3], [(0, 0, 1), (1, 0, 2), (2, 1, 3), (3, 2, 3)])
    assert len(enumerate_U_loops(square)) == 4


def test_level4_u_loop_count():
    # summing the printed block sizes squared gives 192; 568 is the level-8 count
    assert len(enumerate_U_loops(level4_graph())) == 192


def test_b_loop_examples():
    assert enumerate_B_loops(DirectedGraph([0, 1], [(0, 0, 1)]), 4) == []
    assert enumerate_B_loops(single_vertex(1), 4) == [(0, (0, 0, 0, 0))]
    assert len(enumerate_B_loops(directed_cycle(4), 4)) == 4
    with pytest.raises(ValueError):
        enumerate_B_loops(single_vertex(1), 1)


@pytest.mark.parametrize("d", [1, 2, 5])
def test_fp_single_vertex(d):
    fp = fp_eigenvector(single_vertex(d))
    assert fp.lam == {0: 1.0}
    assert fp.eigenvalue == pytest.approx(d, abs=1e-12)


def test_fp_level4():
    fp = fp_eigenvector(level4_graph())
    exp = expected_lambda()
    for v, value in exp.items():
        assert fp.lam[v] == pytest.approx(value, abs=1e-11)
    assert fp.eigenvalue == pytest.approx(quantum_integer(4, Params(4, 4)), abs=1e-12)


@pytest.mark.parametrize("k", range(1, 7))
def test_fp_cc_closed_form(k):
    g = build_cc_graph(k)
    fp = fp_eigenvector(g)
    from kwcell.families import build_cc_family

    fam = build_cc_family(k)
    closed = np.array([CCFormulas(Params(4, k)).lam(fam.coords[v].a) for v in g.vertices])
    got = np.array([fp.lam[v] for v in g.vertices])
    assert min(got) == 1.0
    assert np.abs(got - closed / closed.min()).max() < 1e-9


def test_fp_invariants_on_random_strong_graphs(rng):
    for _ in range(20):
        n = int(rng.integers(2, 8))
        edges = [(i, i, (i + 1) % n) for i in range(n)]
        for _extra in range(int(rng.integers(0, 10))):
            edges.append((len(edges), int(rng.integers(n)), int(rng.integers(n))))
        g = DirectedGraph(range(n), edges)
        fp = fp_eigenvector(g)
        lam = np.array([fp.lam[v] for v in g.vertices])
        assert (lam > 0).all() and lam.min() == 1.0
        assert np.abs(g.adjacency @ lam - fp.eigenvalue * lam).max() / lam.max() <= 1e-10


def test_fp_errors():
    with pytest.raises(ValueError, match="graph not strongly connected"):
        fp_eigenvector(DirectedGraph([0, 1], [(0, 0, 1)]))
    with pytest.raises(RuntimeError, match="residual"):
        fp_eigenvector(directed_cycle(2).__class__(range(3), [(0, 0, 1), (1, 1, 2), (2, 2, 0), (3, 0, 2)]), tolerance=1e-15, max_iterations=2)
