import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dgff.graph import (Graph, GraphError, adjacency, dv, gtv, is_connected, laplacian, magnetic_laplacian,
                        make_path, make_random, make_ring, make_sbm, make_swiss_roll, normalized_laplacian,
                        tv_complex)


def test_adjacency_examples():
    assert np.array_equal(adjacency(Graph(2, ((0, 1, 1.0),))), [[0, 1], [1, 0]])
    assert np.array_equal(adjacency(Graph(3, ())), np.zeros((3, 3)))
    assert np.array_equal(adjacency(Graph(2, ((0, 1, 2.0),), directed=True)), [[0, 2], [0, 0]])


@pytest.mark.parametrize("edges, directed", [
    (((0, 1, 1.0), (0, 1, 2.0)), True),
    (((0, 1, 1.0), (1, 0, 2.0)), False),
    (((0, 0, 1.0),), False),
    (((0, 1, -1.0),), False),
    (((0, 5, 1.0),), False),
    (((0, 1, float("nan")),), False),
])
def test_invalid_graphs_rejected(edges, directed):
    with pytest.raises(GraphError):
        Graph(3, edges, directed)


def test_laplacian_examples():
    assert np.array_equal(laplacian(make_path(2)).matrix, [[1, -1], [-1, 1]])
    L = laplacian(make_ring(3, directed=False)).matrix
    assert np.array_equal(np.diag(L), [2, 2, 2])
    assert np.all(L[~np.eye(3, dtype=bool)] == -1)
    assert np.array_equal(laplacian(Graph(2, ())).matrix, np.zeros((2, 2)))


def test_laplacian_rejects_directed():
    with pytest.raises(GraphError, match="magnetic"):
        laplacian(make_ring(4))


def test_normalized_laplacian():
    assert np.allclose(normalized_laplacian(make_path(2)).matrix, [[1, -1], [-1, 1]])
    k3 = Graph(3, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)))
    assert np.allclose(np.linalg.eigvalsh(normalized_laplacian(k3).matrix), [0, 1.5, 1.5])
    with pytest.raises(GraphError, match="isolated"):
        normalized_laplacian(Graph(3, ((0, 1, 1.0),)))


def test_normalized_spectrum_in_range(small_graph):
    lam = np.linalg.eigvalsh(normalized_laplacian(small_graph).matrix)
    assert lam.min() >= -1e-10 and lam.max() <= 2 + 1e-10


def test_magnetic_reduces_to_laplacian(small_graph):
    for q in (0.0, 0.1, 0.37):
        assert np.allclose(magnetic_laplacian(small_graph, q).matrix, laplacian(small_graph).matrix)


def test_magnetic_q0_is_symmetrized_laplacian(small_digraph):
    Lq = magnetic_laplacian(small_digraph, 0.0).matrix
    assert np.allclose(Lq, laplacian(small_digraph.symmetrized()).matrix)


def test_magnetic_two_node():
    g = Graph(2, ((0, 1, 1.0),), directed=True)
    L = magnetic_laplacian(g, 0.25).matrix
    # Sym(W) has off-diagonal 1/2, phase exp(+-j pi/2)
    assert np.allclose(L, [[0.5, -0.5j], [0.5j, 0.5]])
    lam = np.linalg.eigvals(L)
    assert np.abs(lam.imag).max() < 1e-12
    assert np.allclose(np.sort(lam.real), [0, 1])


@pytest.mark.parametrize("q", [-0.1, 1.0, 1.5])
def test_magnetic_bad_q(small_digraph, q):
    with pytest.raises(GraphError):
        magnetic_laplacian(small_digraph, q)


def test_gtv_examples(small_graph):
    L = laplacian(small_graph)
    assert abs(gtv(L, np.ones(small_graph.n))) < 1e-12
    assert gtv(laplacian(make_path(2)), [1, 0]) == 1
    lam, U = np.linalg.eigh(L.matrix)
    assert np.isclose(gtv(L, U[:, 3]), lam[3])
    with pytest.raises(GraphError):
        gtv(L, np.ones(3))


def test_gtv_half_sum(small_graph, rng):
    x = rng.standard_normal(small_graph.n)
    W = adjacency(small_graph)
    assert np.isclose(gtv(laplacian(small_graph), x), 0.5 * np.sum(W * (x[:, None] - x[None, :]) ** 2))


def test_dv_examples():
    g = Graph(2, ((0, 1, 1.0),), directed=True)
    assert dv(g, [1, 0]) == 1
    assert dv(g, [0, 1]) == 0
    assert dv(make_path(2), [1, 0]) == 1
    assert dv(g, [3, 3]) == 0


def test_tv_complex_examples():
    g = Graph(2, ((0, 1, 1.0),))
    assert np.isclose(tv_complex(g, np.array([1, 1j])), 2)
    assert tv_complex(g, np.array([1 + 1j, 1 + 1j])) == 0


def test_tv_orders_eigenvectors_like_gtv():
    g = make_random(8, 0.4, seed=3)
    lam, U = np.linalg.eigh(laplacian(g).matrix)
    tv = [tv_complex(g, U[:, k]) for k in range(8)]
    # unit weights: tv equals the quadratic form, so the orders agree
    assert np.allclose(tv, lam)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 12), st.integers(0, 10_000), st.floats(-5, 5))
def test_dv_properties(n, seed, shift):
    g = make_random(n, 0.4, seed=seed, directed=True, weighted=True)
    x = np.random.default_rng(seed).standard_normal(n)
    assert dv(g, x) >= 0
    assert np.isclose(dv(g, x + shift), dv(g, x))
    u = make_random(n, 0.4, seed=seed)
    assert np.isclose(dv(u, x), gtv(laplacian(u), x), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 15), st.integers(0, 10_000))
def test_laplacian_invariants(n, seed):
    g = make_random(n, 0.3, seed=seed, weighted=True)
    L = laplacian(g).matrix
    assert np.abs(L.sum(axis=1)).max() <= 1e-12
    assert np.linalg.eigvalsh(L).min() >= -1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 15), st.integers(0, 10_000), st.floats(0, 0.99))
def test_magnetic_hermitian_psd(n, seed, q):
    g = make_random(n, 0.3, seed=seed, directed=True, weighted=True)
    L = magnetic_laplacian(g, q).matrix
    lam = np.linalg.eigvals(L)
    assert np.abs(lam.imag).max() <= 1e-10
    assert lam.real.min() >= -1e-10


def test_generators():
    assert make_path(2).edges == ((0, 1, 1.0),)
    lam = np.linalg.eigvals(np.eye(4) - adjacency(make_ring(4)))
    expected = 1 - np.exp(2j * np.pi * np.arange(4) / 4)
    assert np.allclose(np.sort_complex(lam), np.sort_complex(expected))
    a, la = make_sbm(20, 2, 0.7, 0.25, seed=5)
    b, lb = make_sbm(20, 2, 0.7, 0.25, seed=5)
    assert a.edges == b.edges and np.array_equal(la, lb)
    assert np.array_equal(la, [0] * 10 + [1] * 10)
    for bad in (lambda: make_path(1), lambda: make_ring(1), lambda: make_sbm(1, 1, 0.5, 0.5)):
        with pytest.raises(GraphError):
            bad()


def test_random_and_swiss_roll_connected():
    assert is_connected(make_random(30, 0.02, seed=1))
    d = make_random(30, 0.1, seed=1, directed=True)
    W = adjacency(d)
    assert not np.any((W > 0) & (W.T > 0))
    s = make_swiss_roll(60, seed=0)
    assert not s.directed and s.n == 60


def test_from_adjacency_roundtrip(small_digraph):
    W = adjacency(small_digraph)
    assert Graph.from_adjacency(W) == small_digraph
    with pytest.raises(GraphError):
        Graph.from_adjacency(np.ones((3, 3)))
