import numpy as np
import pytest

from dgff.basis import canonical_phase, dcb, dfb, gfb, mag_gfb, path_frequency, rgff, sf_gfb, u_max
from dgff.graph import (Graph, GraphError, dv, laplacian, magnetic_laplacian, make_path, make_random, make_ring,
                        symmetrize, adjacency, degree_laplacian)
from dgff.spectral import spectral_dispersion


def test_gfb_two_node():
    b = gfb(laplacian(make_path(2)))
    assert np.allclose(b.frequencies, [0, 2])
    assert np.allclose(b.vectors, np.array([[1, 1], [1, -1]]) / np.sqrt(2))


def test_gfb_undirected_triangle():
    b = gfb(laplacian(make_ring(3, directed=False)))
    assert np.allclose(b.frequencies, [0, 3, 3])
    assert b.orthonormality_error() < 1e-12


def test_gfb_path_matches_dcb():
    n = 8
    b = gfb(laplacian(make_path(n)))
    d = dcb(n)
    assert np.allclose(b.frequencies, d.frequencies, atol=1e-12)
    # equal up to sign per column
    signs = np.sign(np.sum(b.vectors * d.vectors, axis=0))
    assert np.allclose(b.vectors, d.vectors * signs, atol=1e-10)


def test_gfb_first_vector_constant(small_graph):
    b = gfb(laplacian(small_graph))
    assert np.allclose(b.vectors[:, 0], 1 / np.sqrt(small_graph.n))
    assert b.frequencies[0] == 0


def test_gfb_reconstructs_and_is_deterministic(small_graph):
    L = laplacian(small_graph)
    b1, b2 = gfb(L), gfb(L)
    U = b1.vectors
    assert np.linalg.norm(U @ np.diag(b1.frequencies) @ U.T - L.matrix) < 1e-8
    assert np.array_equal(b1.vectors, b2.vectors)
    for k in range(b1.size):
        assert np.isclose(U[:, k] @ L.matrix @ U[:, k], b1.frequencies[k], atol=1e-8)


def test_gfb_rejects_nonfinite():
    from dgff.graph import HermitianOperator

    with pytest.raises(np.linalg.LinAlgError):
        gfb(HermitianOperator(np.full((2, 2), np.nan), "laplacian"))


def test_canonical_phase_rule():
    U = np.array([[0.6, -0.8], [-0.8, 0.6]])
    V = canonical_phase(U)
    assert np.allclose(V, [[-0.6, 0.8], [0.8, -0.6]])
    Z = canonical_phase(np.array([[1j], [0.5]]))
    assert np.isclose(Z[0, 0], 1) and np.isclose(Z[1, 0], -0.5j)


def test_dcb_examples():
    d = dcb(2)
    assert np.allclose(d.vectors, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    d4 = dcb(4)
    assert d4.orthonormality_error() < 1e-12
    for k in range(4):
        col = d4.vectors[:, k]
        assert np.sum(np.sign(col[1:]) != np.sign(col[:-1])) == k
    assert np.allclose(d4.frequencies, 2 - 2 * np.cos(np.pi * np.arange(4) / 4))
    assert np.allclose(path_frequency(np.arange(4), 4), d4.frequencies)


def test_dfb_examples():
    d = dfb(6)
    assert np.allclose(d.vectors[:, 0], 1 / np.sqrt(6))
    assert d.orthonormality_error() < 1e-12
    L = np.eye(6) - adjacency(make_ring(6))
    for k in range(6):
        u = d.vectors[:, k]
        assert np.allclose(L @ u, d.complex_frequencies[k] * u)
    assert np.all(np.diff(d.frequencies) >= 0)
    with pytest.raises(GraphError):
        dfb(1)


def test_mag_gfb_undirected_equals_gfb(small_graph):
    a = mag_gfb(small_graph, 0.01)
    b = gfb(laplacian(small_graph))
    assert np.allclose(a.frequencies, b.frequencies)
    assert np.allclose(np.abs(a.vectors.conj().T @ b.vectors) ** 2 @ np.ones(b.size), 1)


def test_mag_gfb_unitary(small_digraph):
    b = mag_gfb(small_digraph, 0.2)
    assert b.variation_measure == "tv" and b.is_complex
    assert b.orthonormality_error() < 1e-10
    L = magnetic_laplacian(small_digraph, 0.2).matrix
    assert np.linalg.norm(b.vectors @ np.diag(b.frequencies) @ b.vectors.conj().T - L) < 1e-8
    for k in range(b.size):
        assert np.isclose(np.vdot(b.vectors[:, k], L @ b.vectors[:, k]).real, b.frequencies[k], atol=1e-8)


def test_u_max_two_node():
    g = Graph(2, ((0, 1, 1.0),), directed=True)
    x = u_max(g)
    assert np.allclose(x, [1 / np.sqrt(2), -1 / np.sqrt(2)], atol=1e-6)
    assert np.isclose(dv(g, x), 2, atol=1e-10)
    y = u_max(make_path(2))
    assert np.isclose(dv(make_path(2), y), 2, atol=1e-10)


def test_u_max_beats_random(small_digraph, rng):
    x = u_max(small_digraph)
    best = dv(small_digraph, x)
    for _ in range(1000):
        r = rng.standard_normal(small_digraph.n)
        assert dv(small_digraph, r / np.linalg.norm(r)) <= best + 1e-9


def test_sf_gfb_structure():
    g = make_random(10, 0.35, seed=2, directed=True)
    b = sf_gfb(g)
    assert b.variation_measure == "dv"
    assert b.orthonormality_error() < 1e-6
    assert np.allclose(b.vectors[:, 0], 1 / np.sqrt(10)) or np.allclose(b.vectors[:, 0], -1 / np.sqrt(10))
    for k in range(b.size):
        assert np.isclose(dv(g, b.vectors[:, k]), b.frequencies[k], atol=1e-8)
    assert np.all(np.diff(b.frequencies) >= 0)


def test_sf_gfb_undirected_spreads_better_than_gfb():
    g = make_random(10, 0.4, seed=11)
    sf = sf_gfb(g)
    assert spectral_dispersion(sf.frequencies) <= spectral_dispersion(gfb(laplacian(g)).frequencies) + 1e-8


def test_rgff_examples():
    g = make_path(48)
    f = rgff(laplacian(g))
    assert f.size == 96 and f.family == "RGFF"
    g = make_random(12, 0.4, seed=4)
    f = rgff(laplacian(g))
    rho = f.meta["rho"]
    lam = gfb(laplacian(g)).frequencies
    xi = lam + 2 * rho
    assert np.all(lam[:-1] <= xi[:-1]) and np.all(xi[:-1] < lam[1:])
    # extra vectors are eigenvectors of L (copies of the originals)
    L = laplacian(g).matrix
    V = f.vectors[:, ~f.original_mask()]
    assert np.allclose(L @ V, V @ np.diag(np.diag(V.T @ L @ V)), atol=1e-8)
    with pytest.raises(GraphError):
        rgff(laplacian(Graph(3, ())))


def test_sym_laplacian_helper_consistency(small_digraph):
    W = adjacency(small_digraph)
    assert np.allclose(degree_laplacian(symmetrize(W)), laplacian(small_digraph.symmetrized()).matrix)
