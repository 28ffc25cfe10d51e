import numpy as np
import pytest

from hislr.core import Permutation
from hislr.errors import DimensionError
from hislr.rcm import AdjacencyGraph, apply_sym_perm, bandwidth, build_adjacency, rcm_order
from hislr.synth import banded_scrambled


def tridiagonal(n):
    return (np.eye(n, k=1) + np.eye(n, k=-1) + 2 * np.eye(n)).astype(np.float32)


def scan_bandwidth(a, tol=0.0):
    """Independent bandwidth by explicit double loop."""
    n = a.shape[0]
    return max([abs(i - j) for i in range(n) for j in range(n) if abs(a[i, j]) > tol] + [0])


class TestAdjacency:
    def test_diagonal_has_no_edges(self):
        g = build_adjacency(np.diag([1.0, 2.0, 3.0]), 0.0)
        assert all(len(nb) == 0 for nb in g.neighbors)

    def test_tridiagonal_is_path(self):
        g = build_adjacency(tridiagonal(5), 0.5)
        assert g.neighbors == ((1,), (0, 2), (1, 3), (2, 4), (3,))

    def test_symmetrized(self):
        a = np.zeros((3, 3))
        a[0, 2] = 1
        g = build_adjacency(a, 0.0)
        assert 2 in g.neighbors[0] and 0 in g.neighbors[2]

    def test_non_square(self):
        with pytest.raises(DimensionError):
            build_adjacency(np.ones((2, 3)))


class TestRcm:
    def test_path(self):
        g = AdjacencyGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        p = rcm_order(g)
        a = tridiagonal(4)
        assert bandwidth(apply_sym_perm(a, p)) == 1

    def test_edgeless_identity(self):
        assert rcm_order(AdjacencyGraph.from_edges(4, [])).is_identity()

    def test_components_in_index_order(self):
        # {0, 3} and {1, 2}; node 4 isolated
        g = AdjacencyGraph.from_edges(5, [(0, 3), (1, 2)])
        order = rcm_order(g).forward.tolist()
        assert sorted(order[:2]) == [0, 3] and sorted(order[2:4]) == [1, 2] and order[4] == 4

    def test_star_center_last_before_reverse(self):
        # CM from a leaf visits the hub second; reversal puts it second from last
        g = AdjacencyGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        order = rcm_order(g).forward.tolist()
        assert sorted(order) == [0, 1, 2, 3]
        assert order[-2] == 0

    @pytest.mark.parametrize("seed", range(6))
    def test_scrambled_tridiagonal_recovers_bandwidth_one(self, seed):
        a, _ = banded_scrambled(16, band=1, seed=seed)
        p = rcm_order(build_adjacency(a, 0.0))
        assert scan_bandwidth(apply_sym_perm(a, p)) == 1

    @pytest.mark.parametrize("band", [2, 3])
    def test_scrambled_banded_not_worse(self, band):
        for seed in range(4):
            a, _ = banded_scrambled(40, band=band, seed=seed)
            p = rcm_order(build_adjacency(a, 0.0))
            assert bandwidth(apply_sym_perm(a, p)) <= bandwidth(a)

    def test_bijection(self, rng):
        a = rng.standard_normal((30, 30)) * (rng.random((30, 30)) < 0.1)
        p = rcm_order(build_adjacency(a, 0.0))
        Permutation(p.forward)  # validates


class TestSymPerm:
    def test_identity(self, rng):
        a = rng.standard_normal((5, 5)).astype(np.float32)
        assert np.array_equal(apply_sym_perm(a, Permutation.identity(5)), a)

    def test_inverse_round_trip(self, rng):
        a = rng.standard_normal((7, 7)).astype(np.float32)
        p = Permutation(rng.permutation(7))
        assert np.array_equal(apply_sym_perm(apply_sym_perm(a, p), p.inv()), a)

    def test_definition(self):
        a = np.arange(9, dtype=np.float32).reshape(3, 3)
        out = apply_sym_perm(a, Permutation([2, 0, 1]))
        assert out[0, 0] == a[2, 2]
        assert out[0, 1] == a[2, 0]

    def test_matches_permutation_matrix(self, rng):
        a = rng.standard_normal((6, 6))
        p = Permutation(rng.permutation(6))
        P = p.matrix()
        assert np.allclose(apply_sym_perm(a, p), (P @ a @ P.T).astype(np.float32))

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            apply_sym_perm(np.eye(3), Permutation.identity(4))


class TestBandwidth:
    def test_cases(self):
        assert bandwidth(np.eye(5)) == 0
        assert bandwidth(tridiagonal(5)) == 1
        a = np.zeros((6, 6))
        a[0, 5] = 1
        assert bandwidth(a, 0.0) == 5

    def test_matches_scan(self, rng):
        a = rng.standard_normal((12, 12)) * (rng.random((12, 12)) < 0.2)
        assert bandwidth(a) == scan_bandwidth(a)
