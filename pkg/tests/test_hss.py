import numpy as np
import pytest

from hislr.errors import DimensionError, ValidationError
from hislr.hss import (
    HssLeaf,
    HssNode,
    OpCounter,
    densify,
    hss_compress,
    hss_matvec,
    iter_nodes,
    two_level_compress,
)

from conftest import random_matrix, rel


def block_low_rank(n, r, seed):
    """Random diagonal blocks, exactly rank-``r`` off-diagonal blocks."""
    rng = np.random.default_rng(seed)
    s = (n + 1) // 2
    a = rng.standard_normal((n, n))
    a[:s, s:] = rng.standard_normal((s, r)) @ rng.standard_normal((r, n - s))
    a[s:, :s] = rng.standard_normal((n - s, r)) @ rng.standard_normal((r, s))
    return a.astype(np.float32)


class TestTwoLevel:
    def test_block_diagonal_gives_rank_zero(self):
        a = random_matrix(8, seed=1)
        a[:4, 4:] = 0
        a[4:, :4] = 0
        b = two_level_compress(a, 1e-6, 3)
        assert b.off01.rank == 0 and b.off10.rank == 0

    def test_rank_one_off_diagonal_exact(self):
        a = block_low_rank(10, 1, seed=2)
        b = two_level_compress(a, 1e-6, 1)
        assert np.abs(b.to_dense() - a).max() < 1e-5

    def test_minimal(self):
        b = two_level_compress(np.array([[1, 2], [3, 4]]), 1e-6, 1)
        assert b.d0.shape == b.d1.shape == (1, 1)
        assert b.off01.u.shape == (1, 1) and b.off01.r.shape == (1, 1)
        assert np.allclose(b.to_dense(), [[1, 2], [3, 4]])

    def test_odd_split(self):
        b = two_level_compress(random_matrix(7, seed=3), 1e-6, 2)
        assert b.split == 4 and b.d0.shape == (4, 4) and b.d1.shape == (3, 3)
        assert b.off01.shape == (4, 3) and b.off10.shape == (3, 4)

    def test_too_small(self):
        with pytest.raises(DimensionError):
            two_level_compress(np.ones((1, 1)), 1e-6, 1)


class TestCompress:
    def test_depth_one_is_two_level(self):
        a = random_matrix(12, seed=4)
        t = hss_compress(a, 1e-6, 3, 1, seed=5)
        b = two_level_compress(a, 1e-6, 3, seed=5)
        assert np.array_equal(densify(t), b.to_dense())

    def test_depth_two_shapes(self):
        t = hss_compress(random_matrix(4, seed=5), 1e-6, 2, 2)
        leaves = [n for n in iter_nodes(t) if isinstance(n, HssLeaf)]
        assert len(leaves) == 4 and all(l.d.shape == (1, 1) for l in leaves)

    def test_full_rank_exact(self):
        a = random_matrix(16, seed=6)
        t = hss_compress(a, 0.0, 8, 2)
        assert np.abs(densify(t) - a).max() < 1e-4

    def test_leaves_are_input_blocks(self):
        a = random_matrix(16, seed=7)
        t = hss_compress(a, 0.0, 8, 2)
        assert np.array_equal(t.child0.child0.d, a[:4, :4])
        assert np.array_equal(t.child1.child1.d, a[12:, 12:])

    def test_rank_halving(self):
        t = hss_compress(random_matrix(64, seed=8), 1e-6, 12, 4)

        def walk(node, expect):
            if isinstance(node, HssNode):
                assert node.rank == expect
                walk(node.child0, max(1, expect // 2))
                walk(node.child1, max(1, expect // 2))

        walk(t, 12)
        # ranks bottom out at 1: 12 -> 6 -> 3 -> 1
        assert t.child0.child0.child0.rank == 1

    def test_rank_clamped_to_block(self):
        t = hss_compress(random_matrix(8, seed=9), 0.0, 100, 2)
        assert t.off01.rank == 4 and t.child0.off01.rank == 2

    def test_depth_error(self):
        with pytest.raises(ValidationError, match="depth exceeds"):
            hss_compress(random_matrix(16), 1e-6, 4, 5)

    def test_exact_svd_option(self):
        a = block_low_rank(16, 2, seed=10)
        t = hss_compress(a, 1e-6, 2, 1, factorizer="svd")
        assert np.abs(densify(t) - a).max() < 1e-5


class TestMatvec:
    def test_zero(self):
        t = hss_compress(random_matrix(16, seed=1), 1e-6, 4, 2)
        assert not hss_matvec(t, np.zeros(16)).any()

    def test_basis_vectors_exact_tree(self):
        a = random_matrix(16, seed=2)
        t = hss_compress(a, 0.0, 8, 2)
        for j in range(16):
            e = np.zeros(16)
            e[j] = 1
            assert np.abs(hss_matvec(t, e) - a[:, j]).max() < 1e-5

    @pytest.mark.parametrize("n,k,depth", [(16, 2, 1), (33, 4, 3), (64, 8, 2), (50, 3, 4)])
    def test_coherence(self, n, k, depth, rng):
        t = hss_compress(random_matrix(n, seed=n), 1e-6, k, depth)
        d = densify(t)
        for _ in range(20):
            x = rng.standard_normal(n)
            assert np.linalg.norm(hss_matvec(t, x) - d @ x) / np.linalg.norm(x) < 1e-5

    def test_block_input(self, rng):
        t = hss_compress(random_matrix(20, seed=3), 1e-6, 3, 2)
        X = rng.standard_normal((20, 4))
        assert rel(hss_matvec(t, X), densify(t) @ X) < 1e-12

    def test_dimension_mismatch(self):
        t = hss_compress(random_matrix(8), 1e-6, 2, 1)
        with pytest.raises(DimensionError):
            hss_matvec(t, np.zeros(9))

    def test_op_count_two_level(self):
        t = hss_compress(random_matrix(8, seed=4), 1e-6, 2, 1)
        c = OpCounter()
        hss_matvec(t, np.ones(8), c)
        # two 4x4 leaves, two rank-2 factors of a 4x4 block
        assert c.madds == 2 * 16 + 2 * 2 * (4 + 4)


class TestDensify:
    def test_leaf(self):
        d = random_matrix(3)
        assert np.array_equal(densify(HssLeaf(d)), d)

    def test_block_diagonal(self):
        a = random_matrix(8, seed=5)
        a[:4, 4:] = 0
        a[4:, :4] = 0
        out = densify(hss_compress(a, 1e-6, 2, 1))
        assert not out[:4, 4:].any() and not out[4:, :4].any()
