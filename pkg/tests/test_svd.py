import numpy as np
import pytest

from hislr.errors import ValidationError
from hislr.svd import randomized_svd, truncated_svd

from conftest import random_matrix


def recon_err(a, res):
    return np.linalg.norm(a.astype(np.float64) - res.reconstruct())


def tail_rss(a, k):
    s = np.linalg.svd(a.astype(np.float64), compute_uv=False)
    return np.sqrt(np.sum(s[k:] ** 2))


def ortho_residuals(res):
    r = res.achieved_rank
    u = res.u[:, :r].astype(np.float64)
    vt = res.vt[:r].astype(np.float64)
    return np.abs(u.T @ u - np.eye(r)).max(), np.abs(vt @ vt.T - np.eye(r)).max()


class TestTruncated:
    def test_identity(self):
        res = truncated_svd(np.eye(2), 1)
        assert res.sigma.tolist() == [1.0]
        assert recon_err(np.eye(2), res) == pytest.approx(1.0, abs=1e-7)

    def test_rank_one_exact(self):
        u = np.array([3.0, 4.0]) / 5
        v = np.array([1.0, 2.0, 2.0]) / 3
        a = np.outer(u, v).astype(np.float32)
        assert recon_err(a, truncated_svd(a, 1)) < 1e-6

    def test_tail_norm(self):
        a = random_matrix(8, seed=3)
        assert recon_err(a, truncated_svd(a, 4)) == pytest.approx(tail_rss(a, 4), rel=1e-5)

    def test_sorted_nonnegative_and_orthonormal(self):
        res = truncated_svd(random_matrix(20, 12, seed=1), 6)
        assert np.all(np.diff(res.sigma) <= 0) and np.all(res.sigma >= 0)
        assert max(ortho_residuals(res)) < 1e-5

    def test_monotone_in_k(self):
        a = random_matrix(16, seed=2)
        errs = [recon_err(a, truncated_svd(a, k)) for k in range(1, 17)]
        assert all(x >= y for x, y in zip(errs, errs[1:]))

    def test_eps_drops(self):
        a = np.diag([3.0, 1e-8, 0.0]).astype(np.float32)
        res = truncated_svd(a, 3, eps=1e-6)
        assert res.achieved_rank == 1
        assert res.sigma[1:].tolist() == [0.0, 0.0]
        assert res.factor().rank == 1

    def test_factor_absorbs_sigma_left(self):
        a = random_matrix(6, seed=4)
        res = truncated_svd(a, 3)
        f = res.factor()
        vt = f.r.astype(np.float64)
        assert np.abs(vt @ vt.T - np.eye(3)).max() < 1e-5
        assert np.allclose(f.to_dense(), res.reconstruct(), atol=1e-5)

    @pytest.mark.parametrize("k", [0, 9])
    def test_rank_range(self, k):
        with pytest.raises(ValidationError):
            truncated_svd(random_matrix(8), k)


class TestRandomized:
    def test_exact_rank_two(self, rng):
        a = (rng.standard_normal((30, 2)) @ rng.standard_normal((2, 20))).astype(np.float32)
        res = randomized_svd(a, 2, oversample=2, power_iters=0, seed=1)
        assert recon_err(a, res) < 1e-5

    def test_close_to_optimal(self):
        a = random_matrix(64, seed=11)
        opt = recon_err(a, truncated_svd(a, 8))
        err = recon_err(a, randomized_svd(a, 8, 8, 2, seed=5))
        assert opt <= err <= 1.5 * opt

    def test_full_dimensional_sketch(self):
        a = random_matrix(12, seed=6)
        assert recon_err(a, randomized_svd(a, 12, oversample=0, power_iters=0, seed=0)) < 1e-4

    def test_bit_reproducible(self):
        a = random_matrix(40, seed=7)
        r1 = randomized_svd(a, 5, seed=99)
        r2 = randomized_svd(a, 5, seed=99)
        assert r1.u.tobytes() == r2.u.tobytes() and r1.vt.tobytes() == r2.vt.tobytes()

    def test_orthonormal(self):
        res = randomized_svd(random_matrix(50, 30, seed=8), 10, seed=2)
        assert max(ortho_residuals(res)) < 1e-5

    def test_zero_matrix_has_rank_zero(self):
        res = randomized_svd(np.zeros((10, 10), np.float32), 3, oversample=2, eps=0.0)
        assert res.achieved_rank == 0

    def test_sketch_too_big(self):
        with pytest.raises(ValidationError):
            randomized_svd(random_matrix(10), 5, oversample=6)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("k", [2, 5, 10])
    def test_dominance(self, seed, k):
        a = random_matrix(24, seed=seed)
        opt = recon_err(a, truncated_svd(a, k))
        assert opt <= recon_err(a, randomized_svd(a, k, 4, 1, seed=seed)) + 1e-6
