import dataclasses

import numpy as np
import pytest

from hislr.core import Permutation, SparseMatrix
from hislr.errors import DimensionError
from hislr.hss import hss_compress
from hislr.metrics import error_report, node_storage, storage_count
from hislr.shss import shss_compress
from hislr.slr import rsvd_model, sparse_plus_rsvd, sparse_plus_svd, svd_model

from conftest import random_matrix


def count_scalars(obj):
    """Double-entry oracle: walk every field and tally stored values and indices one by one."""
    values = indices = 0
    if isinstance(obj, SparseMatrix):
        for _ in obj.val.flat:
            values += 1
        for _ in obj.row.flat:
            indices += 1
        for _ in obj.col.flat:
            indices += 1
        return values, indices
    if isinstance(obj, Permutation):
        for _ in obj.forward.flat:
            indices += 1
        return 0, indices
    if isinstance(obj, np.ndarray):
        for _ in obj.flat:
            values += 1
        return values, 0
    if dataclasses.is_dataclass(obj):
        for f in dataclasses.fields(obj):
            if f.name in ("config", "params", "shape", "split", "rank", "depth", "method"):
                continue
            v, i = count_scalars(getattr(obj, f.name))
            values += v
            indices += i
    return values, indices


class TestStorage:
    def test_svd_formula(self):
        w = random_matrix(1024, seed=1)
        st = storage_count(rsvd_model(w, 64, seed=0))
        assert st.dense_params == 1048576
        assert st.stored_values == (1024 + 1024) * 64 == 131072
        assert st.compression_ratio == 8.0
        assert st.index_overhead == 0

    @pytest.mark.parametrize("m,n,p,k", [(20, 30, 10, 4), (16, 16, 30, 8), (40, 12, 5, 3)])
    def test_ssvd_formula(self, m, n, p, k):
        model = sparse_plus_svd(random_matrix(m, n, seed=m), p, k)
        s = model.spikes.nnz
        st = storage_count(model)
        assert st.stored_values == (m + n) * k + s
        assert st.index_overhead == 2 * s

    def test_ssvd_p_zero_is_svd(self):
        w = random_matrix(30, seed=2)
        assert storage_count(sparse_plus_svd(w, 0, 5)) == storage_count(svd_model(w, 5))

    def test_shss_double_entry(self):
        w = random_matrix(1024, seed=3)
        model = shss_compress(w, 10, 64, 2)
        st = storage_count(model)
        assert (st.stored_values, st.index_overhead) == count_scalars(model.root)

    def test_shss_rcm_counts_permutations(self):
        w = random_matrix(32, seed=4)
        model = shss_compress(w, 10, 4, 2, use_rcm=True)
        st = storage_count(model)
        assert (st.stored_values, st.index_overhead) == count_scalars(model.root)
        assert st.index_overhead == 2 * sum(
            t.spikes.nnz for t in _internal(model.root)) + 32 + 16 + 16

    def test_hss_double_entry(self):
        t = hss_compress(random_matrix(64, seed=5), 1e-6, 8, 3)
        st = storage_count(t)
        assert (st.stored_values, st.index_overhead) == count_scalars(t)

    def test_per_node_sum_is_total(self):
        model = shss_compress(random_matrix(64, seed=6), 20, 8, 3, use_rcm=True)
        per_node = node_storage(model)
        st = storage_count(model)
        assert sum(v for v, _ in per_node) == st.stored_values
        assert sum(i for _, i in per_node) == st.index_overhead


def _internal(t):
    from hislr.shss import ShssNode, iter_shss_nodes

    return [n for n in iter_shss_nodes(t) if isinstance(n, ShssNode)]


class TestError:
    def test_all_spikes_zero_error(self):
        w = random_matrix(10, seed=1)
        e = error_report(w, sparse_plus_svd(w, 100, 2))
        assert e.frobenius_abs == e.frobenius_rel == e.max_abs == 0.0

    def test_svd_tail(self):
        w = random_matrix(20, seed=2)
        s = np.linalg.svd(w.astype(np.float64), compute_uv=False)
        e = error_report(w, svd_model(w, 6))
        assert e.frobenius_abs == pytest.approx(np.sqrt(np.sum(s[6:] ** 2)), rel=1e-5)
        assert e.frobenius_rel == pytest.approx(e.frobenius_abs / np.linalg.norm(s))

    def test_zero_norm_convention(self):
        w = np.zeros((8, 8), np.float32)
        e = error_report(w, sparse_plus_rsvd(w, 0, 2, oversample=2))
        assert e.zero_norm
        assert e.frobenius_rel == e.frobenius_abs == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            error_report(random_matrix(8), svd_model(random_matrix(9), 2))
