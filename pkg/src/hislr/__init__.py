"""Sparse plus hierarchical low-rank matrix compression."""

__version__ = "0.1.0"

from .core import Permutation, SparseMatrix, gaussian_matrix, sparse_matvec
from .hss import HssLeaf, HssNode, OpCounter, densify, hss_compress, hss_matvec, two_level_compress
from .io import load_matrix, save_matrix
from .metrics import ErrorReport, StorageReport, error_report, storage_count
from .rcm import AdjacencyGraph, apply_sym_perm, bandwidth, build_adjacency, rcm_order
from .shss import ShssConfig, ShssModel, densify_shss, shss_compress, shss_matvec
from .slr import (
    SparseLowRank,
    extract_top_p,
    slr_matvec,
    sparse_plus_rsvd,
    sparse_plus_svd,
)
from .svd import LowRankFactor, SvdResult, randomized_svd, truncated_svd
