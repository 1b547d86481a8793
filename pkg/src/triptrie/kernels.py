"""Kernel dispatch: compiled extension when available, pure Python otherwise.

Set ``TRIPTRIE_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

import numpy as np

from triptrie import _fallback
from triptrie.geo_grid import ROOT

if os.environ.get("TRIPTRIE_PURE_PYTHON"):
    _compiled = None
else:
    try:
        from triptrie import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _fallback

# pairwise_weighted_hamming in int64 needs 2**l - 1 to fit
MAX_INT64_LENGTH = 62

INT32_MIN, INT32_MAX = -(2**31), 2**31 - 1

# stamp-table size limit for the trie builder before symbols get compressed
MAX_DENSE_CODES = 1 << 24


def _as_matrix(strings):
    return np.ascontiguousarray(strings, dtype=np.int64)


def build_levels(strings, impl=None):
    """Build trie node arrays for an (n, l) matrix.

    Returns a ``(4, m)`` array of per-node ``parent, symbol, depth, count``
    rows (node 0 is the root) and the leaf node of every row. The array is
    int32 when every symbol fits, int64 otherwise.
    """
    impl = impl or _impl
    mat = _as_matrix(strings)
    if mat.ndim != 2:
        raise ValueError("expected a 2-d symbol matrix")
    if mat.shape[0] * mat.shape[1] >= INT32_MAX:
        raise OverflowError("corpus too large for one build (n * l must stay below 2**31)")
    narrow = impl.narrow_codes(mat)
    values = None
    if narrow is not None and narrow[2] - narrow[1] < MAX_DENSE_CODES and INT32_MIN <= narrow[1] and narrow[2] <= INT32_MAX:
        codes, lo, hi = narrow
        n_codes = hi - lo + 1
    else:
        # wide or sparse symbol range: build on dense codes, map back after
        values, inverse = np.unique(mat, return_inverse=True)
        dtype = np.uint16 if values.size <= 65536 else np.int32
        codes = np.ascontiguousarray(inverse.reshape(mat.shape), dtype=dtype)
        lo, n_codes = 0, values.size
    nodes, leaf = impl.build_levels(codes, lo, n_codes)
    if values is not None:
        nodes = nodes.astype(np.int64)
        nodes[1] = values[nodes[1]]
    nodes[1, 0] = ROOT
    return nodes, leaf


def pairwise_weighted_hamming(strings, impl=None):
    impl = impl or _impl
    mat = _as_matrix(strings)
    if mat.shape[1] > MAX_INT64_LENGTH:
        raise OverflowError("string length exceeds int64 distance range")
    return impl.pairwise_weighted_hamming(mat)


def levenshtein(a, b, impl=None):
    impl = impl or _impl
    return impl.levenshtein(
        np.ascontiguousarray(a, dtype=np.int64), np.ascontiguousarray(b, dtype=np.int64)
    )


def pairwise_levenshtein(seqs, impl=None):
    impl = impl or _impl
    return impl.pairwise_levenshtein([np.ascontiguousarray(s, dtype=np.int64) for s in seqs])
