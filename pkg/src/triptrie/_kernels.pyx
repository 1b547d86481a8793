# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Mirrors ``_fallback`` function for function."""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint16_t
from libcpp.vector cimport vector

cnp.import_array()

ctypedef fused code_t:
    uint16_t
    int32_t


def narrow_codes(const int64_t[:, ::1] mat):
    """Symbols minus their minimum, as uint16 when the range allows, else int32.

    Returns ``(codes, lo, hi)``, or ``None`` when the range exceeds int32.
    """
    cdef Py_ssize_t n = mat.shape[0]
    cdef Py_ssize_t l = mat.shape[1]
    cdef Py_ssize_t t, k
    cdef int64_t v, lo = 0, hi = 0
    if n and l:
        lo = mat[0, 0]
        hi = lo
    for t in range(n):
        for k in range(l):
            v = mat[t, k]
            if v < lo:
                lo = v
            elif v > hi:
                hi = v
    if hi - lo > 2147483647:
        return None
    cdef uint16_t[:, ::1] small
    cdef int32_t[:, ::1] big
    if hi - lo < 65536:
        codes = np.empty((n, l), dtype=np.uint16)
        small = codes
        for t in range(n):
            for k in range(l):
                small[t, k] = <uint16_t>(mat[t, k] - lo)
    else:
        codes = np.empty((n, l), dtype=np.int32)
        big = codes
        for t in range(n):
            for k in range(l):
                big[t, k] = <int32_t>(mat[t, k] - lo)
    return codes, lo, hi


def build_levels(const code_t[:, ::1] codes, int64_t lo, Py_ssize_t n_codes):
    """Depth-first trie construction over an ``(n, l)`` matrix of symbol codes.

    Symbols are ``codes + lo`` with codes in ``0..n_codes-1``. Each node owns
    a contiguous segment of a trip-order buffer holding its trips in
    increasing trip order; a stamp table indexed by code finds the distinct
    next symbols in O(1) per trip, and a stable counting sort splits the
    segment among the children. Rows of a subtree stay cache-resident while
    it is finished depth-first. A single-trip segment is written out as a
    chain. Children of a node get consecutive ids when the node is expanded.

    Returns an int32 ``(4, m)`` view of ``parent, symbol, depth, count`` per
    node (root first) and the leaf node of every trip. The view's base is sized
    for the worst case ``1 + n*l`` nodes; pages past ``m`` are never touched.
    Symbols must fit in int32.
    """
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t l = codes.shape[1]
    cdef Py_ssize_t j, t, k, start, stop, first, nchild, c, d
    cdef int64_t g, child, code
    cdef vector[int64_t] stack_node, stack_start
    cdef vector[int64_t] offsets
    cdef int* src
    cdef int* dst
    cdef int* ping
    cdef int* pong

    stamp_arr = np.full(max(n_codes, 1), -1, dtype=np.int64)
    slot_arr = np.zeros(max(n_codes, 1), dtype=np.int64)
    perm_arr = np.arange(max(n, 1), dtype=np.int32)
    buf_arr = np.empty(max(n, 1), dtype=np.int32)
    key_arr = np.empty(max(n, 1), dtype=np.int32)
    leaf_arr = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] stamp = stamp_arr
    cdef int64_t[::1] slot = slot_arr
    cdef int[::1] perm = perm_arr
    cdef int[::1] buf = buf_arr
    cdef int[::1] key = key_arr
    cdef int64_t[::1] leaf = leaf_arr
    # a segment at even depth lives in ping, at odd depth in pong; splitting a
    # segment writes the children over the same range of the other array
    ping = &perm[0]
    pong = &buf[0]

    nodes_arr = np.empty((4, 1 + n * l), dtype=np.int32)
    cdef int[:, ::1] nodes = nodes_arr
    cdef int[::1] parent = nodes[0]
    cdef int[::1] symbol = nodes[1]
    cdef int[::1] depth = nodes[2]
    cdef int[::1] count = nodes[3]
    cdef Py_ssize_t m = 1
    parent[0] = -1
    symbol[0] = 0
    depth[0] = 0
    count[0] = <int>n

    if n:
        stack_node.push_back(0)
        stack_start.push_back(0)
    while stack_node.size():
        g = stack_node.back()
        start = stack_start.back()
        stack_node.pop_back()
        stack_start.pop_back()
        stop = start + count[g]
        k = depth[g]
        if k & 1:
            src = pong
            dst = ping
        else:
            src = ping
            dst = pong
        if k == l:
            for j in range(start, stop):
                leaf[src[j]] = g
            continue
        if stop - start == 1:
            # lone trip: the rest of its string is a chain
            t = src[start]
            child = g
            for d in range(k, l):
                parent[m] = <int>child
                symbol[m] = <int>(codes[t, d] + lo)
                depth[m] = <int>(d + 1)
                count[m] = 1
                child = m
                m += 1
            leaf[t] = child
            continue
        first = m
        # pass 1: distinct next symbols become children, in order of first appearance
        for j in range(start, stop):
            code = codes[src[j], k]
            key[j] = <int>code
            if stamp[code] != g:
                stamp[code] = g
                child = m
                m += 1
                slot[code] = child
                parent[child] = <int>g
                symbol[child] = <int>(code + lo)
                depth[child] = <int>(k + 1)
                count[child] = 0
            else:
                child = slot[code]
            count[child] += 1
        nchild = m - first
        offsets.assign(nchild + 1, start)
        for c in range(nchild):
            offsets[c + 1] = offsets[c] + count[first + c]
        # pass 2: stable scatter
        for j in range(start, stop):
            c = slot[key[j]] - first
            dst[offsets[c]] = src[j]
            offsets[c] += 1
        # push in reverse so the first child is expanded next
        for c in range(nchild - 1, -1, -1):
            stack_node.push_back(first + c)
            stack_start.push_back(offsets[c] - count[first + c])

    return nodes_arr[:, :m], leaf_arr


def pairwise_weighted_hamming(const int64_t[:, ::1] strings):
    """All-pairs position-weighted Hamming distances; requires l <= 62."""
    cdef Py_ssize_t n = strings.shape[0]
    cdef Py_ssize_t l = strings.shape[1]
    cdef Py_ssize_t i, j, p
    cdef int64_t d
    out_arr = np.zeros((n, n), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    for i in range(n):
        for j in range(i + 1, n):
            d = 0
            for p in range(l):
                if strings[i, p] != strings[j, p]:
                    d += (<int64_t>1) << (l - 1 - p)
            out[i, j] = d
            out[j, i] = d
    return out_arr


cdef int64_t _lev(const int64_t[::1] a, const int64_t[::1] b, int64_t[::1] row):
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef Py_ssize_t i, j
    cdef int64_t diag, up, best
    for j in range(nb + 1):
        row[j] = j
    for i in range(1, na + 1):
        diag = row[0]
        row[0] = i
        for j in range(1, nb + 1):
            up = row[j]
            best = diag + (a[i - 1] != b[j - 1])
            if up + 1 < best:
                best = up + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best
            diag = up
    return row[nb]


def levenshtein(const int64_t[::1] a, const int64_t[::1] b):
    row = np.empty(b.shape[0] + 1, dtype=np.int64)
    return int(_lev(a, b, row))


def pairwise_levenshtein(list seqs):
    cdef Py_ssize_t m = len(seqs)
    cdef Py_ssize_t i, j, longest = 0
    arrays = [np.ascontiguousarray(s, dtype=np.int64) for s in seqs]
    for s in arrays:
        if s.shape[0] > longest:
            longest = s.shape[0]
    row = np.empty(longest + 1, dtype=np.int64)
    out_arr = np.zeros((m, m), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef int64_t d
    for i in range(m):
        for j in range(i + 1, m):
            d = _lev(arrays[i], arrays[j], row)
            out[i, j] = d
            out[j, i] = d
    return out_arr
