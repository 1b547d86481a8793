"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and return types. Used when the extension is not built or
when ``TRIPTRIE_PURE_PYTHON`` is set.
"""
import numpy as np


def narrow_codes(mat):
    if mat.size == 0:
        lo = hi = 0
    else:
        lo, hi = int(mat.min()), int(mat.max())
    if hi - lo > 2**31 - 1:
        return None
    dtype = np.uint16 if hi - lo < 65536 else np.int32
    return (mat - lo).astype(dtype), lo, hi


def build_levels(codes, lo, n_codes):
    n, l = codes.shape
    rows = (codes.astype(np.int64) + lo).tolist()
    parent = [-1]
    symbol = [0]
    depth = [0]
    count = [n]
    leaf = [0] * n
    stack = [(0, list(range(n)))] if n else []
    while stack:
        g, trips = stack.pop()
        k = depth[g]
        if k == l:
            for t in trips:
                leaf[t] = g
            continue
        if len(trips) == 1:
            t = trips[0]
            child = g
            for d in range(k, l):
                parent.append(child)
                child = len(parent) - 1
                symbol.append(rows[t][d])
                depth.append(d + 1)
                count.append(1)
            leaf[t] = child
            continue
        groups = {}
        for t in trips:
            sym = rows[t][k]
            if sym not in groups:
                groups[sym] = len(parent)
                parent.append(g)
                symbol.append(sym)
                depth.append(k + 1)
                count.append(0)
            count[groups[sym]] += 1
        members = {child: [] for child in groups.values()}
        for t in trips:
            members[groups[rows[t][k]]].append(t)
        for child in reversed(list(members)):
            stack.append((child, members[child]))
    return np.array([parent, symbol, depth, count], dtype=np.int32), np.array(leaf, dtype=np.int64)


def pairwise_weighted_hamming(strings):
    n, l = strings.shape
    out = np.zeros((n, n), dtype=np.int64)
    for p in range(l):
        col = strings[:, p]
        out += (col[:, None] != col[None, :]).astype(np.int64) << (l - 1 - p)
    return out


def levenshtein(a, b):
    a = list(a)
    b = list(b)
    row = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        diag, row[0] = row[0], i
        for j, y in enumerate(b, 1):
            up = row[j]
            row[j] = min(diag + (x != y), up + 1, row[j - 1] + 1)
            diag = up
    return row[-1]


def pairwise_levenshtein(seqs):
    seqs = [list(s) for s in seqs]
    m = len(seqs)
    out = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        for j in range(i + 1, m):
            out[i, j] = out[j, i] = levenshtein(seqs[i], seqs[j])
    return out
