"""Distances between trip strings.

``weighted_hamming`` weights a mismatch at (1-based) position ``i`` by
``2**(l - i)``, so an early mismatch outweighs every later one combined.
Values are exact Python ints at any length.
"""
from __future__ import annotations

from triptrie import kernels
from triptrie.geo_grid import NULL_PAD


def _symbols(s):
    return s.symbols if hasattr(s, "symbols") else s


def _check_lengths(a, b):
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} != {len(b)}")


def weighted_hamming(s, t) -> int:
    a, b = _symbols(s), _symbols(t)
    _check_lengths(a, b)
    l = len(a)
    d = 0
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            d += 1 << (l - 1 - i)
    return d


def shared_prefix_len(s, t) -> int:
    a, b = _symbols(s), _symbols(t)
    _check_lengths(a, b)
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i
    return len(a)


def strip_padding(seq) -> list:
    seq = list(_symbols(seq))
    end = len(seq)
    while end and seq[end - 1] == NULL_PAD:
        end -= 1
    return seq[:end]


def levenshtein(s, t) -> int:
    """Edit distance (unit insert/delete/substitute) after stripping padding."""
    return kernels.levenshtein(strip_padding(s), strip_padding(t))
