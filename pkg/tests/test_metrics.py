import pytest

from triptrie.ingest import TripString
from triptrie.metrics import levenshtein, shared_prefix_len, strip_padding, weighted_hamming

from conftest import A, B, C


def test_three_string_distances():
    assert weighted_hamming((A, A), (A, B)) == 1
    assert weighted_hamming((A, A), (B, A)) == 2
    assert weighted_hamming((A, B), (B, A)) == 3


def test_identity_and_padding():
    assert weighted_hamming((1, 2, 3), (1, 2, 3)) == 0
    # "ab_" vs "abc": only the last position differs
    assert weighted_hamming((A, B, -1), (A, B, C)) == 1


def test_long_strings_exact():
    l = 100
    assert weighted_hamming((1,) * l, (2,) + (1,) * (l - 1)) == 2 ** (l - 1)


def test_length_mismatch():
    with pytest.raises(ValueError):
        weighted_hamming((1, 2), (1,))
    with pytest.raises(ValueError):
        shared_prefix_len((1, 2), (1,))


def test_shared_prefix():
    assert shared_prefix_len((1, 2, 3), (1, 2, 4)) == 2
    assert shared_prefix_len((1, 2), (1, 2)) == 2
    assert shared_prefix_len((2, 2), (1, 2)) == 0


def test_trip_strings_accepted():
    s, t = TripString((1, 2), 60, 0), TripString((1, 3), 60, 1)
    assert weighted_hamming(s, t) == 1
    assert levenshtein(s, t) == 1


def test_levenshtein_examples():
    assert levenshtein((1, 2, 3, 4), (2, 2, 3, 4)) == 1
    assert levenshtein((), (1, 2)) == 2
    assert levenshtein((1, 2, 3), (1, 2, 3)) == 0
    assert levenshtein((1, 2, 3), (2, 3)) == 1
    assert levenshtein((1, 2, -1, -1), (1, 2)) == 0


def test_strip_padding():
    assert strip_padding((1, -1, 2, -1, -1)) == [1, -1, 2]
