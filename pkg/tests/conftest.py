import numpy as np
import pytest

from triptrie.trie import build_trie_from_matrix

# letters in the hand-worked examples: a=1, b=2, c=3
A, B, C = 1, 2, 3


@pytest.fixture
def three():
    """Trie over {"aa", "ab", "ba"}."""
    return build_trie_from_matrix(np.array([[A, A], [A, B], [B, A]])).freeze()


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
