import itertools

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from subdirect.words import FreeGroup

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def letters(rank: int, max_size: int = 12):
    return st.lists(st.integers(1, rank).flatmap(lambda x: st.sampled_from([x, -x])), max_size=max_size)


def words(F: FreeGroup, max_size: int = 12):
    return letters(F.rank, max_size).map(F.word)


def all_reduced_words(F: FreeGroup, max_length: int):
    """Every reduced word of length <= max_length, by exhaustive extension."""
    out = [F.identity]
    frontier = [()]
    alphabet = [x for i in range(1, F.rank + 1) for x in (i, -i)]
    for _ in range(max_length):
        nxt = []
        for w in frontier:
            for x in alphabet:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        out += [F.word(w) for w in nxt]
        frontier = nxt
    return out


@pytest.fixture
def F2():
    return FreeGroup(2)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
