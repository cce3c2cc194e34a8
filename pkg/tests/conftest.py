import sys

import pytest
from hypothesis import strategies as st

from scmrank.core import Profile, cumulative_matrix, is_indivisible


@pytest.fixture
def fig1():
    return Profile.from_ballots(
        "1234", [[("1", "2", ">")]] * 3 + [[("1", "3", "=")]] * 3 + [[("2", "4", "=")]] * 3
    )


@pytest.fixture
def two_to_one():
    """Two players: 1 beats 2 twice, 2 beats 1 once."""
    return Profile.from_ballots("12", [[("1", "2", ">")], [("1", "2", ">")], [("1", "2", "<")]])


@pytest.fixture
def three_cycle():
    return Profile.from_ballots("123", [[("1", "2", ">"), ("2", "3", ">"), ("3", "1", ">")]])


@st.composite
def profiles(draw, n_min=2, n_max=5, m_max=3, complete=False, indivisible=False):
    n = draw(st.integers(n_min, n_max))
    m = draw(st.integers(1, m_max))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    ballots = []
    for _ in range(m):
        ballot = []
        for i, j in pairs:
            if complete or draw(st.booleans()):
                ballot.append((str(i + 1), str(j + 1), draw(st.sampled_from([">", "<", "="]))))
        ballots.append(ballot)
    p = Profile.from_ballots([str(k + 1) for k in range(n)], ballots)
    if indivisible:
        from hypothesis import assume

        assume(is_indivisible(cumulative_matrix(p)))
    return p


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
