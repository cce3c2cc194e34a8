"""Canned profiles for the worked examples, each re-checked whenever it is loaded.

``fig1``
    Nine judges over four alternatives: three say 1 beats 2, three call 1 and
    3 equal, three call 2 and 4 equal.
``fig2_scenario``
    A single-judge tournament fragment holding every game of ``i`` and ``j``,
    bundled with opponent scores ``a > b``, ``c > d``, ``e > f``.
``prop2``
    Smallest digraph consistent with the eigenvector equations
    ``lambda s_2 = s_4 + s_5/2`` and ``lambda s_3 = s_4 + s_5/2``: arcs
    1->3, 2->4, 3->4 and draws of 5 with everyone, one judge per comparison.
    Built from those equations alone.
``prop10``
    Found by seeded search (see ``PROP10_SEARCH``) and frozen: least squares
    ranks 4 below 3 although 4 has every result of 3 plus an extra win.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import Profile, cumulative_matrix, is_indivisible, outcome_multiset
from .errors import ScoringError

FIXTURE_NAMES = ("fig1", "fig2_scenario", "prop2", "prop10")

PROP10_SEARCH = {
    "generator": {"n_min": 4, "n_max": 5, "m_min": 1, "m_max": 1, "draw_prob": 0.0, "pair_prob": 0.6},
    "seed": 10,
    "trial": 23,
}


@dataclass(frozen=True, eq=False)
class Fixture:
    name: str
    profile: Profile
    provenance: str
    scores: np.ndarray | None = None
    pair: tuple[str, str] | None = None
    checks: tuple[str, ...] = field(default=())


class FixtureCheckError(RuntimeError):
    """A canned profile no longer satisfies its documented constraints."""


def _fig1() -> Profile:
    return Profile.from_ballots(
        ["1", "2", "3", "4"],
        [[("1", "2", ">")]] * 3 + [[("1", "3", "=")]] * 3 + [[("2", "4", "=")]] * 3,
    )


def _fig2() -> tuple[Profile, np.ndarray]:
    labels = ["i", "j", "a", "b", "c", "d", "e", "f", "g1", "g2", "g3", "h1", "h2"]
    ballot = [
        ("i", "a", "<"), ("i", "c", ">"), ("i", "e", ">"),
        ("i", "g1", ">"), ("i", "g2", ">"), ("i", "g3", ">"),
        ("j", "b", "<"), ("j", "d", ">"), ("j", "f", "="),
        ("j", "h1", "<"), ("j", "h2", "<"),
    ]
    p = Profile.from_ballots(labels, [ballot])
    prior = {"a": 3.0, "b": 1.0, "c": 3.0, "d": 1.0, "e": 3.0, "f": 1.0}
    scores = np.array([prior.get(x, 0.0) for x in labels])
    return p, scores


def _prop2() -> Profile:
    ballots = [
        [("1", "3", ">")], [("2", "4", ">")], [("3", "4", ">")],
        [("5", "1", "=")], [("5", "2", "=")], [("5", "3", "=")], [("5", "4", "=")],
    ]
    return Profile.from_ballots(["1", "2", "3", "4", "5"], ballots)


def _prop10() -> Profile:
    ballot = [("1", "2", "<"), ("1", "4", "<"), ("1", "5", ">"), ("2", "3", "<"), ("2", "4", "<")]
    return Profile.from_ballots(["1", "2", "3", "4", "5"], [ballot])


def _strict_superset_by_wins(p: Profile, i: str, j: str) -> bool:
    ui = Counter((e.value, e.opponent) for e in outcome_multiset(p, i).elements)
    uj = Counter((e.value, e.opponent) for e in outcome_multiset(p, j).elements)
    extra = ui - uj
    return not (uj - ui) and bool(extra) and all(v == 1.0 for v, _ in extra)


def _check(name: str, conditions: Sequence[tuple[str, Callable[[], bool]]]) -> tuple[str, ...]:
    for text, cond in conditions:
        if not cond():
            raise FixtureCheckError(f"fixture {name!r} fails its constraint: {text}")
    return tuple(text for text, _ in conditions)


def fixture(name: str) -> Fixture:
    """Load a fixture and verify its constraint block (raises on any failure)."""
    # imported here: procedures and axioms depend on core only, never on fixtures
    from .axioms import STRICT, scm_audit, scm_confront
    from .procedures import grs_scores, least_squares_scores, row_sum_scores, wei_scores

    if name == "fig1":
        p = _fig1()
        c = cumulative_matrix(p)
        checks = _check(name, [
            ("n = 4 and m = 9", lambda: p.n == 4 and p.m == 9),
            ("a_12 = 3, a_13 = a_31 = 1.5, a_24 = a_42 = 1.5",
             lambda: c.a[0, 1] == 3 and c.a[0, 2] == c.a[2, 0] == 1.5 and c.a[1, 3] == c.a[3, 1] == 1.5),
            ("divisible", lambda: not is_indivisible(c)),
        ])
        return Fixture(name, p, "Three judges: 1 beats 2; three: 1 equals 3; three: 2 equals 4.",
                       checks=checks)

    if name == "fig2_scenario":
        p, scores = _fig2()
        checks = _check(name, [
            ("confrontation of i and j demands s_i > s_j",
             lambda: scm_confront(p, scores, "i", "j").requirement == STRICT),
        ])
        return Fixture(
            name, p,
            "All games of i and j in a tournament fragment; opponents valued a > b, c > d, e > f. "
            "Extra wins of i are against g1..g3, extra losses of j against h1, h2.",
            scores=scores, pair=("i", "j"), checks=checks,
        )

    if name == "prop2":
        p = _prop2()
        c = cumulative_matrix(p)
        a = c.a

        def wei_rows() -> bool:
            row = np.array([0.0, 0.0, 0.0, 1.0, 0.5])
            return np.array_equal(a[1], row) and np.array_equal(a[2], row)

        def wei_ties_and_flags() -> bool:
            s, _ = wei_scores(c)
            flagged = {v.pair for v in scm_audit(p, s)}
            return abs(s[1] - s[2]) <= 1e-9 and (1, 2) in flagged

        checks = _check(name, [
            ("indivisible", lambda: is_indivisible(c)),
            ("rows of 2 and 3 read s_4 + s_5/2", wei_rows),
            ("a_13 = 1 and a_31 = 0", lambda: a[0, 2] == 1 and a[2, 0] == 0),
            ("wei ties 2 and 3 and the audit flags (2, 3)", wei_ties_and_flags),
        ])
        return Fixture(name, p,
                       "Arcs 1->3, 2->4, 3->4; 5 draws with 1..4; one judge per comparison.",
                       checks=checks)

    if name == "prop10":
        p = _prop10()

        def ls_flags() -> bool:
            s = least_squares_scores(p)
            flagged = {v.pair for v in scm_audit(p, s)}
            return (3, 2) in flagged and s[3] < s[2] - 1e-9

        checks = _check(name, [
            ("4 holds every result of 3 plus extra wins", lambda: _strict_superset_by_wins(p, "4", "3")),
            ("least squares scores 4 below 3 and the audit flags (4, 3)", ls_flags),
            ("row sums and generalized row sum rank 4 above 3", lambda: (
                row_sum_scores(p)[3] > row_sum_scores(p)[2] and grs_scores(p)[3] > grs_scores(p)[2])),
        ])
        return Fixture(name, p, f"Frozen output of a seeded search: {PROP10_SEARCH}.",
                       pair=("4", "3"), checks=checks)

    raise ScoringError("UNKNOWN_FIXTURE", f"unknown fixture {name!r}; choose from {', '.join(FIXTURE_NAMES)}")


def fixture_document(name: str) -> dict[str, Any]:
    """The fixture's profile as a profile document (with provenance)."""
    fx = fixture(name)
    doc = fx.profile.to_document()
    doc["provenance"] = fx.provenance
    if fx.scores is not None:
        doc["scores"] = [float(x) for x in fx.scores]
    return doc
