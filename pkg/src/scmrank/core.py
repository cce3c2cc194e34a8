"""Profiles of incomplete paired comparisons and the matrices derived from them.

A profile holds one ballot per judge.  Each ballot lists the pairs the judge
chose to compare; a pair missing from a ballot is "no opinion", which is
different from a loss.  Outcomes are stored from the point of view of the
first alternative of each comparison.
"""

from __future__ import annotations

import enum
from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from .errors import ScoringError


class Outcome(enum.Enum):
    A_WINS = "a_wins"
    B_WINS = "b_wins"
    DRAW = "draw"

    @property
    def value_for_a(self) -> float:
        return _VALUE_FOR_A[self]

    def flipped(self) -> "Outcome":
        if self is Outcome.A_WINS:
            return Outcome.B_WINS
        if self is Outcome.B_WINS:
            return Outcome.A_WINS
        return self


_VALUE_FOR_A = {Outcome.A_WINS: 1.0, Outcome.B_WINS: 0.0, Outcome.DRAW: 0.5}


@dataclass(frozen=True)
class Comparison:
    a: str
    b: str
    outcome: Outcome


@dataclass(frozen=True)
class Profile:
    """Alternatives (in canonical order) and one tuple of comparisons per judge.

    Build instances through :func:`validate_profile` or :meth:`from_ballots`;
    the constructor itself does not check invariants.
    """

    alternatives: tuple[str, ...]
    judges: tuple[tuple[Comparison, ...], ...]

    @property
    def n(self) -> int:
        return len(self.alternatives)

    @property
    def m(self) -> int:
        return len(self.judges)

    @cached_property
    def index(self) -> dict[str, int]:
        return {label: k for k, label in enumerate(self.alternatives)}

    @cached_property
    def entries(self) -> tuple[tuple[int, int, int, float], ...]:
        """Every defined off-diagonal entry as ``(judge, i, j, a_ij^p)``.

        Each comparison yields two entries, one per orientation.
        """
        out = []
        idx = self.index
        for p, ballot in enumerate(self.judges):
            for c in ballot:
                i, j = idx[c.a], idx[c.b]
                v = c.outcome.value_for_a
                out.append((p, i, j, v))
                out.append((p, j, i, 1.0 - v))
        return tuple(out)

    @classmethod
    def from_ballots(
        cls,
        alternatives: Sequence[Any],
        ballots: Iterable[Iterable[tuple[Any, Any, Any]]],
    ) -> "Profile":
        """Validated profile from ``(a, b, outcome)`` triples.

        ``outcome`` may be an :class:`Outcome`, its string value, or one of the
        shorthands ``">"``, ``"<"``, ``"="``.
        """
        doc = {
            "alternatives": [str(x) for x in alternatives],
            "judges": [
                {
                    "comparisons": [
                        {"a": str(a), "b": str(b), "outcome": _outcome_text(o)}
                        for a, b, o in ballot
                    ]
                }
                for ballot in ballots
            ],
        }
        return validate_profile(doc)

    def to_document(self) -> dict[str, Any]:
        return {
            "alternatives": list(self.alternatives),
            "judges": [
                {
                    "comparisons": [
                        {"a": c.a, "b": c.b, "outcome": c.outcome.value}
                        for c in ballot
                    ]
                }
                for ballot in self.judges
            ],
        }

    def relabeled(self, perm: Sequence[int]) -> "Profile":
        """Profile whose alternative ``k`` is this profile's ``perm[k]``.

        Labels move with their comparisons, so scores of the new profile are the
        old scores read through ``perm``.
        """
        alts = tuple(self.alternatives[k] for k in perm)
        return Profile(alts, self.judges)

    def with_judges(self, order: Sequence[int]) -> "Profile":
        return Profile(self.alternatives, tuple(self.judges[k] for k in order))


_SHORTHAND = {">": "a_wins", "<": "b_wins", "=": "draw"}


def _outcome_text(o: Any) -> str:
    if isinstance(o, Outcome):
        return o.value
    return _SHORTHAND.get(o, o)


def validate_profile(raw: Mapping[str, Any]) -> Profile:
    """Check a profile document and return the corresponding :class:`Profile`.

    The document layout is ``{"alternatives": [...], "judges": [{"comparisons":
    [{"a": .., "b": .., "outcome": "a_wins" | "b_wins" | "draw"}]}]}``.
    """
    if not isinstance(raw, Mapping):
        raise ScoringError("MALFORMED", "profile document must be an object")
    alts_raw = raw.get("alternatives")
    judges_raw = raw.get("judges")
    if not isinstance(alts_raw, list) or not isinstance(judges_raw, list):
        raise ScoringError("MALFORMED", "'alternatives' and 'judges' must be arrays")
    alternatives = tuple(str(a) for a in alts_raw)
    if not alternatives or not judges_raw:
        raise ScoringError("EMPTY", "need at least one alternative and one judge")
    if len(set(alternatives)) != len(alternatives):
        raise ScoringError("MALFORMED", "alternative labels must be distinct")
    known = set(alternatives)

    judges = []
    for p, judge in enumerate(judges_raw):
        if not isinstance(judge, Mapping) or not isinstance(judge.get("comparisons", []), list):
            raise ScoringError("MALFORMED", f"judge {p} must have a 'comparisons' array")
        seen: set[frozenset[str]] = set()
        ballot = []
        for c in judge.get("comparisons", []):
            try:
                a, b, outcome = str(c["a"]), str(c["b"]), Outcome(c["outcome"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ScoringError("MALFORMED", f"judge {p}: bad comparison {c!r}") from exc
            for label in (a, b):
                if label not in known:
                    raise ScoringError(
                        "UNKNOWN_ALTERNATIVE", f"judge {p}: unknown alternative {label!r}"
                    )
            if a == b:
                raise ScoringError("SELF_COMPARISON", f"judge {p}: {a!r} compared with itself")
            pair = frozenset((a, b))
            if pair in seen:
                raise ScoringError(
                    "DUPLICATE_PAIR", f"judge {p}: pair ({a!r}, {b!r}) reported twice"
                )
            seen.add(pair)
            ballot.append(Comparison(a, b, outcome))
        judges.append(tuple(ballot))
    return Profile(alternatives, tuple(judges))


@dataclass(frozen=True, eq=False)
class CumulativeMatrix:
    """Total outcomes ``a``, comparison counts and skew totals over all judges."""

    a: np.ndarray
    counts: np.ndarray
    skew: np.ndarray
    alternatives: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @classmethod
    def from_outcomes(cls, a: Any, alternatives: Sequence[str] = ()) -> "CumulativeMatrix":
        """Build directly from a total-outcome matrix (counts are ``a + a.T``)."""
        a = np.array(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("outcome matrix must be square")
        if np.any(np.diag(a) != 0) or np.any(a < 0):
            raise ValueError("outcome matrix must be nonnegative with zero diagonal")
        alts = tuple(alternatives) or tuple(str(k + 1) for k in range(a.shape[0]))
        return cls(a, a + a.T, a - a.T, alts)


def cumulative_matrix(p: Profile) -> CumulativeMatrix:
    n = p.n
    a = np.zeros((n, n))
    for _, i, j, v in p.entries:
        a[i, j] += v
    counts = a + a.T
    return CumulativeMatrix(a, counts, a - a.T, p.alternatives)


@dataclass(frozen=True, eq=False)
class DegreeSummary:
    win_total: np.ndarray
    loss_total: np.ndarray
    comparisons: np.ndarray


def degree_summary(c: CumulativeMatrix) -> DegreeSummary:
    wins = c.a.sum(axis=1)
    losses = c.a.sum(axis=0)
    return DegreeSummary(wins, losses, c.counts.sum(axis=1))


def _reachable(adj: np.ndarray, start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            v = int(v)
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def divisible_split(c: CumulativeMatrix) -> tuple[frozenset[int], frozenset[int]] | None:
    """A split ``(J1, J2)`` with ``a_ji = 0`` for all ``j in J2, i in J1``, or None.

    The alternatives reachable from some vertex along arcs ``i -> j`` (``a_ij >
    0``) form a set that never scores against its complement.
    """
    n = c.n
    adj = c.a > 0
    for v in range(n):
        reach = _reachable(adj, v)
        if len(reach) < n:
            j2 = frozenset(reach)
            return frozenset(range(n)) - j2, j2
    return None


def is_indivisible(c: CumulativeMatrix) -> bool:
    n = c.n
    if n <= 1:
        return True
    adj = c.a > 0
    return len(_reachable(adj, 0)) == n and len(_reachable(adj.T, 0)) == n


def is_connected(p: Profile) -> bool:
    n = p.n
    if n <= 1:
        return True
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    idx = p.index
    for ballot in p.judges:
        for c in ballot:
            ra, rb = find(idx[c.a]), find(idx[c.b])
            if ra != rb:
                parent[ra] = rb
    return len({find(x) for x in range(n)}) == 1


@dataclass(frozen=True)
class OutcomeElement:
    value: float
    opponent: int
    judge: int


@dataclass(frozen=True)
class OutcomeMultiset:
    owner: int
    elements: tuple[OutcomeElement, ...]

    def __len__(self) -> int:
        return len(self.elements)


def outcome_multiset(p: Profile, i: str | int) -> OutcomeMultiset:
    """All comparison outcomes of ``i`` across judges, with opponent and judge."""
    k = p.index[i] if isinstance(i, str) else int(i)
    elements = tuple(
        OutcomeElement(v, j, judge) for judge, a, j, v in p.entries if a == k
    )
    return OutcomeMultiset(k, elements)
