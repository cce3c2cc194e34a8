"""Executable axioms: self-consistent monotonicity, macrovertices, splitting balance.

Confronting ``i`` with ``j`` asks whether the outcomes of ``i`` dominate those
of ``j`` when opponents are valued by the procedure's own scores.  A
*witness* is a set of extra wins of ``i`` left unmatched, a set of extra
losses of ``j`` left unmatched, and a one-to-one pairing of everything else
in which each outcome of ``i`` is at least its partner's and was obtained
against an opponent scored at least as high.  The witness search is a
perfect-matching problem on a doubled bipartite graph (each element may
instead be matched to its own "left out" slot when it is allowed to be left
out); a *strict* witness exists iff some strict edge lies in a perfect
matching, which is decided by alternating-cycle search.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from .core import (
    OutcomeElement,
    Profile,
    cumulative_matrix,
    is_indivisible,
    outcome_multiset,
    validate_profile,
)
from .errors import ScoringError
from .matching import alternating_cycle, hopcroft_karp
from .procedures import Method, ScoreVector

TIE_TOL = 1e-9
MAX_EXHAUSTIVE_N = 20

NONE = "NONE"
WEAK = "WEAK"
STRICT = "STRICT"


@dataclass(frozen=True)
class Witness:
    """Split of both multisets plus the pairing of the remainders."""

    extra_i: tuple[OutcomeElement, ...]
    extra_j: tuple[OutcomeElement, ...]
    pairs: tuple[tuple[OutcomeElement, OutcomeElement], ...]

    def is_strict(self, scores: Sequence[float], tol: float = TIE_TOL) -> bool:
        return bool(self.extra_i or self.extra_j) or any(
            x.value > y.value or scores[x.opponent] > scores[y.opponent] + tol
            for x, y in self.pairs
        )

    def to_dict(self, labels: Sequence[str] | None = None) -> dict[str, Any]:
        def el(e: OutcomeElement) -> dict[str, Any]:
            opp = labels[e.opponent] if labels else e.opponent
            return {"value": e.value, "opponent": opp, "judge": e.judge}

        return {
            "extra_i": [el(e) for e in self.extra_i],
            "extra_j": [el(e) for e in self.extra_j],
            "pairs": [[el(x), el(y)] for x, y in self.pairs],
        }


@dataclass(frozen=True)
class ConfrontationVerdict:
    pair: tuple[int, int]
    requirement: str
    witness: Witness | None
    satisfied: bool
    score_i: float = 0.0
    score_j: float = 0.0

    def to_dict(self, labels: Sequence[str] | None = None) -> dict[str, Any]:
        i, j = self.pair
        return {
            "pair": [labels[i], labels[j]] if labels else [i, j],
            "requirement": self.requirement,
            "satisfied": self.satisfied,
            "scores": [self.score_i, self.score_j],
            "witness": self.witness.to_dict(labels) if self.witness else None,
        }


def validate_witness(
    w: Witness,
    u_i: Sequence[OutcomeElement],
    u_j: Sequence[OutcomeElement],
    scores: Sequence[float],
    tol: float = TIE_TOL,
) -> bool:
    """Check a witness against the two clauses of the axiom literally."""
    left = list(w.extra_i) + [x for x, _ in w.pairs]
    right = list(w.extra_j) + [y for _, y in w.pairs]
    if sorted(left, key=_key) != sorted(u_i, key=_key):
        return False
    if sorted(right, key=_key) != sorted(u_j, key=_key):
        return False
    if any(x.value != 1.0 for x in w.extra_i) or any(y.value != 0.0 for y in w.extra_j):
        return False
    return all(
        x.value >= y.value and scores[x.opponent] >= scores[y.opponent] - tol
        for x, y in w.pairs
    )


def _key(e: OutcomeElement):
    return (e.value, e.opponent, e.judge)


def confront_multisets(
    u_i: Sequence[OutcomeElement],
    u_j: Sequence[OutcomeElement],
    scores: Sequence[float],
    tol: float = TIE_TOL,
) -> tuple[str, Witness | None]:
    """Strongest requirement ``s_i >= s_j`` / ``s_i > s_j`` the axiom imposes.

    Returns ``(NONE | WEAK | STRICT, witness)``.
    """
    a, b = len(u_i), len(u_j)
    # cheap necessary conditions: every non-win of i and every non-loss of j
    # needs a partner on the other side
    if sum(x.value < 1.0 for x in u_i) > b or sum(y.value > 0.0 for y in u_j) > a:
        return NONE, None
    if sum(x.value == 0.0 for x in u_i) > sum(y.value == 0.0 for y in u_j):
        return NONE, None

    s = [float(v) for v in scores]
    # left: 0..a-1 elements of U_i, a..a+b-1 slots "y left out"
    # right: 0..b-1 elements of U_j, b..b+a-1 slots "x left out"
    adj: list[list[int]] = [[] for _ in range(a + b)]
    strict_edges: list[tuple[int, int]] = []
    for xi, x in enumerate(u_i):
        sx = s[x.opponent]
        for yi, y in enumerate(u_j):
            if x.value >= y.value:
                sy = s[y.opponent]
                if sx >= sy - tol:
                    adj[xi].append(yi)
                    if x.value > y.value or sx > sy + tol:
                        strict_edges.append((xi, yi))
        if x.value == 1.0:
            adj[xi].append(b + xi)
            strict_edges.append((xi, b + xi))
    fillers = list(range(b, b + a))
    for yi, y in enumerate(u_j):
        row = adj[a + yi]
        if y.value == 0.0:
            row.append(yi)
            strict_edges.append((a + yi, yi))
        row.extend(fillers)

    match_l, match_r = hopcroft_karp(adj, a + b)
    if -1 in match_l:
        return NONE, None

    for u, v in strict_edges:
        if match_l[u] == v:
            return STRICT, _witness(match_l, u_i, u_j)
    for u, v in strict_edges:
        pairing = alternating_cycle(adj, match_l, match_r, u, v)
        if pairing is not None:
            new_l = [0] * (a + b)
            for x, y in pairing:
                new_l[x] = y
            return STRICT, _witness(new_l, u_i, u_j)
    return WEAK, _witness(match_l, u_i, u_j)


def _witness(match_l: Sequence[int], u_i, u_j) -> Witness:
    a, b = len(u_i), len(u_j)
    extra_i = []
    pairs = []
    for xi in range(a):
        y = match_l[xi]
        if y >= b:
            extra_i.append(u_i[xi])
        else:
            pairs.append((u_i[xi], u_j[y]))
    extra_j = [u_j[yi] for yi in range(b) if match_l[a + yi] == yi]
    return Witness(tuple(extra_i), tuple(extra_j), tuple(pairs))


def _scores_of(s: ScoreVector | Sequence[float]) -> np.ndarray:
    return np.asarray(s.scores if isinstance(s, ScoreVector) else s, dtype=float)


def _resolve(p: Profile, x: str | int) -> int:
    return p.index[x] if isinstance(x, str) else int(x)


def requirement_satisfied(requirement: str, si: float, sj: float, tol: float = TIE_TOL) -> bool:
    if requirement == STRICT:
        return si > sj + tol
    if requirement == WEAK:
        return si >= sj - tol
    return True


def scm_confront(
    p: Profile,
    s: ScoreVector | Sequence[float],
    i: str | int,
    j: str | int,
    tol: float = TIE_TOL,
) -> ConfrontationVerdict:
    """Confront ``i`` with ``j`` under scores ``s`` (labels or indices)."""
    ii, jj = _resolve(p, i), _resolve(p, j)
    if ii == jj:
        raise ValueError("confrontation needs two distinct alternatives")
    scores = _scores_of(s)
    req, wit = confront_multisets(
        outcome_multiset(p, ii).elements, outcome_multiset(p, jj).elements, scores, tol
    )
    si, sj = float(scores[ii]), float(scores[jj])
    return ConfrontationVerdict((ii, jj), req, wit, requirement_satisfied(req, si, sj, tol), si, sj)


def scm_audit(p: Profile, s: ScoreVector | Sequence[float], tol: float = TIE_TOL) -> list[ConfrontationVerdict]:
    """Violated confrontations over all ordered pairs; empty means the axiom holds here."""
    scores = _scores_of(s)
    sets = [outcome_multiset(p, k).elements for k in range(p.n)]
    out = []
    for ii in range(p.n):
        for jj in range(p.n):
            if ii == jj:
                continue
            si, sj = float(scores[ii]), float(scores[jj])
            # a pair already ordered strictly can only fail a demand the other way
            if si > sj + tol:
                continue
            req, wit = confront_multisets(sets[ii], sets[jj], scores, tol)
            if not requirement_satisfied(req, si, sj, tol):
                out.append(ConfrontationVerdict((ii, jj), req, wit, False, si, sj))
    return out


# -- random profiles and the violation search ---------------------------------


@dataclass(frozen=True)
class GeneratorConfig:
    n_min: int = 3
    n_max: int = 6
    m_min: int = 1
    m_max: int = 3
    draw_prob: float = 0.2
    pair_prob: float = 0.7
    indivisible_only: bool = False
    max_rejections: int = 1000

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream for one trial: Philox keyed by the seed, trial in the high counter word."""
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1), counter=[0, 0, 0, int(trial)]))


def random_profile(rng: np.random.Generator, gen: GeneratorConfig) -> Profile | None:
    """One profile per ``gen``; None if indivisibility was required and never reached."""
    for _ in range(max(gen.max_rejections, 1)):
        n = int(rng.integers(gen.n_min, gen.n_max + 1))
        m = int(rng.integers(gen.m_min, gen.m_max + 1))
        labels = [str(k + 1) for k in range(n)]
        judges = []
        for _ in range(m):
            comps = []
            for i, j in itertools.combinations(range(n), 2):
                if rng.random() >= gen.pair_prob:
                    continue
                u = rng.random()
                if u < gen.draw_prob:
                    outcome = "draw"
                elif u < gen.draw_prob + (1 - gen.draw_prob) / 2:
                    outcome = "a_wins"
                else:
                    outcome = "b_wins"
                comps.append({"a": labels[i], "b": labels[j], "outcome": outcome})
            judges.append({"comparisons": comps})
        p = validate_profile({"alternatives": labels, "judges": judges})
        if not gen.indivisible_only or is_indivisible(cumulative_matrix(p)):
            return p
    return None


@dataclass(frozen=True, eq=False)
class CounterexampleReport:
    profile: Profile
    method: Method
    pair: tuple[int, int]
    verdict: ConfrontationVerdict
    scores: ScoreVector
    seed: int
    trial: int

    def reverify(self) -> bool:
        """Re-run the method on the stored profile and confirm the same violation."""
        s = self.method(self.profile)
        v = scm_confront(self.profile, s, *self.pair)
        return not v.satisfied and v.requirement == self.verdict.requirement

    def to_dict(self) -> dict[str, Any]:
        labels = self.profile.alternatives
        return {
            "method": self.method.describe(),
            "seed": self.seed,
            "trial": self.trial,
            "pair": [labels[self.pair[0]], labels[self.pair[1]]],
            "verdict": self.verdict.to_dict(labels),
            "scores": [{"alternative": a, "score": float(x)} for a, x in zip(labels, self.scores.scores)],
            "profile": self.profile.to_document(),
        }


@dataclass(frozen=True)
class SearchResult:
    report: CounterexampleReport | None
    trials: int
    skipped: int = 0

    @property
    def found(self) -> bool:
        return self.report is not None


# operational errors that mean "this profile is outside the method's domain"
_INAPPLICABLE = frozenset({"NOT_INDIVISIBLE", "DISCONNECTED", "ISOLATED_ALTERNATIVE",
                           "EPSILON_OUT_OF_RANGE", "DIVIDE_BY_ZERO", "SINGULAR"})


def run_trial(method: Method, gen: GeneratorConfig, seed: int, trial: int) -> CounterexampleReport | None | str:
    """Violation report for one trial, None if clean, ``"skip"`` if not applicable."""
    p = random_profile(trial_rng(seed, trial), gen)
    if p is None:
        return "skip"
    try:
        s = method(p)
    except ScoringError as exc:
        if exc.code in _INAPPLICABLE:
            return "skip"
        raise
    bad = scm_audit(p, s)
    if not bad:
        return None
    v = bad[0]
    return CounterexampleReport(p, method, v.pair, v, s, seed, trial)


def _scan(args) -> tuple[int, CounterexampleReport | None, int]:
    method, gen, seed, lo, hi = args
    skipped = 0
    for t in range(lo, hi):
        r = run_trial(method, gen, seed, t)
        if r == "skip":
            skipped += 1
        elif r is not None:
            return t - lo + 1, r, skipped
    return hi - lo, None, skipped


def scm_violation_search(
    method: Method | str,
    gen: GeneratorConfig = GeneratorConfig(),
    seed: int = 0,
    budget: int = 1000,
    workers: int = 1,
) -> SearchResult:
    """First violating random profile (smallest trial index), or none within ``budget``.

    The result is a pure function of ``(method, gen, seed, budget)`` whatever
    ``workers`` is.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    m = method if isinstance(method, Method) else Method.parse(method)
    if workers <= 1 or budget < 2 * workers:
        used, rep, skipped = _scan((m, gen, seed, 0, budget))
        return SearchResult(rep, used, skipped)
    bounds = np.linspace(0, budget, workers + 1).astype(int)
    chunks = [(m, gen, seed, int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(_scan, chunks))
    # the earliest chunk with a hit owns the smallest trial index
    trials = 0
    skipped = 0
    for (lo, _hi), (used, rep, sk) in zip([(c[3], c[4]) for c in chunks], results):
        trials += used
        skipped += sk
        if rep is not None:
            return SearchResult(rep, lo + used, skipped)
    return SearchResult(None, trials, skipped)


# -- macrovertices -------------------------------------------------------------


def _check_size(p: Profile) -> None:
    if p.n > MAX_EXHAUSTIVE_N:
        raise ScoringError("TOO_LARGE", f"exhaustive scan limited to n <= {MAX_EXHAUSTIVE_N}")


def is_macrovertex(counts: np.ndarray, members: Iterable[int], reading: str = "n_ik") -> bool:
    """Whether ``members`` is a macrovertex under the given reading of the count condition.

    ``"n_ik"`` (default): ``n_ik == n_jk`` for all ``i, j`` inside and ``k`` outside.
    ``"n_ij"``: the literal ``n_ij == n_jk``.
    """
    inside = sorted(set(members))
    n = counts.shape[0]
    outside = [k for k in range(n) if k not in set(inside)]
    if not outside:
        return True
    if reading == "n_ik":
        block = counts[np.ix_(inside, outside)]
        return bool(np.all(block == block[0]))
    if reading == "n_ij":
        return all(counts[i, j] == counts[j, k] for i in inside for j in inside for k in outside)
    raise ValueError(f"unknown reading {reading!r}")


def enumerate_macrovertices(p: Profile, reading: str = "n_ik") -> list[frozenset[str]]:
    """Every macrovertex with at least two members other than the whole set.

    Singletons and the full alternative set always qualify and are left out.
    """
    _check_size(p)
    counts = cumulative_matrix(p).counts
    n = p.n
    out = []
    for size in range(2, n):
        for members in itertools.combinations(range(n), size):
            if is_macrovertex(counts, members, reading):
                out.append(frozenset(p.alternatives[k] for k in members))
    return out


@dataclass(frozen=True, eq=False)
class IndependenceVerdict:
    independent: bool
    max_deviation: float
    witness: Profile | None
    tested: int
    skipped: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": "INDEPENDENT" if self.independent else "DEPENDENT",
            "max_deviation": self.max_deviation,
            "tested": self.tested,
            "skipped": self.skipped,
            "witness": self.witness.to_document() if self.witness else None,
        }


def _members(p: Profile, M: Iterable[str | int]) -> frozenset[int]:
    return frozenset(_resolve(p, x) for x in M)


def check_perturbation(p: Profile, q: Profile, M: Iterable[str | int]) -> None:
    """Raise ``NOT_A_MACROVERTEX`` unless ``q`` only changes outcomes inside ``M``."""
    inside = _members(p, M)
    cp, cq = cumulative_matrix(p).counts, cumulative_matrix(q).counts
    if q.alternatives != p.alternatives or not np.array_equal(cp, cq):
        raise ScoringError("NOT_A_MACROVERTEX", "perturbation changed comparison counts")
    if not is_macrovertex(cq, inside):
        raise ScoringError("NOT_A_MACROVERTEX", "subset is not a macrovertex of the perturbed profile")
    ap, aq = cumulative_matrix(p).a, cumulative_matrix(q).a
    for i in range(p.n):
        for j in range(p.n):
            if not (i in inside and j in inside) and ap[i, j] != aq[i, j]:
                raise ScoringError("NOT_A_MACROVERTEX", "perturbation touched a comparison leaving the subset")


def perturb_inside(p: Profile, inside: frozenset[int], rng: np.random.Generator) -> Profile:
    """Redraw the outcome of every comparison with both ends in ``inside``."""
    idx = p.index
    choices = ("a_wins", "b_wins", "draw")
    doc = p.to_document()
    for judge in doc["judges"]:
        for c in judge["comparisons"]:
            if idx[c["a"]] in inside and idx[c["b"]] in inside:
                c["outcome"] = choices[int(rng.integers(3))]
    return validate_profile(doc)


def macrovertex_independence_test(
    method: Method | str,
    p: Profile,
    M: Iterable[str | int],
    perturbations: int = 100,
    seed: int = 0,
    perturbed: Sequence[Profile] | None = None,
    tol: float = 1e-7,
) -> IndependenceVerdict:
    """Re-score after redrawing within-``M`` outcomes; DEPENDENT if an outside score moves.

    Perturbed profiles the method cannot score are counted as skipped.
    """
    m = method if isinstance(method, Method) else Method.parse(method)
    inside = _members(p, M)
    counts = cumulative_matrix(p).counts
    if len(inside) < 1 or not is_macrovertex(counts, inside):
        raise ScoringError("NOT_A_MACROVERTEX", "subset is not a macrovertex of the profile")
    outside = [k for k in range(p.n) if k not in inside]
    base = m(p).scores[outside]
    if perturbed is None:
        rng = np.random.default_rng(seed)
        perturbed = [perturb_inside(p, inside, rng) for _ in range(perturbations)]
    worst, witness, tested, skipped = 0.0, None, 0, 0
    for q in perturbed:
        check_perturbation(p, q, inside)
        try:
            sq = m(q).scores[outside]
        except ScoringError as exc:
            if exc.code in _INAPPLICABLE:
                skipped += 1
                continue
            raise
        tested += 1
        dev = float(np.abs(sq - base).max(initial=0.0))
        if dev > worst:
            worst = dev
            if dev > tol and witness is None:
                witness = q
    return IndependenceVerdict(witness is None, worst, witness, tested, skipped)


# -- splitting balance ---------------------------------------------------------


@dataclass(frozen=True)
class SplittingVerdict:
    passed: bool
    witness: tuple[frozenset[str], frozenset[str]] | None
    splits_checked: int

    def to_dict(self) -> dict[str, Any]:
        w = None
        if self.witness:
            w = {"J1": sorted(self.witness[0]), "J2": sorted(self.witness[1])}
        return {"verdict": "PASS" if self.passed else "FAIL", "splits_checked": self.splits_checked,
                "witness": w}


def dominated_splits(p: Profile) -> list[tuple[frozenset[int], frozenset[int]]]:
    """All ``(J1, J2)`` such that no member of ``J2`` ever scored against ``J1``."""
    _check_size(p)
    a = cumulative_matrix(p).a
    n = p.n
    out = []
    for mask in range(1, 2**n - 1):
        j2 = [k for k in range(n) if mask >> k & 1]
        j1 = [k for k in range(n) if not mask >> k & 1]
        if not np.any(a[np.ix_(j2, j1)] > 0):
            out.append((frozenset(j1), frozenset(j2)))
    return out


def splitting_balance_check(p: Profile, s: ScoreVector | Sequence[float], tol: float = TIE_TOL) -> SplittingVerdict:
    """FAIL iff some dominated split puts every ``J1`` score below every ``J2`` score."""
    scores = _scores_of(s)
    splits = dominated_splits(p)
    for j1, j2 in splits:
        if max(scores[list(j1)]) < min(scores[list(j2)]) - tol:
            labels = p.alternatives
            w = (frozenset(labels[k] for k in j1), frozenset(labels[k] for k in j2))
            return SplittingVerdict(False, w, len(splits))
    return SplittingVerdict(True, None, len(splits))
