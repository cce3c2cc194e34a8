"""Scoring procedures for incomplete paired-comparison profiles.

Every procedure returns a :class:`ScoreVector`.  Procedures that only need
total outcomes take a :class:`~scmrank.core.CumulativeMatrix`; those whose
equations are written judge by judge (least squares, generalized row sum,
Zermelo) take the :class:`~scmrank.core.Profile`.  :func:`score_profile` and
:class:`Method` dispatch by name for the audit tools and the CLI.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import (
    CumulativeMatrix,
    Profile,
    cumulative_matrix,
    degree_summary,
    is_connected,
    is_indivisible,
)
from .errors import ScoringError
from .numerics import (
    SolveDiagnostics,
    fixed_point,
    power_iteration,
    solve_linear,
    spectral_radius,
)

SUM_ONE = "SUM_ONE"
SUM_ZERO = "SUM_ZERO"
SUM_HALF_N = "SUM_HALF_N"
NONE = "NONE"

WIN = "win"
LOSS = "loss"
DIFFERENCE = "difference"
RATIO = "ratio"

RESIDUAL_TOL = 1e-10
_EXACT = SolveDiagnostics(0, 0.0, True)


@dataclass(frozen=True, eq=False)
class ScoreVector:
    method: str
    scores: np.ndarray
    normalization: str = NONE
    diag: SolveDiagnostics = _EXACT
    params: Mapping[str, Any] = field(default_factory=dict)
    alternatives: tuple[str, ...] = ()
    lam: float | None = None

    def __post_init__(self) -> None:
        s = np.asarray(self.scores, dtype=float)
        object.__setattr__(self, "scores", s)
        if not np.all(np.isfinite(s)):
            raise ScoringError("DOMAIN_EXIT", f"{self.method}: non-finite scores")
        target = {SUM_ONE: 1.0, SUM_ZERO: 0.0, SUM_HALF_N: len(s) / 2.0}.get(self.normalization)
        if target is not None and abs(s.sum() - target) > 1e-9:
            raise ValueError(f"{self.method}: scores do not match {self.normalization}")

    def __len__(self) -> int:
        return len(self.scores)

    def __getitem__(self, k):
        return self.scores[k]

    def by_label(self) -> dict[str, float]:
        return dict(zip(self.alternatives, map(float, self.scores)))


@dataclass(frozen=True, eq=False)
class WinLossPair:
    win_scores: np.ndarray
    loss_scores: np.ndarray
    source: str = ""
    diag: SolveDiagnostics = _EXACT
    params: Mapping[str, Any] = field(default_factory=dict)
    alternatives: tuple[str, ...] = ()


def _require_indivisible(c: CumulativeMatrix, method: str) -> None:
    if not is_indivisible(c):
        raise ScoringError("NOT_INDIVISIBLE", f"{method} needs an indivisible profile")


def _direction(direction: str) -> str:
    d = str(direction).lower()
    if d not in (WIN, LOSS):
        raise ValueError(f"direction must be 'win' or 'loss', got {direction!r}")
    return d


# -- row sums ---------------------------------------------------------------


def row_sum_scores(p: Profile) -> ScoreVector:
    s = np.zeros(p.n)
    for _, i, _, v in p.entries:
        s[i] += v
    return ScoreVector("row_sum", s, NONE, alternatives=p.alternatives)


# -- eigenvector procedures -------------------------------------------------


def wei_scores(c: CumulativeMatrix, direction: str = WIN) -> tuple[ScoreVector, float]:
    """Perron eigenvector of ``A`` (wins) or ``A.T`` (losses), summing to 1."""
    d = _direction(direction)
    _require_indivisible(c, "wei")
    M = c.a if d == WIN else c.a.T
    if c.n == 1:
        return ScoreVector("wei", np.ones(1), SUM_ONE, params={"direction": d},
                           alternatives=c.alternatives, lam=0.0), 0.0
    lam, v, diag = power_iteration(M)
    sv = ScoreVector("wei", v, SUM_ONE, diag, {"direction": d}, c.alternatives, lam)
    return sv, lam


def wei_win_loss(c: CumulativeMatrix) -> WinLossPair:
    w, _ = wei_scores(c, WIN)
    ell, _ = wei_scores(c, LOSS)
    diag = SolveDiagnostics(w.diag.iterations + ell.diag.iterations,
                            max(w.diag.residual, ell.diag.residual), True)
    return WinLossPair(w.scores, ell.scores, "wei", diag, {}, c.alternatives)


def combine(wl: WinLossPair, mode: str, method: str | None = None) -> ScoreVector:
    """Hasse-style difference ``w - l`` or Ramanujacharyulu-style ratio ``w / l``."""
    mode = str(mode).lower()
    w = np.asarray(wl.win_scores, dtype=float)
    ell = np.asarray(wl.loss_scores, dtype=float)
    if mode == DIFFERENCE:
        s = w - ell
    elif mode == RATIO:
        if np.any(ell <= 0):
            raise ScoringError("DIVIDE_BY_ZERO", "ratio combination needs positive loss scores")
        s = w / ell
    else:
        raise ValueError(f"combine mode must be 'difference' or 'ratio', got {mode!r}")
    name = method or (f"{wl.source}_{mode}" if wl.source else mode)
    params = dict(wl.params, combine=mode)
    return ScoreVector(name, s, NONE, wl.diag, params, wl.alternatives)


def hasse_scores(c: CumulativeMatrix) -> ScoreVector:
    return combine(wei_win_loss(c), DIFFERENCE, "hasse")


def ramanujacharyulu_scores(c: CumulativeMatrix) -> ScoreVector:
    return combine(wei_win_loss(c), RATIO, "ramanujacharyulu")


# -- Katz / Thompson / Taylor -----------------------------------------------


def taylor_matrix(c: CumulativeMatrix) -> np.ndarray:
    """``C_ij = max(a_ij - a_ji, 0)``: net wins only."""
    return np.maximum(c.a - c.a.T, 0.0)


def _ktt_matrix(c: CumulativeMatrix, variant: str) -> np.ndarray:
    v = str(variant).upper().replace("MATRIX_", "")
    if v == "A":
        return c.a
    if v == "C":
        return taylor_matrix(c)
    raise ValueError(f"variant must be 'A' or 'C', got {variant!r}")


def _ktt_epsilon(M: np.ndarray, epsilon: float | None) -> tuple[float, float]:
    r = spectral_radius(M)
    if epsilon is None:
        epsilon = 0.5 / r if r > 0 else 1.0
    epsilon = float(epsilon)
    if epsilon < 0 or (r > 0 and epsilon * r >= 1.0):
        raise ScoringError(
            "EPSILON_OUT_OF_RANGE",
            f"epsilon must satisfy 0 <= epsilon < 1/r = {1.0 / r if r else math.inf:.6g}",
        )
    return epsilon, r


def _ktt_vector(M: np.ndarray, epsilon: float) -> np.ndarray:
    n = M.shape[0]
    y = solve_linear(np.eye(n) - epsilon * M, np.ones(n))
    return M @ y


def ktt_scores(
    c: CumulativeMatrix,
    epsilon: float | None = None,
    variant: str = "A",
    direction: str = WIN,
) -> ScoreVector:
    """``M (I - eps M)^-1 1`` with ``M = A`` or Taylor's ``C`` (transposed for losses).

    ``epsilon`` defaults to ``0.5 / r`` where ``r`` is the spectral radius.
    """
    d = _direction(direction)
    M = _ktt_matrix(c, variant)
    eps, r = _ktt_epsilon(M, epsilon)
    if d == LOSS:
        M = M.T
    w = _ktt_vector(M, eps)
    params = {"epsilon": eps, "variant": str(variant).upper().replace("MATRIX_", ""),
              "direction": d, "spectral_radius": r}
    return ScoreVector("ktt", w, NONE, _EXACT, params, c.alternatives)


def ktt_series(c: CumulativeMatrix, epsilon: float, variant: str = "A",
               direction: str = WIN, terms: int = 50) -> np.ndarray:
    """Truncated power series ``(M + eps M^2 + ... + eps^(terms-1) M^terms) 1``."""
    M = _ktt_matrix(c, variant)
    if _direction(direction) == LOSS:
        M = M.T
    term = M @ np.ones(M.shape[0])
    total = term.copy()
    for _ in range(terms - 1):
        term = epsilon * (M @ term)
        total += term
    return total


def ktt_win_loss(c: CumulativeMatrix, epsilon: float | None = None,
                 variant: str = "A") -> WinLossPair:
    w = ktt_scores(c, epsilon, variant, WIN)
    ell = ktt_scores(c, w.params["epsilon"], variant, LOSS)
    params = {k: w.params[k] for k in ("epsilon", "variant", "spectral_radius")}
    return WinLossPair(w.scores, ell.scores, "ktt", _EXACT, params, c.alternatives)


# -- fair bets / directed trees ---------------------------------------------


def fair_bets_scores(c: CumulativeMatrix, direction: str = WIN) -> ScoreVector:
    """Solve ``w_i c_i^- = sum_j a_ij w_j`` (or the loss analogue), ``sum w = 1``.

    The homogeneous system has rank ``n - 1`` on indivisible profiles; its last
    equation is replaced by the normalization and the result is checked
    against the full system.
    """
    d = _direction(direction)
    _require_indivisible(c, "fair_bets")
    n = c.n
    deg = degree_summary(c)
    if d == WIN:
        L = np.diag(deg.loss_total) - c.a
    else:
        L = np.diag(deg.win_total) - c.a.T
    if n == 1:
        w = np.ones(1)
    else:
        K = L.copy()
        K[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        w = solve_linear(K, rhs)
    residual = float(np.abs(L @ w).max())
    if residual > RESIDUAL_TOL or np.any(w <= 0):
        raise ScoringError("NO_CONVERGENCE", f"fair bets residual {residual:.3e}")
    diag = SolveDiagnostics(1, residual, True)
    return ScoreVector("fair_bets", w, SUM_ONE, diag, {"direction": d}, c.alternatives)


def fair_bets_win_loss(c: CumulativeMatrix) -> WinLossPair:
    w = fair_bets_scores(c, WIN)
    ell = fair_bets_scores(c, LOSS)
    diag = SolveDiagnostics(2, max(w.diag.residual, ell.diag.residual), True)
    return WinLossPair(w.scores, ell.scores, "fair_bets", diag, {}, c.alternatives)


# -- least squares and generalized row sum ----------------------------------


def least_squares_scores(p: Profile) -> ScoreVector:
    """Least-squares fit of score differences to the skew outcomes, summing to 0.

    The normal equations ``m_i s_i - sum_j n_ij s_j = sum_j r_ij`` have a
    Laplacian of rank ``n - 1``; adding the all-ones matrix pins the sum to
    zero without changing the solution.
    """
    c = cumulative_matrix(p)
    m_i = c.counts.sum(axis=1)
    if np.any(m_i == 0):
        raise ScoringError("ISOLATED_ALTERNATIVE", "every alternative must be compared at least once")
    if not is_connected(p):
        raise ScoringError("DISCONNECTED", "least squares needs a connected comparison graph")
    lap = np.diag(m_i) - c.counts
    rhs = c.skew.sum(axis=1)
    n = p.n
    s = solve_linear(lap + np.ones((n, n)), rhs)
    s -= s.mean()
    residual = float(np.abs(lap @ s - rhs).max())
    if residual > RESIDUAL_TOL:
        raise ScoringError("NO_CONVERGENCE", f"normal equations residual {residual:.3e}")
    return ScoreVector("least_squares", s, SUM_ZERO, SolveDiagnostics(1, residual, True),
                       {}, p.alternatives)


def grs_epsilon_bound(n: int, m: int) -> float:
    """Largest admissible epsilon; unbounded when ``n <= 2``."""
    return 1.0 / (m * (n - 2)) if n >= 3 else math.inf


def grs_default_epsilon(n: int, m: int) -> float:
    return 1.0 / (m * max(n - 2, 1))


def _grs_check_epsilon(n: int, m: int, epsilon: float | None) -> float:
    if epsilon is None:
        return grs_default_epsilon(n, m)
    epsilon = float(epsilon)
    bound = grs_epsilon_bound(n, m)
    if not epsilon > 0 or epsilon > bound * (1 + 1e-12):
        raise ScoringError(
            "EPSILON_OUT_OF_RANGE",
            f"generalized row sum needs 0 < epsilon <= {bound:.6g} (n={n}, m={m})",
            bound=bound,
        )
    return epsilon


def grs_scores(p: Profile, epsilon: float | None = None) -> ScoreVector:
    """Generalized row sum: the linear system ``s_i = eps sum_jp (g r_ij^p - (s_i - s_j))``.

    ``g = m n + 1/eps``.  Rearranged, the matrix is ``I + eps * Laplacian``,
    strictly diagonally dominant, so the solution is unique and exact.
    ``epsilon`` defaults to ``1 / (m (n - 2))``.
    """
    n, m = p.n, p.m
    eps = _grs_check_epsilon(n, m, epsilon)
    gamma = m * n + 1.0 / eps
    c = cumulative_matrix(p)
    lap = np.diag(c.counts.sum(axis=1)) - c.counts
    rhs = eps * gamma * c.skew.sum(axis=1)
    s = solve_linear(np.eye(n) + eps * lap, rhs)
    residual = float(np.abs(_grs_residual(p, s, eps, gamma)).max())
    return ScoreVector("grs", s, NONE, SolveDiagnostics(1, residual, True),
                       {"epsilon": eps, "gamma": gamma}, p.alternatives)


def _grs_residual(p: Profile, s: np.ndarray, eps: float, gamma: float) -> np.ndarray:
    f = np.zeros(p.n)
    for _, i, j, v in p.entries:
        r = v - (1.0 - v)
        f[i] += gamma * r - (s[i] - s[j])
    return eps * f - s


# -- implicit systems --------------------------------------------------------


@dataclass(frozen=True)
class _Data:
    """Per-profile arrays the implicit systems read."""

    wins: np.ndarray  # cumulative a_ij
    counts: np.ndarray  # n_ij
    win_total: np.ndarray


def _data(p: Profile) -> _Data:
    c = cumulative_matrix(p)
    return _Data(c.a, c.counts, c.a.sum(axis=1))


@dataclass(frozen=True)
class ImplicitSystem:
    """Scores defined by ``f_i(profile, s) = 0`` for every alternative.

    ``step`` maps a feasible vector to the next iterate; ``solve`` overrides
    iteration for systems with a direct solution.
    """

    name: str
    residual: Callable[[Profile, np.ndarray], np.ndarray]
    feasible: Callable[[np.ndarray], bool]
    step: Callable[[_Data], Callable[[np.ndarray], np.ndarray]] | None
    normalization: str
    domain: str  # "ID" indivisible profiles, "U" all profiles
    solve: Callable[[Profile], ScoreVector] | None = None
    params: Mapping[str, Any] = field(default_factory=dict)


def _positive(s: np.ndarray) -> bool:
    return bool(np.all(s > 0))


def _open_unit(s: np.ndarray) -> bool:
    return bool(np.all((s > 0) & (s < 1)))


def _zermelo_residual(p: Profile, s: np.ndarray) -> np.ndarray:
    f = np.zeros(p.n)
    for _, i, j, v in p.entries:
        f[i] += v - s[i] / (s[i] + s[j])
    return f


def _zermelo_step(d: _Data):
    def step(s):
        denom = (d.counts / (s[:, None] + s[None, :])).sum(axis=1)
        t = d.win_total / denom
        return t / t.sum()
    return step


def _daniels_residual(p: Profile, s: np.ndarray) -> np.ndarray:
    a = cumulative_matrix(p).a
    return (a * s[None, :] / s[:, None] - a.T * s[:, None] / s[None, :]).sum(axis=1)


def _daniels_step(d: _Data):
    a = d.wins

    def step(s):
        t = np.sqrt((a @ s) / (a.T @ (1.0 / s)))
        return t / t.sum()
    return step


def _cowden_residual(p: Profile, s: np.ndarray) -> np.ndarray:
    a = cumulative_matrix(p).a
    return (a * (s[None, :] * (1 - s[:, None])) - a.T * (s[:, None] * (1 - s[None, :]))).sum(axis=1)


def _cowden_step(d: _Data):
    a = d.wins

    def step(s):
        P = a @ s
        Q = a.T @ (1.0 - s)
        return P / (P + Q)
    return step


ZERMELO_BT = ImplicitSystem("zermelo_bt", _zermelo_residual, _positive, _zermelo_step, SUM_ONE, "ID")
DANIELS = ImplicitSystem("daniels", _daniels_residual, _positive, _daniels_step, SUM_ONE, "ID")
# One degree of freedom is left free; the iterate reached from all-0.5 is kept.
COWDEN = ImplicitSystem("cowden", _cowden_residual, _open_unit, _cowden_step, NONE, "ID")


def grs_system(epsilon: float | None = None) -> ImplicitSystem:
    def residual(p: Profile, s: np.ndarray) -> np.ndarray:
        eps = _grs_check_epsilon(p.n, p.m, epsilon)
        return _grs_residual(p, s, eps, p.m * p.n + 1.0 / eps)

    return ImplicitSystem(
        "grs", residual, lambda s: True, None, NONE, "U",
        solve=lambda p: grs_scores(p, epsilon), params={"epsilon": epsilon},
    )


def implicit_scores(
    sys: ImplicitSystem,
    p: Profile,
    tol: float = 1e-13,
    max_iter: int = 200_000,
) -> ScoreVector:
    """Solve an implicit system on ``p`` and verify every residual is below 1e-10."""
    if sys.domain == "ID":
        _require_indivisible(cumulative_matrix(p), sys.name)
    if sys.solve is not None:
        return sys.solve(p)
    n = p.n
    init = np.full(n, 0.5) if sys.normalization != SUM_ONE else np.full(n, 1.0 / n)
    if n == 1:
        s, diag = init, _EXACT
    else:
        s, diag = fixed_point(sys.step(_data(p)), init, tol=tol, max_iter=max_iter,
                              feasible=sys.feasible)
    residual = float(np.abs(sys.residual(p, s)).max())
    if residual > RESIDUAL_TOL:
        raise ScoringError("NO_CONVERGENCE", f"{sys.name}: residual {residual:.3e} after fixed point",
                           diag=diag)
    diag = SolveDiagnostics(diag.iterations, residual, True)
    return ScoreVector(sys.name, s, sys.normalization, diag, dict(sys.params), p.alternatives)


# -- dispatch ----------------------------------------------------------------


def _cm(p: Profile) -> CumulativeMatrix:
    return cumulative_matrix(p)


def _eig_family(kind: str, p: Profile, params: dict) -> ScoreVector:
    c = _cm(p)
    mode = params.get("combine")
    if kind == "wei":
        if mode:
            return combine(wei_win_loss(c), mode, "hasse" if mode == DIFFERENCE else "ramanujacharyulu")
        return wei_scores(c, params.get("direction", WIN))[0]
    if kind == "ktt":
        eps, variant = params.get("epsilon"), params.get("variant", "A")
        if mode:
            return combine(ktt_win_loss(c, eps, variant), mode)
        return ktt_scores(c, eps, variant, params.get("direction", WIN))
    if mode:
        return combine(fair_bets_win_loss(c), mode)
    return fair_bets_scores(c, params.get("direction", WIN))


# name -> (callable(profile, params), accepted params, fixed params)
_REGISTRY: dict[str, tuple[Callable[[Profile, dict], ScoreVector], frozenset, dict]] = {
    "row_sum": (lambda p, kw: row_sum_scores(p), frozenset(), {}),
    "wei": (lambda p, kw: _eig_family("wei", p, kw), frozenset({"direction", "combine"}), {}),
    "hasse": (lambda p, kw: _eig_family("wei", p, kw), frozenset(), {"combine": DIFFERENCE}),
    "ramanujacharyulu": (lambda p, kw: _eig_family("wei", p, kw), frozenset(), {"combine": RATIO}),
    "ktt": (lambda p, kw: _eig_family("ktt", p, kw),
            frozenset({"epsilon", "variant", "direction", "combine"}), {}),
    "ktt_difference": (lambda p, kw: _eig_family("ktt", p, kw),
                       frozenset({"epsilon", "variant"}), {"combine": DIFFERENCE}),
    "ktt_ratio": (lambda p, kw: _eig_family("ktt", p, kw),
                  frozenset({"epsilon", "variant"}), {"combine": RATIO}),
    "fair_bets": (lambda p, kw: _eig_family("fair_bets", p, kw), frozenset({"direction", "combine"}), {}),
    "fair_bets_difference": (lambda p, kw: _eig_family("fair_bets", p, kw), frozenset(),
                             {"combine": DIFFERENCE}),
    "fair_bets_ratio": (lambda p, kw: _eig_family("fair_bets", p, kw), frozenset(), {"combine": RATIO}),
    "least_squares": (lambda p, kw: least_squares_scores(p), frozenset(), {}),
    "grs": (lambda p, kw: grs_scores(p, kw.get("epsilon")), frozenset({"epsilon"}), {}),
    "zermelo_bt": (lambda p, kw: implicit_scores(ZERMELO_BT, p), frozenset(), {}),
    "daniels": (lambda p, kw: implicit_scores(DANIELS, p), frozenset(), {}),
    "cowden": (lambda p, kw: implicit_scores(COWDEN, p), frozenset(), {}),
}

METHOD_NAMES = tuple(_REGISTRY)

# methods whose input domain is restricted to indivisible profiles
INDIVISIBLE_ONLY = frozenset(
    {"wei", "hasse", "ramanujacharyulu", "fair_bets", "fair_bets_difference",
     "fair_bets_ratio", "zermelo_bt", "daniels", "cowden"}
)


def canonical_name(name: str) -> str:
    key = str(name).strip().lower().replace("-", "_")
    aliases = {"rowsum": "row_sum", "row_sums": "row_sum", "bradley_terry": "zermelo_bt",
               "zermelo": "zermelo_bt", "ls": "least_squares", "fairbets": "fair_bets",
               "generalized_row_sum": "grs"}
    key = aliases.get(key, key)
    if key not in _REGISTRY:
        raise ScoringError("UNKNOWN_METHOD", f"unknown method {name!r}; choose from {', '.join(METHOD_NAMES)}")
    return key


@dataclass(frozen=True)
class Method:
    """A named procedure with its parameters; calling it scores a profile."""

    name: str
    params: tuple[tuple[str, Any], ...] = ()

    @classmethod
    def parse(cls, name: str, **params: Any) -> "Method":
        key = canonical_name(name)
        _, accepted, _ = _REGISTRY[key]
        clean = {}
        for k, v in params.items():
            if v is None:
                continue
            if k not in accepted:
                raise ScoringError("MALFORMED", f"method {key!r} does not take parameter {k!r}")
            if k in ("direction", "combine"):
                v = str(v).lower()
            if k == "variant":
                v = str(v).upper().replace("MATRIX_", "")
            if k == "epsilon" and not isinstance(v, str):
                v = float(v)
            clean[k] = v
        return cls(key, tuple(sorted(clean.items())))

    @property
    def kwargs(self) -> dict[str, Any]:
        return dict(self.params)

    def resolved_params(self, p: Profile) -> dict[str, Any]:
        kw = dict(_REGISTRY[self.name][2])
        kw.update(self.params)
        eps = kw.get("epsilon")
        if self.name == "grs" and isinstance(eps, str):
            if eps.lower() not in ("auto", "max", "bound"):
                raise ScoringError("MALFORMED", f"bad epsilon {eps!r}")
            kw["epsilon"] = grs_default_epsilon(p.n, p.m)
        return kw

    def __call__(self, p: Profile) -> ScoreVector:
        fn = _REGISTRY[self.name][0]
        return fn(p, self.resolved_params(p))

    def describe(self) -> dict[str, Any]:
        return {"method": self.name, "params": dict(self.params)}


def score_profile(method: str | Method, p: Profile, **params: Any) -> ScoreVector:
    m = method if isinstance(method, Method) else Method.parse(method, **params)
    return m(p)
