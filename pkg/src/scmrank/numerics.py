"""Dense kernels: Perron eigenpairs, pivoted elimination, damped fixed points."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .errors import ScoringError

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000
PIVOT_FLOOR = 1e-12


@dataclass(frozen=True)
class SolveDiagnostics:
    iterations: int
    residual: float
    converged: bool

    def to_dict(self) -> dict:
        return {"iterations": self.iterations, "residual": self.residual, "converged": self.converged}


def power_iteration(
    M,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start=None,
) -> tuple[float, np.ndarray, SolveDiagnostics]:
    """Perron root and positive eigenvector (summing to 1) of an irreducible matrix.

    Iterates on ``M + sigma*I`` with ``sigma`` the largest row sum: the shift
    keeps the eigenvector, and makes periodic matrices (cycles, bipartite
    digraphs) primitive so the iteration converges.  Stops when
    ``|Mv - lambda v|_inf <= tol * lambda``.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = np.full(n, 1.0 / n) if start is None else np.asarray(start, dtype=float)
    v = v / v.sum()
    sigma = max(float(M.sum(axis=1).max()), 1.0)
    residual = np.inf
    lam = 0.0
    for it in range(max_iter + 1):
        Mv = M @ v
        lam = float(Mv.sum())
        residual = float(np.abs(Mv - lam * v).max())
        if lam > 0 and residual <= tol * lam:
            return lam, v, SolveDiagnostics(it, residual, True)
        if it == max_iter:
            break
        v = Mv + sigma * v
        v /= v.sum()
    diag = SolveDiagnostics(max_iter, residual, False)
    raise ScoringError("NO_CONVERGENCE", f"power iteration stalled at residual {residual:.3e}", diag=diag)


def _eliminate(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    A = np.array(M, dtype=float)
    x = np.array(b, dtype=float)
    n = A.shape[0]
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if abs(A[p, k]) < PIVOT_FLOOR:
            raise ScoringError("SINGULAR", f"pivot {A[p, k]:.3e} in column {k}")
        if p != k:
            A[[k, p]] = A[[p, k]]
            x[[k, p]] = x[[p, k]]
        f = A[k + 1 :, k] / A[k, k]
        A[k + 1 :, k:] -= np.outer(f, A[k, k:])
        x[k + 1 :] -= f * x[k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - A[k, k + 1 :] @ x[k + 1 :]) / A[k, k]
    return x


def solve_linear(M, b) -> np.ndarray:
    """Solve ``Mx = b`` by Gaussian elimination with partial pivoting.

    Raises ``SINGULAR`` when a pivot falls below 1e-12 or when the recomputed
    residual still misses ``1e-10 * (1 + |b|_inf)`` after one refinement step.
    """
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n) or b.shape != (n,):
        raise ValueError("shape mismatch")
    x = _eliminate(M, b)
    bound = 1e-10 * (1.0 + float(np.abs(b).max(initial=0.0)))
    if float(np.abs(M @ x - b).max(initial=0.0)) > bound:
        x = x + _eliminate(M, b - M @ x)
        if float(np.abs(M @ x - b).max(initial=0.0)) > bound:
            raise ScoringError("SINGULAR", "residual check failed; matrix is ill-conditioned")
    return x


def fixed_point(
    step: Callable[[np.ndarray], np.ndarray],
    init,
    damping: float = 1.0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    feasible: Callable[[np.ndarray], bool] | None = None,
    oscillation_window: int = 10,
) -> tuple[np.ndarray, SolveDiagnostics]:
    """Iterate ``x <- (1-d) x + d step(x)`` until ``|x - step(x)|_inf <= tol``.

    With ``damping == 1`` the iteration drops to ``d = 0.5`` once the residual
    has gone ``oscillation_window`` steps without falling 1% below its last
    reference value (growth, or a 2-cycle whose amplitude only jitters in the
    last bits).
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    x = np.array(init, dtype=float)
    d = damping
    residual = np.inf
    anchor = np.inf
    stalled = 0
    for it in range(max_iter):
        fx = np.asarray(step(x), dtype=float)
        if not np.all(np.isfinite(fx)) or (feasible is not None and not feasible(fx)):
            diag = SolveDiagnostics(it, residual, False)
            raise ScoringError("DOMAIN_EXIT", f"iterate left the feasible region at step {it}", diag=diag)
        new_residual = float(np.abs(fx - x).max(initial=0.0))
        if new_residual <= tol:
            return fx, SolveDiagnostics(it + 1, new_residual, True)
        residual = new_residual
        if residual < 0.99 * anchor:
            anchor, stalled = residual, 0
        else:
            stalled += 1
        if stalled >= oscillation_window and d == 1.0:
            d = 0.5
            stalled = 0
        x = (1.0 - d) * x + d * fx
    diag = SolveDiagnostics(max_iter, residual, False)
    raise ScoringError("NO_CONVERGENCE", f"fixed point not reached in {max_iter} steps", diag=diag)


def spectral_radius(M, tol: float = DEFAULT_TOL) -> float:
    """Spectral radius of a nonnegative matrix.

    Equals the largest Perron root over the strongly connected blocks; blocks
    that are a single vertex without a loop contribute zero.
    """
    M = np.asarray(M, dtype=float)
    best = 0.0
    for block in strong_components(M > 0):
        if len(block) == 1 and M[block[0], block[0]] == 0:
            continue
        sub = M[np.ix_(block, block)]
        lam, _, _ = power_iteration(sub, tol=tol)
        best = max(best, lam)
    return best


def strong_components(adj) -> list[list[int]]:
    """Strongly connected components of a boolean adjacency matrix (Tarjan)."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    succ = [list(np.flatnonzero(adj[u])) for u in range(n)]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            u, k = work.pop()
            if k == 0:
                index[u] = low[u] = counter
                counter += 1
                stack.append(u)
                on_stack[u] = True
            recurse = False
            while k < len(succ[u]):
                v = int(succ[u][k])
                k += 1
                if index[v] == -1:
                    work.append((u, k))
                    work.append((v, 0))
                    recurse = True
                    break
                if on_stack[v]:
                    low[u] = min(low[u], index[v])
            if recurse:
                continue
            if low[u] == index[u]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == u:
                        break
                out.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[u])
    return out
