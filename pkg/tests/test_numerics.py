import math

import numpy as np
import pytest

from scmrank.errors import ScoringError
from scmrank.numerics import fixed_point, power_iteration, solve_linear, spectral_radius, strong_components

from oracles import perron_numpy


@pytest.mark.parametrize(
    "M, lam, v",
    [
        ([[0, 1], [1, 0]], 1.0, [0.5, 0.5]),
        ([[1, 1], [1, 1]], 2.0, [0.5, 0.5]),
        ([[0, 2], [1, 0]], math.sqrt(2), [math.sqrt(2) / (1 + math.sqrt(2)), 1 / (1 + math.sqrt(2))]),
    ],
)
def test_power_iteration_examples(M, lam, v):
    got_lam, got_v, diag = power_iteration(M)
    assert got_lam == pytest.approx(lam, abs=1e-10)
    np.testing.assert_allclose(got_v, v, atol=1e-10)
    assert diag.converged and diag.residual <= 1e-12 * got_lam


def test_power_iteration_periodic_cycle():
    M = np.roll(np.eye(5), 1, axis=1)
    lam, v, _ = power_iteration(M)
    assert lam == pytest.approx(1.0)
    np.testing.assert_allclose(v, np.full(5, 0.2), atol=1e-10)


def test_power_iteration_start_independence():
    rng = np.random.default_rng(3)
    tol = 1e-12
    for _ in range(20):
        n = int(rng.integers(2, 7))
        M = rng.integers(0, 3, (n, n)).astype(float)
        np.fill_diagonal(M, 0)
        M += np.roll(np.eye(n), 1, axis=1)  # keep it irreducible
        lam_ref, v_ref = perron_numpy(M)
        results = [power_iteration(M, tol=tol, start=rng.random(n) + 0.01) for _ in range(3)]
        for lam, v, _ in results:
            assert lam == pytest.approx(lam_ref, rel=1e-9)
            np.testing.assert_allclose(v, v_ref, atol=1e-8)
        for _, v, _ in results[1:]:
            assert np.abs(v - results[0][1]).max() <= 10 * tol


def test_power_iteration_budget_exhausted():
    with pytest.raises(ScoringError) as exc:
        power_iteration([[0, 2], [1, 0]], max_iter=0, start=[0.9, 0.1])
    assert exc.value.code == "NO_CONVERGENCE"
    assert exc.value.detail["diag"].iterations == 0


def test_solve_linear_examples():
    b = np.array([1.5, -2.0, 7.0])
    np.testing.assert_array_equal(solve_linear(np.eye(3), b), b)
    np.testing.assert_allclose(solve_linear([[2, 1], [1, 2]], [3, 3]), [1, 1])
    with pytest.raises(ScoringError) as exc:
        solve_linear([[1, 1], [1, 1]], [1, 1])
    assert exc.value.code == "SINGULAR"


def test_solve_linear_matches_numpy():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 8))
        M = rng.normal(size=(n, n)) + n * np.eye(n)
        b = rng.normal(size=n)
        np.testing.assert_allclose(solve_linear(M, b), np.linalg.solve(M, b), atol=1e-10)


def test_fixed_point_zero_budget():
    with pytest.raises(ScoringError) as exc:
        fixed_point(lambda x: x / 2, [1.0], max_iter=0)
    assert exc.value.code == "NO_CONVERGENCE"
    assert exc.value.detail["diag"].iterations == 0


def test_fixed_point_damps_a_two_cycle():
    # x -> 1 - x swaps 0.2 and 0.8 forever without damping
    x, diag = fixed_point(lambda x: 1.0 - x, [0.2], tol=1e-12)
    assert x[0] == pytest.approx(0.5) and diag.converged


def test_fixed_point_domain_exit():
    with pytest.raises(ScoringError) as exc:
        fixed_point(lambda x: x - 1.0, [0.5], feasible=lambda x: bool(np.all(x > 0)))
    assert exc.value.code == "DOMAIN_EXIT"


def test_zermelo_step_examples():
    def bt(wins):
        a = np.array(wins, dtype=float)
        nn = a + a.T

        def step(s):
            out = a.sum(axis=1) / (nn / (s[:, None] + s[None, :])).sum(axis=1)
            return out / out.sum()
        return step

    x, _ = fixed_point(bt([[0, 1], [1, 0]]), [0.5, 0.5])
    np.testing.assert_allclose(x, [0.5, 0.5])
    x, _ = fixed_point(bt([[0, 2], [1, 0]]), [0.5, 0.5])
    assert x[0] / x[1] == pytest.approx(2.0, abs=1e-10)


def test_spectral_radius():
    assert spectral_radius([[0, 1], [0, 0]]) == 0.0
    assert spectral_radius([[0, 2], [1, 0]]) == pytest.approx(math.sqrt(2))
    # two blocks: the larger root wins
    M = np.zeros((4, 4))
    M[0, 1] = M[1, 0] = 1
    M[2, 3] = M[3, 2] = 3
    M[1, 2] = 5
    assert spectral_radius(M) == pytest.approx(3.0)


def test_strong_components():
    adj = np.zeros((5, 5), bool)
    for u, v in [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]:
        adj[u, v] = True
    comps = sorted(sorted(c) for c in strong_components(adj))
    assert comps == [[0, 1, 2], [3], [4]]
