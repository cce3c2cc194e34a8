"""Bipartite matching helpers used by the confrontation solver."""

from __future__ import annotations

from collections import deque
from collections.abc import Sequence

INF = float("inf")


def hopcroft_karp(adj: Sequence[Sequence[int]], n_right: int) -> tuple[list[int], list[int]]:
    """Maximum matching of a bipartite graph given as left adjacency lists.

    Returns ``(match_left, match_right)`` with ``-1`` marking free vertices.
    """
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    dist = [0.0] * n_left

    def bfs() -> bool:
        q = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        # iterative augmenting-path search along the BFS layering
        stack = [(u, iter(adj[u]))]
        path = []
        while stack:
            x, it = stack[-1]
            advanced = False
            for v in it:
                w = match_r[v]
                if w == -1:
                    path.append((x, v))
                    for a, b in path:
                        match_l[a] = b
                        match_r[b] = a
                    return True
                if dist[w] == dist[x] + 1:
                    path.append((x, v))
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[x] = INF
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in range(n_left):
            if match_l[u] == -1:
                dfs(u)
    return match_l, match_r


def alternating_cycle(
    adj: Sequence[Sequence[int]],
    match_l: Sequence[int],
    match_r: Sequence[int],
    u: int,
    v: int,
) -> list[tuple[int, int]] | None:
    """Edges of the perfect matching obtained by forcing the unmatched edge ``(u, v)``.

    Searches for an alternating path ``v -> match_r[v] -> ... -> u``; returns
    the new matching as ``(left, right)`` pairs, or None if ``(u, v)`` lies in no
    perfect matching.
    """
    if match_l[u] == v:
        return [(a, b) for a, b in enumerate(match_l)]
    start = match_r[v]
    if start == -1:
        return None
    # BFS over left vertices; from left x we may step along any non-matching
    # edge x -> y and then along y's matching edge to match_r[y].
    prev: dict[int, tuple[int, int]] = {start: (-1, -1)}
    q = deque([start])
    while q:
        x = q.popleft()
        if x == u:
            break
        for y in adj[x]:
            if match_l[x] == y:
                continue
            z = match_r[y]
            if z not in prev:
                prev[z] = (x, y)
                q.append(z)
    if u not in prev:
        return None
    new_l = list(match_l)
    # walk back from u to start re-pairing each x with the y it stepped to
    x = u
    new_l[u] = v
    while x != start:
        px, y = prev[x]
        new_l[px] = y
        x = px
    return [(a, b) for a, b in enumerate(new_l)]
