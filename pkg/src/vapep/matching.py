"""Minimum-cost assignment of slots to users (rectangular Hungarian method).

Rows are slots, columns are users; every slot must be matched to a distinct
column, so the number of rows may not exceed the number of columns.
"""
from __future__ import annotations

from typing import Sequence

INF = 1 << 62


def _check(costs: Sequence[Sequence[int]]) -> tuple[int, int]:
    m = len(costs)
    n = len(costs[0]) if m else 0
    for row in costs:
        if len(row) != n:
            raise ValueError("cost matrix rows must have equal length")
        for v in row:
            if v < 0:
                raise ValueError("costs must be non-negative")
    if m > n:
        raise ValueError(f"infeasible: {m} slots but only {n} users")
    return m, n


def assignment_cost(costs: Sequence[Sequence[int]]) -> int:
    """Optimal total cost only; cheaper than recovering an assignment."""
    m, n = _check(costs)
    if m == 0:
        return 0
    return _hungarian(costs, m, n)[0]


def _hungarian(costs, m: int, n: int) -> tuple[int, list[int]]:
    # Potentials method on the (m+1) x (n+1) padded problem; p[j] is the row
    # matched to column j, 1-based with 0 as the virtual root.
    u = [0] * (m + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, m + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = -1
            row = costs[i0 - 1]
            u_i0 = u[i0]
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - u_i0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    match = [-1] * m
    total = 0
    for j in range(1, n + 1):
        if p[j]:
            match[p[j] - 1] = j - 1
            total += costs[p[j] - 1][j - 1]
    return total, match


def min_cost_assignment(costs: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], int]:
    """Optimal assignment (column index per row) with a deterministic tie-break:
    among equal-cost assignments, the lexicographically smallest column
    sequence (row 0 first) wins.
    """
    m, n = _check(costs)
    if m == 0:
        return (), 0
    best = _hungarian(costs, m, n)[0]
    chosen: list[int] = []
    used: list[bool] = [False] * n
    remaining = best
    for i in range(m):
        rest_rows = [
            [costs[r][j] for j in range(n) if not used[j]] for r in range(i + 1, m)
        ]
        free_cols = [j for j in range(n) if not used[j]]
        for pos, j in enumerate(free_cols):
            need = remaining - costs[i][j]
            if need < 0:
                continue
            if rest_rows:
                sub = [row[:pos] + row[pos + 1 :] for row in rest_rows]
                ok = assignment_cost(sub) == need
            else:
                ok = need == 0
            if ok:
                chosen.append(j)
                used[j] = True
                remaining = need
                break
        else:  # pragma: no cover - best is always attainable
            raise RuntimeError("internal: optimal assignment not reconstructible")
    return tuple(chosen), best
