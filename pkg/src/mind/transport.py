"""Exact solver for the balanced transportation problem.

Transportation simplex (MODI / u-v method): a least-cost initial basis,
then pivots on the most negative reduced cost. After a run of degenerate
pivots the entering and leaving rules fall back to smallest-index choice,
which rules out cycling.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np


class TransportError(RuntimeError):
    pass


@dataclass(frozen=True)
class TransportPlan:
    """Non-zero flows ``(source, target, mass)`` of a transport solution."""

    flows: tuple[tuple[int, int, float], ...]
    shape: tuple[int, int]

    def matrix(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for i, j, mass in self.flows:
            out[i, j] += mass
        return out

    @property
    def total_mass(self) -> float:
        return math.fsum(m for _, _, m in self.flows)


def _initial_basis(supply, demand, costs):
    m, n = costs.shape
    s = supply.copy()
    d = demand.copy()
    flow = np.zeros((m, n))
    basis = []
    row_on = np.ones(m, dtype=bool)
    col_on = np.ones(n, dtype=bool)
    order = np.argsort(costs, axis=None, kind="stable")
    rows_left, cols_left = m, n
    for _ in range(m + n - 1):
        # cheapest cell with both lines still active
        for flat in order:
            i, j = divmod(int(flat), n)
            if row_on[i] and col_on[j]:
                break
        x = min(s[i], d[j])
        flow[i, j] = x
        s[i] -= x
        d[j] -= x
        basis.append((i, j))
        # cross out exactly one line per allocation to keep m+n-1 basic cells
        if (s[i] <= d[j] and rows_left > 1) or cols_left == 1:
            row_on[i] = False
            rows_left -= 1
        else:
            col_on[j] = False
            cols_left -= 1
    return flow, basis


def _potentials(basis, costs):
    m, n = costs.shape
    adj = [[] for _ in range(m + n)]
    for i, j in basis:
        adj[i].append(m + j)
        adj[m + j].append(i)
    pot = np.full(m + n, np.nan)
    pot[0] = 0.0
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for other in adj[node]:
            if np.isnan(pot[other]):
                if node < m:
                    pot[other] = costs[node, other - m] - pot[node]
                else:
                    pot[other] = costs[other, node - m] - pot[node]
                queue.append(other)
    if np.isnan(pot).any():
        raise TransportError("basis is not a spanning tree")
    return pot[:m], pot[m:], adj


def _tree_path(adj, start, goal):
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for other in adj[node]:
            if other not in parent:
                parent[other] = node
                queue.append(other)
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    return path[::-1]


def solve_transport(supplies, demands, costs, max_iter: int | None = None):
    """Minimum-cost transport of ``supplies`` onto ``demands``.

    Parameters
    ----------
    supplies, demands : array_like
        Non-negative masses with equal totals.
    costs : array_like, shape (len(supplies), len(demands))
        Finite, non-negative unit costs.
    max_iter : int, optional
        Pivot limit; defaults to ``50 * (m + n) ** 2``.

    Returns
    -------
    cost : float
    plan : TransportPlan
    """
    a = np.asarray(supplies, dtype=np.float64).ravel()
    b = np.asarray(demands, dtype=np.float64).ravel()
    c = np.asarray(costs, dtype=np.float64)
    m, n = a.size, b.size
    if m == 0 or n == 0:
        raise ValueError("empty supply or demand")
    if c.shape != (m, n):
        raise ValueError(f"cost matrix shape {c.shape} != ({m}, {n})")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("negative mass")
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise ValueError("costs must be finite and non-negative")
    total_a, total_b = math.fsum(a), math.fsum(b)
    if abs(total_a - total_b) > 1e-9 * max(1.0, total_a, total_b):
        raise ValueError(f"unbalanced masses: supply {total_a!r} vs demand {total_b!r}")

    if max_iter is None:
        max_iter = 50 * (m + n) ** 2
    flow, basis = _initial_basis(a, b, c)
    in_basis = np.zeros((m, n), dtype=bool)
    for cell in basis:
        in_basis[cell] = True
    tol = 1e-12 * max(1.0, float(c.max()))
    degenerate_run = 0
    bland = False

    for iteration in range(max_iter + 1):
        u, v, adj = _potentials(basis, c)
        reduced = c - u[:, None] - v[None, :]
        reduced[in_basis] = 0.0
        candidates = reduced < -tol
        if not candidates.any():
            break
        if iteration == max_iter:
            raise TransportError(
                f"no convergence after {max_iter} pivots; "
                f"most negative reduced cost {float(reduced.min())!r}"
            )
        if bland:
            flat = int(np.flatnonzero(candidates)[0])
        else:
            flat = int(np.argmin(reduced))
        ei, ej = divmod(flat, n)

        # cycle: entering cell (+), then tree edges alternating -, +, ...
        path = _tree_path(adj, ei, m + ej)
        cells = []
        for p, q in zip(path[:-1], path[1:]):
            cells.append((p, q - m) if p < m else (q, p - m))
        minus = cells[0::2]
        plus = cells[1::2]
        theta = min(flow[cell] for cell in minus)
        ties = [cell for cell in minus if flow[cell] == theta]
        leave = min(ties) if bland else ties[0]

        flow[ei, ej] += theta
        for cell in plus:
            flow[cell] += theta
        for cell in minus:
            flow[cell] -= theta
        flow[leave] = 0.0

        basis[basis.index(leave)] = (ei, ej)
        in_basis[leave] = False
        in_basis[ei, ej] = True

        if theta == 0.0:
            degenerate_run += 1
            bland = bland or degenerate_run > m + n
        else:
            degenerate_run = 0
            bland = False

    np.maximum(flow, 0.0, out=flow)
    nz = np.argwhere(flow > 0)
    flows = tuple((int(i), int(j), float(flow[i, j])) for i, j in nz)
    cost = math.fsum(mass * c[i, j] for i, j, mass in flows)
    return cost, TransportPlan(flows, (m, n))
