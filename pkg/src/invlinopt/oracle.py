"""Exact linear maximization over each feasible-set variant.

Every oracle returns a true maximizer with a deterministic, documented
tie-breaking rule, so repeated runs reproduce bitwise-identical traces:

* ExplicitVertices: linear scan, lexicographically smallest among exact ties.
* Hypercube: coordinate sign rule, x_i = 1 iff c_i > 0 (ties go to 0), which
  is also the lexicographically smallest maximizer.
* Knapsack: 0/1 dynamic program over the integer capacity grid; items with
  c_i <= 0 are never packed, and strict-improvement updates prefer leaving an
  item out on ties.
* DagPaths: longest-path relaxation in topological order with strict
  improvement, so the first-found predecessor wins ties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_ENUMERATION_CAP,
    DagPaths,
    DimensionMismatchError,
    ExplicitVertices,
    FeasibleSet,
    Hypercube,
    Knapsack,
    as_vector,
)


@dataclass(frozen=True, eq=False)
class OracleResult:
    """A maximizer, its objective value, and the exact-tie multiplicity.

    tie_count is reported when it is cheap to compute (scans and the
    hypercube rule); the dynamic-programming variants report 1.
    """

    maximizer: np.ndarray
    optimal_value: float
    tie_count: int


def _check_dimension(feasible_set: FeasibleSet, c: np.ndarray) -> None:
    if c.shape != (feasible_set.dimension,):
        raise DimensionMismatchError(
            f"objective has shape {c.shape}, set has dimension "
            f"{feasible_set.dimension}"
        )


def _scan(rows: np.ndarray, c: np.ndarray) -> OracleResult:
    """Exhaustive scan; exact-value ties resolve to the lexicographic minimum."""
    values = rows @ c
    best = float(values.max())
    tied = np.flatnonzero(values == best)
    if tied.size == 1:
        row = rows[tied[0]]
    else:
        # lexsort uses its last key as the primary one, so feed reversed columns
        order = np.lexsort(rows[tied].T[::-1])
        row = rows[tied[order[0]]]
    maximizer = as_vector(row)
    return OracleResult(maximizer, float(np.dot(maximizer, c)), int(tied.size))


def _hypercube_argmax(X: Hypercube, c: np.ndarray) -> OracleResult:
    x = (c > 0.0).astype(np.float64)
    ties = 2 ** int(np.count_nonzero(c == 0.0))
    maximizer = as_vector(x)
    return OracleResult(maximizer, float(np.dot(maximizer, c)), ties)


def _knapsack_argmax(X: Knapsack, c: np.ndarray) -> OracleResult:
    cap = X.capacity
    weights = X.weights
    keep = [
        i for i in range(X.dimension) if c[i] > 0.0 and int(weights[i]) <= cap
    ]
    dp = np.zeros(cap + 1)
    take = np.zeros((len(keep), cap + 1), dtype=bool)
    for j, i in enumerate(keep):
        wi = int(weights[i])
        # candidate values use the pre-update row, so each item enters once
        cand = dp[: cap + 1 - wi] + c[i]
        better = cand > dp[wi:]
        dp[wi:][better] = cand[better]
        take[j, wi:][better] = True
    sel = np.zeros(X.dimension)
    budget = cap
    for j in range(len(keep) - 1, -1, -1):
        if take[j, budget]:
            i = keep[j]
            sel[i] = 1.0
            budget -= int(weights[i])
    maximizer = as_vector(sel)
    return OracleResult(maximizer, float(np.dot(maximizer, c)), 1)


def _dag_argmax(X: DagPaths, c: np.ndarray) -> OracleResult:
    m = X.num_nodes
    sink = m - 1
    dist = [-np.inf] * m
    dist[0] = 0.0
    pred = [-1] * m
    for u in range(m - 1):
        if dist[u] == -np.inf:
            continue
        base = dist[u]
        for k, v in X.out_arcs(u):
            cand = base + c[k]
            if cand > dist[v]:
                dist[v] = cand
                pred[v] = k
    sel = np.zeros(X.dimension)
    node = sink
    while node != 0:
        k = pred[node]
        sel[k] = 1.0
        node = X.arcs[k][0]
    maximizer = as_vector(sel)
    return OracleResult(maximizer, float(np.dot(maximizer, c)), 1)


def argmax(feasible_set: FeasibleSet, c) -> OracleResult:
    """Exact maximizer of <c, x> over the feasible set.

    Dispatches to the variant-specific exact algorithm; see the module
    docstring for the deterministic tie rules.
    """
    c = np.asarray(c, dtype=np.float64)
    _check_dimension(feasible_set, c)
    if isinstance(feasible_set, ExplicitVertices):
        return _scan(feasible_set.vertices, c)
    if isinstance(feasible_set, Hypercube):
        return _hypercube_argmax(feasible_set, c)
    if isinstance(feasible_set, Knapsack):
        return _knapsack_argmax(feasible_set, c)
    if isinstance(feasible_set, DagPaths):
        return _dag_argmax(feasible_set, c)
    raise TypeError(f"unsupported feasible set type {type(feasible_set)!r}")


def argmax_bruteforce(
    feasible_set: FeasibleSet, c, cap: int = DEFAULT_ENUMERATION_CAP
) -> OracleResult:
    """Independent maximizer by exhaustive scan over the full enumeration.

    Ties resolve to the lexicographically smallest member.  Propagates the
    enumeration refusal when the set is too large for the cap.
    """
    c = np.asarray(c, dtype=np.float64)
    _check_dimension(feasible_set, c)
    return _scan(feasible_set.members(cap), c)
