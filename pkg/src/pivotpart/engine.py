"""Exact range queries: class exclusion first, direct verification after.

A point is skipped iff at least one partition places it in a class that
is excludable for the query; every survivor is then checked by a direct
distance computation, so the result set always equals the brute-force
answer.  Query-to-pivot distances are computed once per distinct pivot
object and shared across all pairs and mechanisms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .metrics import check_point, distance_to_all
from .partitioning import Partition, QueryEval

__all__ = ["QuerySpec", "QueryOutcome", "brute_force", "range_query"]


@dataclass(frozen=True, eq=False)
class QuerySpec:
    """A query point and its range threshold (closed ball, d <= t)."""

    q: np.ndarray
    t: float

    def __post_init__(self):
        arr = np.array(self.q, dtype=np.float64, copy=True)
        arr.flags.writeable = False
        object.__setattr__(self, "q", arr)
        if not np.isfinite(self.t) or self.t < 0:
            raise ValueError("threshold t must be finite and nonnegative")


@dataclass(frozen=True)
class QueryOutcome:
    """Result ids plus the cost accounting of one range query.

    ``distance_calls`` counts evaluations against the dataset only (the
    pivot distances are excluded); ``excluded_count + distance_calls``
    always equals the dataset size.
    """

    results: frozenset
    distance_calls: int
    excluded_count: int


def _check_query(ds: Dataset, qs: QuerySpec) -> None:
    if qs.q.shape != (ds.dim,):
        raise ValueError(f"query dimension {qs.q.shape} does not match dataset dim {ds.dim}")
    check_point(ds.metric, qs.q, "query")


def brute_force(ds: Dataset, qs: QuerySpec) -> set:
    """Linear scan; the oracle every exclusion route must reproduce."""
    _check_query(ds, qs)
    d = distance_to_all(ds.metric, ds.coords, qs.q, validate=False)
    return {int(i) for i in np.flatnonzero(d <= qs.t)}


def range_query(ds: Dataset, partitions, qs: QuerySpec) -> QueryOutcome:
    """Evaluate a range query through a list of partitions.

    All partitions must be built over ``ds`` (same metric, same size).
    """
    _check_query(ds, qs)
    for pe in partitions:
        if pe.metric != ds.metric:
            raise ValueError(f"partition metric {pe.metric} != dataset metric {ds.metric}")
        if len(pe) != len(ds):
            raise ValueError("partition was built over a dataset of different size")

    pivot_dist: dict = {}

    def to_pivot(p: np.ndarray) -> float:
        key = id(p)
        if key not in pivot_dist:
            pivot_dist[key] = float(distance_to_all(ds.metric, p[None, :], qs.q, validate=False)[0])
        return pivot_dist[key]

    excluded = np.zeros(len(ds), dtype=bool)
    for pe in partitions:
        qe = QueryEval(to_pivot(pe.pair.p0), to_pivot(pe.pair.p1), qs.t)
        excluded |= pe.excluded_mask(qe)

    survivors = np.flatnonzero(~excluded)
    d = distance_to_all(ds.metric, ds.coords[survivors], qs.q, validate=False)
    results = frozenset(int(i) for i in survivors[d <= qs.t])
    return QueryOutcome(results, int(survivors.size), int(excluded.sum()))
