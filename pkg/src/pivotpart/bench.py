"""The experimental protocol: synthetic data, thresholds, and rate sweeps.

Uniform data on the unit hypercube is searched with per-query thresholds
calibrated to the k-NN distance (k=5 by default).  For a pivot set of
size m, every one of the m-choose-2 pairs contributes a partition, and
the reported figure is the mean proportion of the dataset excluded per
query at a cost of only m query-to-pivot distances.

Reproducibility: data, queries and pivots come from three disjoint
seeded streams derived from ``(seed, dim, role)``, so a report is
bitwise-identical across runs of the same config.  Pivots are the first
``n_pivots`` points of their stream (so pivot sets of growing size are
nested); queries never intersect the data.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .data import Dataset
from .engine import QuerySpec
from .metrics import EUCLIDEAN, MetricId, cross_distances, distance_to_all
from .partitioning import Mechanism, _classify_nearer, _classify_three, \
    _excl_hilbert, _excl_three, _single_view_excl, _single_view_labels

__all__ = [
    "TAU_GRID",
    "SWEEP_MECHANISMS",
    "ExperimentConfig",
    "ReportRow",
    "ExclusionReport",
    "generate_uniform",
    "calibrate_threshold",
    "calibrate_thresholds",
    "exclusion_power",
    "sweep_tau",
    "sweep_dimensions",
]

TAU_GRID = tuple(round(0.5 + 0.1 * i, 1) for i in range(11))
SWEEP_MECHANISMS = ("hyperplane", "ptolemaic", "hilbert", "combined")

_ROLE_DATA, _ROLE_QUERIES, _ROLE_PIVOTS = 0, 1, 2

CSV_HEADER = "dim,mechanism,tau,n_pivots,mean_exclusion_rate,mean_distance_calls,seed"


def _stream(seed: int, dim: int, role: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((int(seed) & 0xFFFFFFFFFFFFFFFF, int(dim), int(role)))


def generate_uniform(dim: int, n: int, seed) -> Dataset:
    """``n`` i.i.d. uniform points on [0,1]^dim; deterministic in the seed."""
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = np.random.default_rng(seed)
    return Dataset(rng.random((n, dim)), EUCLIDEAN)


def calibrate_threshold(ds: Dataset, q, k: int) -> float:
    """Distance from ``q`` to its k-th nearest neighbour in ``ds``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(ds) < k:
        raise ValueError(f"dataset of {len(ds)} points has no {k}-th neighbour")
    d = distance_to_all(ds.metric, ds.coords, q)
    return float(np.partition(d, k - 1)[k - 1])


def calibrate_thresholds(ds: Dataset, queries: np.ndarray, k: int) -> np.ndarray:
    """Per-query k-NN thresholds for a (nq, dim) query block."""
    if k < 1 or len(ds) < k:
        raise ValueError(f"dataset of {len(ds)} points has no {k}-th neighbour")
    out = np.empty(len(queries), dtype=np.float64)
    for i, q in enumerate(queries):
        d = distance_to_all(ds.metric, ds.coords, q, validate=False)
        out[i] = np.partition(d, k - 1)[k - 1]
    return out


class PairBattery:
    """Shared distance tables for one (dataset, queries, pivots) triple.

    Holds the data-to-pivot, query-to-pivot and pivot-to-pivot distances
    so that every mechanism and every tau reuses them; one query costs
    ``m`` distance evaluations no matter how many pairs are applied.
    """

    def __init__(self, ds: Dataset, query_coords: np.ndarray,
                 thresholds: np.ndarray, pivot_coords: np.ndarray):
        query_coords = np.asarray(query_coords, dtype=np.float64)
        pivot_coords = np.asarray(pivot_coords, dtype=np.float64)
        thresholds = np.asarray(thresholds, dtype=np.float64)
        if query_coords.ndim != 2 or query_coords.shape[1] != ds.dim:
            raise ValueError("query block must have shape (nq, dim)")
        if pivot_coords.ndim != 2 or pivot_coords.shape[1] != ds.dim:
            raise ValueError("pivot block must have shape (m, dim)")
        if thresholds.shape != (len(query_coords),):
            raise ValueError("one threshold per query required")
        if np.any(thresholds < 0):
            raise ValueError("thresholds must be nonnegative")
        self.ds = ds
        self.n_pivots = len(pivot_coords)
        self.ddata = cross_distances(ds.metric, pivot_coords, ds.coords).T  # (n, m)
        self.dq = cross_distances(ds.metric, query_coords, pivot_coords)    # (nq, m)
        self.dpp = cross_distances(ds.metric, pivot_coords, pivot_coords)   # (m, m)
        self.t = thresholds

    @staticmethod
    def _scatter(view: np.ndarray, excl: np.ndarray, labels: np.ndarray) -> None:
        # Mark view[q, s] for queries excluding class c and points labelled c.
        # Writing per class touches only the excluded cells, which beats a
        # full (nq, n) gather when exclusion is partial.
        for c in range(excl.shape[1]):
            qrows = excl[:, c]
            if qrows.any():
                cols = labels == c
                if cols.any():
                    view[np.ix_(qrows, cols)] = True

    def _accumulate(self, excluded: np.ndarray, rows: slice, pairs, mech: Mechanism) -> None:
        a_all = self.dq[rows]
        t = self.t[rows]
        view = excluded[rows]
        for i, j in pairs:
            k = float(self.dpp[i, j])
            if k <= 0.0:
                raise ValueError(f"duplicate pivots at indices ({i}, {j})")
            dp0, dp1 = self.ddata[:, i], self.ddata[:, j]
            a, b = a_all[:, i], a_all[:, j]
            if mech.kind == "combined":
                e3 = _excl_three(k, mech.tau, a, b, t)
                e2 = _excl_hilbert(k, a, b, t)
                if e3.any():
                    self._scatter(view, e3, _classify_three(dp0, dp1, k, mech.tau))
                if e2.any():
                    self._scatter(view, e2, _classify_nearer(dp0, dp1))
            else:
                e = _single_view_excl(mech, k, a, b, t)
                if e.any():
                    self._scatter(view, e, _single_view_labels(mech, dp0, dp1, k))

    def pair_indices(self, n_pivots: Optional[int] = None) -> list:
        """The pivot index pairs a run applies: all m-choose-2 combinations."""
        m = self.n_pivots if n_pivots is None else int(n_pivots)
        if not 2 <= m <= self.n_pivots:
            raise ValueError(f"n_pivots must be in [2, {self.n_pivots}], got {m}")
        return list(itertools.combinations(range(m), 2))

    def excluded_counts(self, mech: Mechanism, n_pivots: Optional[int] = None,
                        workers: int = 1) -> np.ndarray:
        """Per-query counts of points excluded by the union over all pairs."""
        pairs = self.pair_indices(n_pivots)
        nq, n = self.dq.shape[0], self.ddata.shape[0]
        excluded = np.zeros((nq, n), dtype=bool)
        if workers <= 1 or nq < 2 * workers:
            self._accumulate(excluded, slice(0, nq), pairs, mech)
        else:
            bounds = np.linspace(0, nq, workers + 1).astype(int)
            chunks = [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(lambda rows: self._accumulate(excluded, rows, pairs, mech), chunks))
        return excluded.sum(axis=1, dtype=np.int64)


def _resolve_pivots(ds: Dataset, pivots) -> np.ndarray:
    if isinstance(pivots, Dataset):
        return pivots.coords
    arr = np.asarray(pivots)
    if arr.ndim == 1 and np.issubdtype(arr.dtype, np.integer):
        return ds.coords[arr]
    return np.asarray(arr, dtype=np.float64)


def exclusion_power(ds: Dataset, queries: Sequence[QuerySpec], pivots,
                    kind: Mechanism, workers: int = 1) -> float:
    """Mean proportion of the dataset excluded per query.

    Builds all m-choose-2 pair partitions from ``pivots`` (an (m, dim)
    coordinate block, a Dataset, or indices into ``ds``) and unions their
    exclusions; each query carries its own threshold.
    """
    if len(ds) == 0:
        raise ValueError("exclusion power over an empty dataset is undefined")
    if not queries:
        raise ValueError("at least one query is required")
    qc = np.stack([qs.q for qs in queries])
    t = np.array([qs.t for qs in queries], dtype=np.float64)
    battery = PairBattery(ds, qc, t, _resolve_pivots(ds, pivots))
    counts = battery.excluded_counts(kind, workers=workers)
    return float(counts.sum() / (len(queries) * len(ds)))


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs of a sweep; defaults are desk scale (10k points, 200 queries)."""

    dims: Sequence[int]
    n_data: int = 10000
    n_queries: int = 200
    n_pivots: int = 10
    tau_values: Sequence[float] = TAU_GRID
    mechanisms: Sequence[str] = SWEEP_MECHANISMS
    seed: int = 0
    knn_k: int = 5
    pivot_counts: Sequence[int] = ()
    metric: str = "euclidean"
    in_dataset_pivots: bool = False
    global_mean_threshold: bool = False

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "tau_values", tuple(float(v) for v in self.tau_values))
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))
        object.__setattr__(self, "pivot_counts", tuple(int(c) for c in self.pivot_counts))
        if not self.dims or min(self.dims) < 1:
            raise ValueError("dims must be a nonempty list of positive integers")
        if self.n_pivots < 2:
            raise ValueError("n_pivots must be at least 2")
        if self.n_queries < 1:
            raise ValueError("n_queries must be at least 1")
        if self.knn_k < 1:
            raise ValueError("knn_k must be at least 1")
        if self.n_data < self.knn_k:
            raise ValueError("n_data must be at least knn_k")
        if any(v < 0.5 for v in self.tau_values):
            raise ValueError("tau values below 0.5 are never useful")
        if any(c < 2 for c in self.pivot_counts):
            raise ValueError("pivot counts must be at least 2")
        MetricId.parse(self.metric)

    @property
    def metric_id(self) -> MetricId:
        return MetricId.parse(self.metric)

    @property
    def all_pivot_counts(self) -> tuple:
        return self.pivot_counts or (self.n_pivots,)


def _as_domain(coords: np.ndarray, metric: MetricId) -> np.ndarray:
    """Map raw uniform coordinates into the metric's domain."""
    if metric.needs_distribution:
        return coords / coords.sum(axis=1, keepdims=True)
    return coords


def make_workspace(cfg: ExperimentConfig, dim: int, max_pivots: Optional[int] = None) -> PairBattery:
    """Data, queries, thresholds and pivots for one dimension of a sweep."""
    metric = cfg.metric_id
    max_pivots = max_pivots if max_pivots is not None else max(
        cfg.all_pivot_counts + (cfg.n_pivots,))
    data = _as_domain(np.random.default_rng(
        _stream(cfg.seed, dim, _ROLE_DATA)).random((cfg.n_data, dim)), metric)
    queries = _as_domain(np.random.default_rng(
        _stream(cfg.seed, dim, _ROLE_QUERIES)).random((cfg.n_queries, dim)), metric)
    rng_p = np.random.default_rng(_stream(cfg.seed, dim, _ROLE_PIVOTS))
    if cfg.in_dataset_pivots:
        idx = rng_p.choice(cfg.n_data, size=max_pivots, replace=False)
        pivots = data[idx]
    else:
        pivots = _as_domain(rng_p.random((max_pivots, dim)), metric)
    ds = Dataset(data, metric)
    thresholds = calibrate_thresholds(ds, queries, cfg.knn_k)
    if cfg.global_mean_threshold:
        thresholds = np.full_like(thresholds, thresholds.mean())
    return PairBattery(ds, queries, thresholds, pivots)


@dataclass(frozen=True, eq=False)
class ReportRow:
    """One sweep cell; per-query excluded counts are kept for exact means."""

    dim: int
    mechanism: str
    tau: Optional[float]
    n_pivots: int
    excluded_counts: np.ndarray
    n_data: int
    seed: int

    @property
    def mean_exclusion_rate(self) -> float:
        return float(int(self.excluded_counts.sum()) / (len(self.excluded_counts) * self.n_data))

    @property
    def mean_distance_calls(self) -> float:
        return self.n_data - float(int(self.excluded_counts.sum()) / len(self.excluded_counts))

    def sort_key(self):
        return (self.dim, self.mechanism, -1.0 if self.tau is None else self.tau, self.n_pivots)


@dataclass
class ExclusionReport:
    rows: list

    def __post_init__(self):
        self.rows = sorted(self.rows, key=ReportRow.sort_key)

    def best_tau(self) -> dict:
        """Per dimension, the tau with the highest ptolemaic rate (ties: smallest tau)."""
        best: dict = {}
        for row in self.rows:
            if row.mechanism != "ptolemaic" or row.tau is None:
                continue
            cur = best.get(row.dim)
            if cur is None or row.mean_exclusion_rate > cur[1]:
                best[row.dim] = (row.tau, row.mean_exclusion_rate)
        return {dim: tau for dim, (tau, _) in best.items()}

    def to_csv_text(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            tau = "" if r.tau is None else format(r.tau, "g")
            lines.append(
                f"{r.dim},{r.mechanism},{tau},{r.n_pivots},"
                f"{r.mean_exclusion_rate:.6f},{r.mean_distance_calls:.6f},{r.seed}")
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv_text())


def _sweep_mechanism(name: str, tau: float) -> Mechanism:
    if name not in SWEEP_MECHANISMS:
        raise ValueError(f"sweeps support {', '.join(SWEEP_MECHANISMS)}; got {name!r}")
    return Mechanism.parse(name, tau=tau)


def sweep_tau(cfg: ExperimentConfig, workers: int = 1) -> ExclusionReport:
    """Ptolemaic exclusion rate per (dim, tau) over the config's tau grid."""
    rows = []
    for dim in cfg.dims:
        battery = make_workspace(cfg, dim, cfg.n_pivots)
        for tau in cfg.tau_values:
            counts = battery.excluded_counts(Mechanism.ptolemaic(tau), cfg.n_pivots, workers)
            rows.append(ReportRow(dim, "ptolemaic", tau, cfg.n_pivots, counts,
                                  cfg.n_data, cfg.seed))
    return ExclusionReport(rows)


def sweep_dimensions(cfg: ExperimentConfig,
                     tau: Union[float, Mapping[int, float]] = 1.0,
                     workers: int = 1) -> ExclusionReport:
    """Exclusion rate per (dim, mechanism, pivot count).

    ``tau`` is the fixed parameter for ptolemaic/combined, either one
    value or a per-dimension mapping (e.g. from ``sweep_tau().best_tau()``).
    """
    rows = []
    for dim in cfg.dims:
        dim_tau = float(tau[dim]) if isinstance(tau, Mapping) else float(tau)
        battery = make_workspace(cfg, dim)
        for name in cfg.mechanisms:
            mech = _sweep_mechanism(name, dim_tau)
            for n_piv in cfg.all_pivot_counts:
                counts = battery.excluded_counts(mech, n_piv, workers)
                rows.append(ReportRow(dim, mech.kind, mech.tau, n_piv, counts,
                                      cfg.n_data, cfg.seed))
    return ExclusionReport(rows)
