"""Randomised verification suites.

Four suites back the library's safety claims on freshly sampled inputs:

* ``safety``: no point of an excludable class ever lies within the query
  threshold, for every mechanism (the exclusion-correctness theorem);
* ``hilbert_dominance``: whenever hyperplane exclusion fires for a class,
  so does the squared-difference (hilbert) form;
* ``tau_half``: the three-class mechanism at tau=0.5 excludes exactly the
  hyperplane exclusion set, up to boundary ties;
* ``oracle``: the exclusion engine returns exactly the brute-force result
  set, with cost accounting and mechanism-ordering invariants intact;
* ``bounds``: the planar lower bounds never exceed the true distance and
  the four-point bound dominates the Ptolemaic one.

Each suite is deterministic in its seed and returns a result object; the
CLI ``verify`` command and the acceptance tests both run them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import QuadDistances, fourpoint_lower_bound, ptolemaic_lower_bound
from .data import Dataset
from .engine import QuerySpec, brute_force, range_query
from .metrics import MetricId, cross_distances, distance, distance_to_all
from .partitioning import Mechanism, PivotPair, QueryEval, build_partition, median_radius

__all__ = ["SuiteResult", "safety_suite", "tau_half_suite", "oracle_suite",
           "bounds_suite", "run_all"]

DEFAULT_SAFETY_METRICS = ("euclidean", "sqrt:euclidean")
DEFAULT_SAFETY_DIMS = (2, 5, 10, 20)
DEFAULT_ORACLE_METRICS = ("euclidean", "cosine", "js", "tri", "sqrt:euclidean", "sqrt:js")

# Comparisons this close to a class or exclusion boundary are treated as
# ties when checking the tau=0.5 reduction (strict-vs-nonstrict edges).
TIE_EPS = 1e-12


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    violations: int
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"{status} {self.name:18s} cases={self.cases} violations={self.violations}{extra}"


def _seed_u(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((_seed_u(seed),) + key))


def _domain_points(rng: np.random.Generator, n: int, dim: int, metric: MetricId) -> np.ndarray:
    pts = rng.random((n, dim))
    if metric.needs_distribution:
        pts /= pts.sum(axis=1, keepdims=True)
    return pts


def _sample_pair(rng: np.random.Generator, metric: MetricId, X: np.ndarray):
    """A pivot pair, drawn from the dataset half the time."""
    if rng.random() < 0.5 and len(X) >= 2:
        i0, i1 = rng.choice(len(X), size=2, replace=False)
        p0, p1 = X[i0], X[i1]
    else:
        p0, p1 = _domain_points(rng, 2, X.shape[1], metric)
    k = distance(metric, p0, p1)
    if k <= 0.0:
        return None
    return p0, p1, k


def _case_mechanisms(tau: float, ds: Dataset, p0: np.ndarray) -> list:
    r = median_radius(ds, p0)
    return [Mechanism.hyperplane(), Mechanism.hilbert(), Mechanism.ptolemaic(tau),
            Mechanism.combined(tau), Mechanism.ball_in(r), Mechanism.ball_out(r)]


def safety_suite(cases: int, seed: int, metrics=DEFAULT_SAFETY_METRICS,
                 dims=DEFAULT_SAFETY_DIMS, n_points: int = 64):
    """Exclusion safety and hilbert-over-hyperplane dominance, jointly.

    A case is one (dataset, query, pivot pair, tau) tuple; all six
    mechanisms are checked per case.  Returns (safety, dominance) results.
    """
    combos = [(MetricId.parse(m), d) for m in metrics for d in dims]
    n_q, n_pairs, n_taus = 8, 4, 2
    done = violations = dom_violations = 0
    group = 0
    while done < cases:
        metric, dim = combos[group % len(combos)]
        rng = _rng(seed, 1, group)
        X = _domain_points(rng, n_points, dim, metric)
        ds = Dataset(X, metric)
        Q = _domain_points(rng, n_q, dim, metric)
        Q[0] = X[rng.integers(n_points)]  # reflexive query: its point must survive
        dqs = cross_distances(metric, Q, X)
        ranks = rng.integers(1, 9, size=n_q)
        t = np.array([np.partition(dqs[i], ranks[i] - 1)[ranks[i] - 1] for i in range(n_q)])
        t *= rng.uniform(0.6, 1.1, size=n_q)
        within = dqs <= t[:, None]
        for _ in range(n_pairs):
            sampled = _sample_pair(rng, metric, X)
            if sampled is None:
                continue
            p0, p1, k = sampled
            pair = PivotPair(metric, p0, p1, k)
            dp0 = distance_to_all(metric, X, p0, validate=False)
            dp1 = distance_to_all(metric, X, p1, validate=False)
            qa = cross_distances(metric, Q, np.stack([p0, p1]))
            for tau in rng.uniform(0.5, 2.0, size=n_taus):
                parts = [build_partition(ds, pair, m, dp0=dp0, dp1=dp1)
                         for m in _case_mechanisms(float(tau), ds, p0)]
                for qi in range(n_q):
                    qe = QueryEval(float(qa[qi, 0]), float(qa[qi, 1]), float(t[qi]))
                    hyp_mask = hil_mask = None
                    for pe in parts:
                        mask = pe.excluded_mask(qe)
                        violations += int(np.count_nonzero(mask & within[qi]))
                        if pe.kind.kind == "hyperplane":
                            hyp_mask = mask
                        elif pe.kind.kind == "hilbert":
                            hil_mask = mask
                    dom_violations += int(np.count_nonzero(hyp_mask & ~hil_mask))
                    done += 1
        group += 1
    return (SuiteResult("safety", done, violations),
            SuiteResult("hilbert_dominance", done, dom_violations))


def tau_half_suite(cases: int, seed: int, metrics=DEFAULT_SAFETY_METRICS,
                   dims=DEFAULT_SAFETY_DIMS, n_points: int = 64) -> SuiteResult:
    """tau=0.5 three-class exclusion equals hyperplane exclusion per query.

    Differences are only tolerated for boundary ties (a point exactly
    equidistant from the pivots, or a query exactly on the 2t margin).
    """
    combos = [(MetricId.parse(m), d) for m in metrics for d in dims]
    done = violations = 0
    group = 0
    while done < cases:
        metric, dim = combos[group % len(combos)]
        rng = _rng(seed, 2, group)
        X = _domain_points(rng, n_points, dim, metric)
        ds = Dataset(X, metric)
        Q = _domain_points(rng, 8, dim, metric)
        dqs = cross_distances(metric, Q, X)
        t = np.partition(dqs, 4, axis=1)[:, 4] * rng.uniform(0.6, 1.1, size=8)
        for _ in range(4):
            sampled = _sample_pair(rng, metric, X)
            if sampled is None:
                continue
            p0, p1, k = sampled
            pair = PivotPair(metric, p0, p1, k)
            half = build_partition(ds, pair, Mechanism.ptolemaic(0.5))
            hyper = build_partition(ds, pair, Mechanism.hyperplane())
            qa = cross_distances(metric, Q, np.stack([p0, p1]))
            scale = max(1.0, k)
            point_tie = np.abs(half.dp0 - half.dp1) <= TIE_EPS * scale
            for qi in range(len(Q)):
                qe = QueryEval(float(qa[qi, 0]), float(qa[qi, 1]), float(t[qi]))
                diff = half.excluded_mask(qe) ^ hyper.excluded_mask(qe)
                if diff.any():
                    margin_tie = (abs((qe.a - qe.b) - 2 * qe.t) <= TIE_EPS * scale
                                  or abs((qe.b - qe.a) - 2 * qe.t) <= TIE_EPS * scale)
                    if not margin_tie:
                        violations += int(np.count_nonzero(diff & ~point_tie))
                done += 1
        group += 1
    return SuiteResult("tau_half", done, violations)


def oracle_suite(instances: int, seed: int, metrics=DEFAULT_ORACLE_METRICS) -> SuiteResult:
    """range_query equals brute_force for every mechanism, plus invariants."""
    mids = [MetricId.parse(m) for m in metrics]
    violations = 0
    for inst in range(instances):
        metric = mids[inst % len(mids)]
        rng = _rng(seed, 3, inst)
        dim = int(rng.integers(2, 9))
        n = int(rng.integers(20, 501))
        X = _domain_points(rng, n, dim, metric)
        ds = Dataset(X, metric)
        if inst % 10 == 1:
            q, t = X[rng.integers(n)].copy(), 0.0   # reflexive: exact hit at t=0
        elif inst % 20 == 2:
            q, t = _domain_points(rng, 1, dim, metric)[0], 1e6  # covers everything
        else:
            q = _domain_points(rng, 1, dim, metric)[0]
            d = distance_to_all(metric, X, q, validate=False)
            rank = int(rng.integers(1, 11))
            t = float(np.partition(d, rank - 1)[rank - 1] * rng.uniform(0.5, 1.2))
        qs = QuerySpec(q, t)
        expected = brute_force(ds, qs)
        pairs = []
        while len(pairs) < 3:
            sampled = _sample_pair(rng, metric, X)
            if sampled is not None:
                pairs.append(PivotPair(metric, *sampled))
        tau = float(rng.uniform(0.5, 1.6))
        by_kind = {}
        for mech in _case_mechanisms(tau, ds, pairs[0].p0):
            parts = [build_partition(ds, pair, mech) for pair in pairs]
            prev_excluded = -1
            for upto in range(1, len(parts) + 1):
                out = range_query(ds, parts[:upto], qs)
                ok = (set(out.results) == expected
                      and out.excluded_count + out.distance_calls == n
                      and out.excluded_count >= prev_excluded)
                if not ok:
                    violations += 1
                prev_excluded = out.excluded_count
            by_kind[mech.kind] = prev_excluded
        if not (by_kind["combined"] >= by_kind["hilbert"] >= by_kind["hyperplane"]
                and by_kind["combined"] >= by_kind["ptolemaic"]):
            violations += 1
    return SuiteResult("oracle", instances, violations)


def bounds_suite(cases: int, seed: int, metrics=DEFAULT_SAFETY_METRICS,
                 dim: int = 10) -> SuiteResult:
    """Bound chain: ptolemaic <= fourpoint + 1e-12 <= true distance + 1e-12."""
    mids = [MetricId.parse(m) for m in metrics]
    violations = 0
    for case in range(cases):
        metric = mids[case % len(mids)]
        rng = _rng(seed, 4, case)
        q, s, p0, p1 = _domain_points(rng, 4, dim, metric)
        k = distance(metric, p0, p1)
        if k <= 0.0:
            continue
        qd = QuadDistances(distance(metric, q, p0), distance(metric, q, p1),
                           distance(metric, s, p0), distance(metric, s, p1), k)
        true = distance(metric, q, s)
        pt = ptolemaic_lower_bound(qd)
        fp = fourpoint_lower_bound(qd)
        if not (pt <= fp + 1e-12 and fp <= true + 1e-12):
            violations += 1
    return SuiteResult("bounds", cases, violations)


def run_all(cases: int, seed: int, metric: "str | None" = None) -> list:
    """Run every suite at the given case count; used by the verify command."""
    safety_metrics = (metric,) if metric else DEFAULT_SAFETY_METRICS
    oracle_metrics = (metric,) if metric else DEFAULT_ORACLE_METRICS
    safety, dominance = safety_suite(cases, seed, metrics=safety_metrics)
    results = [safety, dominance,
               tau_half_suite(cases, seed, metrics=safety_metrics),
               oracle_suite(max(cases // 4, 1) if cases else 0, seed, metrics=oracle_metrics),
               bounds_suite(cases, seed, metrics=safety_metrics)]
    return results
