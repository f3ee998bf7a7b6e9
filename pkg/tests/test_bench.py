import itertools
import math

import numpy as np
import pytest

from pivotpart.bench import (
    CSV_HEADER,
    ExperimentConfig,
    PairBattery,
    TAU_GRID,
    calibrate_threshold,
    calibrate_thresholds,
    exclusion_power,
    generate_uniform,
    make_workspace,
    sweep_dimensions,
    sweep_tau,
)
from pivotpart.data import Dataset
from pivotpart.engine import QuerySpec, range_query
from pivotpart.metrics import EUCLIDEAN, cross_distances
from pivotpart.partitioning import Mechanism, PivotPair, QueryEval, build_partition


def test_generate_uniform_deterministic_and_bounded():
    a = generate_uniform(3, 50, seed=42)
    b = generate_uniform(3, 50, seed=42)
    assert np.array_equal(a.coords, b.coords)
    assert a.coords.min() >= 0.0 and a.coords.max() < 1.0
    assert len(generate_uniform(3, 0, seed=42)) == 0
    assert not np.array_equal(a.coords, generate_uniform(3, 50, seed=43).coords)


def test_calibrate_threshold_line_example():
    ds = Dataset(np.arange(6.0)[:, None])
    # oracle: sorted distance list, k-th smallest (1-indexed), every member
    # counted; for q=0 the list is [0,1,2,3,4,5], so the 5th entry is 4
    q = np.array([0.0])
    assert calibrate_threshold(ds, q, 5) == 4.0
    assert calibrate_threshold(ds, np.array([-0.5]), 5) == 4.5
    assert calibrate_threshold(ds, ds.point(2), 1) == 0.0
    previous = -1.0
    for k in range(1, 7):
        t = calibrate_threshold(ds, q, k)
        assert t >= previous
        previous = t
    with pytest.raises(ValueError, match="neighbour"):
        calibrate_threshold(ds, q, 7)


def test_calibrate_thresholds_matches_scalar():
    rng = np.random.default_rng(0)
    ds = Dataset(rng.random((100, 4)))
    queries = rng.random((7, 4))
    vec = calibrate_thresholds(ds, queries, 5)
    assert vec == pytest.approx([calibrate_threshold(ds, q, 5) for q in queries])


def test_pair_counts():
    rng = np.random.default_rng(1)
    ds = Dataset(rng.random((60, 3)))
    battery = PairBattery(ds, rng.random((4, 3)), np.full(4, 0.2), rng.random((50, 3)))
    # 10 pivots give 45 partitions, 20 give 190, 50 give 1225
    assert len(battery.pair_indices(10)) == 45
    assert len(battery.pair_indices(20)) == 190
    assert len(battery.pair_indices(50)) == math.comb(50, 2) == 1225
    # nested pivot prefixes: fewer pivots can never exclude more
    full = battery.excluded_counts(Mechanism.combined(1.0), n_pivots=10)
    only3 = battery.excluded_counts(Mechanism.combined(1.0), n_pivots=3)
    assert (full >= only3).all()
    with pytest.raises(ValueError, match="n_pivots"):
        battery.excluded_counts(Mechanism.hilbert(), n_pivots=51)


def brute_exclusion_power(ds, queries, pivots, mech):
    """Independent oracle: per-pair exclusion sets enumerated point by point
    through the public partition API and the per-query engine route."""
    pairs = [PivotPair.from_points(ds.metric, pivots[i], pivots[j])
             for i, j in itertools.combinations(range(len(pivots)), 2)]
    parts = [build_partition(ds, pair, mech) for pair in pairs]
    total = 0
    for qs in queries:
        excluded = np.zeros(len(ds), dtype=bool)
        for pe in parts:
            qe = QueryEval(float(np.linalg.norm(qs.q - pe.pair.p0)),
                           float(np.linalg.norm(qs.q - pe.pair.p1)), qs.t)
            for i in range(len(ds)):
                if pe.excluded_mask(qe)[i]:
                    excluded[i] = True
        total += int(excluded.sum())
    return total / (len(queries) * len(ds))


def test_exclusion_power_matches_exhaustive_enumeration():
    rng = np.random.default_rng(2)
    ds = Dataset(rng.random((20, 2)))
    pivots = rng.random((3, 2))
    queries = [QuerySpec(rng.random(2), float(rng.uniform(0.05, 0.3))) for _ in range(5)]
    for mech in [Mechanism.hyperplane(), Mechanism.hilbert(),
                 Mechanism.ptolemaic(1.0), Mechanism.combined(1.0)]:
        fast = exclusion_power(ds, queries, pivots, mech)
        assert fast == pytest.approx(brute_exclusion_power(ds, queries, pivots, mech))


def test_exclusion_power_matches_range_query_route():
    rng = np.random.default_rng(3)
    ds = Dataset(rng.random((150, 5)))
    pivots = rng.random((5, 5))
    queries = [QuerySpec(rng.random(5), float(rng.uniform(0.1, 0.4))) for _ in range(8)]
    mech = Mechanism.combined(1.1)
    pairs = [PivotPair.from_points(EUCLIDEAN, pivots[i], pivots[j])
             for i, j in itertools.combinations(range(5), 2)]
    parts = [build_partition(ds, pair, mech) for pair in pairs]
    total = sum(range_query(ds, parts, qs).excluded_count for qs in queries)
    assert exclusion_power(ds, queries, pivots, mech) == total / (len(queries) * len(ds))


def test_exclusion_power_accepts_dataset_indices_as_pivots():
    rng = np.random.default_rng(4)
    ds = Dataset(rng.random((50, 3)))
    queries = [QuerySpec(rng.random(3), 0.2)]
    by_index = exclusion_power(ds, queries, np.array([1, 5, 9]), Mechanism.hilbert())
    by_coords = exclusion_power(ds, queries, ds.coords[[1, 5, 9]], Mechanism.hilbert())
    assert by_index == by_coords


def test_workers_do_not_change_counts():
    rng = np.random.default_rng(5)
    ds = Dataset(rng.random((200, 4)))
    battery = PairBattery(ds, rng.random((16, 4)), np.full(16, 0.25), rng.random((6, 4)))
    serial = battery.excluded_counts(Mechanism.combined(1.0))
    threaded = battery.excluded_counts(Mechanism.combined(1.0), workers=4)
    assert np.array_equal(serial, threaded)


def small_config(**kw):
    defaults = dict(dims=[4], n_data=400, n_queries=16, n_pivots=4, seed=11)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def test_config_validation():
    with pytest.raises(ValueError, match="n_pivots"):
        small_config(n_pivots=1)
    with pytest.raises(ValueError, match="n_queries"):
        small_config(n_queries=0)
    with pytest.raises(ValueError, match="knn_k"):
        small_config(knn_k=0)
    with pytest.raises(ValueError, match="tau"):
        small_config(tau_values=[0.4])
    with pytest.raises(ValueError, match="unknown metric"):
        small_config(metric="hamming")


def test_sweep_tau_report_and_reduction_to_hyperplane():
    cfg = small_config(tau_values=TAU_GRID)
    report = sweep_tau(cfg)
    assert len(report.rows) == len(TAU_GRID)
    # tau = 0.5 equals a hyperplane run on the same workspace
    battery = make_workspace(cfg, 4)
    hyper = battery.excluded_counts(Mechanism.hyperplane(), cfg.n_pivots)
    half_row = [r for r in report.rows if r.tau == 0.5][0]
    assert np.array_equal(half_row.excluded_counts, hyper)
    assert 4 in report.best_tau()


def test_sweep_tau_csv_format_and_reproducibility():
    cfg = small_config(tau_values=[0.5, 1.0, 1.5])
    text1 = sweep_tau(cfg).to_csv_text()
    text2 = sweep_tau(cfg).to_csv_text()
    assert text1 == text2
    lines = text1.strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 4
    rate = lines[1].split(",")[4]
    assert len(rate.split(".")[1]) == 6


def test_report_rates_recomputable_from_counts():
    cfg = small_config()
    report = sweep_tau(cfg)
    for row in report.rows:
        assert len(row.excluded_counts) == cfg.n_queries
        mean = int(row.excluded_counts.sum()) / (cfg.n_queries * cfg.n_data)
        assert row.mean_exclusion_rate == mean
        assert row.mean_distance_calls == pytest.approx(cfg.n_data * (1 - mean))
        assert 0.0 <= row.mean_exclusion_rate <= 1.0


def test_sweep_dimensions_grid_and_ordering():
    cfg = small_config(dims=[4, 6], n_data=600, n_queries=24, n_pivots=5,
                       mechanisms=("hyperplane", "ptolemaic", "hilbert", "combined"),
                       pivot_counts=(3, 5))
    report = sweep_dimensions(cfg, tau=1.0)
    assert len(report.rows) == 2 * 4 * 2
    for dim in (4, 6):
        rates = {r.mechanism: r.mean_exclusion_rate for r in report.rows
                 if r.dim == dim and r.n_pivots == 5}
        assert rates["hyperplane"] <= rates["hilbert"] <= rates["combined"]
        assert rates["ptolemaic"] <= rates["combined"]
    taus = {r.mechanism: r.tau for r in report.rows}
    assert taus["hyperplane"] is None and taus["combined"] == 1.0


def test_sweep_dimensions_accepts_per_dim_tau():
    cfg = small_config(dims=[3, 4], mechanisms=("ptolemaic",))
    report = sweep_dimensions(cfg, tau={3: 0.8, 4: 1.2})
    by_dim = {r.dim: r.tau for r in report.rows}
    assert by_dim == {3: 0.8, 4: 1.2}
    with pytest.raises(ValueError, match="sweeps support"):
        sweep_dimensions(small_config(mechanisms=("ball_in",)), tau=1.0)


def test_large_tau_degrades():
    # far class membership thins out as tau grows, so very large tau is useless
    cfg = small_config(dims=[6], n_data=1500, n_queries=30,
                       tau_values=[0.5, 0.8, 1.0, 1.2, 1.5, 3.0])
    report = sweep_tau(cfg)
    rates = {r.tau: r.mean_exclusion_rate for r in report.rows}
    best = rates[report.best_tau()[6]]
    assert rates[3.0] < best


def test_pivot_stream_prefixes_are_nested():
    cfg = small_config()
    wide = make_workspace(cfg, 4, max_pivots=8)
    narrow = make_workspace(cfg, 4, max_pivots=3)
    assert np.array_equal(wide.ddata[:, :3], narrow.ddata)
    assert np.array_equal(wide.dq[:, :3], narrow.dq)


def test_query_with_no_firing_locus_contributes_zero():
    rng = np.random.default_rng(8)
    ds = Dataset(rng.random((40, 3)))
    # an enormous threshold disables every exclusion condition
    queries = [QuerySpec(rng.random(3), 1e9)]
    for mech in [Mechanism.hyperplane(), Mechanism.hilbert(),
                 Mechanism.ptolemaic(1.0), Mechanism.combined(1.0)]:
        assert exclusion_power(ds, queries, rng.random((3, 3)), mech) == 0.0


def test_queries_disjoint_from_data():
    battery = make_workspace(small_config(), 4)
    data = {tuple(row) for row in battery.ds.coords}
    # thresholds are per-query 5nn distances, so none may be zero either
    assert (battery.t > 0).all()
    assert battery.dq.shape == (16, 4)


def test_global_mean_threshold_switch():
    battery = make_workspace(small_config(global_mean_threshold=True), 4)
    assert np.ptp(battery.t) == 0.0
