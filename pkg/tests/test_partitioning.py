import numpy as np
import pytest

from pivotpart.data import Dataset
from pivotpart.metrics import EUCLIDEAN, distance, sqrt_of
from pivotpart.partitioning import (
    Mechanism,
    Partition,
    PivotPair,
    QueryEval,
    build_partition,
    classify_point,
    excluded_classes,
    median_radius,
)


def test_mechanism_validation():
    with pytest.raises(ValueError, match="0.5"):
        Mechanism.ptolemaic(0.4)
    with pytest.raises(ValueError, match="radius"):
        Mechanism("ball_in")
    with pytest.raises(ValueError, match="unknown mechanism"):
        Mechanism.parse("voronoi")
    assert Mechanism.parse("ptolemaic:1.1").tau == 1.1
    assert Mechanism.parse("ball_out:0.4").radius == 0.4
    assert Mechanism.parse("combined", tau=1.0) == Mechanism.combined(1.0)
    with pytest.raises(ValueError, match="tau"):
        Mechanism.parse("ptolemaic")


def test_pivot_pair_rejects_duplicates():
    ds = Dataset(np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(ValueError, match="distinct"):
        PivotPair.from_dataset(ds, 1, 1)
    with pytest.raises(ValueError, match="duplicate"):
        PivotPair.from_dataset(ds, 0, 1)
    with pytest.raises(ValueError, match="out of range"):
        PivotPair.from_dataset(ds, 0, 5)
    assert PivotPair.from_dataset(ds, 0, 2).k == pytest.approx(np.sqrt(2))


def test_classify_point_three_class_examples():
    tau = Mechanism.ptolemaic(1.0)
    assert classify_point(2.5, 1.0, 2.0, tau) == "S1"
    assert classify_point(1.0, 2.5, 2.0, tau) == "S2"
    assert classify_point(0.5, 1.9, 2.0, tau) == "S3"


def test_classify_point_tie_goes_left():
    assert classify_point(1.0, 1.0, 2.0, Mechanism.hyperplane()) == "left"
    assert classify_point(1.0, 1.0, 2.0, Mechanism.hilbert()) == "left"


def test_classify_point_ball():
    assert classify_point(0.5, 9.0, 2.0, Mechanism.ball_in(0.5)) == "inside"
    assert classify_point(0.5, 9.0, 2.0, Mechanism.ball_out(0.5)) == "outside"


def test_classify_tau_half_never_s3():
    # max(dp0, dp1) >= k/2 for any real metric triple, so S3 is empty at tau=0.5
    rng = np.random.default_rng(3)
    half = Mechanism.ptolemaic(0.5)
    for _ in range(2000):
        s, p0, p1 = rng.random((3, 4))
        k = distance(EUCLIDEAN, p0, p1)
        if k == 0:
            continue
        tag = classify_point(distance(EUCLIDEAN, s, p0), distance(EUCLIDEAN, s, p1), k, half)
        assert tag != "S3"


def test_excluded_classes_three_class_examples():
    ds = Dataset(np.array([[0.0], [2.0]]))
    pair = PivotPair.from_dataset(ds, 0, 1)
    pe = build_partition(ds, pair, Mechanism.ptolemaic(1.0))
    # both S1 disjuncts fire (B-A = 1.7 > 0.1, A = 0.5 < 1.9) and with
    # B = 2.2 >= tau*K + t = 2.1 the low-radius class S3 goes as well
    assert excluded_classes(pe, QueryEval(0.5, 2.2, 0.1)) == {"S1", "S3"}
    # exactly representable values: B - A == t/tau must NOT fire S1
    # (strict >) while A >= tau*K + t still takes S3
    assert excluded_classes(pe, QueryEval(2.25, 2.375, 0.125)) == {"S3"}
    assert excluded_classes(pe, QueryEval(2.0, 2.0, 0.1)) == set()


def test_excluded_classes_hilbert_example():
    ds = Dataset(np.array([[0.0], [4.0]]))
    pair = PivotPair.from_dataset(ds, 0, 1)
    pe = build_partition(ds, pair, Mechanism.hilbert())
    # (25 - 9) / 4 = 4 > 2*0.9: the class nearer the first pivot goes
    assert excluded_classes(pe, QueryEval(5.0, 3.0, 0.9)) == {"left"}
    assert excluded_classes(pe, QueryEval(3.0, 5.0, 0.9)) == {"right"}


def test_excluded_classes_equidistant_query_only_radius_disjuncts():
    ds = Dataset(np.array([[0.0], [2.0]]))
    pair = PivotPair.from_dataset(ds, 0, 1)
    q = QueryEval(5.0, 5.0, 0.1)  # A == B: no difference-based disjunct can fire
    assert excluded_classes(build_partition(ds, pair, Mechanism.hyperplane()), q) == set()
    assert excluded_classes(build_partition(ds, pair, Mechanism.hilbert()), q) == set()
    assert excluded_classes(build_partition(ds, pair, Mechanism.ptolemaic(1.0)), q) == {"S3"}


def test_build_partition_six_point_line():
    ds = Dataset(np.arange(6.0)[:, None])
    pair = PivotPair.from_dataset(ds, 0, 5)
    pe = build_partition(ds, pair, Mechanism.ptolemaic(1.0))
    assert pe.tag_vector() == ["S2", "S3", "S3", "S3", "S3", "S1"]
    hyper = build_partition(ds, pair, Mechanism.hyperplane())
    assert hyper.tag_vector() == ["left"] * 3 + ["right"] * 3


def test_build_partition_empty_dataset():
    ds = Dataset.empty(3)
    pair = PivotPair.from_points(EUCLIDEAN, np.zeros(3), np.ones(3))
    pe = build_partition(ds, pair, Mechanism.ptolemaic(1.0))
    assert len(pe) == 0


def test_build_partition_matches_classify_point():
    rng = np.random.default_rng(5)
    ds = Dataset(rng.random((300, 4)))
    pair = PivotPair.from_dataset(ds, 10, 20)
    mechs = [Mechanism.hyperplane(), Mechanism.hilbert(), Mechanism.ptolemaic(1.1),
             Mechanism.ball_in(0.6), Mechanism.ball_out(0.6)]
    for mech in mechs:
        pe = build_partition(ds, pair, mech)
        tags = [classify_point(float(pe.dp0[i]), float(pe.dp1[i]), pair.k, mech)
                for i in range(len(ds))]
        assert pe.tag_vector() == tags


def test_partition_totality():
    rng = np.random.default_rng(9)
    ds = Dataset(rng.random((500, 6)))
    pair = PivotPair.from_dataset(ds, 0, 1)
    for mech in [Mechanism.ptolemaic(1.0), Mechanism.combined(1.0),
                 Mechanism.hilbert(), Mechanism.ball_in(0.7)]:
        pe = build_partition(ds, pair, mech)
        assert len(pe.labels) == len(ds)
        counts = np.bincount(pe.labels, minlength=3)
        assert counts.sum() == len(ds)


def test_combined_is_union_of_both_views():
    rng = np.random.default_rng(13)
    ds = Dataset(rng.random((400, 8)))
    pair = PivotPair.from_dataset(ds, 0, 1)
    tau = 1.0
    comb = build_partition(ds, pair, Mechanism.combined(tau))
    ptol = build_partition(ds, pair, Mechanism.ptolemaic(tau))
    hil = build_partition(ds, pair, Mechanism.hilbert())
    for a, b, t in rng.random((50, 3)) * [2.0, 2.0, 0.3]:
        q = QueryEval(a, b, t)
        combined_mask = comb.excluded_mask(q)
        union = ptol.excluded_mask(q) | hil.excluded_mask(q)
        assert (combined_mask == union).all()
        assert excluded_classes(comb, q) == excluded_classes(ptol, q) | excluded_classes(hil, q)


def test_hilbert_dominates_hyperplane():
    rng = np.random.default_rng(17)
    ds = Dataset(rng.random((300, 10)))
    for _ in range(30):
        i0, i1 = rng.choice(len(ds), 2, replace=False)
        pair = PivotPair.from_dataset(ds, int(i0), int(i1))
        hyper = build_partition(ds, pair, Mechanism.hyperplane())
        hil = build_partition(ds, pair, Mechanism.hilbert())
        for _ in range(30):
            q = rng.random(10) * 1.5
            t = float(rng.random() * 0.4)
            qe = QueryEval(distance(EUCLIDEAN, q, pair.p0),
                           distance(EUCLIDEAN, q, pair.p1), t)
            assert excluded_classes(hyper, qe) <= excluded_classes(hil, qe)


def test_difference_locus_separates_static_class():
    # planar configurations: any query with B - A > t/tau is farther than t
    # from every point with dp0 >= dp1 and dp0 >= tau*k
    rng = np.random.default_rng(19)
    checked = 0
    while checked < 500:
        k = float(rng.uniform(0.5, 2.0))
        p0, p1 = np.array([0.0, 0.0]), np.array([k, 0.0])
        tau = float(rng.uniform(0.5, 1.5))
        t = float(rng.uniform(0.01, 0.5) * k)
        pts = rng.uniform([-2 * k, -2 * k], [3 * k, 2 * k], size=(64, 2))
        dp0 = np.hypot(pts[:, 0], pts[:, 1])
        dp1 = np.hypot(pts[:, 0] - k, pts[:, 1])
        in_class = (dp0 >= dp1) & (dp0 >= tau * k)
        is_query = (dp1 - dp0) > t / tau
        for s in pts[in_class]:
            for q in pts[is_query]:
                assert np.hypot(*(q - s)) > t
                checked += 1


def test_median_radius():
    ds = Dataset(np.arange(5.0)[:, None])
    assert median_radius(ds, np.zeros(1)) == 2.0
    with pytest.raises(ValueError, match="empty"):
        median_radius(Dataset.empty(1), np.zeros(1))


def test_metric_mismatch_rejected():
    ds = Dataset(np.array([[1.0, 0.0], [0.0, 1.0]]), EUCLIDEAN)
    pair = PivotPair.from_points(sqrt_of(EUCLIDEAN), [1.0, 0.0], [0.0, 1.0])
    with pytest.raises(ValueError, match="metric"):
        build_partition(ds, pair, Mechanism.hyperplane())
