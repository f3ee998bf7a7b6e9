"""Static pivot-pair partitions and their query-time exclusion rules.

Five partition mechanisms are supported.  Each one labels every point of
a dataset at pre-processing time from its cached distances to the two
pivots; at query time whole classes are dropped when the query's pivot
distances satisfy the mechanism's exclusion condition:

==============  =======================  =========================================
mechanism       classes                  exclusion (A = d(q,p0), B = d(q,p1))
==============  =======================  =========================================
ball_in(M)      inside iff dp0 <= M      inside: A > M+t     outside: A < M-t
ball_out(M)     inside iff dp0 <  M      same as ball_in
hyperplane      left iff dp0 <= dp1      left: A-B > 2t      right: B-A > 2t
hilbert         left iff dp0 <= dp1      left: (A^2-B^2)/K > 2t   right: mirrored
ptolemaic(tau)  S1/S2/S3 (see below)     S1: B-A > t/tau  or A < tau*K - t
                                         S2: A-B >= t/tau or B < tau*K - t
                                         S3: A >= tau*K + t or B >= tau*K + t
combined(tau)   both views stored        union of hilbert and ptolemaic exclusions
==============  =======================  =========================================

The three-class partition is S1 = {dp0 >= dp1 and dp0 >= tau*K},
S2 = {dp0 < dp1 and dp1 >= tau*K}, S3 = everything else (both pivot
distances below tau*K).  S3 can be excluded together with S1 or S2.
Strict-vs-nonstrict comparisons are implemented exactly as listed; the
resulting asymmetry only matters for boundary ties, which have measure
zero for continuous data.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset
from .metrics import MetricId, distance, distance_to_all

__all__ = [
    "S1", "S2", "S3", "LEFT", "RIGHT", "INSIDE", "OUTSIDE",
    "Mechanism", "PivotPair", "QueryEval", "Partition",
    "classify_point", "excluded_classes", "build_partition", "median_radius",
]

S1, S2, S3 = "S1", "S2", "S3"
LEFT, RIGHT = "left", "right"
INSIDE, OUTSIDE = "inside", "outside"

_THREE_TAGS = (S1, S2, S3)
_NEARER_TAGS = (LEFT, RIGHT)
_BALL_TAGS = (INSIDE, OUTSIDE)

_KINDS = ("ball_in", "ball_out", "hyperplane", "hilbert", "ptolemaic", "combined")


@dataclass(frozen=True)
class Mechanism:
    """A partition mechanism plus its parameter (M radius or tau)."""

    kind: str
    radius: Optional[float] = None
    tau: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown mechanism {self.kind!r}; valid: {', '.join(_KINDS)}")
        if self.kind in ("ball_in", "ball_out"):
            if self.radius is None or not np.isfinite(self.radius) or self.radius < 0:
                raise ValueError(f"{self.kind} needs a nonnegative radius")
            if self.tau is not None:
                raise ValueError(f"{self.kind} takes no tau")
        elif self.kind in ("ptolemaic", "combined"):
            if self.tau is None or not np.isfinite(self.tau):
                raise ValueError(f"{self.kind} needs a tau parameter")
            if self.tau < 0.5:
                raise ValueError("tau below 0.5 is never useful; 0.5 reduces to hyperplane")
            if self.radius is not None:
                raise ValueError(f"{self.kind} takes no radius")
        elif self.radius is not None or self.tau is not None:
            raise ValueError(f"{self.kind} takes no parameters")

    @staticmethod
    def ball_in(radius: float) -> "Mechanism":
        return Mechanism("ball_in", radius=float(radius))

    @staticmethod
    def ball_out(radius: float) -> "Mechanism":
        return Mechanism("ball_out", radius=float(radius))

    @staticmethod
    def hyperplane() -> "Mechanism":
        return Mechanism("hyperplane")

    @staticmethod
    def hilbert() -> "Mechanism":
        return Mechanism("hilbert")

    @staticmethod
    def ptolemaic(tau: float) -> "Mechanism":
        return Mechanism("ptolemaic", tau=float(tau))

    @staticmethod
    def combined(tau: float) -> "Mechanism":
        return Mechanism("combined", tau=float(tau))

    @staticmethod
    def parse(text: str, tau: Optional[float] = None) -> "Mechanism":
        """Parse e.g. ``hilbert``, ``ptolemaic:1.1`` or ``ball_in:0.4``.

        A bare ``ptolemaic``/``combined`` takes its tau from the second
        argument.
        """
        name, _, param = text.strip().lower().partition(":")
        if name not in _KINDS:
            raise ValueError(f"unknown mechanism {text!r}; valid: {', '.join(_KINDS)}")
        if name in ("ball_in", "ball_out"):
            if not param:
                raise ValueError(f"{name} needs a radius, e.g. {name}:0.5")
            return Mechanism(name, radius=float(param))
        if name in ("ptolemaic", "combined"):
            value = float(param) if param else tau
            if value is None:
                raise ValueError(f"{name} needs a tau, e.g. {name}:1.0")
            return Mechanism(name, tau=float(value))
        if param:
            raise ValueError(f"{name} takes no parameter")
        return Mechanism(name)


@dataclass(frozen=True, eq=False)
class PivotPair:
    """Two reference points with their cached inter-pivot distance."""

    metric: MetricId
    p0: np.ndarray
    p1: np.ndarray
    k: float
    i0: Optional[int] = None
    i1: Optional[int] = None

    def __post_init__(self):
        for name in ("p0", "p1"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.k <= 0.0:
            raise ValueError("duplicate pivots: inter-pivot distance must be positive")

    @staticmethod
    def from_points(metric: MetricId, p0, p1, i0: Optional[int] = None,
                    i1: Optional[int] = None) -> "PivotPair":
        k = distance(metric, p0, p1)
        return PivotPair(metric, np.asarray(p0, float), np.asarray(p1, float), k, i0, i1)

    @staticmethod
    def from_dataset(ds: Dataset, i0: int, i1: int) -> "PivotPair":
        n = len(ds)
        if not (0 <= i0 < n and 0 <= i1 < n):
            raise ValueError(f"pivot ids ({i0}, {i1}) out of range for {n} points")
        if i0 == i1:
            raise ValueError("pivot ids must be distinct")
        return PivotPair.from_points(ds.metric, ds.point(i0), ds.point(i1), i0, i1)


@dataclass(frozen=True)
class QueryEval:
    """A query's two pivot distances and its threshold."""

    a: float
    b: float
    t: float

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.t < 0:
            raise ValueError("pivot distances and threshold must be nonnegative")


# Vectorised label/exclusion kernels.  Class codes index the tag tuples above.

def _classify_three(dp0, dp1, k: float, tau: float) -> np.ndarray:
    tk = tau * k
    codes = np.full(np.shape(dp0), 2, dtype=np.int8)
    codes[(dp0 >= dp1) & (dp0 >= tk)] = 0
    codes[(dp0 < dp1) & (dp1 >= tk)] = 1
    return codes

def _classify_nearer(dp0, dp1) -> np.ndarray:
    return (dp0 > dp1).astype(np.int8)

def _classify_ball(dp0, radius: float, closed_inside: bool) -> np.ndarray:
    if closed_inside:
        return (dp0 > radius).astype(np.int8)
    return (dp0 >= radius).astype(np.int8)


def _excl_three(k: float, tau: float, a, b, t) -> np.ndarray:
    tk = tau * k
    margin = np.asarray(t) / tau
    e1 = (b - a > margin) | (a < tk - t)
    e2 = (a - b >= margin) | (b < tk - t)
    e3 = (a >= tk + t) | (b >= tk + t)
    return np.stack([e1, e2, e3], axis=-1)

def _excl_hyperplane(a, b, t) -> np.ndarray:
    return np.stack([a - b > 2 * t, b - a > 2 * t], axis=-1)

def _excl_hilbert(k: float, a, b, t) -> np.ndarray:
    gap = (np.asarray(a) ** 2 - np.asarray(b) ** 2) / k
    return np.stack([gap > 2 * t, -gap > 2 * t], axis=-1)

def _excl_ball(radius: float, a, t) -> np.ndarray:
    return np.stack([a > radius + t, a < radius - t], axis=-1)


def _single_view_labels(kind: Mechanism, dp0, dp1, k: float) -> np.ndarray:
    if kind.kind == "ptolemaic":
        return _classify_three(dp0, dp1, k, kind.tau)
    if kind.kind in ("hyperplane", "hilbert"):
        return _classify_nearer(dp0, dp1)
    if kind.kind == "ball_in":
        return _classify_ball(dp0, kind.radius, closed_inside=True)
    if kind.kind == "ball_out":
        return _classify_ball(dp0, kind.radius, closed_inside=False)
    raise ValueError(f"{kind.kind} has no single label view")


def _single_view_excl(kind: Mechanism, k: float, a, b, t) -> np.ndarray:
    if kind.kind == "ptolemaic":
        return _excl_three(k, kind.tau, a, b, t)
    if kind.kind == "hyperplane":
        return _excl_hyperplane(a, b, t)
    if kind.kind == "hilbert":
        return _excl_hilbert(k, a, b, t)
    return _excl_ball(kind.radius, a, t)


def _view_tags(kind: Mechanism) -> tuple:
    if kind.kind == "ptolemaic":
        return _THREE_TAGS
    if kind.kind in ("hyperplane", "hilbert"):
        return _NEARER_TAGS
    return _BALL_TAGS


def classify_point(dp0: float, dp1: float, k: float, kind: Mechanism) -> str:
    """Class tag of a point with pivot distances (dp0, dp1).

    ``combined`` partitions carry two label views and are built through
    :func:`build_partition`; classify their views separately.
    """
    if k <= 0.0:
        raise ValueError("k must be positive")
    if dp0 < 0.0 or dp1 < 0.0:
        raise ValueError("pivot distances must be nonnegative")
    if kind.kind == "combined":
        raise ValueError("combined has two label views; classify ptolemaic/hilbert separately")
    code = int(_single_view_labels(kind, np.asarray([dp0]), np.asarray([dp1]), k)[0])
    return _view_tags(kind)[code]


@dataclass(eq=False)
class Partition:
    """Per-point class labels for one pivot pair under one mechanism.

    ``labels`` holds integer class codes for the main view (the
    three-class view for ``combined``); ``labels_nearer`` holds the
    two-class view that ``combined`` additionally stores.  ``dp0``/``dp1``
    cache every point's pivot distances for reuse.
    """

    pair: PivotPair
    kind: Mechanism
    metric: MetricId
    dp0: np.ndarray
    dp1: np.ndarray
    labels: np.ndarray
    labels_nearer: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.labels)

    def tag_vector(self) -> list:
        """Main-view labels as strings."""
        tags = _THREE_TAGS if self.kind.kind in ("ptolemaic", "combined") else _view_tags(self.kind)
        return [tags[c] for c in self.labels]

    def excluded_mask(self, q: QueryEval) -> np.ndarray:
        """Boolean mask of points falling in a class excluded for ``q``."""
        k = self.pair.k
        if self.kind.kind == "combined":
            e3 = _excl_three(k, self.kind.tau, q.a, q.b, q.t)
            e2 = _excl_hilbert(k, q.a, q.b, q.t)
            return e3[self.labels] | e2[self.labels_nearer]
        e = _single_view_excl(self.kind, k, q.a, q.b, q.t)
        return e[self.labels]


def excluded_classes(pe: Partition, q: QueryEval) -> set:
    """Names of the classes of ``pe`` that may be dropped for query ``q``."""
    k = pe.pair.k
    if pe.kind.kind == "combined":
        e3 = _excl_three(k, pe.kind.tau, q.a, q.b, q.t)
        e2 = _excl_hilbert(k, q.a, q.b, q.t)
        out = {tag for tag, on in zip(_THREE_TAGS, e3) if on}
        out |= {tag for tag, on in zip(_NEARER_TAGS, e2) if on}
        return out
    e = _single_view_excl(pe.kind, k, q.a, q.b, q.t)
    return {tag for tag, on in zip(_view_tags(pe.kind), e) if on}


def build_partition(ds: Dataset, pair: PivotPair, kind: Mechanism,
                    dp0: Optional[np.ndarray] = None,
                    dp1: Optional[np.ndarray] = None) -> Partition:
    """Label every point of ``ds`` (pivots included, if they are members).

    ``dp0``/``dp1`` may be passed in when the point-to-pivot distances are
    already known (benchmarks share them across pairs and mechanisms).
    """
    if pair.metric != ds.metric:
        raise ValueError(f"pivot pair metric {pair.metric} != dataset metric {ds.metric}")
    if dp0 is None:
        dp0 = distance_to_all(ds.metric, ds.coords, pair.p0, validate=False)
    if dp1 is None:
        dp1 = distance_to_all(ds.metric, ds.coords, pair.p1, validate=False)
    if len(dp0) != len(ds) or len(dp1) != len(ds):
        raise ValueError("cached distance arrays do not match the dataset size")
    if kind.kind == "combined":
        labels = _classify_three(dp0, dp1, pair.k, kind.tau)
        nearer = _classify_nearer(dp0, dp1)
        return Partition(pair, kind, ds.metric, dp0, dp1, labels, nearer)
    labels = _single_view_labels(kind, dp0, dp1, pair.k)
    return Partition(pair, kind, ds.metric, dp0, dp1, labels)


def median_radius(ds: Dataset, p) -> float:
    """Median distance from ``p`` to the dataset: the default ball radius."""
    if len(ds) == 0:
        raise ValueError("median radius of an empty dataset is undefined")
    return float(np.median(distance_to_all(ds.metric, ds.coords, p, validate=False)))
