"""The two-pivot plane projection and the distance lower bounds built on it.

Given two reference points ``p0, p1`` at distance ``K``, any object with
known distances ``(dp0, dp1)`` to them projects to a unique point of the
upper half-plane with ``p0`` at the origin and ``p1`` at ``(K, 0)``.  Two
objects projected this way yield lower bounds on their true distance:

* ``ptolemaic_lower_bound``: ``|A*D - B*C| / K``, valid whenever the
  space satisfies the Ptolemaic inequality;
* ``fourpoint_lower_bound``: the planar distance between the two
  projections, valid whenever any four points embed isometrically in 3-D
  Euclidean space.  It always dominates the Ptolemaic bound.

Neither bound requires constructing the projection at query time; the
projection is used here for the four-point bound and for scatter exports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .metrics import distance_to_all

__all__ = [
    "PlanePoint",
    "QuadDistances",
    "project_to_plane",
    "ptolemaic_lower_bound",
    "fourpoint_lower_bound",
    "project_dataset",
    "write_projection_csv",
    "exclusion_boundaries",
]

# Triangle-inequality slack tolerated before a projection input is rejected,
# scaled by the magnitudes involved.
TRIANGLE_TOL = 1e-9


@dataclass(frozen=True)
class PlanePoint:
    """A projection onto the pivot plane; y >= 0 by construction."""

    x: float
    y: float


@dataclass(frozen=True)
class QuadDistances:
    """The five known distances among a query q, a datum s and pivots p0, p1.

    a = d(q,p0), b = d(q,p1), c = d(s,p0), d = d(s,p1), k = d(p0,p1).
    """

    a: float
    b: float
    c: float
    d: float
    k: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "k"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be a finite nonnegative distance, got {v!r}")
        if self.k <= 0.0:
            raise ValueError("inter-pivot distance k must be positive")


def project_to_plane(dp0: float, dp1: float, k: float) -> PlanePoint:
    """Place a point at distances (dp0, dp1) from p0=(0,0) and p1=(k,0).

    The triple must satisfy the triangle inequality up to a small
    magnitude-scaled tolerance; a larger violation signals corrupted
    distances or non-metric input and raises ValueError.
    """
    if not (math.isfinite(dp0) and math.isfinite(dp1) and math.isfinite(k)):
        raise ValueError("distances must be finite")
    if k <= 0.0:
        raise ValueError("inter-pivot distance k must be positive")
    if dp0 < 0.0 or dp1 < 0.0:
        raise ValueError("distances must be nonnegative")
    tol = TRIANGLE_TOL * max(1.0, dp0, dp1, k)
    if dp0 + dp1 < k - tol or dp0 + k < dp1 - tol or dp1 + k < dp0 - tol:
        raise ValueError(
            f"triangle inequality violated beyond tolerance for ({dp0}, {dp1}, {k})"
        )
    x = (dp0 * dp0 + k * k - dp1 * dp1) / (2.0 * k)
    # Near-collinear triples can push dp0^2 - x^2 a rounding error below 0.
    y = math.sqrt(max(0.0, dp0 * dp0 - x * x))
    return PlanePoint(x, y)


def ptolemaic_lower_bound(qd: QuadDistances) -> float:
    """Lower bound |a*d - b*c| / k on the unknown distance d(q, s).

    The absolute value makes the bound orientation-free; it is never
    negative.
    """
    return abs(qd.a * qd.d - qd.b * qd.c) / qd.k


def fourpoint_lower_bound(qd: QuadDistances) -> float:
    """Planar distance between the projections of q and s (same half-plane)."""
    pq = project_to_plane(qd.a, qd.b, qd.k)
    ps = project_to_plane(qd.c, qd.d, qd.k)
    return math.hypot(pq.x - ps.x, pq.y - ps.y)


def project_dataset(ds: Dataset, pair) -> np.ndarray:
    """Project every point of ``ds`` onto the plane of ``pair``; returns (n, 2)."""
    dp0 = distance_to_all(ds.metric, ds.coords, pair.p0, validate=False)
    dp1 = distance_to_all(ds.metric, ds.coords, pair.p1, validate=False)
    k = pair.k
    x = (dp0 * dp0 + k * k - dp1 * dp1) / (2.0 * k)
    y = np.sqrt(np.maximum(0.0, dp0 * dp0 - x * x))
    return np.column_stack([x, y])


def write_projection_csv(path, xy: np.ndarray) -> None:
    """Write ``id,x,y`` rows with nine decimal places.

    Nine decimals keep the absolute coordinate error below 5e-10, so
    distances recomputed from the file agree with the originals to
    within 1e-9.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id,x,y\n")
        for i, (x, y) in enumerate(xy):
            fh.write(f"{i},{x:.9f},{y:.9f}\n")


def _circle_arc(r: float, theta0: float, theta1: float, samples: int) -> list:
    ts = np.linspace(theta0, theta1, samples)
    return [[float(r * math.cos(t)), float(r * math.sin(t))] for t in ts]


def _difference_hyperbola(k: float, diff: float, y_max: float, samples: int) -> list:
    """Upper-half branch of d(q,p1) - d(q,p0) = diff (the branch nearer p0)."""
    if diff <= 0.0 or diff >= k:
        return []
    a = diff / 2.0
    c = k / 2.0
    b = math.sqrt(c * c - a * a)
    if b == 0.0:
        return []
    u_max = math.asinh(y_max / b)
    us = np.linspace(0.0, u_max, samples)
    return [[float(c - a * math.cosh(u)), float(b * math.sinh(u))] for u in us]


def exclusion_boundaries(kind: str, k: float, t: float, tau: float | None,
                         y_max: float, samples: int = 200) -> list:
    """Boundary polylines for scatter-plot overlays, in plane coordinates.

    Returns a list of dicts ``{"name", "style", "points"}``.  The red line
    bounds the statically excludable class; the black solid/dotted lines
    bound the query regions that trigger its exclusion.  The plotting
    layer draws these verbatim and contains no geometry of its own.
    """
    if k <= 0.0:
        raise ValueError("k must be positive")
    if kind == "ptolemaic":
        if tau is None:
            raise ValueError("ptolemaic boundaries need tau")
        tk = tau * k
        half = k / 2.0
        if tk > half:
            y0 = math.sqrt(tk * tk - half * half)
            red = [[half, float(y_max)], [half, y0]]
            red += _circle_arc(tk, math.atan2(y0, half), 0.0, samples)
        else:
            red = [[half, float(y_max)], [half, 0.0]]
        boundaries = [
            {"name": "class_boundary", "style": "red_solid", "points": red},
            {"name": "query_difference", "style": "black_solid",
             "points": _difference_hyperbola(k, t / tau, y_max, samples)},
            {"name": "query_radius", "style": "black_dotted",
             "points": _circle_arc(tk - t, 0.0, math.pi, samples) if tk - t > 0 else []},
        ]
        return boundaries
    if kind == "hyperplane":
        return [
            {"name": "class_boundary", "style": "red_solid",
             "points": [[k / 2.0, 0.0], [k / 2.0, float(y_max)]]},
            {"name": "query_difference", "style": "black_solid",
             "points": _difference_hyperbola(k, 2.0 * t, y_max, samples)},
        ]
    if kind == "hilbert":
        return [
            {"name": "class_boundary", "style": "red_solid",
             "points": [[k / 2.0, 0.0], [k / 2.0, float(y_max)]]},
            {"name": "query_difference", "style": "black_solid",
             "points": [[k / 2.0 - t, 0.0], [k / 2.0 - t, float(y_max)]]},
        ]
    raise ValueError(f"no boundary overlay defined for mechanism {kind!r}")
