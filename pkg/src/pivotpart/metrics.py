"""Distance functions over dense real vectors.

Implemented metrics: Euclidean, cosine (in its chord form, see below),
Jensen-Shannon, triangular discrimination, and a square-root transformer
that maps any proper metric into one whose four-point quadruples embed
isometrically in 3-D Euclidean space.

Conventions, fixed here once and relied on by the rest of the library:

* points are 1-D float64 arrays; all arithmetic is 64-bit.
* cosine distance is the Euclidean distance between the L2-normalised
  vectors, i.e. ``2*sin(theta/2)`` where ``theta`` is the angle between
  them.  This form depends on the angle only and, being plain Euclidean
  distance on the unit sphere, keeps the four-point property.
* Jensen-Shannon distance is the square root of the JS divergence taken
  with base-2 logarithms, so two disjoint distributions are at distance 1.
* triangular distance is ``sqrt(sum (a_i-b_i)^2 / (a_i+b_i))`` with
  ``0/0 -> 0``.
* divergence-based metrics (Jensen-Shannon, triangular) require
  nonnegative, L1-normalised inputs and *reject* anything else; they never
  normalise silently.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr

__all__ = [
    "MetricId",
    "EUCLIDEAN",
    "COSINE",
    "JENSEN_SHANNON",
    "TRIANGULAR",
    "sqrt_of",
    "distance",
    "distance_to_all",
    "cross_distances",
]

_LN2 = float(np.log(2.0))

# |sum(coords) - 1| allowed before a probability-vector input is rejected.
DISTRIBUTION_TOL = 1e-9

_KINDS = ("euclidean", "cosine", "jensen_shannon", "triangular", "sqrt_of")
_SHORT = {
    "euclidean": "euclidean",
    "cosine": "cosine",
    "jensen_shannon": "js",
    "triangular": "tri",
}
_FROM_NAME = {
    "euclidean": "euclidean",
    "cosine": "cosine",
    "js": "jensen_shannon",
    "jensen_shannon": "jensen_shannon",
    "tri": "triangular",
    "triangular": "triangular",
}


@dataclass(frozen=True)
class MetricId:
    """Names a distance function; ``sqrt_of`` wraps exactly one inner metric."""

    kind: str
    inner: "MetricId | None" = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "sqrt_of":
            if self.inner is None:
                raise ValueError("sqrt_of requires an inner metric")
            if self.inner.kind == "sqrt_of":
                raise ValueError("sqrt_of nesting depth is limited to 1")
        elif self.inner is not None:
            raise ValueError(f"{self.kind} takes no inner metric")

    @property
    def base(self) -> "MetricId":
        """The underlying metric: the inner one for sqrt_of, else self."""
        return self.inner if self.kind == "sqrt_of" else self

    @property
    def needs_distribution(self) -> bool:
        """True when inputs must be nonnegative probability vectors."""
        return self.base.kind in ("jensen_shannon", "triangular")

    def canonical(self) -> str:
        """Canonical lowercase string form used by CLI and config files."""
        if self.kind == "sqrt_of":
            return f"sqrt:{self.inner.canonical()}"
        return _SHORT[self.kind]

    @staticmethod
    def parse(text: str) -> "MetricId":
        s = text.strip().lower()
        if s.startswith("sqrt:"):
            return sqrt_of(MetricId.parse(s[len("sqrt:"):]))
        if s in _FROM_NAME:
            return MetricId(_FROM_NAME[s])
        valid = sorted(set(_SHORT.values())) + ["sqrt:<inner>"]
        raise ValueError(f"unknown metric {text!r}; valid forms: {', '.join(valid)}")

    def __str__(self) -> str:
        return self.canonical()


EUCLIDEAN = MetricId("euclidean")
COSINE = MetricId("cosine")
JENSEN_SHANNON = MetricId("jensen_shannon")
TRIANGULAR = MetricId("triangular")


def sqrt_of(inner: MetricId) -> MetricId:
    """Square-root wrapper around a proper metric."""
    return MetricId("sqrt_of", inner)


def check_point(m: MetricId, x: np.ndarray, name: str = "point") -> None:
    """Validate one point against the metric's domain constraints."""
    if x.ndim != 1:
        raise ValueError(f"{name} must be a 1-D coordinate array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite coordinates")
    if m.needs_distribution:
        if np.any(x < 0):
            raise ValueError(f"{name} has negative coordinates under a divergence-based metric")
        total = float(x.sum())
        if abs(total - 1.0) > DISTRIBUTION_TOL:
            raise ValueError(
                f"{name} must be L1-normalised for {m.canonical()} (sum={total!r}); "
                "inputs are rejected rather than normalised silently"
            )
    elif m.base.kind == "cosine" and not np.any(x):
        raise ValueError(f"cosine distance is undefined for the zero vector ({name})")


def _euclidean_many(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    diff = X - y
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _cosine_many(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Both sides are normalised through the same reduction so that
    # d(a, b) == d(b, a) bit for bit.
    xn = np.sqrt(np.einsum("ij,ij->i", X, X))
    yn = np.sqrt(np.einsum("ij,ij->i", y[None, :], y[None, :]))[0]
    if yn == 0.0 or np.any(xn == 0.0):
        raise ValueError("cosine distance is undefined for the zero vector")
    return _euclidean_many(X / xn[:, None], y / yn)


def _js_many(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    mid = 0.5 * (X + y)
    div = rel_entr(X, mid).sum(axis=1) + rel_entr(y, mid).sum(axis=1)
    # rel_entr works in natural logs; rescale to base 2 so the range is [0, 1].
    return np.sqrt(np.clip(div / (2.0 * _LN2), 0.0, None))


def _triangular_many(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    den = X + y
    safe = np.where(den > 0.0, den, 1.0)
    terms = np.where(den > 0.0, (X - y) ** 2 / safe, 0.0)
    return np.sqrt(terms.sum(axis=1))


def _dispatch_many(m: MetricId, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    if m.kind == "sqrt_of":
        return np.sqrt(_dispatch_many(m.inner, X, y))
    if m.kind == "euclidean":
        return _euclidean_many(X, y)
    if m.kind == "cosine":
        return _cosine_many(X, y)
    if m.kind == "jensen_shannon":
        return _js_many(X, y)
    return _triangular_many(X, y)


def distance(m: MetricId, a, b) -> float:
    """Distance between two points under metric ``m``.

    Raises ValueError on dimension mismatch, non-finite input, or domain
    violations (negative or unnormalised coordinates under a
    divergence-based metric, zero vectors under cosine).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    check_point(m, a, "a")
    check_point(m, b, "b")
    return float(_dispatch_many(m, a[None, :], b)[0])


def distance_to_all(m: MetricId, X, y, validate: bool = True) -> np.ndarray:
    """Distances from every row of ``X`` (shape (n, dim)) to point ``y``.

    ``X`` is assumed to satisfy the metric's domain constraints already
    (datasets validate on construction); only ``y`` is checked, and only
    when ``validate`` is true.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[1] != y.shape[0]:
        raise ValueError(f"dimension mismatch: X{X.shape} vs y{y.shape}")
    if validate:
        check_point(m, y, "query")
    if X.shape[0] == 0:
        return np.zeros(0, dtype=np.float64)
    return _dispatch_many(m, X, y)


def cross_distances(m: MetricId, A, B, validate: bool = False) -> np.ndarray:
    """Full (len(A), len(B)) distance matrix, row by row of ``A``."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    out = np.empty((A.shape[0], B.shape[0]), dtype=np.float64)
    for i in range(A.shape[0]):
        out[i] = distance_to_all(m, B, A[i], validate=validate)
    return out
