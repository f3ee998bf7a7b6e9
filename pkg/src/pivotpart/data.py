"""Immutable point collections and their binary file format.

A point is a row of ``Dataset.coords``; its id is the row index.  Domain
constraints of the attached metric (nonnegative, L1-normalised rows for
divergence-based metrics) are enforced once at construction so the hot
paths can skip per-call validation.

On disk a dataset is a 16-byte header (magic ``MSPD``, u32 dim, u64 count,
little-endian) followed by row-major little-endian float64 coordinates.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .metrics import DISTRIBUTION_TOL, EUCLIDEAN, MetricId

__all__ = ["Dataset", "read_dataset", "write_dataset", "MAGIC"]

MAGIC = b"MSPD"
_HEADER = struct.Struct("<4sIQ")


@dataclass(frozen=True, eq=False)
class Dataset:
    """A fixed collection of n-dimensional points with an attached metric."""

    coords: np.ndarray
    metric: MetricId = field(default=EUCLIDEAN)

    def __post_init__(self):
        arr = np.array(self.coords, dtype=np.float64, order="C", copy=True)
        if arr.ndim != 2:
            raise ValueError(f"coords must have shape (n, dim), got {arr.shape}")
        if arr.shape[1] < 1:
            raise ValueError("dimension must be at least 1")
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValueError("coords contain non-finite values")
        if self.metric.needs_distribution and len(arr):
            if np.any(arr < 0):
                raise ValueError(f"{self.metric} requires nonnegative coordinates")
            sums = arr.sum(axis=1)
            if np.max(np.abs(sums - 1.0)) > DISTRIBUTION_TOL:
                raise ValueError(f"{self.metric} requires L1-normalised rows")
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    @staticmethod
    def empty(dim: int, metric: MetricId = EUCLIDEAN) -> "Dataset":
        return Dataset(np.zeros((0, dim)), metric)

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.coords.shape[0]

    def point(self, i: int) -> np.ndarray:
        return self.coords[i]


def write_dataset(ds, path) -> None:
    """Write a Dataset (or plain (n, dim) array) in the MSPD binary format."""
    coords = ds.coords if isinstance(ds, Dataset) else np.asarray(ds, dtype=np.float64)
    if coords.ndim != 2:
        raise ValueError(f"expected shape (n, dim), got {coords.shape}")
    n, dim = coords.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, dim, n))
        fh.write(np.ascontiguousarray(coords, dtype="<f8").tobytes())


def read_dataset(path, metric: MetricId = EUCLIDEAN) -> Dataset:
    """Load an MSPD file; the metric is supplied by the caller (sidecar)."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, dim, n = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        payload = fh.read()
    expected = n * dim * 8
    if len(payload) != expected:
        raise ValueError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    coords = np.frombuffer(payload, dtype="<f8").reshape(n, dim)
    return Dataset(coords, metric)
