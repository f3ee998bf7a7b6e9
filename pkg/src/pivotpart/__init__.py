"""Pivot-pair partitioning and exclusion for exact metric range queries."""

from .metrics import (
    MetricId,
    EUCLIDEAN,
    COSINE,
    JENSEN_SHANNON,
    TRIANGULAR,
    sqrt_of,
    distance,
    distance_to_all,
    cross_distances,
)
from .data import Dataset, read_dataset, write_dataset
from .bounds import (
    PlanePoint,
    QuadDistances,
    project_to_plane,
    ptolemaic_lower_bound,
    fourpoint_lower_bound,
    project_dataset,
)
from .partitioning import (
    Mechanism,
    PivotPair,
    Partition,
    QueryEval,
    classify_point,
    excluded_classes,
    build_partition,
    median_radius,
)
from .engine import QuerySpec, QueryOutcome, brute_force, range_query
from .bench import (
    ExperimentConfig,
    ExclusionReport,
    generate_uniform,
    calibrate_threshold,
    exclusion_power,
    sweep_tau,
    sweep_dimensions,
)

__version__ = "0.1.0"
