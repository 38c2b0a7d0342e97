#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

"""Exact k-th nearest-neighbour distances under the Euclidean metric.

Two backends are provided. `knn_distances_brute` scans every pair and is the
reference. `knn_distances_indexed` queries a median-split kd-tree and returns
distances that are bitwise equal to the reference: candidate neighbours found by
the tree are re-measured with the same elementwise routine the brute-force scan
uses, and any row where the tree could have missed a near-tie is re-scanned.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from errors import ArityError, DomainError, DuplicatePointError

logger = logging.getLogger(__name__)

# Above this many points `knn_distances` switches to the kd-tree.
BRUTE_FORCE_LIMIT = 2000

# Extra neighbours requested from the tree beyond the k-th.
_CANDIDATE_PAD = 2

# Row pairs compared per chunk in the brute-force scan.
_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class Sample:
    """N observations in m dimensions, stored as a read-only N×m array."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        points = np.array(self.points, dtype=np.float64, order="C", copy=True)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2:
            raise ArityError(f"sample must be an N×m array, got shape {points.shape}")
        if points.shape[0] < 1 or points.shape[1] < 1:
            raise ArityError(f"sample needs N ≥ 1 and m ≥ 1, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise DomainError("sample coordinates must be finite")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def n(self) -> int:
        """Report the number of observations N."""
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        """Report the dimension m."""
        return self.points.shape[1]

    def scaled(self, a: float) -> "Sample":
        """Return the sample a·X."""
        return Sample(a * self.points)

    def __repr__(self) -> str:
        return f"Sample(n={self.n}, dim={self.dim})"


@dataclass(frozen=True)
class NeighborDistances:
    """Distances ρ_k(X_i, 𝒳_N) for every observation, with the backend that produced them."""

    k: int
    distances: np.ndarray = field(repr=False)
    method: str = "brute"


def euclidean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ‖a - b‖ along the last axis, broadcasting the leading axes.

    Squares are accumulated one coordinate at a time so that the same pair of
    points always yields the same bits, whatever the shape of the batch.
    """
    diff = a - b
    acc = diff[..., 0] * diff[..., 0]
    for d in range(1, diff.shape[-1]):
        acc = acc + diff[..., d] * diff[..., d]
    return np.sqrt(acc)


def find_duplicates(sample: Sample) -> list[tuple[int, int]]:
    """Return (i, j) row pairs, i < j, where observations i and j coincide."""
    _, inverse, counts = np.unique(
        sample.points, axis=0, return_inverse=True, return_counts=True
    )
    inverse = np.asarray(inverse).reshape(-1)
    pairs = []
    for group in np.flatnonzero(counts > 1):
        rows = np.flatnonzero(inverse == group)
        first = int(rows[0])
        pairs.extend((first, int(other)) for other in rows[1:])
    return sorted(pairs)


def _validate(sample: Sample, k: int):
    if int(k) != k or k < 1:
        raise ArityError(f"k must be a positive integer, got {k!r}")
    if k >= sample.n:
        raise ArityError(f"k must be smaller than N; got k={k}, N={sample.n}")
    duplicates = find_duplicates(sample)
    if duplicates:
        raise DuplicatePointError(duplicates)


def _brute_rows(points: np.ndarray, rows: np.ndarray, k: int) -> np.ndarray:
    n = points.shape[0]
    out = np.empty(len(rows), dtype=np.float64)
    chunk = max(1, _CHUNK_CELLS // max(1, n * points.shape[1]))
    for start in range(0, len(rows), chunk):
        block = rows[start : start + chunk]
        dist = euclidean(points[block, None, :], points[None, :, :])
        dist[np.arange(len(block)), block] = np.inf
        out[start : start + len(block)] = np.partition(dist, k - 1, axis=1)[:, k - 1]
    return out


def knn_distances_brute(sample: Sample, k: int) -> NeighborDistances:
    """Return ρ_k for every observation by scanning all pairs, in O(N²m)."""
    _validate(sample, k)
    distances = _brute_rows(sample.points, np.arange(sample.n), k)
    return NeighborDistances(k=k, distances=distances, method="brute")


def knn_distances_indexed(sample: Sample, k: int, workers: int = 1) -> NeighborDistances:
    """Return ρ_k for every observation using a kd-tree; equal bit for bit to the scan."""
    _validate(sample, k)
    points = sample.points
    n = sample.n
    query = min(n, k + 1 + _CANDIDATE_PAD)

    tree = cKDTree(points, balanced_tree=True, compact_nodes=True)
    tree_dist, idx = tree.query(points, k=query, workers=workers)

    dist = euclidean(points[:, None, :], points[idx])
    dist[idx == np.arange(n)[:, None]] = np.inf
    distances = np.sort(dist, axis=1)[:, k - 1]

    if query < n:
        # Rows whose k-th distance is within rounding of the farthest candidate might
        # have an unseen point tied with it; rescan those rows exhaustively.
        farthest = tree_dist[:, -1]
        unsure = np.flatnonzero(distances >= farthest * (1 - 1e-9))
        if unsure.size:
            logger.debug("rescanning %d of %d rows near candidate boundary", unsure.size, n)
            distances[unsure] = _brute_rows(points, unsure, k)

    return NeighborDistances(k=k, distances=distances, method="kdtree")


def knn_distances(
    sample: Sample, k: int, method: str = "auto", workers: int = 1
) -> NeighborDistances:
    """Return ρ_k for every observation with the requested backend.

    `auto` scans pairs up to BRUTE_FORCE_LIMIT points and uses the kd-tree above it.
    """
    if method == "auto":
        method = "brute" if sample.n <= BRUTE_FORCE_LIMIT else "kdtree"
    if method == "brute":
        return knn_distances_brute(sample, k)
    if method == "kdtree":
        return knn_distances_indexed(sample, k, workers=workers)
    raise ValueError(f"unknown neighbour search method: {method!r}")
