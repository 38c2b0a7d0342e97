#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

"""Entropy-based goodness-of-fit test for generalized Gaussian distributions.

The statistic is T_{N,k} = Ĥ_{N,k} - (m/s) log X̄^{(s)}_N - (m/s) log c₁(m,s). It
tends to 0 under GG(m,s) and to a strictly negative constant otherwise, so the
default rejection region is the LEFT tail of its null distribution. The null
distribution does not depend on scale, so critical values are simulated at the
canonical rate τ = 1/s and applied to data of any scale.
"""

import hashlib
import importlib.metadata
import json
import logging
import math
from multiprocessing.pool import ThreadPool
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional, Tuple

import jsonschema
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from distributions import RandomStream, canonical_gg, log_max_entropy_constant, sample_gg
from entropy import knn_entropy
from errors import ConfigurationError, DuplicatePointError, TableLookupError
from neighbors import Sample, find_duplicates

logger = logging.getLogger(__name__)

Tail = Literal["left", "right", "two-sided"]

# Smallest replicate count accepted by `critical_values`.
MIN_REPLICATES = 100

# Smallest replicate count of a table written to disk.
MIN_PERSISTED_REPLICATES = 1000


def library_version() -> str:
    """Report the installed version of this library."""
    try:
        return importlib.metadata.version("ggtest")
    # A source checkout without an install still works; tables then record "unknown".
    except importlib.metadata.PackageNotFoundError as e:
        logger.warning("unable to read the installed version: %s", str(e))
        logger.debug(e, exc_info=True)
        return "unknown"


def settings_digest(settings: dict) -> str:
    """Report a short SHA-256 of a JSON mapping of the settings behind an output file."""
    payload = json.dumps(settings, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


class Quantiles(BaseModel):
    """Null quantiles of T at level α: left is the α-quantile, right the (1-α)-quantile."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0, lt=1)
    left: float
    right: float


class CriticalValueTable(BaseModel):
    """Empirical quantiles of T_{N,k} under GG(m,s), for one (m, s, N, k)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    dim: int = Field(ge=1)
    shape: float = Field(gt=0)
    n: int = Field(ge=2)
    k: int = Field(ge=1)
    replicates: int = Field(ge=1)
    seed: int = Field(ge=0)
    stream_id: int = Field(ge=0)
    version: str
    config_sha256: str = Field(pattern=r"^[0-9a-f]{16}$")
    quantiles: List[Quantiles]

    @model_validator(mode="after")
    def _check_monotone(self):
        rows = sorted(self.quantiles, key=lambda q: q.alpha)
        for lo, hi in zip(rows[:-1], rows[1:]):
            if lo.left > hi.left or lo.right < hi.right:
                raise ValueError("quantiles must be monotone in alpha")
        return self

    def matches(self, dim: int, shape: float, n: int, k: int) -> bool:
        """Report whether this table was simulated for the given test."""
        return (
            self.dim == dim
            and self.n == n
            and self.k == k
            and math.isclose(self.shape, shape, rel_tol=1e-12)
        )

    def level(self, alpha: float) -> Quantiles:
        """Return the quantiles stored for `alpha`."""
        for row in self.quantiles:
            if math.isclose(row.alpha, alpha, rel_tol=1e-12):
                return row
        stored = ", ".join(f"{q.alpha:g}" for q in self.quantiles)
        raise TableLookupError(f"alpha={alpha:g} not in table (stored: {stored})")


class TestOutcome(BaseModel):
    """The statistic, the rejection region it was compared with, and the decision."""

    model_config = ConfigDict(frozen=True)

    statistic: float
    n: int
    k: int
    dim: int
    shape: float
    alpha: float
    tail: Tail
    critical_values: Dict[str, float]
    reject: bool
    source: str = Field(description="'table' or 'fresh-mc'.")
    replicates: int
    seed: int
    stream_id: int
    table_path: Optional[str] = None

    @field_validator("critical_values")
    @classmethod
    def _check_tails(cls, value):
        if not value or set(value) - {"left", "right"}:
            raise ValueError("critical values are keyed by 'left' and/or 'right'")
        return value


def sample_moment(sample: Sample, shape: float) -> float:
    """Return X̄^{(s)}_N = (1/N) Σ ‖X_i‖^s."""
    norms = np.sqrt(np.sum(sample.points * sample.points, axis=1))
    return math.fsum(norms**shape) / sample.n


def test_statistic(
    sample: Sample, shape: float, k: int, method: str = "auto", workers: int = 1
) -> float:
    """Return T_{N,k}(m, s) for the sample."""
    m = sample.dim
    estimate = knn_entropy(sample, k, method=method, workers=workers)
    return float(
        estimate.value
        - (m / shape) * math.log(sample_moment(sample, shape))
        - (m / shape) * log_max_entropy_constant(m, shape)
    )


def simulate_null_statistics(
    dim: int,
    shape: float,
    n: int,
    k: int,
    replicates: int,
    stream: RandomStream,
    workers: int = 1,
) -> np.ndarray:
    """Return `replicates` values of T_{N,k} on canonical GG(m,s) samples.

    Replicate j draws from `stream.derive("null", j)`, so the result does not
    depend on `workers`.
    """
    params = canonical_gg(dim, shape)

    def replicate(j: int) -> float:
        sample = sample_gg(params, n, stream.derive("null", j))
        return test_statistic(sample, shape, k)

    if workers > 1:
        with ThreadPool(processes=workers) as pool:
            values = pool.map(replicate, range(replicates))
    else:
        values = [replicate(j) for j in range(replicates)]
    return np.asarray(values, dtype=np.float64)


def _check_alphas(alphas) -> List[float]:
    alphas = sorted({float(a) for a in alphas})
    if not alphas or any(not 0 < a < 1 for a in alphas):
        raise ConfigurationError(f"significance levels must lie in (0, 1), got {alphas}")
    return alphas


def critical_values(
    dim: int,
    shape: float,
    n: int,
    k: int,
    alphas,
    replicates: int,
    stream: RandomStream,
    workers: int = 1,
) -> CriticalValueTable:
    """Simulate the null distribution of T_{N,k} and tabulate both tails at each α."""
    if replicates < MIN_REPLICATES:
        raise ConfigurationError(
            f"at least {MIN_REPLICATES} replicates are needed, got {replicates}"
        )
    alphas = _check_alphas(alphas)
    if k >= n:
        raise ConfigurationError(f"k must be smaller than N; got k={k}, N={n}")

    values = simulate_null_statistics(dim, shape, n, k, replicates, stream, workers=workers)
    rows = [
        Quantiles(
            alpha=a, left=float(np.quantile(values, a)), right=float(np.quantile(values, 1 - a))
        )
        for a in alphas
    ]
    logger.info(
        "simulated %d null statistics (m=%d, s=%g, N=%d, k=%d)", replicates, dim, shape, n, k
    )
    settings = {
        "dim": dim,
        "shape": float(shape),
        "n": n,
        "k": k,
        "replicates": replicates,
        "seed": stream.seed,
        "stream_id": stream.stream_id,
        "alphas": alphas,
    }
    return CriticalValueTable(
        dim=dim,
        shape=shape,
        n=n,
        k=k,
        replicates=replicates,
        seed=stream.seed,
        stream_id=stream.stream_id,
        version=library_version(),
        config_sha256=settings_digest(settings),
        quantiles=rows,
    )


def save_table(table: CriticalValueTable, path) -> None:
    """Write the table as JSON. Tables of fewer than MIN_PERSISTED_REPLICATES are refused."""
    if table.replicates < MIN_PERSISTED_REPLICATES:
        raise ConfigurationError(
            f"tables written to disk need at least {MIN_PERSISTED_REPLICATES} replicates"
        )
    Path(path).write_text(table.model_dump_json(indent=2) + "\n")
    logger.info("wrote critical-value table to %s", path)


def load_table(path) -> CriticalValueTable:
    """Read a table written by `save_table`, validating it against the table schema."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise TableLookupError(f"{path} is not a JSON document: {e}") from e
    try:
        jsonschema.validate(data, CriticalValueTable.model_json_schema())
    except jsonschema.ValidationError as e:
        raise TableLookupError(f"{path} is not a critical-value table: {e.message}") from e
    return CriticalValueTable.model_validate(data)


def _level(alpha: float, tail: Tail) -> float:
    return alpha / 2 if tail == "two-sided" else alpha


def _region(quantiles: Quantiles, tail: Tail) -> Dict[str, float]:
    if tail == "left":
        return {"left": quantiles.left}
    if tail == "right":
        return {"right": quantiles.right}
    return {"left": quantiles.left, "right": quantiles.right}


def _rejects(statistic: float, region: Dict[str, float]) -> bool:
    return bool(
        ("left" in region and statistic <= region["left"])
        or ("right" in region and statistic >= region["right"])
    )


def run_test(
    sample: Sample,
    shape: float,
    k: int,
    alpha: float,
    table: Optional[CriticalValueTable] = None,
    replicates: Optional[int] = None,
    stream: Optional[RandomStream] = None,
    tail: Tail = "left",
    workers: int = 1,
    table_path: Optional[str] = None,
) -> TestOutcome:
    """Test H₀: X ~ GG(m, s) at level α.

    Critical values come from `table`, which must have been simulated for exactly
    this (m, s, N, k), or, when no table is given, from a fresh simulation of
    `replicates` null samples on `stream`. The default LEFT tail rejects when T
    is at or below the α-quantile of its null distribution.
    """
    duplicates = find_duplicates(sample)
    if duplicates:
        raise DuplicatePointError(duplicates)
    if tail not in ("left", "right", "two-sided"):
        raise ConfigurationError(f"unknown tail {tail!r}")
    _check_alphas([alpha])
    m, n = sample.dim, sample.n
    level = _level(alpha, tail)

    if table is not None:
        if not table.matches(m, shape, n, k):
            raise TableLookupError(
                f"table is for (m={table.dim}, s={table.shape:g}, N={table.n}, k={table.k}), "
                f"data needs (m={m}, s={shape:g}, N={n}, k={k})"
            )
        source = "table"
    else:
        if stream is None or replicates is None:
            raise ConfigurationError("a table or a stream and replicate count are required")
        table = critical_values(
            m, shape, n, k, [level], replicates, stream.derive("fresh-mc"), workers=workers
        )
        source = "fresh-mc"

    region = _region(table.level(level), tail)
    statistic = test_statistic(sample, shape, k, workers=workers)
    outcome = TestOutcome(
        statistic=statistic,
        n=n,
        k=k,
        dim=m,
        shape=shape,
        alpha=alpha,
        tail=tail,
        critical_values=region,
        reject=_rejects(statistic, region),
        source=source,
        replicates=table.replicates,
        seed=table.seed,
        stream_id=table.stream_id,
        table_path=table_path,
    )
    logger.info("T=%.6f, critical=%s, reject=%s", statistic, region, outcome.reject)
    return outcome


def rejection_rate(
    draw: Callable[[RandomStream], Sample],
    shape: float,
    k: int,
    alpha: float,
    trials: int,
    table: CriticalValueTable,
    stream: RandomStream,
    tail: Tail = "left",
    workers: int = 1,
) -> Tuple[float, np.ndarray]:
    """Return the fraction of `trials` samples rejected at level α, and their statistics.

    `draw` maps a stream to a sample; trial j uses `stream.derive("trial", j)`.
    """
    region = _region(table.level(_level(alpha, tail)), tail)

    def trial(j: int) -> float:
        sample = draw(stream.derive("trial", j))
        if not table.matches(sample.dim, shape, sample.n, k):
            raise TableLookupError("table does not match the simulated samples")
        return test_statistic(sample, shape, k)

    if workers > 1:
        with ThreadPool(processes=workers) as pool:
            values = pool.map(trial, range(trials))
    else:
        values = [trial(j) for j in range(trials)]
    values = np.asarray(values)
    rejected = sum(_rejects(float(t), region) for t in values)
    return rejected / trials, values
