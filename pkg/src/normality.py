#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

"""Shapiro-Wilk checks of the null distribution of T_{N,k}."""

import logging
from multiprocessing.pool import ThreadPool
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from distributions import RandomStream
from errors import ArityError, ConfigurationError, DegenerateSampleError
from gof import simulate_null_statistics

logger = logging.getLogger(__name__)

MIN_SIZE = 3
MAX_SIZE = 5000


class NormalityResult(BaseModel):
    """Shapiro-Wilk W and its p-value; small W rejects normality."""

    model_config = ConfigDict(frozen=True)

    w: float = Field(gt=0, le=1)
    p_value: float = Field(ge=0, le=1)
    n: int = Field(ge=MIN_SIZE, le=MAX_SIZE)


def shapiro_wilk(values) -> NormalityResult:
    """Return the Shapiro-Wilk W statistic and p-value (Royston's approximation)."""
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    if not MIN_SIZE <= x.size <= MAX_SIZE:
        raise ArityError(f"Shapiro-Wilk needs {MIN_SIZE} to {MAX_SIZE} values, got {x.size}")
    if np.ptp(x) == 0:
        raise DegenerateSampleError("all values are equal")
    w, p = stats.shapiro(x)
    # W can round a hair above 1 for near-perfect fits.
    return NormalityResult(w=min(float(w), 1.0), p_value=float(np.clip(p, 0.0, 1.0)), n=x.size)


def normality_of_statistic(
    dim: int,
    shape: float,
    n: int,
    k: int,
    replicates: int,
    repetitions: int,
    stream: RandomStream,
    workers: int = 1,
) -> List[float]:
    """Return one Shapiro-Wilk p-value per repetition of `replicates` null values of T_{N,k}.

    Repetition j simulates on `stream.derive("normality", j)`.
    """
    if replicates < MIN_SIZE:
        raise ArityError(f"at least {MIN_SIZE} replicates are needed, got {replicates}")
    if repetitions < 1:
        raise ConfigurationError(f"repetitions must be positive, got {repetitions}")

    def repetition(j: int) -> float:
        values = simulate_null_statistics(
            dim, shape, n, k, replicates, stream.derive("normality", j)
        )
        return shapiro_wilk(values).p_value

    if workers > 1:
        with ThreadPool(processes=workers) as pool:
            p_values = pool.map(repetition, range(repetitions))
    else:
        p_values = [repetition(j) for j in range(repetitions)]
    logger.info(
        "Shapiro-Wilk p-values for T (m=%d, s=%g, N=%d, k=%d): %s", dim, shape, n, k, p_values
    )
    return p_values
