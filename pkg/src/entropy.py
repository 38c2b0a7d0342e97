#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

"""The k-th nearest-neighbour estimator of Shannon entropy and a quadrature oracle."""

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, special

from distributions import RandomStream
from errors import InconsistentDensityError
from neighbors import Sample, knn_distances
from specfun import EULER_GAMMA, digamma, log_unit_ball_volume, unit_sphere_area

logger = logging.getLogger(__name__)

# Truncation radius for `entropy_quadrature`. At radius 60 the tail mass of every
# GG_τ(m, s) with s ≥ 1, τ ≥ 1/2 and m ≤ 10 is below 1e-10.
DEFAULT_QUADRATURE_RADIUS = 60.0

# Normalization tolerance of the truncated density.
NORMALIZATION_TOLERANCE = 1e-6


class EntropyEstimate(BaseModel):
    """Value of Ĥ_{N,k} in nats, with the sample shape and the estimator that produced it."""

    model_config = ConfigDict(frozen=True)

    value: float
    n: int = Field(ge=2)
    k: int = Field(ge=1)
    dim: int = Field(ge=1)
    estimator: str = Field(default="knn", description="knn (general k) or kl (k = 1 form).")
    method: str = Field(default="brute", description="Neighbour search backend.")


def local_log_terms(
    sample: Sample, k: int, method: str = "auto", workers: int = 1
) -> Tuple[np.ndarray, str]:
    """Return log[ρ_k^m(X_i) V_m (N-1) e^{-ψ(k)}] for every observation, and the backend used."""
    nn = knn_distances(sample, k, method=method, workers=workers)
    m, n = sample.dim, sample.n
    offset = log_unit_ball_volume(m) + math.log(n - 1) - digamma(k)
    return m * np.log(nn.distances) + offset, nn.method


def knn_entropy(
    sample: Sample, k: int, method: str = "auto", workers: int = 1
) -> EntropyEstimate:
    """Return Ĥ_{N,k}, the mean of the per-point log terms.

    Every point contributes; there is no boundary correction.
    """
    terms, backend = local_log_terms(sample, k, method=method, workers=workers)
    value = math.fsum(terms) / sample.n
    logger.debug("entropy estimate %.6f (N=%d, m=%d, k=%d)", value, sample.n, sample.dim, k)
    return EntropyEstimate(value=value, n=sample.n, k=k, dim=sample.dim, method=backend)


def knn_entropy_k1(sample: Sample, method: str = "auto", workers: int = 1) -> EntropyEstimate:
    """Return Ĥ_{N,1} = (m/N) Σ log ρ_1(X_i) + log V_m + γ + log(N-1)."""
    nn = knn_distances(sample, 1, method=method, workers=workers)
    m, n = sample.dim, sample.n
    value = (
        m * math.fsum(np.log(nn.distances)) / n
        + log_unit_ball_volume(m)
        + EULER_GAMMA
        + math.log(n - 1)
    )
    return EntropyEstimate(value=value, n=n, k=1, dim=m, estimator="kl", method=nn.method)


def _edges(lower: float, upper: float) -> list:
    # Decade breakpoints keep quad accurate on peaked or long-tailed integrands.
    span = upper - lower
    edges = {lower, upper}
    for j in range(7):
        edges.add(lower + span * 10.0 ** (-j))
    if lower < 1.0 < upper:
        edges.add(1.0)
    return sorted(edges)


def _integrate(func: Callable[[float], float], lower: float, upper: float) -> float:
    edges = _edges(lower, upper)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        value, _ = integrate.quad(func, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += value
    return total


def entropy_quadrature(
    log_density: Callable,
    dim: int,
    radius: float = DEFAULT_QUADRATURE_RADIUS,
    isotropic: bool = True,
    support: Optional[Tuple[float, float]] = None,
) -> float:
    """Return -∫ f log f over a ball of the given radius by adaptive quadrature.

    `log_density` takes a point (a length-m array) and returns log f there.
    Isotropic densities are reduced to a radial integral along the first axis.
    Non-isotropic densities are supported in one dimension, over `support` or
    [-radius, radius].

    Raises InconsistentDensityError when the truncated density does not integrate
    to 1 within NORMALIZATION_TOLERANCE.
    """
    if isotropic:
        area = unit_sphere_area(dim)

        def point(r):
            x = np.zeros(dim)
            x[0] = r
            return x

        def weight(r):
            return area * r ** (dim - 1)

        lower, upper = 0.0, float(radius)
    else:
        if dim != 1:
            raise ValueError("non-isotropic quadrature is only available in one dimension")
        lower, upper = support if support is not None else (-float(radius), float(radius))

        def point(r):
            return np.array([r])

        def weight(r):
            return 1.0

    def mass(r):
        return weight(r) * math.exp(float(log_density(point(r))))

    def plogp(r):
        lf = float(log_density(point(r)))
        f = math.exp(lf)
        if f == 0.0:
            return 0.0
        return -weight(r) * f * lf

    total = _integrate(mass, lower, upper)
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise InconsistentDensityError(
            f"density integrates to {total:.10f} over the truncated support, not 1"
        )
    return _integrate(plogp, lower, upper)


def poisson_kth_distance(
    intensity: float, k: int, dim: int, replicates: int, stream: RandomStream
) -> np.ndarray:
    """Simulate ρ_k(0, 𝒫_λ), the distance from 0 to the k-th point of a Poisson process.

    Points are scattered in a cube whose inscribed ball holds at least k points with
    probability 1 - 1e-12, so truncation to the cube is invisible at this resolution.
    """
    log_volume = log_unit_ball_volume(dim)
    tail = special.gammaincinv(k, 1.0 - 1e-12)
    half_width = math.exp((math.log(tail) - math.log(intensity) - log_volume) / dim)
    expected = intensity * (2 * half_width) ** dim
    rng = stream.generator()
    out = np.empty(replicates)
    for j in range(replicates):
        count = rng.poisson(expected)
        if count < k:
            out[j] = np.inf
            continue
        points = rng.uniform(-half_width, half_width, size=(count, dim))
        norms = np.sqrt(np.sum(points * points, axis=1))
        out[j] = np.partition(norms, k - 1)[k - 1]
    return out


def poisson_local_mean(
    intensity: float, k: int, dim: int, replicates: int, stream: RandomStream
) -> Tuple[float, float]:
    """Return the Monte-Carlo mean and standard error of m log ρ_k(0, 𝒫_λ) + log V_m - ψ(k).

    The expectation of this quantity is -log λ.
    """
    rho = poisson_kth_distance(intensity, k, dim, replicates, stream)
    values = dim * np.log(rho) + log_unit_ball_volume(dim) - digamma(k)
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(replicates))
