#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

"""Exponential power family, generalized Gaussians and the isotropic Student-t.

Densities are evaluated in log space. Gamma variates use the shape-scale
convention throughout: the radial part of the isotropic exponential power law is
drawn as V^{1/s} with V ~ Gamma(shape=m/s, scale=2), and the Student-t mixing
variable G has shape ν/2 and scale 2/ν so that νG is chi-squared with ν degrees
of freedom.
"""

import hashlib
import json
import logging
import math
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import linalg, special

from errors import DecompositionError, DomainError
from neighbors import Sample

logger = logging.getLogger(__name__)

_LOG_PI = math.log(math.pi)


class GGParams(BaseModel):
    """Generalized Gaussian GG_τ(m, s), with density c(m,s)·exp(-τ‖x‖^s)."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(ge=1, description="Dimension m.")
    shape: float = Field(gt=0, description="Shape s; 2 is Gaussian, 1 is Laplace.")
    rate: float = Field(gt=0, description="Rate τ.")

    @property
    def log_normalizer(self) -> float:
        """Report log c(m, s) = log[Γ(m/2+1) τ^{m/s} / (Γ(m/s+1) π^{m/2})]."""
        m, s = self.dim, self.shape
        return float(
            special.gammaln(m / 2 + 1)
            + (m / s) * math.log(self.rate)
            - special.gammaln(m / s + 1)
            - 0.5 * m * _LOG_PI
        )


class MEPParams(BaseModel):
    """Multivariate exponential power distribution MEP_m(s, μ, Σ)."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(ge=1)
    shape: float = Field(gt=0)
    location: List[float]
    scatter: List[List[float]]

    @model_validator(mode="after")
    def _check_dimensions(self):
        m = self.dim
        if len(self.location) != m:
            raise ValueError(f"location must have {m} entries")
        if len(self.scatter) != m or any(len(row) != m for row in self.scatter):
            raise ValueError(f"scatter must be {m}×{m}")
        return self


class STParams(BaseModel):
    """Isotropic multivariate Student-t ST(m, ν)."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(ge=1)
    dof: float = Field(gt=0, description="Degrees of freedom ν.")


class RandomStream(BaseModel):
    """A reproducible stream of random numbers keyed by (seed, stream id).

    The generator is counter based (Philox), so draws depend only on the key and
    never on which thread or in which order streams are consumed.
    """

    model_config = ConfigDict(frozen=True)

    seed: int = Field(ge=0, lt=2**64)
    stream_id: int = Field(default=0, ge=0, lt=2**64)

    def derive(self, *labels) -> "RandomStream":
        """Return the child stream for `labels`, e.g. ("critical-values", replicate)."""
        key = json.dumps([self.stream_id, list(labels)], separators=(",", ":"))
        digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
        return RandomStream(seed=self.seed, stream_id=int.from_bytes(digest, "big"))

    def generator(self) -> np.random.Generator:
        """Return a fresh numpy Generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))


def canonical_gg(dim: int, shape: float) -> GGParams:
    """Return the canonical GG(m, s), i.e. τ = 1/s."""
    return GGParams(dim=dim, shape=shape, rate=1.0 / shape)


def iep(dim: int, shape: float) -> GGParams:
    """Return the isotropic exponential power law IEP_m(s) as a GG with τ = 1/2."""
    return GGParams(dim=dim, shape=shape, rate=0.5)


def _radius(x, dim: int):
    x = np.asarray(x, dtype=np.float64)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        r = np.abs(x)
    else:
        if x.shape[-1] != dim:
            raise ValueError(f"points must have {dim} coordinates, got shape {x.shape}")
        r = np.sqrt(np.sum(x * x, axis=-1))
    return r


def _scalar_or_array(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def _cholesky(scatter) -> np.ndarray:
    try:
        return np.linalg.cholesky(np.asarray(scatter, dtype=np.float64))
    except np.linalg.LinAlgError as e:
        raise DecompositionError(f"scatter matrix is not positive definite: {e}") from e


def gg_log_pdf(params: GGParams, x):
    """Return log c(m,s) - τ‖x‖^s for one point or an array of points."""
    r = _radius(x, params.dim)
    return _scalar_or_array(params.log_normalizer - params.rate * r**params.shape)


def mep_log_pdf(params: MEPParams, x):
    """Return the MEP log-density, solving against the Cholesky factor of Σ."""
    m, s = params.dim, params.shape
    chol = _cholesky(params.scatter)
    x = np.asarray(x, dtype=np.float64)
    centred = np.atleast_2d(x.reshape(-1, m)) - np.asarray(params.location)
    y = linalg.solve_triangular(chol, centred.T, lower=True)
    quad = np.sum(y * y, axis=0)
    log_const = (
        special.gammaln(m / 2 + 1)
        - 0.5 * m * _LOG_PI
        - special.gammaln(m / s + 1)
        - (m / s) * math.log(2.0)
        - np.sum(np.log(np.diag(chol)))
    )
    values = log_const - 0.5 * quad ** (s / 2)
    if x.ndim <= 1 and (x.size == m):
        return float(values[0])
    return values


def iep_log_pdf(dim: int, shape: float, x):
    """Return the IEP_m(s) log-density; the μ = 0, Σ = I case of `mep_log_pdf`."""
    return gg_log_pdf(iep(dim, shape), x)


def gg_moment(params: GGParams) -> float:
    """Return E‖X‖^s = m/(sτ)."""
    return params.dim / (params.shape * params.rate)


def gg_abs_moment(params: GGParams, p: float) -> float:
    """Return E‖X‖^p = Γ((m+p)/s) / (Γ(m/s) τ^{p/s}), defined for p > -m."""
    m, s = params.dim, params.shape
    if p <= -m:
        raise DomainError(f"E‖X‖^p is infinite for p ≤ -m; got p={p}, m={m}")
    return math.exp(
        special.gammaln((m + p) / s) - special.gammaln(m / s) - (p / s) * math.log(params.rate)
    )


def gg_variance_scale(dim: int, shape: float) -> float:
    """Return β(m,s) = 2^{2/s} Γ((m+2)/s) / (m Γ(m/s))."""
    m, s = dim, shape
    return math.exp(
        (2 / s) * math.log(2.0)
        + special.gammaln((m + 2) / s)
        - math.log(m)
        - special.gammaln(m / s)
    )


def gg_coordinate_variance(params: GGParams) -> float:
    """Return the variance of each coordinate of GG_τ(m,s), β(m,s)·(2τ)^{-2/s}."""
    s = params.shape
    return gg_variance_scale(params.dim, s) * (2 * params.rate) ** (-2 / s)


def gg_entropy(params: GGParams) -> float:
    """Return H(GG_τ(m,s)) = m/s - log c(m,s)."""
    return params.dim / params.shape - params.log_normalizer


def log_max_entropy_constant(dim: int, shape: float) -> float:
    """Return log c₁(m,s)."""
    m, s = dim, shape
    return float(
        (s / m) * (0.5 * m * _LOG_PI + special.gammaln(m / s + 1) - special.gammaln(m / 2 + 1))
        + math.log(s)
        + 1.0
        - math.log(m)
    )


def max_entropy_constant(dim: int, shape: float) -> float:
    """Return c₁(m,s) = (π^{m/2}Γ(m/s+1)/Γ(m/2+1))^{s/m} · se/m."""
    return math.exp(log_max_entropy_constant(dim, shape))


def max_entropy_bound(dim: int, shape: float, moment: float) -> float:
    """Return (m/s)·log(c₁(m,s)·E‖X‖^s), the largest entropy at that moment."""
    if not moment > 0:
        raise DomainError(f"moment must be positive, got {moment!r}")
    return (dim / shape) * (log_max_entropy_constant(dim, shape) + math.log(moment))


def gaussian_max_entropy(dim: int, scatter) -> float:
    """Return log[(2πe)^{m/2} √det Σ]."""
    chol = _cholesky(scatter)
    if chol.shape != (dim, dim):
        raise ValueError(f"scatter must be {dim}×{dim}, got {chol.shape}")
    return 0.5 * dim * math.log(2 * math.pi * math.e) + float(np.sum(np.log(np.diag(chol))))


def sample_gg(params: GGParams, n: int, stream: RandomStream) -> Sample:
    """Draw n points from GG_τ(m,s) as X = U·V^{1/s}·(2τ)^{-1/s}.

    U is a normalized standard Gaussian vector and V ~ Gamma(shape=m/s, scale=2),
    which gives IEP_m(s); the final factor rescales to rate τ.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    m, s = params.dim, params.shape
    rng = stream.generator()
    z = rng.standard_normal((n, m))
    v = rng.gamma(shape=m / s, scale=2.0, size=n)
    u = z / np.linalg.norm(z, axis=1, keepdims=True)
    radius = v ** (1 / s) * (2 * params.rate) ** (-1 / s)
    logger.debug("drew %d GG points (m=%d, s=%g, tau=%g)", n, m, s, params.rate)
    return Sample(u * radius[:, None])


def standardize(sample: Sample, params: GGParams) -> Sample:
    """Return X/σ with σ² the per-coordinate variance of GG_τ(m,s)."""
    return sample.scaled(1.0 / math.sqrt(gg_coordinate_variance(params)))


def sample_st(params: STParams, n: int, stream: RandomStream) -> Sample:
    """Draw n points from ST(m, ν) as Z/√G, with νG chi-squared on ν degrees of freedom."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    m, nu = params.dim, params.dof
    rng = stream.generator()
    z = rng.standard_normal((n, m))
    g = rng.gamma(shape=nu / 2, scale=2 / nu, size=n)
    logger.debug("drew %d Student-t points (m=%d, nu=%g)", n, m, nu)
    return Sample(z / np.sqrt(g)[:, None])


def st_log_pdf(params: STParams, x):
    """Return the isotropic Student-t log-density."""
    m, nu = params.dim, params.dof
    r = _radius(x, m)
    log_const = (
        special.gammaln((nu + m) / 2) - special.gammaln(nu / 2) - 0.5 * m * math.log(nu * math.pi)
    )
    return _scalar_or_array(log_const - 0.5 * (nu + m) * np.log1p(r * r / nu))


def st_entropy(params: STParams) -> float:
    """Return the closed-form entropy of ST(m, ν)."""
    m, nu = params.dim, params.dof
    log_const = (
        special.gammaln((nu + m) / 2) - special.gammaln(nu / 2) - 0.5 * m * math.log(nu * math.pi)
    )
    return float(
        -log_const + 0.5 * (nu + m) * (special.digamma((nu + m) / 2) - special.digamma(nu / 2))
    )


def st_moment(params: STParams, s: float) -> float:
    """Return E‖X‖^s for ST(m, ν); finite only when ν > s."""
    m, nu = params.dim, params.dof
    if s >= nu:
        raise DomainError(f"E‖X‖^s is infinite for s ≥ ν; got s={s}, nu={nu}")
    return math.exp(
        0.5 * s * math.log(nu)
        + special.gammaln((m + s) / 2)
        + special.gammaln((nu - s) / 2)
        - special.gammaln(m / 2)
        - special.gammaln(nu / 2)
    )
