#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

"""Entropy bounds computed from scalar summaries of a density.

The calculators take a `DensitySummary` rather than a density: every inequality
here only needs ‖f‖_∞, a moment norm or a covariance, plus the shape facts
(log-concave, symmetric, unconditional) under which it holds.

The module also carries a density on [0, 1] whose entropy is -∞ although every
moment is finite, and its m-dimensional counterpart on the unit ball.
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import integrate, special

from distributions import (
    GGParams,
    gg_abs_moment,
    gg_coordinate_variance,
    iep,
    max_entropy_bound,
)
from errors import DecompositionError, DomainError, PreconditionError
from specfun import unit_sphere_area

logger = logging.getLogger(__name__)


class DensitySummary(BaseModel):
    """Scalar functionals of a density f on ℝ^m."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(ge=1)
    sup_density: float = Field(gt=0, description="‖f‖_∞.")
    covariance: Optional[List[List[float]]] = None
    central_moment_norms: Dict[float, float] = Field(
        default_factory=dict, description="p ↦ ‖X - EX‖_p = (E‖X - EX‖^p)^{1/p}."
    )
    log_concave: bool = False
    symmetric: bool = False
    unconditional: bool = False

    @model_validator(mode="after")
    def _check_covariance(self):
        if self.covariance is not None:
            cov = np.asarray(self.covariance, dtype=np.float64)
            if cov.shape != (self.dim, self.dim):
                raise ValueError(f"covariance must be {self.dim}×{self.dim}")
        return self

    def moment_norm(self, p: float) -> float:
        """Return ‖X - EX‖_p, or raise PreconditionError when it was not supplied."""
        for key, value in self.central_moment_norms.items():
            if math.isclose(key, p, rel_tol=1e-12):
                return value
        raise PreconditionError(f"no moment norm of order p={p} in summary")


def lower_bound_bounded(summary: DensitySummary) -> float:
    """Return -log ‖f‖_∞, a lower bound on H(f) for any bounded density."""
    return -math.log(summary.sup_density)


def bounds_log_concave(summary: DensitySummary) -> Tuple[float, float]:
    """Return (-log ‖f‖_∞, m - log ‖f‖_∞), which bracket H(f) for log-concave f."""
    if not summary.log_concave:
        raise PreconditionError("the two-sided bound needs a log-concave density")
    lower = -math.log(summary.sup_density)
    return lower, summary.dim + lower


def lower_bound_moment(summary: DensitySummary, p: float) -> float:
    """Return log[2‖X - EX‖_p / Γ(1+p)^{1/p}] for log-concave f on the line, p ≥ 1."""
    if not summary.log_concave:
        raise PreconditionError("the moment bound needs a log-concave density")
    if summary.dim != 1:
        raise PreconditionError("the moment bound holds for densities on the line only")
    if p < 1:
        raise PreconditionError(f"the moment bound needs p ≥ 1, got p={p}")
    norm = summary.moment_norm(p)
    return math.log(2 * norm) - special.gammaln(1 + p) / p


def lower_bound_symmetric_1d(summary: DensitySummary, p: float) -> float:
    """Return log[2‖X‖_p / Γ(p+1)^{1/p}] for a symmetric log-concave variable, p > -1."""
    if not (summary.log_concave and summary.symmetric):
        raise PreconditionError("the bound needs a symmetric log-concave density")
    if summary.dim != 1:
        raise PreconditionError("the bound holds for densities on the line only")
    if p <= -1 or p == 0:
        raise PreconditionError(f"the bound needs p > -1 and p ≠ 0, got p={p}")
    norm = summary.moment_norm(p)
    return math.log(2 * norm) - special.gammaln(1 + p) / p


def covariance_constant(dim: int, unconditional: bool = False) -> float:
    """Return c₃(m): e²m²/(4√2(m+2)), or e²/2 if unconditional and smaller."""
    general = math.e**2 * dim**2 / (4 * math.sqrt(2) * (dim + 2))
    if unconditional:
        return min(general, math.e**2 / 2)
    return general


def lower_bound_covariance(summary: DensitySummary) -> float:
    """Return (m/2) log[(det Σ_x)^{1/m} / c₃(m)] for a symmetric log-concave vector."""
    if not (summary.log_concave and summary.symmetric):
        raise PreconditionError("the covariance bound needs a symmetric log-concave density")
    if summary.covariance is None:
        raise PreconditionError("the covariance bound needs the covariance matrix")
    m = summary.dim
    try:
        chol = np.linalg.cholesky(np.asarray(summary.covariance, dtype=np.float64))
    except np.linalg.LinAlgError as e:
        raise DecompositionError(f"covariance is not positive definite: {e}") from e
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    c3 = covariance_constant(m, summary.unconditional)
    return 0.5 * m * (log_det / m - math.log(c3))


_DECADE = math.log(10.0)


def _log_radius_quad(integrand, u_lower: float, u_upper: float) -> float:
    # Integrands are written in u = -log x, where each decade of x towards 0 is one step of
    # width log 10; the singularity at x = 0 becomes a slowly decaying tail in u.
    total = 0.0
    a = u_lower
    while a + _DECADE < u_upper and a < 40 * _DECADE:
        value, _ = integrate.quad(integrand, a, a + _DECADE, epsabs=1e-15, epsrel=1e-12)
        total += value
        a += _DECADE
    value, _ = integrate.quad(integrand, a, u_upper, epsabs=1e-15, epsrel=1e-12, limit=200)
    return total + value


def _pathological_log_pdf_at(log_r, dim: int):
    log_c2 = 0.0 if dim == 1 else -math.log(unit_sphere_area(dim))
    return log_c2 - dim * log_r - 2 * np.log1p(-log_r)


def pathological_log_pdf(x, dim: int = 1):
    """Return log f for f(x) = c₂(m)/(‖x‖^m log²(e/‖x‖)) on the unit ball.

    In one dimension the support is (0, 1] and c₂(1) = 1. For m ≥ 2,
    c₂(m) = Γ(m/2)/(2π^{m/2}).
    """
    x = np.asarray(x, dtype=np.float64)
    if dim == 1:
        r = x[..., 0] if x.ndim and x.shape[-1] == 1 else x
        inside = (r > 0) & (r <= 1)
    else:
        r = np.sqrt(np.sum(x * x, axis=-1))
        inside = (r > 0) & (r <= 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = _pathological_log_pdf_at(np.log(r), dim)
    values = np.where(inside, values, -np.inf)
    return float(values) if np.ndim(values) == 0 else values


def pathological_mean() -> float:
    """Return E X = ∫₀¹ [log²(e/x)]^{-1} dx for the one-dimensional example (≈ 0.40365)."""
    # x = e^{-u}: the integrand becomes e^{-u}/(1+u)².
    return _log_radius_quad(lambda u: math.exp(-u) / (1.0 + u) ** 2, 0.0, np.inf)


def pathological_truncated_entropy(epsilon: float) -> float:
    """Return -∫_ε¹ f log f dx for the one-dimensional example; -∞ in the limit ε → 0."""
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")

    def integrand(u):
        # f dx = du/(1+u)² and log f = u - 2 log(1+u).
        return -(u - 2.0 * math.log1p(u)) / (1.0 + u) ** 2

    return _log_radius_quad(integrand, 0.0, -math.log(epsilon))


def pathological_max_entropy_bound() -> float:
    """Return log(2e·E X), the maximum-entropy bound at s = 1 for the one-dimensional example."""
    return max_entropy_bound(1, 1.0, pathological_mean())


def pathological_normalization(dim: int) -> float:
    """Return ∫ f over the unit ball for the m-dimensional example, by radial quadrature."""
    if dim < 2:
        raise DomainError("the radial example is defined for m ≥ 2")
    log_area = math.log(unit_sphere_area(dim))

    def integrand(u):
        # r = e^{-u}: area · r^{m-1} f(r) dr = area · r^m f(r) du.
        return math.exp(log_area - dim * u + float(_pathological_log_pdf_at(-u, dim)))

    return _log_radius_quad(integrand, 0.0, np.inf)


def gg_summary(params: GGParams) -> DensitySummary:
    """Return the summary of GG_τ(m,s); log-concave when s ≥ 1, symmetric and unconditional."""
    m = params.dim
    variance = gg_coordinate_variance(params)
    norms = {}
    if m == 1:
        norms = {p: gg_abs_moment(params, p) ** (1 / p) for p in (0.5, 1.0, 2.0, 3.0)}
    return DensitySummary(
        dim=m,
        sup_density=math.exp(params.log_normalizer),
        covariance=(variance * np.eye(m)).tolist(),
        central_moment_norms=norms,
        log_concave=params.shape >= 1,
        symmetric=True,
        unconditional=True,
    )


def normal_summary(dim: int) -> DensitySummary:
    """Return the summary of the standard normal law on ℝ^m."""
    return gg_summary(iep(dim, 2.0))


def uniform_summary() -> DensitySummary:
    """Return the summary of the uniform law on [0, 1]."""
    return DensitySummary(
        dim=1,
        sup_density=1.0,
        covariance=[[1 / 12]],
        central_moment_norms={p: (0.5**p / (p + 1)) ** (1 / p) for p in (1.0, 2.0)},
        log_concave=True,
        symmetric=True,
        unconditional=False,
    )


def bound_report(summary: DensitySummary) -> Dict[str, float]:
    """Return every bound that applies to `summary`, keyed by name."""
    report = {"bounded": lower_bound_bounded(summary)}
    if summary.log_concave:
        lower, upper = bounds_log_concave(summary)
        report["log_concave_lower"] = lower
        report["log_concave_upper"] = upper
        if summary.dim == 1:
            for p in sorted(summary.central_moment_norms):
                if p >= 1:
                    report[f"moment_p{p:g}"] = lower_bound_moment(summary, p)
                if summary.symmetric and p > -1:
                    report[f"symmetric_p{p:g}"] = lower_bound_symmetric_1d(summary, p)
        if summary.symmetric and summary.covariance is not None:
            report["covariance"] = lower_bound_covariance(summary)
    return report
