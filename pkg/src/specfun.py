#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

"""Special functions shared by the estimator, the distributions and the bounds.

All logarithms are natural, so every entropy in this package is in nats.
"""

import logging
import math

import numpy as np
from scipy import integrate, special

from errors import DomainError

logger = logging.getLogger(__name__)

EULER_GAMMA = float(np.euler_gamma)


def _check_positive(name: str, x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"{name} must be positive and finite, got {x!r}")
    return x


def log_gamma(x: float) -> float:
    """Return ln Γ(x) for x > 0."""
    return float(special.gammaln(_check_positive("x", x)))


def digamma(x: float) -> float:
    """Return ψ(x) = Γ'(x)/Γ(x) for x > 0."""
    return float(special.digamma(_check_positive("x", x)))


def unit_ball_volume(m: int) -> float:
    """Return V_m = π^{m/2}/Γ(m/2 + 1), the volume of the unit ball in m dimensions."""
    return math.exp(log_unit_ball_volume(m))


def log_unit_ball_volume(m: int) -> float:
    """Return log V_m, computed through log Γ so large m does not overflow."""
    if int(m) != m or m < 1:
        raise DomainError(f"dimension must be a positive integer, got {m!r}")
    return 0.5 * m * math.log(math.pi) - log_gamma(0.5 * m + 1)


def unit_sphere_area(m: int) -> float:
    """Return 2π^{m/2}/Γ(m/2), the surface area of the unit sphere in m dimensions."""
    if int(m) != m or m < 1:
        raise DomainError(f"dimension must be a positive integer, got {m!r}")
    return 2.0 * math.exp(0.5 * m * math.log(math.pi) - log_gamma(0.5 * m))


def _tail_integral(integrand, lower: float) -> float:
    # quad over [lower, inf) loses accuracy when the integrand is long-tailed, so split the
    # range into decades and finish with an infinite segment.
    total = 0.0
    a = lower
    b = max(1.0, 10.0 * lower) if lower > 0 else 1.0
    while b < 1e4:
        value, _ = integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += value
        a, b = b, 10.0 * b
    value, _ = integrate.quad(integrand, a, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return total + value


def gen_exp_integral(p: float, z: float) -> float:
    """Return E_p(z) = z^{p-1} ∫_z^∞ e^{-zt} t^{-p} dt by adaptive quadrature.

    The lower limit of the integral is z, not 1. The result coincides with
    `standard_exp_integral(p, z**2)`; at z = 1 the two definitions agree.
    At z = 0 the limit 1/(p - 1) is returned, which requires p > 1.
    """
    p = _check_positive("p", p)
    z = float(z)
    if not math.isfinite(z) or z < 0:
        raise DomainError(f"z must be non-negative and finite, got {z!r}")
    if z == 0:
        if p <= 1:
            raise DomainError(f"E_{p}(0) diverges; p must exceed 1 at z = 0")
        return 1.0 / (p - 1.0)

    integral = _tail_integral(lambda t: math.exp(-z * t) * t ** (-p), z)
    return z ** (p - 1.0) * integral


def standard_exp_integral(p: float, z: float) -> float:
    """Return the conventional E_p(z) = ∫_1^∞ e^{-zt} t^{-p} dt."""
    p = _check_positive("p", p)
    z = float(z)
    if not math.isfinite(z) or z < 0:
        raise DomainError(f"z must be non-negative and finite, got {z!r}")
    if z == 0:
        if p <= 1:
            raise DomainError(f"E_{p}(0) diverges; p must exceed 1 at z = 0")
        return 1.0 / (p - 1.0)
    return _tail_integral(lambda t: math.exp(-z * t) * t ** (-p), 1.0)


def erlang_cdf(k: int, rate_volume: float) -> float:
    """Return P(ρ_k ≤ t) for a homogeneous Poisson process, given λ V_m t^m.

    This is 1 - Σ_{j<k} v^j e^{-v}/j!, i.e. the regularized lower incomplete gamma
    function P(k, v).
    """
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    v = float(rate_volume)
    if math.isnan(v) or v < 0:
        raise DomainError(f"rate_volume must be non-negative, got {rate_volume!r}")
    if v == 0:
        return 0.0
    return float(special.gammainc(k, v))
