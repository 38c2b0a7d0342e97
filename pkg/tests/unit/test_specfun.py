# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

import math
import unittest

import numpy as np
from scipy import integrate, special

from errors import DomainError
from specfun import (
    EULER_GAMMA,
    digamma,
    erlang_cdf,
    gen_exp_integral,
    log_gamma,
    log_unit_ball_volume,
    standard_exp_integral,
    unit_ball_volume,
    unit_sphere_area,
)


class TestGammaFunctions(unittest.TestCase):
    def test_log_gamma_known_values(self):
        self.assertAlmostEqual(log_gamma(1), 0.0, places=14)
        self.assertAlmostEqual(log_gamma(2), 0.0, places=14)
        self.assertAlmostEqual(log_gamma(0.5), 0.5723649429247001, places=12)

    def test_log_gamma_relative_accuracy_on_range(self):
        for x in (1e-3, 0.1, 7.5, 100.0, 1e3):
            expected = math.lgamma(x)
            self.assertLessEqual(abs(log_gamma(x) - expected), 1e-12 * max(1.0, abs(expected)))

    def test_log_gamma_rejects_non_positive(self):
        for x in (0, -1.5, float("inf"), float("nan")):
            with self.assertRaises(DomainError):
                log_gamma(x)

    def test_digamma_known_values(self):
        self.assertAlmostEqual(digamma(1), -0.5772156649015329, places=10)
        self.assertAlmostEqual(digamma(2), 0.42278433509846713, places=10)
        self.assertAlmostEqual(digamma(3), 0.9227843350984671, places=10)
        self.assertAlmostEqual(-digamma(1), EULER_GAMMA, places=14)

    def test_digamma_recurrence(self):
        for x in (0.5, 1.0, 2.0, 10.0):
            self.assertAlmostEqual(digamma(x + 1) - digamma(x), 1 / x, places=10)

    def test_digamma_rejects_non_positive(self):
        with self.assertRaises(DomainError):
            digamma(0)
        with self.assertRaises(DomainError):
            digamma(-2.5)


class TestUnitBall(unittest.TestCase):
    def test_volumes(self):
        self.assertAlmostEqual(unit_ball_volume(1), 2.0, places=12)
        self.assertAlmostEqual(unit_ball_volume(2), math.pi, places=12)
        self.assertAlmostEqual(unit_ball_volume(3), 4 * math.pi / 3, places=12)

    def test_volume_identity(self):
        for m in range(1, 11):
            self.assertAlmostEqual(
                unit_ball_volume(m) * math.gamma(m / 2 + 1) / math.pi ** (m / 2), 1.0, places=12
            )

    def test_log_volume_stays_finite_in_high_dimension(self):
        self.assertTrue(math.isfinite(log_unit_ball_volume(2000)))

    def test_sphere_area(self):
        self.assertAlmostEqual(unit_sphere_area(1), 2.0, places=12)
        self.assertAlmostEqual(unit_sphere_area(2), 2 * math.pi, places=12)
        self.assertAlmostEqual(unit_sphere_area(3), 4 * math.pi, places=12)
        for m in range(1, 8):
            self.assertAlmostEqual(unit_sphere_area(m), m * unit_ball_volume(m), places=10)

    def test_dimension_zero_is_rejected(self):
        with self.assertRaises(DomainError):
            unit_ball_volume(0)
        with self.assertRaises(DomainError):
            unit_sphere_area(0)


class TestExponentialIntegrals(unittest.TestCase):
    def test_known_values(self):
        self.assertAlmostEqual(gen_exp_integral(1, 1), 0.2193839343955203, places=8)
        self.assertAlmostEqual(gen_exp_integral(2, 1), 0.1484955067759220, places=8)
        self.assertAlmostEqual(gen_exp_integral(2, 1), math.exp(-1) - gen_exp_integral(1, 1), 8)

    def test_divergent_at_zero(self):
        with self.assertRaises(DomainError):
            gen_exp_integral(1, 0)
        with self.assertRaises(DomainError):
            gen_exp_integral(0.5, 0)
        self.assertAlmostEqual(gen_exp_integral(3, 0), 0.5, places=12)

    def test_invalid_arguments(self):
        with self.assertRaises(DomainError):
            gen_exp_integral(0, 1)
        with self.assertRaises(DomainError):
            gen_exp_integral(1, -1)

    def test_relation_to_standard_form(self):
        for p in (1, 2, 3):
            for z in (0.5, 1.0, 2.0):
                self.assertAlmostEqual(
                    gen_exp_integral(p, z), standard_exp_integral(p, z * z), places=9
                )

    def test_matches_trapezoid_integration(self):
        for p in (1, 2, 3):
            for z in (0.5, 1.0, 2.0):
                # e^{-zt} is below 1e-17 beyond t = z + 40/z.
                t = np.linspace(z, z + 40.0 / z, 1_000_001)
                integral = integrate.trapezoid(np.exp(-z * t) * t ** (-p), t) * z ** (p - 1)
                self.assertAlmostEqual(gen_exp_integral(p, z), integral, delta=1e-6)

    def test_standard_form_against_scipy(self):
        for p in (1, 2, 5):
            for z in (0.1, 1.0, 3.0):
                self.assertAlmostEqual(standard_exp_integral(p, z), special.expn(p, z), places=9)


class TestErlang(unittest.TestCase):
    def test_known_values(self):
        self.assertAlmostEqual(erlang_cdf(1, 1), 1 - math.exp(-1), places=12)
        self.assertEqual(erlang_cdf(2, 0), 0.0)
        self.assertAlmostEqual(erlang_cdf(3, 10), 0.9972306042844884, places=7)

    def test_matches_finite_sum(self):
        for k in (1, 2, 5):
            for v in (0.1, 1.0, 4.0):
                tail = sum(v**j * math.exp(-v) / math.factorial(j) for j in range(k))
                self.assertAlmostEqual(erlang_cdf(k, v), 1 - tail, places=12)

    def test_monotone(self):
        grid = np.linspace(0, 20, 201)
        for k in (1, 2, 3):
            values = [erlang_cdf(k, v) for v in grid]
            self.assertTrue(all(a <= b for a, b in zip(values, values[1:])))
        for v in (0.5, 2.0, 8.0):
            by_k = [erlang_cdf(k, v) for k in range(1, 6)]
            self.assertTrue(all(a >= b for a, b in zip(by_k, by_k[1:])))

    def test_invalid_arguments(self):
        with self.assertRaises(DomainError):
            erlang_cdf(0, 1)
        with self.assertRaises(DomainError):
            erlang_cdf(1, -0.5)
