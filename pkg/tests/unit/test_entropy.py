# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

import math
import unittest
from functools import partial

import numpy as np
import pytest
from scipy import stats

from distributions import (
    GGParams,
    RandomStream,
    STParams,
    canonical_gg,
    gg_entropy,
    gg_log_pdf,
    iep,
    sample_gg,
    st_entropy,
    st_log_pdf,
)
from entropy import (
    EntropyEstimate,
    entropy_quadrature,
    knn_entropy,
    knn_entropy_k1,
    local_log_terms,
    poisson_kth_distance,
    poisson_local_mean,
)
from errors import ArityError, DuplicatePointError, InconsistentDensityError
from neighbors import Sample
from specfun import EULER_GAMMA, erlang_cdf, unit_ball_volume

HALF_LOG_2_PI_E = 0.5 * math.log(2 * math.pi * math.e)


class TestKnnEntropy(unittest.TestCase):
    def setUp(self):
        self.line = Sample(np.array([0.0, 1.0, 3.0]))

    def test_hand_expanded_line(self):
        g = math.exp(EULER_GAMMA)
        expected = (2 * math.log(1 * 2 * 2 * g) + math.log(2 * 2 * 2 * g)) / 3
        estimate = knn_entropy(self.line, 1)
        self.assertAlmostEqual(estimate.value, expected, places=14)
        self.assertEqual((estimate.n, estimate.k, estimate.dim), (3, 1, 1))
        self.assertEqual(estimate.estimator, "knn")

    def test_k1_form_equals_general_form(self):
        for seed in range(5):
            sample = sample_gg(canonical_gg(2, 1.0), 300, RandomStream(seed=seed))
            k1 = knn_entropy_k1(sample)
            self.assertAlmostEqual(k1.value, knn_entropy(sample, 1).value, delta=1e-12)
            self.assertEqual(k1.estimator, "kl")

    def test_two_points(self):
        d = 0.37
        estimate = knn_entropy_k1(Sample(np.array([1.0, 1.0 + d])))
        self.assertAlmostEqual(estimate.value, math.log(d) + math.log(2) + EULER_GAMMA, places=12)

    def test_scaling_law(self):
        sample = sample_gg(canonical_gg(2, 1.0), 500, RandomStream(seed=3))
        base = knn_entropy(sample, 2).value
        for a in (0.01, 100.0):
            scaled = knn_entropy(sample.scaled(a), 2).value
            self.assertAlmostEqual(scaled, 2 * math.log(a) + base, delta=1e-12)

    def test_local_terms_average_to_estimate(self):
        sample = sample_gg(canonical_gg(3, 2.0), 400, RandomStream(seed=9))
        terms, backend = local_log_terms(sample, 3)
        self.assertEqual(terms.shape, (400,))
        self.assertEqual(backend, "brute")
        self.assertAlmostEqual(math.fsum(terms) / 400, knn_entropy(sample, 3).value, places=12)

    def test_backends_agree_exactly(self):
        sample = sample_gg(canonical_gg(2, 2.0), 800, RandomStream(seed=4))
        self.assertEqual(
            knn_entropy(sample, 2, method="brute").value,
            knn_entropy(sample, 2, method="kdtree").value,
        )

    def test_errors_propagate(self):
        with self.assertRaises(ArityError):
            knn_entropy(self.line, 3)
        with self.assertRaises(DuplicatePointError):
            knn_entropy(Sample(np.array([0.0, 1.0, 1.0])), 1)

    def test_estimate_record_validates(self):
        with self.assertRaises(ValueError):
            EntropyEstimate(value=0.0, n=1, k=1, dim=1)

    def test_standard_normal(self):
        sample = sample_gg(iep(1, 2.0), 10_000, RandomStream(seed=1))
        self.assertAlmostEqual(knn_entropy(sample, 1).value, HALF_LOG_2_PI_E, delta=0.05)

    def test_standard_laplace(self):
        sample = sample_gg(GGParams(dim=1, shape=1.0, rate=1.0), 10_000, RandomStream(seed=2))
        self.assertAlmostEqual(knn_entropy(sample, 3).value, 1 + math.log(2), delta=0.05)

    def test_bivariate_normal_k1(self):
        params = iep(2, 2.0)
        sample = sample_gg(params, 10_000, RandomStream(seed=3))
        self.assertAlmostEqual(knn_entropy_k1(sample).value, gg_entropy(params), delta=0.05)

    @pytest.mark.slow
    def test_closed_form_grid(self):
        # Each case averages five independent draws of N = 10⁴.
        root = RandomStream(seed=100)
        for m in (1, 2, 3):
            for s in (1.0, 2.0):
                params = canonical_gg(m, s)
                for k in (1, 2, 3):
                    estimates = [
                        knn_entropy(sample_gg(params, 10_000, root.derive("grid", m, s, k, j)), k)
                        for j in range(5)
                    ]
                    mean = float(np.mean([e.value for e in estimates]))
                    self.assertAlmostEqual(mean, gg_entropy(params), delta=0.05, msg=(m, s, k))

    @pytest.mark.slow
    def test_mean_squared_error_decreases(self):
        params = canonical_gg(2, 1.0)
        truth = gg_entropy(params)
        root = RandomStream(seed=2024)
        for k in (1, 3):
            mse = []
            for n in (500, 2000, 8000):
                errors = [
                    knn_entropy(sample_gg(params, n, root.derive("mse", k, n, j)), k).value - truth
                    for j in range(50)
                ]
                mse.append(float(np.mean(np.square(errors))))
            self.assertLess(mse[1], mse[0])
            self.assertLess(mse[2], mse[1])


class TestQuadrature(unittest.TestCase):
    def test_standard_normal(self):
        params = iep(1, 2.0)
        value = entropy_quadrature(lambda x: gg_log_pdf(params, x), 1, radius=40)
        self.assertAlmostEqual(value, HALF_LOG_2_PI_E, delta=1e-6)

    def test_laplace(self):
        params = GGParams(dim=1, shape=1.0, rate=1.0)
        value = entropy_quadrature(lambda x: gg_log_pdf(params, x), 1, radius=60)
        self.assertAlmostEqual(value, 1 + math.log(2), delta=1e-6)

    def test_gg_grid_matches_closed_form(self):
        for m in (1, 2, 3):
            for s in (1.0, 2.0, 4.0):
                params = canonical_gg(m, s)
                value = entropy_quadrature(lambda x, p=params: gg_log_pdf(p, x), m)
                self.assertAlmostEqual(value, gg_entropy(params), delta=1e-6)

    def test_student_t_regression_constant(self):
        params = STParams(dim=1, dof=3.0)
        value = entropy_quadrature(lambda x: st_log_pdf(params, x), 1, radius=1e4)
        self.assertAlmostEqual(value, 1.7734776, delta=1e-6)
        self.assertAlmostEqual(value, st_entropy(params), delta=1e-6)

    def test_unnormalized_density_is_rejected(self):
        params = iep(1, 2.0)
        with self.assertRaises(InconsistentDensityError):
            entropy_quadrature(lambda x: math.log(2) + gg_log_pdf(params, x), 1, radius=40)

    def test_support_too_small_is_rejected(self):
        params = iep(2, 2.0)
        with self.assertRaises(InconsistentDensityError):
            entropy_quadrature(lambda x: gg_log_pdf(params, x), 2, radius=2)

    def test_non_isotropic_one_dimensional(self):
        self.assertAlmostEqual(
            entropy_quadrature(lambda x: 0.0, 1, isotropic=False, support=(0.0, 1.0)),
            0.0,
            delta=1e-12,
        )
        self.assertAlmostEqual(
            entropy_quadrature(lambda x: -x[0], 1, isotropic=False, support=(0.0, 60.0)),
            1.0,
            delta=1e-8,
        )

    def test_non_isotropic_needs_one_dimension(self):
        with self.assertRaises(ValueError):
            entropy_quadrature(lambda x: 0.0, 2, isotropic=False)


class TestPoissonIdentity(unittest.TestCase):
    def test_kth_distance_has_erlang_law(self):
        for k in (1, 2, 3):
            for intensity in (0.5, 2.0):
                stream = RandomStream(seed=42).derive("erlang", k, intensity)
                rho = poisson_kth_distance(intensity, k, 2, 10_000, stream)
                volume = intensity * unit_ball_volume(2) * rho**2
                cdf = np.vectorize(partial(erlang_cdf, k), otypes=[float])
                result = stats.kstest(volume, cdf)
                self.assertLessEqual(result.statistic, 0.02)

    def test_local_mean_is_minus_log_intensity(self):
        for intensity in (0.5, 2.0):
            mean, se = poisson_local_mean(
                intensity, 2, 1, 5_000, RandomStream(seed=7).derive("local", intensity)
            )
            self.assertLess(abs(mean + math.log(intensity)), 3 * se)
            self.assertGreater(se, 0)

    def test_reproducible(self):
        stream = RandomStream(seed=5)
        np.testing.assert_array_equal(
            poisson_kth_distance(1.0, 2, 3, 50, stream),
            poisson_kth_distance(1.0, 2, 3, 50, stream),
        )
