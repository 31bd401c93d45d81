# Licensed under the Apache License, Version 2.0 (the "License"); you may
# not use this file except in compliance with the License. You may obtain
# a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.

import math

import numpy as np

from interweave import ergodics
from interweave import exception
from interweave import kernels
from interweave import semigroups
from interweave import special
from interweave.tests import base

Measure = semigroups.DiscreteMeasure


class TestPhi(base.TestCase):
    def test_values_at_one(self):
        for phi in (
            ergodics.Phi.kl(),
            ergodics.Phi.power(2),
            ergodics.Phi.absdev(),
        ):
            self.assertEqual(0.0, float(phi(1.0)))

    def test_convex(self):
        grid = np.linspace(0.0, 5.0, 26)
        for phi in (ergodics.Phi.kl(), ergodics.Phi.power(3)):
            self.assertLessEqual(phi.secant_defect(grid), 1e-14)

    def test_power_domain(self):
        self.assertRaises(exception.DomainError, ergodics.Phi.power, 0.5)


class TestDistances(base.TestCase):
    def test_kl_of_a_point_mass(self):
        value = ergodics.phi_entropy(
            Measure.dirac(2, 0), Measure([0.5, 0.5]), ergodics.Phi.kl()
        )

        self.assertAlmostEqual(math.log(2.0), value, places=14)

    def test_singular_part(self):
        m, nu = Measure([0.5, 0.5]), Measure([1.0, 0.0])

        self.assertEqual(
            math.inf, ergodics.phi_entropy(m, nu, ergodics.Phi.kl())
        )
        self.assertAlmostEqual(
            0.25, ergodics.phi_entropy(m, nu, ergodics.Phi.power(2))
        )
        self.assertAlmostEqual(
            1.0, ergodics.phi_entropy(m, nu, ergodics.Phi.absdev())
        )
        self.assertAlmostEqual(0.5, ergodics.tv(m, nu))

    def test_power_entropy_root(self):
        m, nu = Measure([0.2, 0.3, 0.5]), Measure([1 / 3, 1 / 3, 1 / 3])
        for p in (2.0, 7.0):
            expected = ergodics.phi_entropy(m, nu, ergodics.Phi.power(p))

            self.assertAlmostEqual(
                expected ** (1.0 / p),
                ergodics.power_entropy_root(m, nu, p),
                places=12,
            )

    def test_power_root_without_deficit(self):
        nu = Measure([0.5, 0.5])

        self.assertEqual(0.0, ergodics.power_entropy_root(nu, nu, 3.0))

    def test_separation(self):
        m, nu = Measure([0.2, 0.8]), Measure([0.5, 0.5])

        self.assertAlmostEqual(0.6, ergodics.separation(m, nu))
        self.assertAlmostEqual(0.3, ergodics.tv(m, nu))

    def test_size_mismatch(self):
        self.assertRaises(
            exception.DimensionMismatch,
            ergodics.tv,
            Measure([1.0]),
            Measure([0.5, 0.5]),
        )


class TestTwoPointConstants(base.TestCase):
    def test_uniform_limit(self):
        self.assertEqual(2.0, ergodics.two_point_log_sobolev(1.0, (0.5, 0.5)))
        self.assertEqual(6.0, ergodics.two_point_log_sobolev(3.0, (0.5, 0.5)))

    def test_log_sobolev_formula(self):
        for mu_min in (0.05, 0.25):
            expected = 4 * (1 - 2 * mu_min) / math.log(1 / mu_min - 1)

            self.assertAlmostEqual(
                expected,
                ergodics.two_point_log_sobolev(1.0, (mu_min, 1 - mu_min)),
                places=12,
            )

    def test_crossover(self):
        self.assertIsNone(ergodics.crossover(2.0, 1.0, 1.0))
        self.assertEqual(2.0, ergodics.crossover(1.0, 2.0, 1.0))

    def test_two_point_crossover(self):
        self.assertIsNone(ergodics.two_point_crossover(1.0, (0.5, 0.5)))

        time = ergodics.two_point_crossover(1.0, (0.25, 0.75))

        direct = ergodics.two_point_log_sobolev(1.0, (0.25, 0.75))
        self.assertAlmostEqual(
            2.0 * math.log(3.0) / (2.0 - direct), time, places=12
        )

    def test_isospectral_bound(self):
        grid = (0.1, 0.3, 0.5)

        factor, target = ergodics.isospectral_bound(
            (0.25, 0.75), 1.0, grid, 5.0
        )

        candidates = []
        for mu0 in grid:
            mu_tilde = (mu0, 1 - mu0)
            t0 = kernels.two_point_optimal((0.25, 0.75), mu_tilde).t0
            rate = ergodics.two_point_log_sobolev(1.0, mu_tilde)
            candidates.append(math.exp(-rate * max(0.0, 5 - t0)))
        self.assertAlmostEqual(min(candidates), factor, places=14)
        self.assertIn(target[0], grid)

    def test_isospectral_bound_at_zero(self):
        factor, _ = ergodics.isospectral_bound(
            (0.25, 0.75), 1.0, (0.5,), 0.0
        )

        self.assertEqual(1.0, factor)


class TestHardy(base.TestCase):
    def test_bounds(self):
        constants = ergodics.hardy_constant(1.0, 1.0, 200)

        self.assertGreaterEqual(constants.hardy, 2.0 * math.log(2.0))
        self.assertLess(constants.lower, constants.upper)
        self.assertAlmostEqual(
            ergodics.HARDY_UPPER_FACTOR / constants.hardy, constants.upper
        )

    def test_cap_is_converged(self):
        small = ergodics.hardy_constant(1.0, 1.0, 200).hardy
        large = ergodics.hardy_constant(1.0, 1.0, 400).hardy

        self.assertAlmostEqual(small, large, places=6)

    def test_default_cap(self):
        self.config(group="ergodics", hardy_cap=150)

        constants = ergodics.hardy_constant(2.0, 0.5)

        self.assertTrue(math.isfinite(constants.hardy))
        self.assertGreater(constants.hardy, 0.0)

    def test_short_lattice(self):
        self.assertRaises(
            exception.PrecisionError, ergodics.hardy_constant, 1.0, 10.0, 20
        )

    def test_domain(self):
        self.assertRaises(
            exception.DomainError, ergodics.hardy_constant, 0.0, 1.0, 100
        )


class TestDecay(base.TestCase):
    def setUp(self):
        super().setUp()
        self.mu = (0.25, 0.75)
        self.sg = semigroups.two_point_semigroup(1.0, self.mu)
        self.grid = np.linspace(0.0, 6.0, 31)

    def test_two_point_curve(self):
        curve = ergodics.decay_experiment(
            self.sg, Measure.dirac(2, 0), self.grid
        )

        self.assertAlmostEqual(math.log(4.0), curve.initial, places=14)
        self.assertTrue(ergodics.is_nonincreasing(curve.entropies))
        np.testing.assert_allclose(
            0.75 * np.exp(-self.grid), curve.tvs, rtol=1e-8, atol=1e-12
        )
        self.assertTrue(np.all(curve.entropies >= 2.0 * curve.tvs**2))

    def test_transferred_bound(self):
        warm_up = kernels.two_point_optimal(self.mu, (0.5, 0.5)).t0
        for start in (0, 1):
            curve = ergodics.decay_experiment(
                self.sg, Measure.dirac(2, start), self.grid
            )

            self.assertTrue(
                ergodics.check_transfer_bound(curve, 2.0, warm_up).passed
            )
            direct = ergodics.two_point_log_sobolev(1.0, self.mu)
            verdict = ergodics.check_transfer_bound(curve, direct)
            self.assertTrue(verdict.passed)

    def test_violated_bound(self):
        curve = ergodics.decay_experiment(
            self.sg, Measure.dirac(2, 0), self.grid
        )

        verdict = ergodics.check_transfer_bound(curve, 50.0)

        self.assertFalse(verdict.passed)
        self.assertLess(verdict.margin, 0.0)
        self.assertGreater(verdict.worst_time, 0.0)

    def test_bound_curve(self):
        curve = ergodics.transfer_bound_curve(
            [0.0, 1.0, 3.0], 2.0, 1.0, 3.0, 2.0
        )

        np.testing.assert_allclose([6.0, 6.0, 6.0 * math.exp(-4.0)], curve)

    def test_grid_must_increase(self):
        self.assertRaises(
            exception.DomainError,
            ergodics.decay_experiment,
            self.sg,
            Measure.dirac(2, 0),
            [1.0, 0.5],
        )

    def test_separation_transfer(self):
        sg = semigroups.two_point_semigroup(1.0, (0.5, 0.5))

        gap = ergodics.separation_transfer(
            sg, Measure.dirac(2, 0), self.grid, p=200.0
        )

        self.assertLess(gap, 0.01)

    def test_is_nonincreasing(self):
        self.assertTrue(ergodics.is_nonincreasing([3.0, 2.0, 2.0]))
        self.assertFalse(ergodics.is_nonincreasing([1.0, 1.5]))


class TestHyperbound(base.TestCase):
    def setUp(self):
        super().setUp()
        self.sg = semigroups.two_point_semigroup(1.0, (0.25, 0.75))
        self.rng = special.make_rng(4)

    def test_contraction_in_l2(self):
        norm = ergodics.hyperbound_norm(self.sg, 0.7, 2.0, 3, self.rng, 50)

        self.assertAlmostEqual(1.0, norm, places=10)

    def test_identity_in_l4(self):
        norm = ergodics.hyperbound_norm(self.sg, 0.0, 4.0, 3, self.rng, 50)

        self.assertAlmostEqual(math.sqrt(2.0), norm, places=8)

    def test_domain(self):
        self.assertRaises(
            exception.DomainError,
            ergodics.hyperbound_norm,
            self.sg,
            1.0,
            1.5,
            0,
            self.rng,
        )
        self.assertRaises(
            exception.DomainError,
            ergodics.hyperbound_norm,
            self.sg,
            -1.0,
            2.0,
            0,
            self.rng,
        )

    def test_requires_reversibility(self):
        cycle = semigroups.FiniteSemigroup(
            [[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0], [1.0, 0.0, -1.0]],
            Measure([1 / 3, 1 / 3, 1 / 3]),
        )

        self.assertRaises(
            exception.DomainError,
            ergodics.hyperbound_norm,
            cycle,
            1.0,
            2.0,
            0,
            self.rng,
        )


class TestDataProcessing(base.TestCase):
    def test_identity_channel(self):
        after, before = ergodics.data_processing_gap(
            [0.3, 0.7], [0.6, 0.4], np.eye(2), ergodics.Phi.kl()
        )

        self.assertAlmostEqual(before, after, places=14)

    def test_random_triples(self):
        result = ergodics.data_processing_test(50, special.make_rng(9))

        self.assertTrue(result.passed)
        self.assertEqual(50, result.trials)
        self.assertGreaterEqual(
            result.worst_margin, -ergodics.DATA_PROCESSING_SLACK
        )

    def test_trials(self):
        self.assertRaises(
            exception.DomainError,
            ergodics.data_processing_test,
            0,
            special.make_rng(0),
        )
