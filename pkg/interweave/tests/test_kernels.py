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

from interweave import exception
from interweave import kernels
from interweave import polyop
from interweave import special
from interweave.tests import base


class TestMomentActions(base.TestCase):
    def test_poisson_factorial_moments(self):
        op = polyop.kernel_polyop(kernels.PoissonKernel(2.0), 3)

        self.assertEqual(polyop.Basis.FALLING_FACTORIAL, op.dom)
        self.assertEqual(polyop.Basis.MONOMIAL, op.cod)
        np.testing.assert_array_equal(np.diag([1.0, 2.0, 4.0, 8.0]), op.matrix)

    def test_poisson_in_monomials(self):
        op = polyop.kernel_polyop(
            kernels.PoissonKernel(2.0), 2, target=polyop.Basis.MONOMIAL
        )

        # E[N^2] = (sigma x)^2 + sigma x
        np.testing.assert_allclose([0.0, 2.0, 4.0], op.matrix[:, 2])

    def test_gamma_first_moment(self):
        beta, rate = 1.5, 2.0

        op = polyop.kernel_polyop(kernels.GammaKernel(beta, rate), 3)

        np.testing.assert_allclose(
            [beta / rate, 1.0 / rate, 0.0, 0.0], op.matrix[:, 1]
        )

    def test_beta_multipliers(self):
        kernel = kernels.BetaMultKernel(2.0, 0.5)

        self.assertEqual(1.0, kernel.multiplier(0.0))
        self.assertAlmostEqual(0.5 / 2.5, kernel.multiplier(1.0))

    def test_b_star_first_moment(self):
        op = polyop.kernel_polyop(kernels.BStarKernel(1.5), 3)

        np.testing.assert_allclose([1.5, 1.0, 0.0, 0.0], op.matrix[:, 1])

    def test_domain(self):
        self.assertRaises(exception.DomainError, kernels.PoissonKernel, 0.0)
        self.assertRaises(
            exception.DomainError, kernels.GammaKernel, -1.0, 1.0
        )
        self.assertRaises(
            exception.DomainError, kernels.BetaMultKernel, 1.0, 0.0
        )


class TestRelations(base.TestCase):
    def test_poisson_intertwines_bessel_and_birth_death(self):
        beta, sigma, degree = 0.7, 2.0, 8
        gen = polyop.generator_polyop(polyop.BesselDiffusion(beta), degree)
        gen_tilde = polyop.generator_polyop(
            polyop.BesselBirthDeath(beta, sigma), degree
        )
        kernel = polyop.kernel_polyop(kernels.PoissonKernel(sigma), degree)

        residual = polyop.check_intertwining(gen, kernel, gen_tilde)

        self.assertLess(residual, 1e-14)

    def test_poisson_gamma_factorise_bessel_semigroup(self):
        beta, sigma, degree = 1.5, 0.5, 8
        gen = polyop.generator_polyop(polyop.BesselDiffusion(beta), degree)
        kernel = polyop.kernel_polyop(kernels.PoissonKernel(sigma), degree)
        kernel_tilde = polyop.kernel_polyop(
            kernels.GammaKernel(beta, sigma), degree
        )

        residual = polyop.check_interweaving(
            kernel, kernel_tilde, polyop.semigroup_polyop(gen, 1.0 / sigma)
        )

        self.assertLess(residual, 1e-12)
        # E[X_t] = x + beta t
        np.testing.assert_allclose(
            [beta / sigma, 1.0],
            (kernel @ kernel_tilde).matrix[:2, 1],
        )

    def test_b_star_is_beta_adjoint_on_constants(self):
        op = polyop.kernel_polyop(kernels.BStarKernel(2.0), 4)

        np.testing.assert_array_equal(np.eye(5)[:, 0], op.matrix[:, 0])


class TestSampling(base.TestCase):
    def test_gamma_kernel_mean(self):
        kernel = kernels.GammaKernel(1.5, 2.0)

        estimate, se = kernels.apply_kernel_mc(
            kernel, lambda y: y, 2, 20000, special.make_rng(4)
        )

        self.assertLess(abs(estimate - 3.5 / 2.0), 5 * se)

    def test_beta_kernel_second_moment(self):
        kernel = kernels.BetaMultKernel(1.0, 1.0)

        estimate, se = kernels.apply_kernel_mc(
            kernel, lambda y: y**2, 3.0, 20000, special.make_rng(5)
        )

        # E[(3 U)^2] = 3 for U uniform
        self.assertLess(abs(estimate - 3.0), 5 * se)

    def test_single_sample_has_no_error_bar(self):
        _, se = kernels.apply_kernel_mc(
            kernels.PoissonKernel(1.0),
            lambda n: n,
            1.0,
            1,
            special.make_rng(0),
        )

        self.assertEqual(math.inf, se)

    def test_start_points(self):
        rng = special.make_rng(0)

        self.assertRaises(
            exception.DomainError,
            kernels.sample_kernel,
            kernels.PoissonKernel(1.0),
            -1.0,
            rng,
        )
        self.assertRaises(
            exception.DomainError,
            kernels.sample_kernel,
            kernels.GammaKernel(1.0, 1.0),
            1.5,
            rng,
        )

    def test_poisson_draws_are_integers(self):
        draws = kernels.sample_kernel(
            kernels.PoissonKernel(1.0), 2.0, special.make_rng(0), 10
        )

        self.assertEqual((10,), draws.shape)
        self.assertTrue(np.issubdtype(draws.dtype, np.integer))


class TestTwoPoint(base.TestCase):
    def test_kernel_validation(self):
        self.assertRaises(
            exception.DimensionMismatch, kernels.TwoPointKernel, np.eye(3)
        )
        self.assertRaises(
            exception.InfeasibleError,
            kernels.TwoPointKernel,
            [[1.2, -0.2], [0.0, 1.0]],
        )
        self.assertRaises(
            exception.InfeasibleError,
            kernels.TwoPointKernel,
            [[0.5, 0.4], [0.0, 1.0]],
        )

    def test_kernel_sampling(self):
        kernel = kernels.TwoPointKernel([[0.25, 0.75], [1.0, 0.0]])

        draws = kernel.sample(0, special.make_rng(9), 20000)

        se = math.sqrt(0.75 * 0.25 / draws.size)
        self.assertLess(abs(np.mean(draws) - 0.75), 5 * se)
        np.testing.assert_array_equal(
            np.zeros(5), kernel.sample(1, special.make_rng(9), 5)
        )
        self.assertRaises(
            exception.DomainError, kernel.sample, 2, special.make_rng(9)
        )

    def test_model_validation(self):
        self.assertRaises(
            exception.DomainError, kernels.TwoPointModel, 1.0, (0.0, 1.0)
        )
        self.assertRaises(
            exception.DomainError, kernels.TwoPointModel, 1.0, (0.5, 0.6)
        )
        self.assertRaises(
            exception.DomainError, kernels.TwoPointModel, 0.0, (0.5, 0.5)
        )

    def test_eigenfunction_is_normalised(self):
        model = kernels.TwoPointModel(1.0, (0.2, 0.8))
        mu = np.array(model.mu)

        self.assertAlmostEqual(0.0, float(mu @ model.phi))
        self.assertAlmostEqual(1.0, float(mu @ model.phi**2))
        np.testing.assert_allclose(
            -model.phi, model.generator() @ model.phi, atol=1e-15
        )

    def test_lambda_matches_closed_form(self):
        mu, mu_tilde = (0.3, 0.7), (0.6, 0.4)
        for eps in (0.1, 0.5, 0.9):
            matrix, _ = kernels.two_point_lambda(mu, mu_tilde, eps)
            np.testing.assert_allclose(
                kernels.two_point_lambda_closed_form(mu, mu_tilde, eps),
                matrix,
                atol=1e-14,
            )

    def test_lambda_feasibility(self):
        mu, uniform = (0.25, 0.75), (0.5, 0.5)
        eps0 = 1.0 / math.sqrt(3.0)

        _, below = kernels.two_point_lambda(mu, uniform, eps0)
        _, beyond = kernels.two_point_lambda(mu, uniform, 1.05 * eps0)

        self.assertTrue(below)
        self.assertFalse(beyond)

    def test_lambda_needs_positive_eps(self):
        self.assertRaises(
            exception.DomainError,
            kernels.two_point_lambda,
            (0.5, 0.5),
            (0.25, 0.75),
            0.0,
        )

    def test_optimal_warm_up_to_uniform(self):
        mu, uniform = (0.25, 0.75), (0.5, 0.5)

        relation = kernels.two_point_optimal(mu, uniform)

        self.assertAlmostEqual(math.log(3.0), relation.t0)
        self.assertAlmostEqual(1.0 / math.sqrt(3.0), relation.eps0)
        model = kernels.TwoPointModel(1.0, mu)
        tilde = kernels.TwoPointModel(1.0, uniform)
        np.testing.assert_allclose(
            model.semigroup(relation.t0),
            relation.kernel @ relation.kernel_tilde,
            atol=1e-12,
        )
        np.testing.assert_allclose(
            tilde.semigroup(relation.t0),
            relation.kernel_tilde @ relation.kernel,
            atol=1e-12,
        )

    def test_optimal_warm_up_scales_with_rate(self):
        relation = kernels.two_point_optimal((0.25, 0.75), (0.5, 0.5), 2.0)

        self.assertAlmostEqual(math.log(3.0) / 2.0, relation.t0)
