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

import csv
import math
import pathlib
from unittest import mock

import fixtures
import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import linalg
from scipy import special as sp

from interweave import exception
from interweave import polyop
from interweave.tests import base
from interweave import warmup


def _laguerre(beta, degree=6, scale=1.0):
    return polyop.generator_polyop(
        polyop.LaguerreDiffusion(beta, scale), degree
    )


class TestGenerators(base.TestCase):
    def test_constants_are_annihilated(self):
        specs = [
            polyop.BesselDiffusion(0.7),
            polyop.BesselBirthDeath(0.7, 2.0),
            polyop.LaguerreDiffusion(1.5, 0.5),
            polyop.LaguerreBirthDeath(1.5, 0.5),
            polyop.Jacobi(6.0, 2.0),
            polyop.OrnsteinUhlenbeck(1.0, 2.0),
        ]
        for spec in specs:
            gen = polyop.generator_polyop(spec, 5)
            np.testing.assert_array_equal(np.zeros(6), gen.matrix[:, 0])
            self.assertTrue(gen.is_upper_triangular())

    def test_laguerre_action_on_square(self):
        # L x^2 = 2 x + (beta - x) 2 x
        gen = _laguerre(1.5, 3)

        np.testing.assert_array_equal([0.0, 5.0, -2.0, 0.0], gen.matrix[:, 2])

    def test_default_degree_from_config(self):
        self.config(degree=4, group="polyop")

        gen = polyop.generator_polyop(polyop.BesselDiffusion(1.0))

        self.assertEqual(4, gen.degree)

    def test_degree_must_be_positive(self):
        self.assertRaises(
            exception.DomainError,
            polyop.generator_polyop,
            polyop.BesselDiffusion(1.0),
            0,
        )

    def test_two_point_has_degree_one(self):
        spec = polyop.TwoPoint(2.0, 0.25)

        gen = polyop.generator_polyop(spec, 1)

        np.testing.assert_array_equal(np.diag([0.0, -2.0]), gen.matrix)
        self.assertRaises(
            exception.DimensionMismatch, polyop.generator_polyop, spec, 3
        )

    def test_jacobi_domain(self):
        self.assertRaises(exception.DomainError, polyop.Jacobi, 4.0, 1.0)
        self.assertRaises(exception.DomainError, polyop.Jacobi, 3.0, 2.0)

    def test_jacobi_invariant_moments_annihilate_generator(self):
        spec = polyop.Jacobi(8.0, 1.5)
        gen = polyop.generator_polyop(spec, 6)
        moments = np.array([spec.invariant_moment(n) for n in range(7)])

        np.testing.assert_allclose(
            np.zeros(7), moments @ gen.matrix, atol=1e-10
        )

    def test_bernstein_spec(self):
        spec = polyop.BernsteinSpec(m=0.2, atoms=((1.0, 0.5),))

        self.assertEqual(0.2, spec.phi(0.0))
        self.assertEqual(0.5, spec.pi_bar)
        self.assertAlmostEqual(
            1.0 + 0.2 + 0.5 * (math.exp(-1.0) - 1.0), spec.phi(1.0)
        )

    def test_bernstein_spec_domain(self):
        self.assertRaises(exception.DomainError, polyop.BernsteinSpec, m=-1)
        self.assertRaises(
            exception.DomainError, polyop.BernsteinSpec, atoms=((2.0, 1.0),)
        )
        self.assertRaises(
            exception.DomainError, polyop.BernsteinSpec, atoms=((0.0, 1.0),)
        )


class TestSemigroups(base.TestCase):
    def test_first_moment(self):
        beta, scale, t = 1.5, 2.0, 0.7

        p = polyop.semigroup_polyop(_laguerre(beta, 4, scale), t)

        decay = math.exp(-t)
        np.testing.assert_allclose(
            [scale * beta * (1.0 - decay), decay, 0.0, 0.0, 0.0],
            p.matrix[:, 1],
            rtol=1e-12,
            atol=1e-15,
        )

    def test_matches_dense_expm(self):
        gen = _laguerre(0.5, 6)

        p = polyop.semigroup_polyop(gen, 1.3)

        np.testing.assert_allclose(
            linalg.expm(1.3 * gen.matrix),
            p.matrix,
            rtol=1e-8,
            atol=1e-9 * np.max(np.abs(p.matrix)),
        )

    def test_semigroup_law(self):
        gen = _laguerre(2.0, 8)
        s, t = 0.4, 1.1

        left = polyop.semigroup_polyop(gen, s) @ polyop.semigroup_polyop(
            gen, t
        )
        right = polyop.semigroup_polyop(gen, s + t)

        np.testing.assert_allclose(right.matrix, left.matrix, rtol=1e-11)

    def test_zero_time_is_identity(self):
        p = polyop.semigroup_polyop(_laguerre(1.0, 3), 0.0)

        np.testing.assert_array_equal(np.eye(4), p.matrix)

    def test_negative_time(self):
        self.assertRaises(
            exception.DomainError,
            polyop.semigroup_polyop,
            _laguerre(1.0, 3),
            -0.1,
        )

    @mock.patch.object(polyop.LOG, "warning")
    def test_non_metzler_falls_back(self, mock_warning):
        gen = polyop.PolyOp(
            np.array([[0.0, -1.0], [0.0, -1.0]]),
            polyop.Basis.MONOMIAL,
            polyop.Basis.MONOMIAL,
            polyop.Space.CONTINUOUS,
            polyop.Space.CONTINUOUS,
        )

        p = polyop.semigroup_polyop(gen, 0.5)

        np.testing.assert_allclose(linalg.expm(0.5 * gen.matrix), p.matrix)
        mock_warning.assert_called_once()


class TestBases(base.TestCase):
    def test_stirling_tables_are_inverse(self):
        product = polyop.stirling_first_kind(6) @ polyop.stirling_second_kind(
            6
        )

        np.testing.assert_allclose(np.eye(7), product, atol=1e-12)

    def test_convert_birth_death_to_monomials(self):
        # L n^2 = sigma ((2 + 2 beta) n + beta)
        beta, sigma = 0.5, 2.0
        gen = polyop.generator_polyop(polyop.BesselBirthDeath(beta, sigma), 3)

        mono = polyop.convert_basis(gen, polyop.Basis.MONOMIAL)

        self.assertEqual(polyop.Basis.MONOMIAL, mono.dom)
        self.assertEqual(polyop.Basis.MONOMIAL, mono.cod)
        np.testing.assert_allclose(
            [sigma * beta, sigma * (2.0 + 2.0 * beta), 0.0, 0.0],
            mono.matrix[:, 2],
        )

    def test_convert_continuous_operator(self):
        self.assertRaises(
            exception.DomainError,
            polyop.convert_basis,
            _laguerre(1.0, 3),
            polyop.Basis.FALLING_FACTORIAL,
        )

    def test_composition_checks_bases(self):
        continuous = _laguerre(1.0, 3)
        discrete = polyop.generator_polyop(polyop.BesselBirthDeath(1.0), 3)

        self.assertRaises(
            exception.DimensionMismatch, continuous.__matmul__, discrete
        )
        self.assertRaises(
            exception.DimensionMismatch,
            continuous.__matmul__,
            _laguerre(1.0, 4),
        )


class TestEigenpolynomials(base.TestCase):
    def test_laguerre_eigenpolynomials(self):
        beta = 1.5
        eigenvalues, vectors = polyop.eigenpolynomials(_laguerre(beta, 5))

        np.testing.assert_array_equal(-np.arange(6.0), eigenvalues)
        x = np.array([0.2, 1.0, 3.5])
        for n in range(6):
            expected = (-1.0) ** n * math.factorial(n) * sp.eval_genlaguerre(
                n, beta - 1.0, x
            )
            np.testing.assert_allclose(
                expected, npoly.polyval(x, vectors[:, n]),
                rtol=1e-9,
                atol=1e-8,
            )

    def test_degenerate_spectrum(self):
        gen = polyop.generator_polyop(polyop.BesselDiffusion(1.0), 3)

        self.assertRaises(
            exception.DegeneracyError, polyop.eigenpolynomials, gen
        )

    def test_semigroup_multipliers(self):
        gen = _laguerre(0.5, 5)
        p = polyop.semigroup_polyop(gen, 0.3)

        multipliers = polyop.eigen_multipliers(p, gen)

        np.testing.assert_allclose(np.exp(-0.3 * np.arange(6)), multipliers)
        self.assertLess(polyop.eigenvector_residual(p, gen), 1e-12)

    def test_multipliers_need_a_diagonal_action(self):
        gen = _laguerre(0.5, 3)
        matrix = np.eye(4)
        matrix[0, 2] = 1.0
        op = polyop.PolyOp(
            matrix, gen.dom, gen.cod, gen.dom_space, gen.cod_space
        )

        self.assertGreater(polyop.eigenvector_residual(op, gen), 1e-3)
        self.assertRaises(
            exception.DimensionMismatch, polyop.eigen_multipliers, op, gen
        )

    def test_dilation_conjugates_scale(self):
        beta, scale = 1.5, 2.5

        result = polyop.similarity_transform(
            _laguerre(beta, 5), polyop.dilation(1.0 / scale, 5)
        )

        np.testing.assert_allclose(
            _laguerre(beta, 5, scale).matrix, result.matrix, rtol=1e-12
        )

    def test_dilation_by_zero(self):
        self.assertRaises(exception.SingularError, polyop.dilation, 0.0, 3)


class TestKernelsAndWarmups(base.TestCase):
    def test_identity_kernel_intertwines(self):
        gen = _laguerre(1.0, 4)

        residual = polyop.check_intertwining(
            gen, polyop.identity(4), gen, absolute=True
        )

        self.assertEqual(0.0, residual)

    def test_dirac_warmup_is_semigroup(self):
        gen = _laguerre(1.0, 5)

        p = polyop.warmup_polyop(gen, warmup.Dirac(0.8))

        np.testing.assert_allclose(
            polyop.semigroup_polyop(gen, 0.8).matrix, p.matrix
        )
        self.assertEqual(
            0.0,
            polyop.check_interweaving(
                polyop.identity(5), p, p, absolute=False
            ),
        )

    def test_neg_log_beta_warmup_multipliers(self):
        gen = _laguerre(2.0, 6)
        law = warmup.NegLogBeta(0.5, 1.5)

        p = polyop.warmup_polyop(gen, law)

        np.testing.assert_allclose(
            law.laplace(np.arange(7.0)), np.diag(p.matrix), rtol=1e-10
        )
        self.assertTrue(p.is_upper_triangular())

    def test_v_beta_domain(self):
        spec = polyop.BernsteinSpec(m=0.2, atoms=((1.0, 0.5),))

        self.assertRaises(exception.DomainError, polyop.VBeta, spec, 0.5)

    def test_v_beta_multipliers(self):
        spec = polyop.BernsteinSpec()
        op = polyop.kernel_polyop(polyop.VBeta(spec, 1.0), 4)

        # phi(u) = u, so W(n+1) = n! and the multipliers are 1/(n+1)
        np.testing.assert_allclose(
            1.0 / np.arange(1.0, 6.0), np.diag(op.matrix), rtol=1e-12
        )

    def test_kernel_without_moments(self):
        self.assertRaises(
            exception.UnsupportedError, polyop.kernel_polyop, object(), 3
        )

    def test_kernel_must_preserve_constants(self):
        kernel = mock.Mock(
            dom=polyop.Basis.MONOMIAL,
            cod=polyop.Basis.MONOMIAL,
            dom_space=polyop.Space.CONTINUOUS,
            cod_space=polyop.Space.CONTINUOUS,
        )
        kernel.moment_matrix.return_value = 2.0 * np.eye(4)

        self.assertRaises(
            exception.InfeasibleError, polyop.kernel_polyop, kernel, 3
        )

    def test_dump_csv(self):
        tmp = self.useFixture(fixtures.TempDir()).path
        path = pathlib.Path(tmp) / "op.csv"

        polyop.dump_csv(_laguerre(1.0, 2), path)

        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(
            ["monomial<-monomial N=2", "col0", "col1", "col2"], rows[0]
        )
        self.assertEqual(["row1", "0.0", "-1.0", "4.0"], rows[2])
