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
from unittest import mock

import fixtures

from interweave import exception
from interweave import experiments
from interweave import semigroups
from interweave.tests import base


def _draw(rng, rows):
    return rng.random()


def _tabulated(rng, rows):
    rows.append((1.0, 1.0, 200, 3.0, 0.1, 0.2))
    return 3.0


def _raising(rng, rows):
    raise exception.InsufficientData(detail="nothing to measure")


def _values(outcome):
    return [
        (check.name, check.value, check.passed) for check in outcome.checks
    ]


def _anchors(outcome):
    return [check.anchor for check in outcome.checks]


class TestWorkers(base.TestCase):
    def setUp(self):
        super().setUp()
        self.useFixture(fixtures.EnvironmentVariable(experiments.WORKERS_ENV))

    def test_configured(self):
        self.config(group="runner", workers=3)

        self.assertEqual(3, experiments.worker_count())

    def test_environment_wins(self):
        self.config(group="runner", workers=3)
        self.useFixture(
            fixtures.EnvironmentVariable(experiments.WORKERS_ENV, "5")
        )

        self.assertEqual(5, experiments.worker_count())

    def test_invalid_environment(self):
        for raw in ("0", "many"):
            self.useFixture(
                fixtures.EnvironmentVariable(experiments.WORKERS_ENV, raw)
            )

            err = self.assertRaises(
                exception.ConfigError, experiments.worker_count
            )
            self.assertIn(experiments.WORKERS_ENV, err.errors[0])


class TestRunChecks(base.TestCase):
    def setUp(self):
        super().setUp()
        self.checks = [
            experiments.Check("draw", _draw, 1.0),
            experiments.Check("too large", experiments._constant(2.0), 1.0),
            experiments.Check("raises", _raising, 1.0),
            experiments.Check(
                "lower bound", _tabulated, 2.0, upper=False, table="hardy"
            ),
        ]

    def test_results(self):
        results, tables = experiments.run_checks(self.checks, seed=11)

        self.assertEqual(
            ["draw", "too large", "raises", "lower bound"],
            [result.name for result in results],
        )
        self.assertEqual(
            [True, False, False, True], [result.passed for result in results]
        )
        self.assertEqual(-1.0, results[1].margin)
        self.assertEqual(1.0, results[3].margin)
        self.assertTrue(math.isnan(results[2].value))
        self.assertIn("nothing to measure", results[2].error)
        header, rows = tables["hardy"]
        self.assertEqual(experiments.TABLE_HEADERS["hardy"], header)
        self.assertEqual([(1.0, 1.0, 200, 3.0, 0.1, 0.2)], rows)

    def test_parallel_matches_serial(self):
        serial, _ = experiments.run_checks(self.checks, seed=11)
        pooled, _ = experiments.run_checks(self.checks, seed=11, workers=3)

        self.assertEqual(serial[0].value, pooled[0].value)

    def test_seed_changes_draws(self):
        first, _ = experiments.run_checks(self.checks[:1], seed=1)
        second, _ = experiments.run_checks(self.checks[:1], seed=2)

        self.assertNotEqual(first[0].value, second[0].value)

    def test_gate_failure_skips(self):
        checks = [
            experiments.Check("too large", experiments._constant(2.0), 1.0),
            experiments.Check(
                "gated", _draw, 1.0, anchor="Eq 20", requires="too large"
            ),
        ]

        results, _ = experiments.run_checks(checks, seed=11)

        self.assertFalse(results[1].passed)
        self.assertTrue(math.isnan(results[1].value))
        self.assertTrue(results[1].error.startswith("skipped:"))
        self.assertIn("too large", results[1].error)
        self.assertEqual("Eq 20", results[1].anchor)

    def test_gate_success_runs(self):
        checks = [
            experiments.Check("gated", _draw, 1.0, requires="draw"),
            experiments.Check("draw", _draw, 1.0),
        ]

        results, _ = experiments.run_checks(checks, seed=11, workers=2)

        self.assertEqual(["gated", "draw"], [r.name for r in results])
        self.assertEqual([True, True], [r.passed for r in results])
        self.assertIsNone(results[0].error)

    def test_gate_keeps_substreams(self):
        gated = [
            experiments.Check("draw", _draw, 1.0),
            experiments.Check("second", _draw, 1.0, requires="draw"),
        ]
        plain = [
            experiments.Check("draw", _draw, 1.0),
            experiments.Check("second", _draw, 1.0),
        ]

        first, _ = experiments.run_checks(gated, seed=5)
        second, _ = experiments.run_checks(plain, seed=5)

        self.assertEqual([r.value for r in second], [r.value for r in first])

    def test_invalid_gates(self):
        unknown = [experiments.Check("a", _draw, 1.0, requires="missing")]
        chained = [
            experiments.Check("a", _draw, 1.0),
            experiments.Check("b", _draw, 1.0, requires="a"),
            experiments.Check("c", _draw, 1.0, requires="b"),
        ]

        for checks in (unknown, chained):
            self.assertRaises(
                exception.DomainError, experiments.run_checks, checks, 0
            )


class TestValidateParameters(base.TestCase):
    def test_verify_defaults(self):
        params, errors = experiments.validate_parameters("verify", {})

        self.assertEqual([], errors)
        self.assertEqual("all", params["suite"])
        self.assertEqual(20, params["degree"])
        self.assertEqual(1e-9, params["tolerance"])
        self.assertEqual([(4.0, 1.5), (6.0, 2.0)], params["jacobi"])

    def test_defaults_follow_configuration(self):
        self.config(group="polyop", degree=8)

        params, _ = experiments.validate_parameters("verify", {})

        self.assertEqual(8, params["degree"])

    def test_out_of_domain(self):
        _, errors = experiments.validate_parameters(
            "entropy", {"beta": 0.5, "sigma": 0}
        )

        self.assertEqual(2, len(errors))
        self.assertEqual("parameters.beta: must be >= 1.0", errors[0])
        self.assertTrue(errors[1].startswith("parameters.sigma: "))

    def test_types(self):
        _, errors = experiments.validate_parameters(
            "entropy", {"cap": "x", "trials": True, "bogus": 1}
        )

        self.assertEqual(
            [
                "parameters.bogus: unknown key",
                "parameters.cap: expected an integer, got 'x'",
                "parameters.trials: expected int, got a boolean",
            ],
            errors,
        )

    def test_scalar_becomes_list(self):
        params, errors = experiments.validate_parameters(
            "entropy", {"starts": 3, "mu_min": 0.5}
        )

        self.assertEqual([], errors)
        self.assertEqual([3], params["starts"])
        self.assertEqual([0.5], params["mu_min"])

    def test_pairs(self):
        _, errors = experiments.validate_parameters(
            "warmup", {"jacobi": [[1.0]]}
        )
        self.assertIn("expected an [a, b] pair", errors[0])

        _, errors = experiments.validate_parameters(
            "warmup", {"jacobi": [[3.0, 1.5]]}
        )
        self.assertIn("requires lam1 > 2 beta > 1", errors[0])

    def test_entropy_consistency(self):
        _, errors = experiments.validate_parameters(
            "entropy", {"starts": [0, 300]}
        )
        self.assertEqual(["parameters.starts: 300 exceeds cap 200"], errors)

        _, errors = experiments.validate_parameters(
            "entropy", {"starts": [300], "beta": 0.5}
        )
        self.assertEqual(["parameters.beta: must be >= 1.0"], errors)

    def test_cutoff_consistency(self):
        _, errors = experiments.validate_parameters(
            "cutoff", {"sizes": [1, 2, 3], "r_low": 0.3}
        )

        self.assertEqual(
            [
                "parameters.sizes: need at least 4 distinct sizes",
                "parameters.r_low: 0.3 is not in r_grid",
            ],
            errors,
        )

    def test_unknown_family(self):
        _, errors = experiments.validate_parameters(
            "cutoff", {"family": "ring"}
        )

        self.assertEqual(
            ["parameters.family: must be one of kinetic, transfer, diagonal"],
            errors,
        )


class TestRun(base.TestCase):
    def _params(self, command, section):
        params, errors = experiments.validate_parameters(command, section)
        self.assertEqual([], errors)
        return params

    def test_two_point_suite(self):
        params = self._params("verify", {"suite": "twopoint", "trials": 5})

        outcome = experiments.run("verify", params, 3, workers=1)

        self.assertEqual(5, len(outcome.checks))
        self.assertTrue(outcome.passed, outcome.failures)
        self.assertEqual([], outcome.failures)
        self.assertEqual(
            {check.name for check in outcome.checks}, set(outcome.timings)
        )

    def test_reproducible(self):
        params = self._params("verify", {"suite": "twopoint", "trials": 5})

        first = experiments.run("verify", params, 3, workers=1)
        second = experiments.run("verify", params, 3, workers=2)

        self.assertEqual(_values(first), _values(second))

    def test_hardy(self):
        params = self._params("hardy", {"grid": [[1.0, 1.0]], "cap": 200})

        outcome = experiments.run("hardy", params, 0, workers=1)

        self.assertTrue(outcome.passed, outcome.failures)
        header, rows = outcome.tables["hardy"]
        self.assertEqual(experiments.TABLE_HEADERS["hardy"], header)
        self.assertEqual(1, len(rows))
        self.assertEqual((1.0, 1.0, 200), rows[0][:3])

    def _assert_run(self, command, section, table=None, seed=0):
        params = self._params(command, section)

        outcome = experiments.run(command, params, seed, workers=2)

        self.assertTrue(outcome.passed, outcome.failures)
        self.assertNotIn("", _anchors(outcome))
        if table is None:
            self.assertEqual({}, outcome.tables)
        else:
            header, rows = outcome.tables[table]
            self.assertEqual(experiments.TABLE_HEADERS[table], header)
            self.assertNotEqual([], rows)
        return outcome

    def test_laguerre_suite(self):
        outcome = self._assert_run(
            "verify", {"suite": "laguerre", "degree": 8}
        )

        self.assertEqual(8, len(outcome.checks))

    def test_beta_suite(self):
        outcome = self._assert_run("verify", {"suite": "beta", "degree": 8})

        self.assertEqual(6, len(outcome.checks))

    def test_generalized_suite(self):
        outcome = self._assert_run(
            "verify", {"suite": "generalized", "degree": 8}
        )

        self.assertEqual(3, len(outcome.checks))

    def test_jacobi_suite(self):
        outcome = self._assert_run("verify", {"suite": "jacobi", "degree": 8})

        self.assertEqual(4, len(outcome.checks))

    def test_gauss_suite(self):
        outcome = self._assert_run("verify", {"suite": "gauss", "degree": 8})

        self.assertEqual(5, len(outcome.checks))

    def test_entropy(self):
        outcome = self._assert_run(
            "entropy",
            {"points": 10, "trials": 50, "pairs": 20},
            table="entropy_curves",
        )

        labels = {row[0] for row in outcome.tables["entropy_curves"][1]}
        self.assertIn("laguerre-delta50", labels)
        self.assertIn("twopoint-0.05-delta0", labels)

    def test_hyperbound(self):
        outcome = self._assert_run(
            "hyperbound",
            {"restarts": 2, "steps": 50},
            table="hyperbound",
        )

        _, rows = outcome.tables["hyperbound"]
        self.assertEqual([0.0, 0.5, 1.0], [row[0] for row in rows])

    def test_warmup(self):
        outcome = self._assert_run(
            "warmup", {"samples": 20000}, table="warmup_laplace"
        )

        _, rows = outcome.tables["warmup_laplace"]
        self.assertEqual([0.5, 1.0, 2.0], [row[0] for row in rows])

    def test_sample(self):
        outcome = self._assert_run(
            "sample", {"samples": 5000}, table="sample_moments"
        )

        _, rows = outcome.tables["sample_moments"]
        self.assertEqual(
            ["exact"] * 3 + ["intertwined"] * 3, [row[0] for row in rows]
        )

    @mock.patch.object(semigroups, "moment_oracle", return_value=1e6)
    def test_sample_gated_on_oracle(self, mock_oracle):
        params = self._params("sample", {"samples": 2000})

        outcome = experiments.run("sample", params, 0, workers=1)

        oracle, parity, kolmogorov = outcome.checks
        self.assertEqual(experiments.ORACLE_CHECK, oracle.name)
        self.assertFalse(oracle.passed)
        for check in (parity, kolmogorov):
            self.assertFalse(check.passed)
            self.assertTrue(check.error.startswith("skipped:"))
        self.assertEqual(
            ["exact"] * 3,
            [row[0] for row in outcome.tables["sample_moments"][1]],
        )

    def _assert_cutoff(self, family):
        outcome = self._assert_run(
            "cutoff",
            {"family": family, "samples": 5000},
            table="profile",
            seed=1,
        )

        self.assertEqual(family, outcome.summary["family"])
        self.assertTrue(outcome.summary["signature"])
        _, rows = outcome.tables["profile"]
        self.assertEqual(25, len(rows))

    def test_kinetic_cutoff(self):
        self._assert_cutoff("kinetic")

    def test_transfer_cutoff(self):
        self._assert_cutoff("transfer")

    def test_diagonal_cutoff(self):
        self._assert_cutoff("diagonal")


class TestAnchors(base.TestCase):
    def test_every_check_is_anchored(self):
        for command, builder in experiments.CHECK_BUILDERS.items():
            params, errors = experiments.validate_parameters(command, {})
            self.assertEqual([], errors)

            checks = builder(params)

            names = [check.name for check in checks]
            self.assertEqual(len(names), len(set(names)), command)
            for check in checks:
                self.assertNotEqual("", check.anchor, check.name)

    def test_sample_checks_require_the_oracle(self):
        params, _ = experiments.validate_parameters("sample", {})

        checks = experiments.sample_checks(params)

        self.assertEqual(experiments.ORACLE_CHECK, checks[0].name)
        self.assertIsNone(checks[0].requires)
        self.assertEqual(
            [experiments.ORACLE_CHECK] * 2,
            [check.requires for check in checks[1:]],
        )
