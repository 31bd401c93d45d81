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

"""Named experiments and the checks they are made of.

Every command turns a validated parameter section into a list of checks.
A check measures one number and compares it with a threshold; checks run
on their own random substream, possibly in parallel, and their results
are always assembled in declaration order.
"""

from concurrent import futures
import dataclasses
import math
import os
import typing as t

import numpy as np
from oslo_log import log as logging
from oslo_utils import timeutils
from scipy import integrate
from scipy import stats

from interweave import conf
from interweave import cutoff
from interweave import ergodics
from interweave import exception
from interweave import gauss
from interweave import kernels
from interweave import polyop
from interweave import semigroups
from interweave import special
from interweave import warmup

LOG = logging.getLogger(__name__)
CONF = conf.CONF

WORKERS_ENV = "INTERWEAVE_WORKERS"

SUITES = ("twopoint", "laguerre", "beta", "generalized", "jacobi", "gauss")
FAMILIES = ("kinetic", "transfer", "diagonal")

RELATION_TIMES = (0.1, 1.0, 5.0)
SEMIGROUP_TIMES = (0.1, 0.7)
LAGUERRE_GRID = ((0.5, 1.0, 1.0), (1.0, 2.0, 1.0), (2.0, 0.5, 0.7))
BETA_GRID = ((0.5, 0.3), (1.0, 1.0), (2.0, 0.7))
TRANSITIVE_GRID = ((0.5, 0.3, 1.0), (1.0, 1.0, 2.0), (2.0, 0.7, 0.5))
GENERALIZED_LEVY = ((1.0, 0.5),)
GENERALIZED_KILLING = 0.2
GENERALIZED_BETA = 1.0
JACOBI_GENERATORS = ((6.0, 2.0), (8.0, 1.5))
OU_TIMES = (0.1, 1.0, 5.0)
MULTIPLIER_TOLERANCE = 1e-10
PRODUCT_TOLERANCE = 1e-12
EXACT_TOLERANCE = 1e-14
SE_BAND = 4.0


@dataclasses.dataclass(frozen=True)
class Check:
    """One measured quantity and the threshold it must respect.

    measure(rng, rows) returns the value; rows collects table rows when
    the check declares a table. upper=True means value <= threshold.
    anchor names the source identity the check exercises; requires names
    a check that must pass before this one is evaluated.
    """

    name: str
    measure: t.Callable[[np.random.Generator, list], float]
    threshold: float
    upper: bool = True
    table: t.Optional[str] = None
    anchor: str = ""
    requires: t.Optional[str] = None


@dataclasses.dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    margin: float
    runtime: float
    error: t.Optional[str] = None
    anchor: str = ""


@dataclasses.dataclass(frozen=True)
class Outcome:
    command: str
    checks: t.Tuple[CheckResult, ...]
    tables: t.Dict[str, t.Tuple[t.Tuple[str, ...], t.List[tuple]]]
    summary: t.Dict[str, t.Any]
    timings: t.Dict[str, float]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> t.List[str]:
        return [check.name for check in self.checks if not check.passed]


TABLE_HEADERS = {
    "entropy_curves": ("curve", "t", "entropy", "bound", "margin"),
    "hyperbound": ("t", "warm_up", "p", "norm"),
    "hardy": ("beta", "sigma", "cap", "hardy", "lower", "upper"),
    "warmup_laplace": ("u", "estimate", "se", "exact"),
    "sample_moments": ("sampler", "k", "estimate", "se", "reference"),
    "profile": ("n", "r", "t", "tv", "se"),
}


def worker_count() -> int:
    """Thread count for independent checks; the environment wins."""
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return CONF.runner.workers
    try:
        workers = int(raw)
    except ValueError:
        workers = 0
    if workers < 1:
        raise exception.ConfigError(
            errors=[f"{WORKERS_ENV}: expected a positive integer, got {raw!r}"]
        )
    return workers


def _evaluate(check: Check, rng: np.random.Generator):
    rows: list = []
    error = None
    with timeutils.StopWatch() as watch:
        try:
            value = float(check.measure(rng, rows))
        except exception.InterweaveException as err:
            LOG.warning(f"Check '{check.name}' raised: {err}")
            value, error = math.nan, str(err)
    if check.upper:
        margin = check.threshold - value
    else:
        margin = value - check.threshold
    passed = error is None and margin >= 0
    result = CheckResult(
        check.name,
        value,
        check.threshold,
        bool(passed),
        margin,
        watch.elapsed(),
        error,
        check.anchor,
    )
    LOG.info(
        f"{'PASS' if passed else 'FAIL'} {check.name} [{check.anchor}]: "
        f"value {value:.6g}, threshold {check.threshold:.6g}"
    )
    return result, rows


def _skipped(check: Check):
    LOG.warning(f"Skipping '{check.name}': '{check.requires}' did not pass")
    result = CheckResult(
        check.name,
        math.nan,
        check.threshold,
        False,
        math.nan,
        0.0,
        f"skipped: '{check.requires}' did not pass",
        check.anchor,
    )
    return result, []


def _gates(checks: t.Sequence[Check]) -> t.Dict[str, int]:
    index = {check.name: position for position, check in enumerate(checks)}
    for check in checks:
        if check.requires is None:
            continue
        gate = index.get(check.requires)
        if gate is None or checks[gate].requires is not None:
            raise exception.DomainError(
                name="requires",
                value=check.requires,
                why=f"'{check.name}' must require an ungated check",
            )
    return index


def run_checks(
    checks: t.Sequence[Check], seed: int, workers: int = 1
) -> t.Tuple[t.List[CheckResult], t.Dict[str, t.Tuple[tuple, list]]]:
    """Evaluate checks on independent substreams, in declaration order.

    Ungated checks run first; a gated check runs after them and is
    reported as failed, unevaluated, when its gate did not pass.
    """
    index = _gates(checks)
    streams = special.substreams(seed, max(1, len(checks)))
    evaluated: t.List[t.Any] = [None] * len(checks)
    waves = (
        [i for i, check in enumerate(checks) if check.requires is None],
        [i for i, check in enumerate(checks) if check.requires is not None],
    )
    with futures.ThreadPoolExecutor(max_workers=workers) as pool:
        for wave in waves:
            jobs = {}
            for i in wave:
                check = checks[i]
                gate = None
                if check.requires is not None:
                    gate = evaluated[index[check.requires]]
                if gate is not None and not gate[0].passed:
                    evaluated[i] = _skipped(check)
                else:
                    jobs[i] = pool.submit(_evaluate, check, streams[i])
            for i, job in jobs.items():
                evaluated[i] = job.result()
    tables: t.Dict[str, t.Tuple[tuple, list]] = {}
    for check, (_, rows) in zip(checks, evaluated):
        if check.table is not None:
            header = TABLE_HEADERS[check.table]
            tables.setdefault(check.table, (header, []))[1].extend(rows)
    return [result for result, _ in evaluated], tables


def _relative(values, reference) -> float:
    values = np.asarray(values, dtype=float)
    reference = np.asarray(reference, dtype=float)
    return float(np.max(np.abs(values - reference) / np.abs(reference)))


def _entrywise(first, second) -> float:
    diff = np.abs(first - second)
    scale = np.abs(first) + np.abs(second)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(scale > 0, diff / scale, 0.0)
    return float(np.max(ratio))


def _constant(value):
    return lambda rng, rows: value


# verify: two point space


def _random_two_point(rng):
    mu0, mu0_tilde = rng.uniform(0.02, 0.98, size=2)
    rate = rng.uniform(0.1, 5.0)
    return (mu0, 1.0 - mu0), (mu0_tilde, 1.0 - mu0_tilde), rate


def _twopoint_checks(params):
    trials = params["trials"]

    def factorisation(rng, rows):
        worst = 0.0
        for _ in range(trials):
            mu, mu_tilde, rate = _random_two_point(rng)
            weave = kernels.two_point_optimal(mu, mu_tilde, rate)
            forward = kernels.TwoPointModel(rate, mu).semigroup(weave.t0)
            backward = kernels.TwoPointModel(rate, mu_tilde).semigroup(
                weave.t0
            )
            there = weave.kernel @ weave.kernel_tilde - forward
            back = weave.kernel_tilde @ weave.kernel - backward
            worst = max(
                worst,
                float(np.max(np.abs(there))),
                float(np.max(np.abs(back))),
            )
        return worst

    def closed_form(rng, rows):
        worst = 0.0
        for _ in range(trials):
            mu, mu_tilde, rate = _random_two_point(rng)
            eps0 = kernels.two_point_optimal(mu, mu_tilde, rate).eps0
            matrix, _ = kernels.two_point_lambda(mu, mu_tilde, eps0)
            explicit = kernels.two_point_lambda_closed_form(
                mu, mu_tilde, eps0
            )
            worst = max(worst, float(np.max(np.abs(matrix - explicit))))
        return worst

    def beyond_optimum(rng, rows):
        feasible = 0
        for _ in range(trials):
            mu, mu_tilde, rate = _random_two_point(rng)
            eps0 = kernels.two_point_optimal(mu, mu_tilde, rate).eps0
            _, ok = kernels.two_point_lambda(mu, mu_tilde, eps0 * 1.001)
            feasible += int(ok)
        return feasible

    def warm_up_ln3(rng, rows):
        weave = kernels.two_point_optimal((0.25, 0.75), (0.5, 0.5))
        return abs(weave.t0 - math.log(3.0))

    def log_sobolev(rng, rows):
        return max(
            abs(ergodics.two_point_log_sobolev(1.0, (0.5, 0.5)) - 2.0),
            abs(
                ergodics.two_point_log_sobolev(1.0, (0.25, 0.75))
                - 2.0 / math.log(3.0)
            ),
        )

    return [
        Check(
            "two-point kernels factorise the semigroup at the warm-up",
            factorisation,
            PRODUCT_TOLERANCE,
            anchor="§2.1 / Eqs 16-19",
        ),
        Check(
            "two-point kernel entries match their closed form",
            closed_form,
            PRODUCT_TOLERANCE,
            anchor="§2.1 / Eqs 16-19",
        ),
        Check(
            "two-point kernel leaves the simplex beyond eps0",
            beyond_optimum,
            0,
            anchor="§2.1 / Eq 17",
        ),
        Check(
            "two-point warm-up between mu_min = 1/4 and uniform is ln 3",
            warm_up_ln3,
            EXACT_TOLERANCE,
            anchor="§2.1 / Eq 19",
        ),
        Check(
            "two-point log-Sobolev constant at the uniform and 1/4 laws",
            log_sobolev,
            PRODUCT_TOLERANCE,
            anchor="§2.1 (log-Sobolev constant)",
        ),
    ]


# verify: Bessel and Laguerre relations


@dataclasses.dataclass(frozen=True, eq=False)
class Relation:
    """Generators gen and gen_tilde linked both ways by a kernel pair,
    with a deterministic warm-up."""

    gen: polyop.PolyOp
    gen_tilde: polyop.PolyOp
    kernel: polyop.PolyOp
    kernel_tilde: polyop.PolyOp
    warm_up: float

    def intertwining(self, times=RELATION_TIMES) -> float:
        worst = 0.0
        for time in times:
            p = polyop.semigroup_polyop(self.gen, time)
            p_tilde = polyop.semigroup_polyop(self.gen_tilde, time)
            worst = max(
                worst,
                polyop.check_intertwining(p, self.kernel, p_tilde),
                polyop.check_intertwining(p_tilde, self.kernel_tilde, p),
            )
        return worst

    def forward(self) -> float:
        return polyop.check_interweaving(
            self.kernel,
            self.kernel_tilde,
            polyop.semigroup_polyop(self.gen, self.warm_up),
        )

    def backward(self) -> float:
        return polyop.check_interweaving(
            self.kernel_tilde,
            self.kernel,
            polyop.semigroup_polyop(self.gen_tilde, self.warm_up),
        )


def bessel_relation(beta: float, sigma: float, degree: int) -> Relation:
    """Bessel diffusion and birth-death chain, warm-up 1 / sigma."""
    return Relation(
        polyop.generator_polyop(polyop.BesselDiffusion(beta), degree),
        polyop.generator_polyop(
            polyop.BesselBirthDeath(beta, sigma), degree
        ),
        polyop.kernel_polyop(kernels.PoissonKernel(sigma), degree),
        polyop.kernel_polyop(kernels.GammaKernel(beta, sigma), degree),
        1.0 / sigma,
    )


def laguerre_relation(
    beta: float, sigma: float, scale: float, degree: int
) -> Relation:
    """Laguerre diffusion and its birth-death partner."""
    return Relation(
        polyop.generator_polyop(
            polyop.LaguerreDiffusion(beta, scale), degree
        ),
        polyop.generator_polyop(
            polyop.LaguerreBirthDeath(beta, sigma * scale), degree
        ),
        polyop.kernel_polyop(kernels.PoissonKernel(sigma), degree),
        polyop.kernel_polyop(
            kernels.GammaKernel(beta, sigma + 1.0 / scale), degree
        ),
        semigroups.laguerre_warm_up(scale, sigma),
    )


def _worst_over(grid, function):
    return max(function(*point) for point in grid)


def _shipped_generators(degree):
    specs = [
        polyop.BesselDiffusion(1.5),
        polyop.BesselBirthDeath(1.5, 2.0),
        polyop.LaguerreDiffusion(0.5, 0.7),
        polyop.LaguerreBirthDeath(2.0, 0.5),
        polyop.Jacobi(6.0, 2.0),
        polyop.GeneralizedLaguerre(
            polyop.BernsteinSpec(GENERALIZED_KILLING, GENERALIZED_LEVY)
        ),
        polyop.OrnsteinUhlenbeck(1.0, 2.0),
    ]
    gens = [polyop.generator_polyop(spec, degree) for spec in specs]
    gens.append(polyop.generator_polyop(polyop.TwoPoint(1.0, 0.3), 1))
    return gens


def _laguerre_checks(params):
    degree, tolerance = params["degree"], params["tolerance"]

    def bessel(method):
        def measure(rng, rows):
            return _worst_over(
                LAGUERRE_GRID,
                lambda beta, sigma, _: getattr(
                    bessel_relation(beta, sigma, degree), method
                )(),
            )

        return measure

    def laguerre(method):
        def measure(rng, rows):
            return _worst_over(
                LAGUERRE_GRID,
                lambda beta, sigma, scale: getattr(
                    laguerre_relation(beta, sigma, scale, degree), method
                )(),
            )

        return measure

    def dilation(rng, rows):
        worst = 0.0
        for beta, _, scale in LAGUERRE_GRID:
            unit = polyop.generator_polyop(
                polyop.LaguerreDiffusion(beta), degree
            )
            scaled = polyop.generator_polyop(
                polyop.LaguerreDiffusion(beta, scale), degree
            )
            for time in RELATION_TIMES:
                conjugate = polyop.similarity_transform(
                    polyop.semigroup_polyop(unit, time),
                    polyop.dilation(1.0 / scale, degree),
                )
                worst = max(
                    worst,
                    _entrywise(
                        conjugate.matrix,
                        polyop.semigroup_polyop(scaled, time).matrix,
                    ),
                )
        return worst

    def semigroup_law(rng, rows):
        worst = 0.0
        for gen in _shipped_generators(degree):
            for s in SEMIGROUP_TIMES:
                for u in SEMIGROUP_TIMES:
                    product = polyop.semigroup_polyop(
                        gen, s
                    ) @ polyop.semigroup_polyop(gen, u)
                    worst = max(
                        worst,
                        _entrywise(
                            product.matrix,
                            polyop.semigroup_polyop(gen, s + u).matrix,
                        ),
                    )
        return worst

    return [
        Check(
            "Poisson kernel intertwines Bessel diffusion and birth-death",
            bessel("intertwining"),
            tolerance,
            anchor="Prop 11 / Eq 1",
        ),
        Check(
            "Poisson then gamma kernel is the Bessel semigroup at 1/sigma",
            bessel("forward"),
            tolerance,
            anchor="Prop 11 / Eq 4",
        ),
        Check(
            "gamma then Poisson kernel is the birth-death chain at 1/sigma",
            bessel("backward"),
            tolerance,
            anchor="Prop 11 / Eq 5",
        ),
        Check(
            "Poisson kernel intertwines Laguerre diffusion and birth-death",
            laguerre("intertwining"),
            tolerance,
            anchor="Prop 13 / Eq 1",
        ),
        Check(
            "Laguerre interweaving with warm-up ln(1 + 1/(scale sigma))",
            laguerre("forward"),
            tolerance,
            anchor="Prop 13 / Eq 4",
        ),
        Check(
            "reverse Laguerre interweaving on the birth-death side",
            laguerre("backward"),
            tolerance,
            anchor="Prop 13 / Eq 5",
        ),
        Check(
            "dilation conjugates the unit-scale Laguerre semigroup",
            dilation,
            MULTIPLIER_TOLERANCE,
            anchor="Theorem 7 / Lemma 14",
        ),
        Check(
            "semigroup law P_s P_t = P_(s+t) for every shipped generator",
            semigroup_law,
            MULTIPLIER_TOLERANCE,
            anchor="Def 1 (semigroup law)",
        ),
    ]


# verify: beta multiplication kernels


def _laguerre_gen(beta, degree):
    return polyop.generator_polyop(polyop.LaguerreDiffusion(beta), degree)


def _beta_kernels(beta, eps, degree):
    forward = polyop.kernel_polyop(kernels.BetaMultKernel(beta, eps), degree)
    adjoint = polyop.kernel_polyop(kernels.BStarKernel(beta), degree)
    return forward, adjoint


def _beta_checks(params):
    degree, tolerance = params["degree"], params["tolerance"]
    orders = np.arange(degree + 1, dtype=float)

    def multipliers(rng, rows):
        worst = 0.0
        for beta, eps in BETA_GRID:
            forward, adjoint = _beta_kernels(beta, eps, degree)
            found = polyop.eigen_multipliers(
                forward @ adjoint, _laguerre_gen(beta + eps, degree)
            )
            expected = warmup.NegLogBeta(eps, beta).laplace(orders)
            worst = max(worst, _relative(found, expected))
        return worst

    def eigenvectors(rng, rows):
        worst = 0.0
        for beta, eps in BETA_GRID:
            forward, adjoint = _beta_kernels(beta, eps, degree)
            low = _laguerre_gen(eps, degree)
            high = _laguerre_gen(beta + eps, degree)
            worst = max(
                worst,
                polyop.eigenvector_residual(forward, low, high),
                polyop.eigenvector_residual(adjoint, high, low),
            )
        return worst

    def interweaving(rng, rows):
        worst = 0.0
        for beta, eps in BETA_GRID:
            forward, adjoint = _beta_kernels(beta, eps, degree)
            warm = polyop.warmup_polyop(
                _laguerre_gen(beta + eps, degree), warmup.NegLogBeta(eps, beta)
            )
            worst = max(
                worst, polyop.check_interweaving(forward, adjoint, warm)
            )
        return worst

    def transitivity(rng, rows):
        worst = 0.0
        for beta1, eps, beta2 in TRANSITIVE_GRID:
            first, _ = _beta_kernels(beta1, eps, degree)
            second, _ = _beta_kernels(beta2, beta1 + eps, degree)
            top = _laguerre_gen(beta1 + beta2 + eps, degree)
            composite = polyop.eigen_multipliers(
                second @ first, _laguerre_gen(eps, degree), top
            )
            expected = warmup.NegLogBeta(eps, beta1).laplace(
                orders
            ) * warmup.NegLogBeta(beta1 + eps, beta2).laplace(orders)
            worst = max(worst, _relative(composite, expected))
        return worst

    def convolution(rng, rows):
        worst = 0.0
        for beta1, eps, beta2 in TRANSITIVE_GRID:
            first, first_adjoint = _beta_kernels(beta1, eps, degree)
            second, second_adjoint = _beta_kernels(beta2, beta1 + eps, degree)
            law = warmup.convolve(
                warmup.NegLogBeta(eps, beta1),
                warmup.NegLogBeta(beta1 + eps, beta2),
            )
            warm = polyop.warmup_polyop(
                _laguerre_gen(beta1 + beta2 + eps, degree), law
            )
            worst = max(
                worst,
                polyop.check_interweaving(
                    second @ first, first_adjoint @ second_adjoint, warm
                ),
            )
        return worst

    def subordination(rng, rows):
        worst = 0.0
        for beta, eps in BETA_GRID:
            law = warmup.NegLogBeta(eps, beta)
            gen = _laguerre_gen(beta + eps, degree)
            spectrum = -np.diag(gen.matrix)
            unit = np.exp(-np.asarray(law.bernstein(spectrum)))
            worst = max(worst, _relative(unit, law.laplace(spectrum)))
            twice = polyop.eigen_multipliers(
                polyop.warmup_polyop(gen, warmup.Subordinated(law, 2)), gen
            )
            worst = max(
                worst,
                _relative(
                    twice,
                    semigroups.subordinate_multipliers(spectrum, law, 2.0),
                ),
            )
        return worst

    return [
        Check(
            "beta-multiplication interweaving multipliers",
            multipliers,
            MULTIPLIER_TOLERANCE,
            anchor="Prop 21 / Eq 36",
        ),
        Check(
            "beta and additive gamma kernels map Laguerre eigenpolynomials",
            eigenvectors,
            tolerance,
            anchor="Prop 21 / Eq 39",
        ),
        Check(
            "beta-multiplication interweaving with the -log Beta warm-up",
            interweaving,
            tolerance,
            anchor="Prop 21 / Eq 35",
        ),
        Check(
            "transitivity multiplies beta-multiplication multipliers",
            transitivity,
            PRODUCT_TOLERANCE,
            anchor="Theorem 5(iii)",
        ),
        Check(
            "transitive relation warms up by the convolved law",
            convolution,
            tolerance,
            anchor="Theorem 5(iii) / Prop 21",
        ),
        Check(
            "subordinated multipliers exp(-t phi) at t = 1 and t = 2",
            subordination,
            MULTIPLIER_TOLERANCE,
            anchor="Theorem 3 / Eq 7",
        ),
    ]


# verify: generalized Laguerre


def _generalized_checks(params):
    degree = params["degree"]
    orders = np.arange(degree + 1, dtype=float)
    beta = GENERALIZED_BETA
    bernstein = polyop.BernsteinSpec(GENERALIZED_KILLING, GENERALIZED_LEVY)

    def composite():
        gen = polyop.generator_polyop(
            polyop.GeneralizedLaguerre(bernstein), degree
        )
        product = (
            polyop.kernel_polyop(polyop.VBeta(bernstein, beta), degree)
            @ polyop.kernel_polyop(polyop.IPhi(bernstein), degree)
            @ polyop.kernel_polyop(kernels.BStarKernel(beta), degree)
        )
        return polyop.eigen_multipliers(product, gen)

    def gamma_form(rng, rows):
        expected = [
            special.gamma_ratio([1.0 + beta, n + 1.0], [n + 1.0 + beta])
            for n in orders
        ]
        return _relative(composite(), expected)

    def warm_up_form(rng, rows):
        return _relative(
            composite(), warmup.beta_warmup(beta).laplace(orders)
        )

    def neglogbeta(rng, rows):
        grid = np.linspace(0.0, 10.0, 41)
        worst = 0.0
        for b in (0.5, 1.0, 2.0):
            closed = special.gamma_ratio(
                [1.0 + b, grid + 1.0], [grid + b + 1.0]
            )
            found = warmup.NegLogBeta(1.0, b).laplace(grid)
            worst = max(worst, _relative(found, closed))
        return worst

    return [
        Check(
            "generalized Laguerre composite multipliers are gamma ratios",
            gamma_form,
            MULTIPLIER_TOLERANCE,
            anchor="Prop 26 / Eqs 62-64",
        ),
        Check(
            "generalized Laguerre multipliers match the tau(beta) transform",
            warm_up_form,
            MULTIPLIER_TOLERANCE,
            anchor="Prop 26 / Eq 52",
        ),
        Check(
            "tau(beta) is the -log Beta(1, beta) law",
            neglogbeta,
            PRODUCT_TOLERANCE,
            anchor="§3.3 / Eq 52",
        ),
    ]


# verify: Jacobi


def _jacobi_closed_form(lam1, beta, n):
    return special.gamma_ratio(
        [lam1 - beta, n + lam1 / 2.0], [n + lam1 - beta, lam1 / 2.0]
    )


def _jacobi_checks(params):
    degree, tolerance = params["degree"], params["tolerance"]
    orders = np.arange(degree + 1, dtype=float)

    def transform(rng, rows):
        worst = 0.0
        for lam1, beta in params["jacobi"]:
            law = warmup.JacobiWarmup(lam1, beta)
            u = orders * (orders - 1.0) + lam1 * orders
            worst = max(
                worst,
                _relative(
                    law.laplace(u), _jacobi_closed_form(lam1, beta, orders)
                ),
            )
        return worst

    def monotone(rng, rows):
        grid = np.linspace(0.0, 10.0, 41)
        return min(
            warmup.check_complete_monotonicity(
                warmup.JacobiWarmup(lam1, beta).laplace, grid, 6
            )[1]
            for lam1, beta in params["jacobi"]
        )

    def invariant(rng, rows):
        worst = 0.0
        for lam1, beta in JACOBI_GENERATORS:
            spec = polyop.Jacobi(lam1, beta)
            g = polyop.generator_polyop(spec, degree).matrix
            moments = np.array([spec.invariant_moment(n) for n in orders])
            scale = np.abs(moments) @ np.abs(g)
            drift = np.abs(moments @ g)
            worst = max(worst, float(np.max(drift[1:] / scale[1:])))
        return worst

    def warm_operator(rng, rows):
        worst = 0.0
        for lam1, beta in JACOBI_GENERATORS:
            gen = polyop.generator_polyop(polyop.Jacobi(lam1, beta), degree)
            warm = polyop.warmup_polyop(gen, warmup.JacobiWarmup(lam1, beta))
            worst = max(
                worst,
                _relative(
                    polyop.eigen_multipliers(warm, gen),
                    _jacobi_closed_form(lam1, beta, orders),
                ),
                polyop.eigenvector_residual(warm, gen),
            )
        return worst

    return [
        Check(
            "Jacobi warm-up transform at the Jacobi eigenvalues",
            transform,
            MULTIPLIER_TOLERANCE,
            anchor="Prop 24 / Eq 44",
        ),
        Check(
            "Jacobi warm-up transform is completely monotone",
            monotone,
            warmup.COMPLETE_MONOTONICITY_TOLERANCE,
            upper=False,
            anchor="Prop 24 / Eq 44",
        ),
        Check(
            "Jacobi invariant Beta law annihilates the generator",
            invariant,
            tolerance,
            anchor="§3.2 / Eq 43",
        ),
        Check(
            "Jacobi warm-up operator acts diagonally on eigenpolynomials",
            warm_operator,
            MULTIPLIER_TOLERANCE,
            anchor="Prop 24 / Eq 46",
        ),
    ]


# verify: Gaussian transfer


def _gauss_checks(params):
    model = cutoff.kinetic_example()

    def stationary(rng, rows):
        return float(
            np.max(np.abs(model.gamma_infinity - np.diag([0.5, 0.25])))
        )

    def intertwining(rng, rows):
        setup = gauss.transfer_setup(model)
        worst = 0.0
        for time in OU_TIMES:
            left = gauss.compose(gauss.ou_kernel(model, time), setup.kernel)
            right = gauss.compose(
                setup.kernel, gauss.ou_kernel(setup.partner, time)
            )
            worst = max(
                worst, gauss.kernel_residual(left, right, relative=True)
            )
        return worst

    def factorisation(rng, rows):
        setup = gauss.transfer_setup(model)
        kernel, kernel_tilde = gauss.transfer_interweaving(model, setup)
        return gauss.kernel_residual(
            gauss.compose(kernel, kernel_tilde),
            gauss.ou_kernel(model, setup.warm_up),
            relative=True,
        )

    def variance_ratio(rng, rows):
        setup = gauss.transfer_setup(model)
        worst = -math.inf
        for time in np.linspace(0.0, 10.0, 21):
            bound = setup.kappa * math.exp(-2.0 * setup.b_min * time)
            ratio = gauss.linear_variance_ratio(model, time)
            worst = max(worst, ratio / (bound * (1.0 + 1e-6)))
        return worst

    def hypoelliptic(rng, rows):
        return float(gauss.hypoellipticity(model))

    return [
        Check(
            "kinetic stationary covariance is diag(1/2, 1/4)",
            stationary,
            MULTIPLIER_TOLERANCE,
            anchor="§2.4 (kinetic example)",
        ),
        Check(
            "Gaussian kernel intertwines the kinetic and diagonal OU",
            intertwining,
            1e-8,
            anchor="Prop 17 / Eq 29",
        ),
        Check(
            "Gaussian kernels factorise the kinetic semigroup at warm-up",
            factorisation,
            1e-8,
            anchor="Prop 17 / Eq 4",
        ),
        Check(
            "linear variance ratio below kappa exp(-2 b_min t)",
            variance_ratio,
            1.0,
            anchor="Cor 18",
        ),
        Check(
            "kinetic OU is hypoelliptic",
            hypoelliptic,
            1.0,
            upper=False,
            anchor="§2.4 (kinetic example)",
        ),
    ]


SUITE_BUILDERS = {
    "twopoint": _twopoint_checks,
    "laguerre": _laguerre_checks,
    "beta": _beta_checks,
    "generalized": _generalized_checks,
    "jacobi": _jacobi_checks,
    "gauss": _gauss_checks,
}


def verify_checks(params) -> t.List[Check]:
    suites = SUITES if params["suite"] == "all" else (params["suite"],)
    checks = []
    for suite in suites:
        checks.extend(SUITE_BUILDERS[suite](params))
    return checks


# entropy


def _curve_rows(label, curve, bound):
    return [
        (label, float(time), float(value), float(limit), float(limit - value))
        for time, value, limit in zip(curve.times, curve.entropies, bound)
    ]


def entropy_checks(params) -> t.List[Check]:
    beta, sigma, cap = params["beta"], params["sigma"], params["cap"]
    grid = np.linspace(0.0, params["horizon"], params["points"])
    prefactor = (sigma + 1.0) / sigma

    def chain_curves():
        sg = semigroups.truncate_birth_death(beta, sigma, cap)
        for start in params["starts"]:
            m0 = semigroups.DiscreteMeasure.dirac(sg.size, start)
            yield f"laguerre-delta{start}", ergodics.decay_experiment(
                sg, m0, grid
            )

    def transferred(rng, rows):
        worst = math.inf
        for label, curve in chain_curves():
            verdict = ergodics.check_transfer_bound(
                curve, 1.0, prefactor=prefactor
            )
            bound = ergodics.transfer_bound_curve(
                curve.times, 1.0, 0.0, prefactor, curve.initial
            )
            rows.extend(_curve_rows(label, curve, bound))
            worst = min(worst, verdict.margin)
        return worst

    def monotone(rng, rows):
        return max(
            float(np.max(np.diff(curve.entropies)))
            for _, curve in chain_curves()
        )

    def pinsker_curves(rng, rows):
        return min(
            float(np.min(curve.entropies - 2.0 * curve.tvs**2))
            for _, curve in chain_curves()
        )

    def two_point(rng, rows):
        worst = math.inf
        rate = params["rate"]
        for mu_min in params["mu_min"]:
            mu = (mu_min, 1.0 - mu_min)
            sg = semigroups.two_point_semigroup(rate, mu)
            warm_up = kernels.two_point_optimal(mu, (0.5, 0.5), rate).t0
            for start in (0, 1):
                m0 = semigroups.DiscreteMeasure.dirac(2, start)
                curve = ergodics.decay_experiment(sg, m0, grid)
                verdict = ergodics.check_transfer_bound(
                    curve, 2.0 * rate, warm_up
                )
                bound = ergodics.transfer_bound_curve(
                    curve.times, 2.0 * rate, warm_up, 1.0, curve.initial
                )
                label = f"twopoint-{mu_min}-delta{start}"
                rows.extend(_curve_rows(label, curve, bound))
                worst = min(worst, verdict.margin)
        return worst

    def crossover(rng, rows):
        time = ergodics.two_point_crossover(params["rate"], (0.05, 0.95))
        LOG.info(f"Two-point bounds cross at t={time}")
        return math.inf if time is None else time

    def pinsker_random(rng, rows):
        worst = math.inf
        for _ in range(params["trials"]):
            size = int(rng.integers(2, 7))
            m = semigroups.DiscreteMeasure(rng.dirichlet(np.ones(size)))
            nu = semigroups.DiscreteMeasure(rng.dirichlet(np.ones(size)))
            gap = ergodics.phi_entropy(
                m, nu, ergodics.Phi.kl()
            ) - 2.0 * ergodics.tv(m, nu) ** 2
            worst = min(worst, gap)
        return worst

    def separation_limit(rng, rows):
        worst = 0.0
        for _ in range(params["pairs"]):
            nu = semigroups.DiscreteMeasure.normalized(
                0.5 / 4 + 0.5 * rng.dirichlet(np.ones(4))
            )
            m = semigroups.DiscreteMeasure(rng.dirichlet(np.ones(4)))
            worst = max(
                worst,
                abs(
                    ergodics.power_entropy_root(m, nu, 200.0)
                    - ergodics.separation(m, nu)
                ),
            )
        return worst

    def separation_curve(rng, rows):
        sg = semigroups.two_point_semigroup(params["rate"], (0.25, 0.75))
        return ergodics.separation_transfer(
            sg, semigroups.DiscreteMeasure.dirac(2, 0), grid
        )

    def data_processing(rng, rows):
        result = ergodics.data_processing_test(params["trials"], rng)
        return result.worst_margin

    return [
        Check(
            "entropy decay below the transferred gamma-Poisson bound",
            transferred,
            0.0,
            upper=False,
            table="entropy_curves",
            anchor="Cor 16",
        ),
        Check(
            "entropy decay is nonincreasing",
            monotone,
            1e-12,
            anchor="§4.2.1",
        ),
        Check(
            "Pinsker inequality along the decay curves",
            pinsker_curves,
            -1e-12,
            upper=False,
            anchor="§1.2.1 (Pinsker)",
        ),
        Check(
            "two-point entropy below the bound transferred from uniform",
            two_point,
            0.0,
            upper=False,
            table="entropy_curves",
            anchor="§2.1 / Eq 19",
        ),
        Check(
            "transferred two-point bound overtakes the direct one",
            crossover,
            params["horizon"],
            anchor="§2.1 / Eq 19",
        ),
        Check(
            "Pinsker inequality on random pairs",
            pinsker_random,
            -1e-12,
            upper=False,
            anchor="§1.2.1 (Pinsker)",
        ),
        Check(
            "phi_p entropy root approaches separation at p = 200",
            separation_limit,
            0.02,
            anchor="Remark 31",
        ),
        Check(
            "separation limit along a two-point decay curve",
            separation_curve,
            0.02,
            anchor="Theorem 28 / Remark 31",
        ),
        Check(
            "data-processing inequality on random triples",
            data_processing,
            -ergodics.DATA_PROCESSING_SLACK,
            upper=False,
            anchor="Eq 78",
        ),
    ]


# hyperbound


def hyperbound_checks(params) -> t.List[Check]:
    beta, sigma, cap = params["beta"], params["sigma"], params["cap"]
    warm_up = semigroups.laguerre_warm_up(1.0, sigma)

    def transferred(time):
        def measure(rng, rows):
            sg = semigroups.truncate_birth_death(beta, sigma, cap)
            p = 1.0 + math.exp(time)
            norm = ergodics.hyperbound_norm(
                sg, time + warm_up, p, params["restarts"], rng, params["steps"]
            )
            rows.append((time, warm_up, p, norm))
            return norm

        return measure

    def identity(rng, rows):
        sg = semigroups.truncate_birth_death(beta, sigma, cap)
        norm = ergodics.hyperbound_norm(sg, 0.0, 2.0, 0, rng, params["steps"])
        rows.append((0.0, 0.0, 2.0, norm))
        return abs(norm - 1.0)

    checks = [
        Check(
            "identity has unit L2 norm",
            identity,
            1e-8,
            table="hyperbound",
            anchor="Eq 12",
        )
    ]
    for time in params["times"]:
        checks.append(
            Check(
                f"transferred hypercontractivity at t={time}",
                transferred(time),
                1.0 + params["tolerance"],
                table="hyperbound",
                anchor="§2.3 / Eq 12",
            )
        )
    return checks


# hardy


HARDY_RATIO = ergodics.HARDY_UPPER_FACTOR / ergodics.HARDY_LOWER_FACTOR


def hardy_checks(params) -> t.List[Check]:
    checks = []
    for beta, sigma in params["grid"]:

        def measure(rng, rows, beta=beta, sigma=sigma):
            constants = ergodics.hardy_constant(beta, sigma, params["cap"])
            rows.append(
                (
                    beta,
                    sigma,
                    params["cap"],
                    constants.hardy,
                    constants.lower,
                    constants.upper,
                )
            )
            ratio = constants.upper / constants.lower
            if not (math.isfinite(constants.hardy) and constants.hardy > 0):
                return math.inf
            return abs(ratio - HARDY_RATIO) / HARDY_RATIO

        checks.append(
            Check(
                f"Hardy bounds for beta={beta}, sigma={sigma}",
                measure,
                MULTIPLIER_TOLERANCE,
                table="hardy",
                anchor="§2.3 / Eq 27",
            )
        )
    return checks


# warmup


def warmup_checks(params) -> t.List[Check]:
    law = warmup.NegLogBeta(params["eps"], params["beta"])
    grid = np.linspace(0.0, 10.0, 41)

    def monte_carlo(u):
        def measure(rng, rows):
            values = np.exp(-u * law.sample(rng, params["samples"]))
            estimate = float(np.mean(values))
            se = float(np.std(values, ddof=1)) / math.sqrt(params["samples"])
            exact = law.laplace(u)
            rows.append((u, estimate, se, exact))
            return abs(estimate - exact) / se

        return measure

    def density(rng, rows):
        worst = 0.0
        for u in (0.0, 0.5, 1.0, 2.0, 5.0):

            def integrand(s):
                return math.exp(-u * s) * law.density(s)

            near, _ = integrate.quad(integrand, 0.0, 1.0, limit=200)
            far, _ = integrate.quad(integrand, 1.0, math.inf, limit=200)
            worst = max(worst, abs(near + far - law.laplace(u)))
        return worst

    def small_eps_mean(rng, rows):
        eps = 0.01
        return abs(eps * warmup.NegLogBeta(eps, 0.5 - eps).mean() - 1.0)

    def jacobi(rng, rows):
        return min(
            warmup.check_complete_monotonicity(
                warmup.JacobiWarmup(lam1, beta).laplace, grid, params["order"]
            )[1]
            for lam1, beta in params["jacobi"]
        )

    def bernstein(rng, rows):
        return warmup.bernstein_check(
            warmup.beta_warmup(params["beta"]).bernstein, grid, params["order"]
        )[1]

    def laplace_monotone(rng, rows):
        return min(
            warmup.check_complete_monotonicity(
                candidate.laplace, grid, params["order"]
            )[1]
            for candidate in (
                law,
                warmup.beta_warmup(params["beta"]),
                warmup.shift(law, 0.5),
                warmup.convolve(law, warmup.beta_warmup(params["beta"])),
            )
        )

    checks = [
        Check(
            f"Monte-Carlo transform of -log Beta at u={u}",
            monte_carlo(u),
            SE_BAND,
            table="warmup_laplace",
            anchor="Eqs 36-37",
        )
        for u in params["points"]
    ]
    checks.extend(
        [
            Check(
                "-log Beta density integrates to its transform",
                density,
                1e-6,
                anchor="Eqs 36-37",
            ),
            Check(
                "mean of -log Beta(eps, 1/2 - eps) is about 1/eps",
                small_eps_mean,
                0.1,
                anchor="§3.1",
            ),
            Check(
                "Jacobi warm-up transform is completely monotone",
                jacobi,
                warmup.COMPLETE_MONOTONICITY_TOLERANCE,
                upper=False,
                anchor="Prop 24 / Eq 44",
            ),
            Check(
                "Bernstein exponent of tau(beta) is a Bernstein function",
                bernstein,
                warmup.COMPLETE_MONOTONICITY_TOLERANCE,
                upper=False,
                anchor="§3.3 / Eq 52",
            ),
            Check(
                "transforms of shipped laws are completely monotone",
                laplace_monotone,
                warmup.COMPLETE_MONOTONICITY_TOLERANCE,
                upper=False,
                anchor="§1 / Theorem 5(iii)",
            ),
        ]
    )
    return checks


# sample


def _moment_gap(first, second):
    worst = 0.0
    for k in (1, 2, 3):
        a, b = first**k, second**k
        se = math.sqrt(
            np.var(a, ddof=1) / a.size + np.var(b, ddof=1) / b.size
        )
        worst = max(worst, abs(float(np.mean(a) - np.mean(b))) / se)
    return worst


ORACLE_CHECK = "exact Laguerre transition matches the moment oracle"


def sample_checks(params) -> t.List[Check]:
    beta, scale, sigma = params["beta"], params["scale"], params["sigma"]
    time, x, size = params["t"], params["x"], params["samples"]
    warm_up = semigroups.laguerre_warm_up(scale, sigma)

    def oracle(rng, rows):
        draws = semigroups.exact_laguerre_transition(
            beta, scale, time + warm_up, x, rng, size
        )
        worst = 0.0
        for k in (1, 2, 3):
            values = draws**k
            estimate = float(np.mean(values))
            se = float(np.std(values, ddof=1)) / math.sqrt(size)
            reference = semigroups.moment_oracle(
                beta, scale, time + warm_up, x, k
            )
            rows.append(("exact", k, estimate, se, reference))
            worst = max(worst, abs(estimate - reference) / se)
        return worst

    def parity(rng, rows):
        woven = semigroups.intertwined_laguerre_sampler(
            beta, scale, sigma, time, x, rng, size
        )
        exact = semigroups.exact_laguerre_transition(
            beta, scale, time + warm_up, x, rng, size
        )
        for k in (1, 2, 3):
            values = woven**k
            rows.append(
                (
                    "intertwined",
                    k,
                    float(np.mean(values)),
                    float(np.std(values, ddof=1)) / math.sqrt(size),
                    semigroups.moment_oracle(
                        beta, scale, time + warm_up, x, k
                    ),
                )
            )
        return _moment_gap(woven, exact)

    def kolmogorov(rng, rows):
        passes = 0
        streams = special.substreams(
            int(rng.integers(2**63)), params["seeds"]
        )
        for stream in streams:
            woven = semigroups.intertwined_laguerre_sampler(
                beta, scale, sigma, time, x, stream, size
            )
            exact = semigroups.exact_laguerre_transition(
                beta, scale, time + warm_up, x, stream, size
            )
            result = stats.ks_2samp(woven, exact)
            passes += int(result.pvalue >= params["level"])
        return passes

    return [
        Check(
            ORACLE_CHECK,
            oracle,
            SE_BAND,
            table="sample_moments",
            anchor="§2.3 / Eq 20",
        ),
        Check(
            "intertwined sampler matches the exact transition moments",
            parity,
            SE_BAND,
            table="sample_moments",
            anchor="§2.3 (simulation recipe)",
            requires=ORACLE_CHECK,
        ),
        Check(
            "two-sample KS test passes on most seeds",
            kolmogorov,
            math.ceil(2 * params["seeds"] / 3),
            upper=False,
            anchor="§2.3 (simulation recipe)",
            requires=ORACLE_CHECK,
        ),
    ]


# cutoff


def cutoff_family(params) -> cutoff.OUFamily:
    name = params["family"]
    sizes = params["sizes"]
    scale, time_scale = params["start_scale"], params["time_scale"]
    if name == "kinetic":
        return cutoff.kinetic_family(sizes, scale, time_scale)
    if name == "transfer":
        return cutoff.transfer_family(
            cutoff.kinetic_example(), sizes, scale, time_scale
        )
    return cutoff.diagonal_family(sizes, scale=scale, time_scale=time_scale)


def _profile_value(rows, n, r):
    for row in rows:
        if row.n == n and math.isclose(row.r, r):
            return row.tv
    raise exception.InsufficientData(detail=f"no cell at n={n}, r={r}")


def cutoff_checks(family, rows, summary, params) -> t.List[Check]:
    largest = max(family.sizes)
    low, high = params["r_low"], params["r_high"]

    def conditioning(rng, rows_out):
        cap = CONF.cutoff.memory_cap_mb * 2**20
        reference = cutoff.tensorized_condition_number(family, 1)
        worst = 0.0
        for n in family.sizes:
            if 2 * 8 * (n * family.base.dim) ** 2 > cap:
                continue
            value = cutoff.tensorized_condition_number(family, n)
            worst = max(worst, abs(value - reference) / reference)
        return worst

    return [
        Check(
            f"TV at r={low} reaches the high level at n={largest}",
            _constant(_profile_value(rows, largest, low)),
            cutoff.SIGNATURE_HIGH,
            upper=False,
            anchor="Cor 19 / Eq 14",
        ),
        Check(
            f"TV at r={high} falls to the low level at n={largest}",
            _constant(_profile_value(rows, largest, high)),
            cutoff.SIGNATURE_LOW,
            anchor="Cor 19 / Eq 14",
        ),
        Check(
            f"TV gap between r={low} and r={high} at n={largest}",
            _constant(
                _profile_value(rows, largest, low)
                - _profile_value(rows, largest, high)
            ),
            0.6,
            upper=False,
            anchor="Cor 19 / Eq 34",
        ),
        Check(
            "cut-off signature over the size ladder",
            _constant(float(summary.signature)),
            1.0,
            upper=False,
            anchor="Cor 19",
        ),
        Check(
            "profiles are nonincreasing in r within their error band",
            _constant(float(summary.monotone_in_r)),
            1.0,
            upper=False,
            anchor="Eq 14",
        ),
        Check(
            "tensorised stationary covariance keeps its conditioning",
            conditioning,
            MULTIPLIER_TOLERANCE,
            anchor="§2.4 (kappa independent of n)",
        ),
    ]


CHECK_BUILDERS = {
    "verify": verify_checks,
    "entropy": entropy_checks,
    "hyperbound": hyperbound_checks,
    "hardy": hardy_checks,
    "warmup": warmup_checks,
    "sample": sample_checks,
}


# parameter sections


@dataclasses.dataclass(frozen=True)
class Parameter:
    """A typed parameter of a command section.

    kind is one of int, float, str, ints, floats or pairs. default may be
    a callable so that configuration defaults are read at validation
    time. check returns None for an acceptable value, else the reason.
    """

    kind: str
    default: t.Any
    check: t.Optional[t.Callable[[t.Any], t.Optional[str]]] = None

    def resolve_default(self):
        return self.default() if callable(self.default) else self.default


def _scalar(kind, value):
    if isinstance(value, bool):
        raise TypeError(f"expected {kind}, got a boolean")
    if kind == "int":
        if not isinstance(value, int):
            raise TypeError(f"expected an integer, got {value!r}")
        return value
    if kind == "float":
        if not isinstance(value, (int, float)):
            raise TypeError(f"expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ValueError(f"expected a finite number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise TypeError(f"expected a string, got {value!r}")
    return value


def coerce(kind: str, value):
    """Convert a parsed YAML value to the declared kind."""
    if kind in ("ints", "floats"):
        if not isinstance(value, (list, tuple)):
            value = [value]
        if not value:
            raise ValueError("expected a non-empty list")
        return [_scalar(kind[:-1], item) for item in value]
    if kind == "pairs":
        if not isinstance(value, (list, tuple)) or not value:
            raise TypeError("expected a non-empty list of [a, b] pairs")
        pairs = []
        for item in value:
            if not isinstance(item, (list, tuple)) or len(item) != 2:
                raise TypeError(f"expected an [a, b] pair, got {item!r}")
            pairs.append(tuple(_scalar("float", x) for x in item))
        return pairs
    return _scalar(kind, value)


def _positive(value):
    return None if value > 0 else "must be > 0"


def _nonzero(value):
    return None if value != 0 else "must be nonzero"


def _at_least(bound):
    return lambda value: None if value >= bound else f"must be >= {bound}"


def _within(low, high):
    def check(value):
        if low < value <= high:
            return None
        return f"must lie in ({low}, {high}]"

    return check


def _one_of(choices):
    def check(value):
        if value in choices:
            return None
        return f"must be one of {', '.join(choices)}"

    return check


def _each(check):
    def checker(values):
        for value in values:
            why = check(value)
            if why is not None:
                return f"{value!r} {why}"
        return None

    return checker


def _domain(factory):
    """Validate by constructing the domain object the value feeds."""

    def check(value):
        try:
            factory(value)
        except exception.InterweaveException as err:
            return str(err)
        return None

    return check


_JACOBI = _each(_domain(lambda pair: warmup.JacobiWarmup(*pair)))
_RATE = _domain(lambda sigma: kernels.PoissonKernel(sigma))

PARAMETERS: t.Dict[str, t.Dict[str, Parameter]] = {
    "verify": {
        "suite": Parameter("str", "all", _one_of(SUITES + ("all",))),
        "degree": Parameter("int", lambda: CONF.polyop.degree, _at_least(2)),
        "tolerance": Parameter(
            "float", lambda: CONF.polyop.tolerance, _positive
        ),
        "trials": Parameter("int", 100, _at_least(1)),
        "jacobi": Parameter("pairs", [[4.0, 1.5], [6.0, 2.0]], _JACOBI),
    },
    "entropy": {
        "beta": Parameter("float", 1.0, _at_least(1.0)),
        "sigma": Parameter("float", 1.0, _RATE),
        "cap": Parameter("int", 200, _at_least(10)),
        "starts": Parameter("ints", [0, 50], _each(_at_least(0))),
        "points": Parameter("int", 50, _at_least(2)),
        "horizon": Parameter("float", 10.0, _positive),
        "mu_min": Parameter(
            "floats", [0.05, 0.1, 0.25], _each(_within(0.0, 0.5))
        ),
        "rate": Parameter("float", 1.0, _positive),
        "trials": Parameter("int", 500, _at_least(1)),
        "pairs": Parameter("int", 100, _at_least(1)),
    },
    "hyperbound": {
        "beta": Parameter("float", 1.0, _positive),
        "sigma": Parameter("float", 1.0, _RATE),
        "cap": Parameter("int", 200, _at_least(10)),
        "times": Parameter("floats", [0.5, 1.0], _each(_at_least(0.0))),
        "restarts": Parameter("int", 20, _at_least(0)),
        "tolerance": Parameter("float", 1e-6, _positive),
        "steps": Parameter(
            "int", lambda: CONF.ergodics.ascent_steps, _at_least(1)
        ),
    },
    "hardy": {
        "grid": Parameter(
            "pairs",
            [[0.5, 1.0], [1.0, 1.0], [2.0, 0.5]],
            _each(_domain(lambda pair: kernels.GammaKernel(*pair))),
        ),
        "cap": Parameter(
            "int", lambda: CONF.ergodics.hardy_cap, _at_least(10)
        ),
    },
    "warmup": {
        "eps": Parameter("float", 0.3, _positive),
        "beta": Parameter("float", 0.5, _positive),
        "points": Parameter("floats", [0.5, 1.0, 2.0], _each(_at_least(0.0))),
        "samples": Parameter("int", 1000000, _at_least(2)),
        "jacobi": Parameter("pairs", [[4.0, 1.5], [6.0, 2.0]], _JACOBI),
        "order": Parameter("int", 6, _at_least(1)),
    },
    "sample": {
        "beta": Parameter("float", 1.0, _positive),
        "scale": Parameter("float", 1.0, _positive),
        "sigma": Parameter("float", 2.0, _RATE),
        "t": Parameter("float", 0.5, _positive),
        "x": Parameter("float", 3.0, _at_least(0.0)),
        "samples": Parameter("int", 100000, _at_least(2)),
        "seeds": Parameter("int", 3, _at_least(1)),
        "level": Parameter("float", 0.01, _within(0.0, 1.0)),
    },
    "cutoff": {
        "family": Parameter("str", "kinetic", _one_of(FAMILIES)),
        "sizes": Parameter("ints", [1, 4, 16, 64, 256], _each(_at_least(1))),
        "r_grid": Parameter(
            "floats", [0.25, 0.5, 1.0, 2.0, 4.0], _each(_positive)
        ),
        "samples": Parameter(
            "int", lambda: CONF.montecarlo.samples, _at_least(2)
        ),
        "start_scale": Parameter(
            "float", lambda: CONF.cutoff.start_scale, _nonzero
        ),
        "time_scale": Parameter("float", 1.0, _positive),
        "r_low": Parameter("float", 0.5, _positive),
        "r_high": Parameter("float", 2.0, _positive),
    },
}

COMMANDS = tuple(PARAMETERS)


def _entropy_consistency(params):
    return [
        f"parameters.starts: {start} exceeds cap {params['cap']}"
        for start in params["starts"]
        if start > params["cap"]
    ]


def _cutoff_consistency(params):
    errors = []
    if len(set(params["sizes"])) < 4:
        errors.append("parameters.sizes: need at least 4 distinct sizes")
    for key in ("r_low", "r_high"):
        if not any(math.isclose(params[key], r) for r in params["r_grid"]):
            errors.append(f"parameters.{key}: {params[key]} is not in r_grid")
    return errors


CONSISTENCY = {
    "entropy": _entropy_consistency,
    "cutoff": _cutoff_consistency,
}


def validate_parameters(
    command: str, section: t.Mapping[str, t.Any]
) -> t.Tuple[t.Dict[str, t.Any], t.List[str]]:
    """Fill defaults and validate a section, collecting every error."""
    schema = PARAMETERS[command]
    section = {str(key): value for key, value in section.items()}
    errors = [
        f"parameters.{key}: unknown key"
        for key in sorted(section)
        if key not in schema
    ]
    resolved = {}
    for key, parameter in schema.items():
        value = section.get(key, parameter.resolve_default())
        try:
            value = coerce(parameter.kind, value)
        except (TypeError, ValueError) as err:
            errors.append(f"parameters.{key}: {err}")
            continue
        why = None if parameter.check is None else parameter.check(value)
        if why is not None:
            errors.append(f"parameters.{key}: {why}")
            continue
        resolved[key] = value
    if not errors and command in CONSISTENCY:
        errors.extend(CONSISTENCY[command](resolved))
    return resolved, errors


def run(
    command: str,
    params: t.Dict[str, t.Any],
    seed: int,
    workers: t.Optional[int] = None,
) -> Outcome:
    """Run a command; the outcome is a pure function of its arguments."""
    workers = worker_count() if workers is None else workers
    LOG.info(f"Starting '{command}' with seed {seed} on {workers} workers")
    timings: t.Dict[str, float] = {}
    summary: t.Dict[str, t.Any] = {}
    if command == "cutoff":
        family = cutoff_family(params)
        with timeutils.StopWatch() as watch:
            rows = cutoff.tv_profile(
                family, params["r_grid"], params["samples"], seed, workers
            )
        timings["profile"] = watch.elapsed()
        result = cutoff.cutoff_summary(rows, params["r_low"], params["r_high"])
        summary = dataclasses.asdict(result)
        summary["family"] = family.name
        summary["cutoff_times"] = {
            str(n): family.cutoff_time(n) for n in family.sizes
        }
        checks = cutoff_checks(family, rows, result, params)
        results, tables = run_checks(checks, seed, workers)
        tables["profile"] = (
            TABLE_HEADERS["profile"],
            [(row.n, row.r, row.time, row.tv, row.se) for row in rows],
        )
    else:
        checks = CHECK_BUILDERS[command](params)
        results, tables = run_checks(checks, seed, workers)
    for result in results:
        timings[result.name] = result.runtime
    outcome = Outcome(command, tuple(results), tables, summary, timings)
    LOG.info(
        f"'{command}' finished: {len(results) - len(outcome.failures)} of "
        f"{len(results)} checks passed"
    )
    return outcome
