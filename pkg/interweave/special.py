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

# Special functions and elementary samplers shared by every other module.

import dataclasses
import enum
import itertools
import typing as t

import numpy as np
from oslo_log import log as logging
from scipy import special as sp

from interweave import exception

LOG = logging.getLogger(__name__)


def _require(condition, name, value, why):
    if not condition:
        raise exception.DomainError(name=name, value=value, why=why)


def log_gamma(x):
    """ln Gamma(x) for x > 0, elementwise on arrays."""
    arr = np.asarray(x, dtype=float)
    _require(
        np.all(np.isfinite(arr)) and np.all(arr > 0),
        "x",
        x,
        "log_gamma needs finite positive arguments",
    )
    result = sp.gammaln(arr)
    return float(result) if result.ndim == 0 else result


def gamma_ratio(numerator: t.Sequence, denominator: t.Sequence):
    """prod Gamma(numerator) / prod Gamma(denominator), in log space.

    Each entry may be a scalar or an array; arrays broadcast. Terms are
    paired in order, so coinciding pairs cancel exactly.
    """
    log_value = 0.0
    for a, b in itertools.zip_longest(numerator, denominator):
        term = 0.0 if a is None else log_gamma(a)
        if b is not None:
            term = term - log_gamma(b)
        log_value = log_value + term
    return np.exp(log_value)


def laguerre_polynomial(n: int, beta: float, x):
    """Generalized Laguerre polynomial by three-term recurrence."""
    _require(int(n) == n and n >= 0, "n", n, "degree must be a natural")
    _require(beta > -1, "beta", beta, "must exceed -1")
    x = np.asarray(x, dtype=float)
    previous = np.ones_like(x)
    if n == 0:
        return previous if previous.ndim else float(previous)
    current = 1.0 + beta - x
    for k in range(1, int(n)):
        previous, current = current, (
            (2 * k + 1 + beta - x) * current - (k + beta) * previous
        ) / (k + 1)
    return current if current.ndim else float(current)


def laguerre_closed_form(n: int, beta: float, x):
    """Direct sum of (-1)^r binom(n+beta, n-r) x^r / r! for r <= n."""
    _require(int(n) == n and n >= 0, "n", n, "degree must be a natural")
    _require(beta > -1, "beta", beta, "must exceed -1")
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for r in range(int(n) + 1):
        total = total + (-1.0) ** r * sp.binom(n + beta, n - r) * (
            x**r / sp.factorial(r)
        )
    return total if total.ndim else float(total)


class LawKind(enum.Enum):
    GAMMA = "gamma"
    BETA = "beta"
    POISSON = "poisson"
    NEGATIVE_BINOMIAL = "negative_binomial"
    NORMAL = "normal"
    EXPONENTIAL = "exponential"


@dataclasses.dataclass(frozen=True)
class StandardLaw:
    """A named elementary distribution with validated parameters.

    The negative binomial law uses the mass function
    Gamma(n+shape)/(Gamma(shape) n!) (1-p)^shape p^n, so that with
    p = sigma/(sigma+1) it is the invariant law of the Laguerre
    birth-and-death chain.
    """

    kind: LawKind
    params: t.Tuple[float, ...]

    def __post_init__(self):
        a = self.params
        if self.kind in (LawKind.GAMMA, LawKind.BETA):
            _require(
                len(a) == 2 and a[0] > 0 and a[1] > 0,
                self.kind.value,
                a,
                "both parameters must be positive",
            )
        elif self.kind == LawKind.POISSON:
            _require(
                len(a) == 1 and a[0] >= 0, "poisson", a, "mean must be >= 0"
            )
        elif self.kind == LawKind.NEGATIVE_BINOMIAL:
            _require(
                len(a) == 2 and a[0] > 0 and 0 < a[1] < 1,
                "negative_binomial",
                a,
                "needs shape > 0 and p in (0, 1)",
            )
        elif self.kind == LawKind.NORMAL:
            _require(
                len(a) == 2 and a[1] > 0, "normal", a, "variance must be > 0"
            )
        elif self.kind == LawKind.EXPONENTIAL:
            _require(
                len(a) == 1 and a[0] > 0, "exponential", a, "rate must be > 0"
            )

    @classmethod
    def gamma(cls, shape, scale=1.0):
        return cls(LawKind.GAMMA, (float(shape), float(scale)))

    @classmethod
    def beta(cls, a, b):
        return cls(LawKind.BETA, (float(a), float(b)))

    @classmethod
    def poisson(cls, mean):
        return cls(LawKind.POISSON, (float(mean),))

    @classmethod
    def negative_binomial(cls, shape, p):
        return cls(LawKind.NEGATIVE_BINOMIAL, (float(shape), float(p)))

    @classmethod
    def normal(cls, mean, variance):
        return cls(LawKind.NORMAL, (float(mean), float(variance)))

    @classmethod
    def exponential(cls, rate):
        return cls(LawKind.EXPONENTIAL, (float(rate),))

    @property
    def mean(self) -> float:
        a = self.params
        return {
            LawKind.GAMMA: lambda: a[0] * a[1],
            LawKind.BETA: lambda: a[0] / (a[0] + a[1]),
            LawKind.POISSON: lambda: a[0],
            LawKind.NEGATIVE_BINOMIAL: lambda: a[0] * a[1] / (1 - a[1]),
            LawKind.NORMAL: lambda: a[0],
            LawKind.EXPONENTIAL: lambda: 1.0 / a[0],
        }[self.kind]()

    @property
    def variance(self) -> float:
        a = self.params
        return {
            LawKind.GAMMA: lambda: a[0] * a[1] ** 2,
            LawKind.BETA: lambda: a[0]
            * a[1]
            / ((a[0] + a[1]) ** 2 * (a[0] + a[1] + 1)),
            LawKind.POISSON: lambda: a[0],
            LawKind.NEGATIVE_BINOMIAL: lambda: a[0] * a[1] / (1 - a[1]) ** 2,
            LawKind.NORMAL: lambda: a[1],
            LawKind.EXPONENTIAL: lambda: 1.0 / a[0] ** 2,
        }[self.kind]()


def sample(law: StandardLaw, rng: np.random.Generator, size=None):
    """Draw from law using the caller's generator."""
    a = law.params
    if law.kind == LawKind.GAMMA:
        return rng.gamma(a[0], a[1], size=size)
    if law.kind == LawKind.BETA:
        return rng.beta(a[0], a[1], size=size)
    if law.kind == LawKind.POISSON:
        return rng.poisson(a[0], size=size)
    if law.kind == LawKind.NEGATIVE_BINOMIAL:
        intensity = rng.gamma(a[0], a[1] / (1 - a[1]), size=size)
        return rng.poisson(intensity)
    if law.kind == LawKind.NORMAL:
        return rng.normal(a[0], np.sqrt(a[1]), size=size)
    return rng.exponential(1.0 / a[0], size=size)


def log_gamma_variate(shape: float, rng: np.random.Generator, size=None):
    """log of a Gamma(shape, 1) draw, accurate for tiny shapes.

    For shape < 1 a direct draw underflows to 0 with positive probability,
    so use G(shape) = G(shape + 1) * U^(1/shape) in log form.
    """
    _require(shape > 0, "shape", shape, "must be positive")
    if shape >= 1:
        return np.log(rng.gamma(shape, 1.0, size=size))
    boosted = np.log(rng.gamma(shape + 1.0, 1.0, size=size))
    return boosted + np.log1p(-rng.uniform(size=size)) / shape


def make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def substreams(seed, count: int) -> t.List[np.random.Generator]:
    """Independent generators for parallel tasks, spawned from one seed."""
    assert count >= 1
    children = np.random.SeedSequence(seed).spawn(count)
    LOG.debug("Spawned %d substreams from seed %s", count, seed)
    return [np.random.default_rng(child) for child in children]
