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

"""Warm-up time laws.

A warm-up law is the distribution of the random delay tau in a
factorisation Lambda Lambda~ = P_tau. Each law exposes whichever of
laplace, density, sample, quadrature and mean it can provide; the
others raise UnsupportedError.
"""

import abc
import dataclasses
import itertools
import typing as t

import numpy as np
from oslo_log import log as logging
from scipy import special as sp

from interweave import exception
from interweave import special

LOG = logging.getLogger(__name__)

COMPLETE_MONOTONICITY_TOLERANCE = -1e-9


@dataclasses.dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights such that E[g(tau)] = sum w_i g(s_i).

    When atomic is True the rule is exact for every g. Otherwise it is
    exact for g(s) = polynomial in exp(-s) up to degree ``order``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    atomic: bool
    order: int


def _check_u(u):
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise exception.DomainError(
            name="u", value=u, why="Laplace argument must be >= 0"
        )
    return arr


def _scalar(value):
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


class WarmupLaw(abc.ABC):
    infinitely_divisible = False

    @abc.abstractmethod
    def _laplace(self, u: np.ndarray) -> np.ndarray:
        pass

    def laplace(self, u):
        """E[exp(-u tau)], elementwise for u >= 0."""
        return _scalar(self._laplace(_check_u(u)))

    def bernstein(self, u):
        """The exponent phi with laplace = exp(-phi)."""
        if not self.infinitely_divisible:
            raise exception.UnsupportedError(
                what=repr(self), operation="a Bernstein exponent"
            )
        return _scalar(-np.log(self._laplace(_check_u(u))))

    def density(self, s):
        raise exception.UnsupportedError(what=repr(self), operation="density")

    def sample(self, rng: np.random.Generator, size=None):
        raise exception.UnsupportedError(what=repr(self), operation="sample")

    def quadrature(self, order: int) -> QuadratureRule:
        raise exception.UnsupportedError(
            what=repr(self), operation="quadrature"
        )

    def mean(self) -> float:
        raise exception.UnsupportedError(what=repr(self), operation="mean")

    @abc.abstractmethod
    def describe(self) -> t.Dict[str, t.Any]:
        pass


@dataclasses.dataclass(frozen=True)
class Dirac(WarmupLaw):
    t0: float

    infinitely_divisible = True

    def __post_init__(self):
        if not self.t0 >= 0:
            raise exception.DomainError(
                name="t0", value=self.t0, why="a delay must be >= 0"
            )

    def _laplace(self, u):
        return np.exp(-u * self.t0)

    def sample(self, rng, size=None):
        if size is None:
            return float(self.t0)
        return np.full(size, float(self.t0))

    def quadrature(self, order):
        return QuadratureRule(
            np.array([float(self.t0)]), np.array([1.0]), True, order
        )

    def mean(self):
        return float(self.t0)

    def describe(self):
        return {"law": "dirac", "t0": self.t0}


@dataclasses.dataclass(frozen=True)
class NegLogBeta(WarmupLaw):
    """tau = -log R with R ~ Beta(eps, beta).

    E[exp(-u tau)] = E[R^u]
                   = Gamma(beta+eps) Gamma(u+eps)
                     / (Gamma(eps) Gamma(u+beta+eps))
    """

    eps: float
    beta: float

    infinitely_divisible = True

    def __post_init__(self):
        for name in ("eps", "beta"):
            value = getattr(self, name)
            if not value > 0:
                raise exception.DomainError(
                    name=name, value=value, why="must be positive"
                )

    def _laplace(self, u):
        return special.gamma_ratio(
            [self.beta + self.eps, u + self.eps],
            [self.eps, u + self.beta + self.eps],
        )

    def density(self, s):
        s = np.asarray(s, dtype=float)
        positive = s > 0
        safe = np.where(positive, s, 1.0)
        log_density = (
            -self.eps * safe
            + (self.beta - 1.0) * np.log(-np.expm1(-safe))
            - sp.betaln(self.eps, self.beta)
        )
        return _scalar(np.where(positive, np.exp(log_density), 0.0))

    def sample(self, rng, size=None):
        # -log(X / (X + Y)) with X ~ Gamma(eps), Y ~ Gamma(beta), in logs
        log_x = special.log_gamma_variate(self.eps, rng, size)
        log_y = special.log_gamma_variate(self.beta, rng, size)
        return np.logaddexp(log_x, log_y) - log_x

    def quadrature(self, order):
        # Gauss-Jacobi in r = exp(-s) = (1 + x) / 2
        count = order // 2 + 1
        x, w = sp.roots_jacobi(count, self.beta - 1.0, self.eps - 1.0)
        r = (1.0 + x) / 2.0
        return QuadratureRule(-np.log(r), w / w.sum(), False, 2 * count - 1)

    def mean(self):
        return float(sp.digamma(self.eps + self.beta) - sp.digamma(self.eps))

    def describe(self):
        return {"law": "neglogbeta", "eps": self.eps, "beta": self.beta}


def beta_warmup(beta: float) -> NegLogBeta:
    """The warm-up tau^(beta) = -log B of the generalized Laguerre family.

    Its transform is Gamma(1+beta) Gamma(u+1) / Gamma(u+beta+1), the
    NegLogBeta transform at eps = 1.
    """
    return NegLogBeta(1.0, beta)


@dataclasses.dataclass(frozen=True)
class JacobiWarmup(WarmupLaw):
    """Warm-up linking the symmetric Jacobi semigroup to J_beta.

    Only the Laplace transform is known in closed form.
    """

    lam1: float
    beta: float

    def __post_init__(self):
        if not self.lam1 > 2 * self.beta > 1:
            raise exception.DomainError(
                name="(lam1, beta)",
                value=(self.lam1, self.beta),
                why="requires lam1 > 2 beta > 1",
            )

    def rho(self, u):
        half = (self.lam1 - 1.0) / 2.0
        return np.sqrt(u + half**2) - half

    def _laplace(self, u):
        rho = self.rho(u)
        return special.gamma_ratio(
            [self.lam1 - self.beta, rho + self.lam1 / 2.0],
            [rho + self.lam1 - self.beta, self.lam1 / 2.0],
        )

    @property
    def entropy_rate(self) -> float:
        # log-Sobolev constant of the symmetric reference semigroup
        return self.lam1 / 2.0

    def hypercontractive_exponent(self, t: float) -> float:
        return 1.0 + np.exp(self.entropy_rate * t)

    def describe(self):
        return {"law": "jacobi", "lam1": self.lam1, "beta": self.beta}


@dataclasses.dataclass(frozen=True)
class Subordinated(WarmupLaw):
    """tau_t of the subordinator whose law at time 1 is ``base``."""

    base: WarmupLaw
    t: float

    infinitely_divisible = True

    def __post_init__(self):
        if not self.base.infinitely_divisible:
            raise exception.UnsupportedError(
                what=repr(self.base), operation="subordination"
            )
        if not self.t >= 0:
            raise exception.DomainError(
                name="t", value=self.t, why="must be >= 0"
            )

    def _integer_time(self):
        if float(self.t).is_integer():
            return int(self.t)
        raise exception.UnsupportedError(
            what=repr(self), operation="non-integer time draws"
        )

    def _laplace(self, u):
        return np.exp(self.t * np.log(self.base._laplace(u)))

    def sample(self, rng, size=None):
        if isinstance(self.base, Dirac):
            return Dirac(self.base.t0 * self.t).sample(rng, size)
        total = 0.0
        for _ in range(self._integer_time()):
            total = total + self.base.sample(rng, size)
        return total

    def quadrature(self, order):
        if isinstance(self.base, Dirac):
            return Dirac(self.base.t0 * self.t).quadrature(order)
        rules = [self.base.quadrature(order)] * self._integer_time()
        return _tensor(rules, order) if rules else Dirac(0).quadrature(order)

    def mean(self):
        return self.t * self.base.mean()

    def describe(self):
        return {
            "law": "subordinated",
            "base": self.base.describe(),
            "t": self.t,
        }


@dataclasses.dataclass(frozen=True)
class Convolution(WarmupLaw):
    """Law of tau1 + tau2 for independent tau1, tau2."""

    first: WarmupLaw
    second: WarmupLaw

    @property
    def infinitely_divisible(self):
        return (
            self.first.infinitely_divisible
            and self.second.infinitely_divisible
        )

    def _laplace(self, u):
        return self.first._laplace(u) * self.second._laplace(u)

    def sample(self, rng, size=None):
        return self.first.sample(rng, size) + self.second.sample(rng, size)

    def quadrature(self, order):
        return _tensor(
            [self.first.quadrature(order), self.second.quadrature(order)],
            order,
        )

    def mean(self):
        return self.first.mean() + self.second.mean()

    def describe(self):
        return {
            "law": "convolution",
            "first": self.first.describe(),
            "second": self.second.describe(),
        }


@dataclasses.dataclass(frozen=True)
class Shifted(WarmupLaw):
    """Law of t + tau."""

    base: WarmupLaw
    t: float

    def __post_init__(self):
        if not self.t >= 0:
            raise exception.DomainError(
                name="t", value=self.t, why="a shift must be >= 0"
            )

    @property
    def infinitely_divisible(self):
        return self.base.infinitely_divisible

    def _laplace(self, u):
        return np.exp(-u * self.t) * self.base._laplace(u)

    def density(self, s):
        s = np.asarray(s, dtype=float)
        inside = s > self.t
        shifted = np.where(inside, s - self.t, 1.0)
        return _scalar(np.where(inside, self.base.density(shifted), 0.0))

    def sample(self, rng, size=None):
        return self.t + self.base.sample(rng, size)

    def quadrature(self, order):
        rule = self.base.quadrature(order)
        return dataclasses.replace(rule, nodes=rule.nodes + self.t)

    def mean(self):
        return self.t + self.base.mean()

    def describe(self):
        return {"law": "shifted", "base": self.base.describe(), "t": self.t}


def _tensor(rules: t.Sequence[QuadratureRule], order: int) -> QuadratureRule:
    nodes, weights = [0.0], [1.0]
    for rule in rules:
        nodes = [a + b for a, b in itertools.product(nodes, rule.nodes)]
        weights = [a * b for a, b in itertools.product(weights, rule.weights)]
    return QuadratureRule(
        np.array(nodes),
        np.array(weights),
        all(rule.atomic for rule in rules),
        min([order] + [rule.order for rule in rules]),
    )


def convolve(first: WarmupLaw, second: WarmupLaw) -> WarmupLaw:
    if isinstance(first, Dirac):
        return shift(second, first.t0)
    if isinstance(second, Dirac):
        return shift(first, second.t0)
    return Convolution(first, second)


def shift(law: WarmupLaw, t0: float) -> WarmupLaw:
    if isinstance(law, Dirac):
        return Dirac(law.t0 + t0)
    if t0 == 0:
        return law
    return Shifted(law, t0)


def _divided_differences(values, grid, order):
    table = [np.asarray(values, dtype=float)]
    for k in range(1, order + 1):
        previous = table[-1]
        table.append((previous[1:] - previous[:-1]) / (grid[k:] - grid[:-k]))
    return table


def _check_grid(grid, order):
    grid = np.asarray(grid, dtype=float)
    if order < 1:
        raise exception.DomainError(
            name="order", value=order, why="must be >= 1"
        )
    if grid.ndim != 1 or len(grid) <= order:
        raise exception.DomainError(
            name="grid",
            value=len(np.atleast_1d(grid)),
            why=f"needs more than {order} points",
        )
    if np.any(np.diff(grid) <= 0):
        raise exception.DomainError(
            name="grid", value="...", why="must be strictly increasing"
        )
    return grid


def check_complete_monotonicity(
    f: t.Callable,
    grid,
    order: int,
    tolerance: float = COMPLETE_MONOTONICITY_TOLERANCE,
) -> t.Tuple[bool, float]:
    """Sign test (-1)^k f^(k) >= 0 on divided differences, k <= order.

    Returns whether every signed difference is above the tolerance and
    the smallest signed difference found.
    """
    grid = _check_grid(grid, order)
    table = _divided_differences([f(u) for u in grid], grid, order)
    worst = min(
        float(np.min((-1) ** k * table[k])) for k in range(order + 1)
    )
    LOG.debug("Complete monotonicity to order %d: worst %s", order, worst)
    return worst >= tolerance, worst


def bernstein_check(
    phi: t.Callable,
    grid,
    order: int,
    tolerance: float = COMPLETE_MONOTONICITY_TOLERANCE,
) -> t.Tuple[bool, float]:
    """phi(0) >= 0 and the derivative of phi completely monotone."""
    grid = _check_grid(grid, order)
    table = _divided_differences([phi(u) for u in grid], grid, order)
    worst = min(
        float(np.min((-1) ** (k - 1) * table[k]))
        for k in range(1, order + 1)
    )
    worst = min(worst, float(phi(0.0)))
    return worst >= tolerance, worst


def from_descriptor(descriptor: t.Dict[str, t.Any]) -> WarmupLaw:
    """Inverse of WarmupLaw.describe."""
    kind = descriptor.get("law")
    if kind == "dirac":
        return Dirac(float(descriptor["t0"]))
    if kind == "neglogbeta":
        return NegLogBeta(float(descriptor["eps"]), float(descriptor["beta"]))
    if kind == "jacobi":
        return JacobiWarmup(
            float(descriptor["lam1"]), float(descriptor["beta"])
        )
    if kind == "subordinated":
        return Subordinated(
            from_descriptor(descriptor["base"]), float(descriptor["t"])
        )
    if kind == "convolution":
        return convolve(
            from_descriptor(descriptor["first"]),
            from_descriptor(descriptor["second"]),
        )
    if kind == "shifted":
        return shift(
            from_descriptor(descriptor["base"]), float(descriptor["t"])
        )
    raise exception.DomainError(
        name="law", value=kind, why="unknown warm-up law"
    )
