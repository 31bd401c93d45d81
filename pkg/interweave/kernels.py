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

"""Markov kernels as samplers, with their polynomial moment actions.

A kernel maps functions on its domain state space to functions on its
codomain state space, Lambda f(x) = E[f(Y)] with Y ~ Lambda(x, .). The
moment_matrix of a kernel is read by polyop.kernel_polyop.
"""

import abc
import dataclasses
import math
import typing as t

import numpy as np
from numpy.polynomial import polynomial as npoly
from oslo_log import log as logging
from scipy import special as sp

from interweave import exception
from interweave import polyop
from interweave import special

LOG = logging.getLogger(__name__)

FEASIBILITY_TOLERANCE = 1e-12

# Kernels are named by their action on functions: dom is the space the
# test functions live on, cod the space of starting points x.


class KernelSpec(abc.ABC):
    dom = polyop.Basis.MONOMIAL
    cod = polyop.Basis.MONOMIAL
    dom_space = polyop.Space.CONTINUOUS
    cod_space = polyop.Space.CONTINUOUS

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0) or not np.all(np.isfinite(x)):
            raise exception.DomainError(
                name="x", value=x, why="start points must be >= 0"
            )
        if self.cod_space == polyop.Space.DISCRETE and np.any(
            x != np.round(x)
        ):
            raise exception.DomainError(
                name="x", value=x, why="start points must be integers"
            )
        return x

    @abc.abstractmethod
    def _draw(self, x, rng, size):
        pass

    def sample(self, x, rng: np.random.Generator, size=None):
        return self._draw(self.check_point(x), rng, size)


@dataclasses.dataclass(frozen=True)
class PoissonKernel(KernelSpec):
    """Lambda_sigma(x, .) = Poisson(sigma x), from R+ to Z+."""

    sigma: float

    dom = polyop.Basis.FALLING_FACTORIAL
    dom_space = polyop.Space.DISCRETE

    def __post_init__(self):
        polyop._require_positive(sigma=self.sigma)

    def _draw(self, x, rng, size):
        return rng.poisson(self.sigma * x, size=size)

    def moment_matrix(self, degree):
        # factorial moments E[(N)_k] = (sigma x)^k
        return np.diag(self.sigma ** np.arange(degree + 1, dtype=float))


@dataclasses.dataclass(frozen=True)
class GammaKernel(KernelSpec):
    """Lambda~_{beta,rate}(n, .) = Gamma(n + beta, rate), from Z+ to R+."""

    beta: float
    rate: float

    cod = polyop.Basis.FALLING_FACTORIAL
    cod_space = polyop.Space.DISCRETE

    def __post_init__(self):
        polyop._require_positive(beta=self.beta, rate=self.rate)

    def _draw(self, x, rng, size):
        return rng.gamma(x + self.beta, 1.0 / self.rate, size=size)

    def moment_matrix(self, degree):
        # E[G^k] = (n + beta)(n + beta + 1)...(n + beta + k - 1) / rate^k
        to_ff = polyop.stirling_second_kind(degree)
        matrix = np.zeros((degree + 1, degree + 1))
        for k in range(degree + 1):
            rising = npoly.polyfromroots([-(self.beta + j) for j in range(k)])
            coefficients = np.zeros(degree + 1)
            coefficients[: k + 1] = rising / self.rate**k
            matrix[:, k] = to_ff @ coefficients
        return matrix


@dataclasses.dataclass(frozen=True)
class BetaMultKernel(KernelSpec):
    """Lambda_{beta,eps}(x, .) = law of x B with B ~ Beta(eps, beta)."""

    beta: float
    eps: float

    def __post_init__(self):
        polyop._require_positive(beta=self.beta, eps=self.eps)

    def multiplier(self, n):
        return special.gamma_ratio(
            [self.beta + self.eps, n + self.eps],
            [self.eps, n + self.beta + self.eps],
        )

    def _draw(self, x, rng, size):
        return x * rng.beta(self.eps, self.beta, size=size)

    def moment_matrix(self, degree):
        return np.diag(self.multiplier(np.arange(degree + 1, dtype=float)))


@dataclasses.dataclass(frozen=True)
class BStarKernel(KernelSpec):
    """B*_beta(x, .) = law of x + G with G ~ Gamma(beta, 1).

    This is also the adjoint of the beta multiplication kernel, for any
    eps.
    """

    beta: float

    def __post_init__(self):
        polyop._require_positive(beta=self.beta)

    def _draw(self, x, rng, size):
        return x + rng.gamma(self.beta, 1.0, size=size)

    def moment_matrix(self, degree):
        matrix = np.zeros((degree + 1, degree + 1))
        for n in range(degree + 1):
            for m in range(n + 1):
                matrix[n - m, n] = sp.binom(n, m) * special.gamma_ratio(
                    [self.beta + m], [self.beta]
                )
        return matrix


@dataclasses.dataclass(frozen=True, eq=False)
class TwoPointKernel(KernelSpec):
    """A row-stochastic 2x2 matrix on {0, 1}."""

    matrix: np.ndarray

    cod_space = dom_space = polyop.Space.DISCRETE

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.shape != (2, 2):
            raise exception.DimensionMismatch(detail="need a 2x2 matrix")
        tol = FEASIBILITY_TOLERANCE
        if np.any(matrix < -tol) or np.any(matrix > 1 + tol):
            raise exception.InfeasibleError(
                name="two point kernel", detail=f"entries {matrix.tolist()}"
            )
        if not np.allclose(matrix.sum(axis=1), 1.0, atol=tol, rtol=0):
            raise exception.InfeasibleError(
                name="two point kernel", detail="rows must sum to 1"
            )
        object.__setattr__(self, "matrix", matrix)

    def check_point(self, x):
        x = np.asarray(x)
        if not np.all(np.isin(x, (0, 1))):
            raise exception.DomainError(
                name="x", value=x, why="the two point space is {0, 1}"
            )
        return x.astype(int)

    def _draw(self, x, rng, size):
        stay_low = np.clip(self.matrix[x, 0], 0.0, 1.0)
        return (rng.uniform(size=size) >= stay_low).astype(int)


def sample_kernel(spec: KernelSpec, x, rng: np.random.Generator, size=None):
    return spec.sample(x, rng, size)


def apply_kernel_mc(
    spec: KernelSpec,
    f: t.Callable,
    x,
    nsamples: int,
    rng: np.random.Generator,
) -> t.Tuple[float, float]:
    """Monte-Carlo estimate of (Lambda f)(x) and its standard error."""
    if nsamples < 1:
        raise exception.DomainError(
            name="nsamples", value=nsamples, why="must be >= 1"
        )
    draws = spec.sample(x, rng, nsamples)
    values = np.broadcast_to(np.asarray(f(draws), dtype=float), draws.shape)
    estimate = float(np.mean(values))
    if nsamples == 1:
        return estimate, math.inf
    return estimate, float(np.std(values, ddof=1) / math.sqrt(nsamples))


@dataclasses.dataclass(frozen=True)
class TwoPointModel:
    """L = rate (mu - Id) on {0, 1}."""

    rate: float
    mu: t.Tuple[float, float]

    def __post_init__(self):
        polyop._require_positive(rate=self.rate)
        mu = tuple(float(v) for v in self.mu)
        if (
            len(mu) != 2
            or min(mu) <= 0
            or not math.isclose(sum(mu), 1.0, abs_tol=1e-12)
        ):
            raise exception.DomainError(
                name="mu", value=self.mu, why="needs two positive masses"
            )
        object.__setattr__(self, "mu", mu)

    @property
    def ell(self) -> float:
        return math.sqrt(self.mu[1] / self.mu[0])

    @property
    def phi(self) -> np.ndarray:
        return np.array([self.ell, -1.0 / self.ell])

    @property
    def mu_min(self) -> float:
        return min(self.mu)

    def generator(self) -> np.ndarray:
        return self.rate * (np.outer(np.ones(2), self.mu) - np.eye(2))

    def semigroup(self, t: float) -> np.ndarray:
        projector = np.outer(np.ones(2), self.mu)
        return projector + math.exp(-self.rate * t) * (np.eye(2) - projector)


def _model(mu, rate=1.0):
    return mu if isinstance(mu, TwoPointModel) else TwoPointModel(rate, mu)


def two_point_lambda(mu, mu_tilde, eps: float) -> t.Tuple[np.ndarray, bool]:
    """Matrix of the map 1 -> 1, phi~ -> eps phi, and its feasibility."""
    if not eps > 0:
        raise exception.DomainError(name="eps", value=eps, why="must be > 0")
    model, tilde = _model(mu), _model(mu_tilde)
    source = np.column_stack([np.ones(2), tilde.phi])
    image = np.column_stack([np.ones(2), eps * model.phi])
    matrix = np.linalg.solve(source.T, image.T).T
    tol = FEASIBILITY_TOLERANCE
    feasible = bool(np.all(matrix >= -tol) and np.all(matrix <= 1 + tol))
    return matrix, feasible


def two_point_lambda_closed_form(mu, mu_tilde, eps: float) -> np.ndarray:
    """Entries a, b of the same matrix written out.

    a = (1 + eps l l~) / (1 + l~^2), b = (1 - eps l~ / l) / (1 + l~^2).
    """
    ell, ell_tilde = _model(mu).ell, _model(mu_tilde).ell
    a = (1.0 + eps * ell * ell_tilde) / (1.0 + ell_tilde**2)
    b = (1.0 - eps * ell_tilde / ell) / (1.0 + ell_tilde**2)
    return np.array([[a, 1.0 - a], [b, 1.0 - b]])


@dataclasses.dataclass(frozen=True, eq=False)
class TwoPointInterweaving:
    eps0: float
    t0: float
    kernel: np.ndarray
    kernel_tilde: np.ndarray


def two_point_optimal(mu, mu_tilde, rate: float = 1.0):
    """Largest Markovian eps0 and the deterministic warm-up it yields.

    Lambda Lambda~ multiplies phi by eps0^2 = exp(-rate t0).
    """
    model, tilde = _model(mu, rate), _model(mu_tilde, rate)
    eps0 = min(model.ell / tilde.ell, tilde.ell / model.ell)
    t0 = -math.log(eps0**2) / model.rate
    kernel, ok = two_point_lambda(model, tilde, eps0)
    kernel_tilde, ok_tilde = two_point_lambda(tilde, model, eps0)
    assert ok and ok_tilde
    LOG.debug("Two point warm-up eps0=%s t0=%s", eps0, t0)
    return TwoPointInterweaving(eps0, t0, kernel, kernel_tilde)
