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

"""Runnable semigroups.

Finite generators are evolved exactly by uniformization. The Laguerre
diffusion is sampled either from its exact transition law or through
the Poisson / birth-and-death / gamma route it interweaves with.
"""

import csv
import dataclasses
import math
import typing as t

import numpy as np
from numpy.polynomial import polynomial as npoly
from oslo_log import log as logging
from scipy import linalg
from scipy import sparse
from scipy import stats

from interweave import exception
from interweave import polyop
from interweave import warmup

LOG = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-12
UNIFORMIZATION_TAIL = 1e-13
MASS_DEFECT_WARNING = 1e-8


@dataclasses.dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """A probability vector on a finite, labelled state space."""

    weights: np.ndarray
    labels: t.Optional[np.ndarray] = None

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        if weights.ndim != 1 or weights.size == 0:
            raise exception.DimensionMismatch(
                detail="a measure needs a non-empty vector of weights"
            )
        if np.any(weights < 0) or not math.isclose(
            float(weights.sum()), 1.0, abs_tol=NORMALIZATION_TOLERANCE
        ):
            raise exception.DomainError(
                name="weights",
                value=float(weights.sum()),
                why="must be nonnegative and sum to 1",
            )
        labels = (
            np.arange(weights.size)
            if self.labels is None
            else np.asarray(self.labels)
        )
        if labels.shape != weights.shape:
            raise exception.DimensionMismatch(
                detail="labels and weights differ in length"
            )
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def normalized(cls, weights, labels=None):
        weights = np.clip(np.asarray(weights, dtype=float), 0.0, None)
        return cls(weights / weights.sum(), labels)

    @classmethod
    def dirac(cls, size: int, index: int):
        if not 0 <= index < size:
            raise exception.DomainError(
                name="index", value=index, why=f"outside [0, {size})"
            )
        weights = np.zeros(size)
        weights[index] = 1.0
        return cls(weights)

    @property
    def size(self) -> int:
        return self.weights.size

    def expect(self, f: t.Callable) -> float:
        return float(self.weights @ np.asarray(f(self.labels), dtype=float))


def same_support(first: DiscreteMeasure, second: DiscreteMeasure):
    if first.size != second.size:
        raise exception.DimensionMismatch(
            detail=f"measures of sizes {first.size} and {second.size}"
        )


@dataclasses.dataclass(frozen=True, eq=False)
class FiniteSemigroup:
    """exp(tQ) for a conservative generator Q with invariant law nu."""

    generator: np.ndarray
    invariant: DiscreteMeasure
    mass_defect: float = 0.0

    def __post_init__(self):
        q = np.array(self.generator, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise exception.DimensionMismatch(
                detail=f"generator must be square, got {q.shape}"
            )
        if q.shape[0] != self.invariant.size:
            raise exception.DimensionMismatch(
                detail="generator and invariant law differ in size"
            )
        off = q - np.diag(np.diag(q))
        if np.any(off < 0):
            raise exception.DomainError(
                name="generator", value="...", why="negative jump rate"
            )
        scale = np.maximum(1.0, np.abs(np.diag(q)))
        if np.any(np.abs(q.sum(axis=1)) > NORMALIZATION_TOLERANCE * scale):
            raise exception.DomainError(
                name="generator", value="...", why="rows must sum to 0"
            )
        q.setflags(write=False)
        object.__setattr__(self, "generator", q)

    @property
    def size(self) -> int:
        return self.generator.shape[0]

    def stationarity_residual(self) -> float:
        return float(np.max(np.abs(self.invariant.weights @ self.generator)))

    def is_reversible(self, tolerance: float = 1e-12) -> bool:
        flow = self.invariant.weights[:, None] * self.generator
        scale = max(1.0, float(np.max(np.abs(flow))))
        return bool(np.max(np.abs(flow - flow.T)) <= tolerance * scale)

    def dense(self, t: float) -> np.ndarray:
        """Transition matrix exp(tQ), for small chains and cross-checks."""
        return linalg.expm(t * self.generator)


def truncate_birth_death(beta: float, sigma: float, cap: int):
    """Laguerre birth-and-death chain on {0, ..., cap}.

    Births sigma (n + beta), deaths (sigma + 1) n, and no birth out of
    the cap. The invariant law is the negative binomial law restricted to
    the lattice and renormalised; the mass it loses is the mass_defect.
    """
    polyop._require_positive(beta=beta, sigma=sigma)
    if cap < 10:
        raise exception.DomainError(name="N", value=cap, why="must be >= 10")
    n = np.arange(cap + 1, dtype=float)
    births = sigma * (n + beta)
    births[-1] = 0.0
    deaths = (sigma + 1.0) * n
    q = np.diag(births[:-1], 1) + np.diag(deaths[1:], -1)
    q -= np.diag(births + deaths)

    law = stats.nbinom(beta, 1.0 / (1.0 + sigma))
    log_mass = law.logpmf(n)
    defect = float(law.sf(cap))
    weights = np.exp(log_mass - np.logaddexp.reduce(log_mass))
    if defect > MASS_DEFECT_WARNING:
        LOG.warning(
            f"Birth-death truncation at N={cap} drops invariant mass "
            f"{defect:.3e}"
        )
    return FiniteSemigroup(q, DiscreteMeasure(weights / weights.sum()), defect)


def two_point_semigroup(rate: float, mu) -> FiniteSemigroup:
    """L = rate (mu - Id) on {0, 1}."""
    polyop._require_positive(rate=rate)
    mu = DiscreteMeasure(mu)
    if mu.size != 2 or np.any(mu.weights <= 0):
        raise exception.DomainError(
            name="mu", value=mu.weights, why="needs two positive masses"
        )
    q = rate * (np.outer(np.ones(2), mu.weights) - np.eye(2))
    return FiniteSemigroup(q, mu)


def evolve(
    sg: FiniteSemigroup, m0: DiscreteMeasure, t: float
) -> DiscreteMeasure:
    """m0 exp(tQ) by uniformization.

    With R = max |Q_ii| and P = I + Q / R, m0 exp(tQ) is the Poisson(Rt)
    mixture of m0 P^k; the series is cut once its tail is below
    UNIFORMIZATION_TAIL.
    """
    if t < 0:
        raise exception.DomainError(name="t", value=t, why="must be >= 0")
    same_support(m0, sg.invariant)
    rate = float(np.max(-np.diag(sg.generator)))
    if t == 0 or rate == 0:
        return m0
    intensity = rate * t
    terms = int(stats.poisson.isf(UNIFORMIZATION_TAIL, intensity)) + 1
    weights = stats.poisson.pmf(np.arange(terms + 1), intensity)
    LOG.debug(f"Uniformization at rate {rate:.4g} with {terms} terms")
    step = (
        sparse.identity(sg.size, format="csr")
        + sparse.csr_matrix(sg.generator) / rate
    ).T.tocsr()
    vector = m0.weights.copy()
    total = weights[0] * vector
    for k in range(1, terms + 1):
        vector = step @ vector
        total += weights[k] * vector
    return DiscreteMeasure.normalized(total, m0.labels)


def exact_laguerre_transition(
    beta: float, scale: float, t: float, x, rng: np.random.Generator, size=None
):
    """Exact draw of X_t given X_0 = x for scale x f'' + (scale beta - x) f'.

    X_t = c G with c = scale (1 - e^-t), G ~ Gamma(beta + N, 1) and
    N ~ Poisson(e^-t x / c).
    """
    polyop._require_positive(beta=beta, scale=scale, t=t)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise exception.DomainError(name="x", value=x, why="must be >= 0")
    c = scale * -math.expm1(-t)
    jumps = rng.poisson(math.exp(-t) * x / c, size=size)
    return c * rng.gamma(beta + jumps, 1.0, size=size)


def moment_oracle(beta: float, scale: float, t: float, x: float, k: int):
    """E[X_t^k | X_0 = x] for the Laguerre diffusion, from its polynomial
    action."""
    if k < 1:
        raise exception.DomainError(name="k", value=k, why="must be >= 1")
    gen = polyop.generator_polyop(polyop.LaguerreDiffusion(beta, scale), k)
    image = polyop.semigroup_polyop(gen, t).matrix[:, k]
    return float(npoly.polyval(x, image))


def gillespie_birth_death(
    beta: float,
    sigma: float,
    t: float,
    n0,
    rng: np.random.Generator,
    size=None,
    with_events: bool = False,
):
    """State at time t of the Laguerre birth-and-death chain.

    Paths are advanced jump by jump with exponential holding times, all
    paths at once. n0 may be an array of starting states, one per path.
    """
    polyop._require_positive(beta=beta, sigma=sigma)
    if t < 0:
        raise exception.DomainError(name="t", value=t, why="must be >= 0")
    start = np.asarray(n0)
    if np.any(start < 0) or np.any(start != np.round(start)):
        raise exception.DomainError(
            name="n0", value=n0, why="states are nonnegative integers"
        )
    shape = start.shape if size is None else size
    state = np.array(np.broadcast_to(start, shape), dtype=np.int64).ravel()
    clock = np.zeros(state.size)
    events = np.zeros(state.size, dtype=np.int64)
    active = np.arange(state.size)
    while active.size:
        n = state[active]
        births = sigma * (n + beta)
        rates = births + (sigma + 1.0) * n
        clock[active] += rng.exponential(1.0 / rates)
        alive = clock[active] <= t
        active = active[alive]
        up = rng.uniform(size=active.size) * rates[alive] < births[alive]
        state[active] += np.where(up, 1, -1)
        events[active] += 1
    LOG.debug(f"Simulated {events.sum()} jumps over {state.size} paths")
    state = state.reshape(shape)
    events = events.reshape(shape)
    if not shape:
        state, events = int(state), int(events)
    return (state, events) if with_events else state


def intertwined_laguerre_sampler(
    beta: float,
    scale: float,
    sigma: float,
    t: float,
    x,
    rng: np.random.Generator,
    size=None,
):
    """Draw X_{t0 + t} from X_0 = x through the birth-and-death chain.

    n0 ~ Poisson(sigma x), n_t is the chain with parameters
    (beta, sigma scale) run for t, and the output is
    Gamma(n_t + beta, rate 1/scale + sigma). The warm-up is
    t0 = ln(1 + 1 / (scale sigma)).
    """
    polyop._require_positive(beta=beta, scale=scale, sigma=sigma)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise exception.DomainError(name="x", value=x, why="must be >= 0")
    start = rng.poisson(sigma * x, size=size)
    state = gillespie_birth_death(beta, sigma * scale, t, start, rng)
    return rng.gamma(state + beta, 1.0 / (1.0 / scale + sigma))


def laguerre_warm_up(scale: float, sigma: float) -> float:
    return math.log1p(1.0 / (scale * sigma))


def subordinate_multipliers(eigenvalues, law: warmup.WarmupLaw, t: float):
    """exp(-t phi(lambda_n)) with exp(-phi) the Laplace transform of law."""
    if t < 0:
        raise exception.DomainError(name="t", value=t, why="must be >= 0")
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if t == 1:
        return law.laplace(eigenvalues)
    return np.exp(-t * np.asarray(law.bernstein(eigenvalues)))


def dump_snapshots(
    snapshots: t.Iterable[t.Tuple[float, DiscreteMeasure]], path
) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["time", "state", "weight"])
        for time, measure in snapshots:
            for label, weight in zip(measure.labels, measure.weights):
                writer.writerow(
                    [repr(float(time)), label, repr(float(weight))]
                )
