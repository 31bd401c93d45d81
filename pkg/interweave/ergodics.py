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

"""Entropies, distances and functional inequality constants.

Everything here works on exactly evolved finite chains, so bound checks
carry no statistical error.
"""

import dataclasses
import enum
import math
import typing as t

import numpy as np
from oslo_log import log as logging
from scipy import special as sp
from scipy import stats

from interweave import conf
from interweave import exception
from interweave import kernels
from interweave import semigroups

LOG = logging.getLogger(__name__)
CONF = conf.CONF

HARDY_TAIL = 1e-12
HARDY_UPPER_FACTOR = (8.0 / 3.0) / (1.0 - math.sqrt(5.0 / 8.0))
HARDY_LOWER_FACTOR = 0.1
DATA_PROCESSING_SLACK = 1e-10


class PhiKind(enum.Enum):
    KL_DIV = "kl"
    POWER = "power"
    ABS_DEV = "absdev"


@dataclasses.dataclass(frozen=True)
class Phi:
    """A convex function with phi(1) = 0, defining a phi-entropy."""

    kind: PhiKind
    p: float = 1.0

    def __post_init__(self):
        if self.kind == PhiKind.POWER and not self.p >= 1:
            raise exception.DomainError(
                name="p", value=self.p, why="power entropies need p >= 1"
            )

    @classmethod
    def kl(cls):
        return cls(PhiKind.KL_DIV)

    @classmethod
    def power(cls, p: float):
        return cls(PhiKind.POWER, float(p))

    @classmethod
    def absdev(cls):
        return cls(PhiKind.ABS_DEV)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == PhiKind.KL_DIV:
            return sp.xlogy(x, x) - x + 1.0
        if self.kind == PhiKind.POWER:
            return np.clip(1.0 - x, 0.0, None) ** self.p
        return np.abs(x - 1.0)

    @property
    def slope_at_infinity(self) -> float:
        """lim phi(x) / x as x grows."""
        return {
            PhiKind.KL_DIV: math.inf,
            PhiKind.POWER: 0.0,
            PhiKind.ABS_DEV: 1.0,
        }[self.kind]

    def secant_defect(self, grid) -> float:
        """Largest violation of the chord inequality over pairs of grid
        points, which is <= 0 for a convex phi."""
        x = np.asarray(grid, dtype=float)
        a, b = np.meshgrid(x, x)
        middle = (a + b) / 2.0
        return float(np.max(self(middle) - (self(a) + self(b)) / 2.0))


def phi_entropy(
    m: semigroups.DiscreteMeasure, nu: semigroups.DiscreteMeasure, phi: Phi
) -> float:
    """Ent_phi(m | nu), +inf when the singular part of m is charged at an
    infinite slope."""
    semigroups.same_support(m, nu)
    charged = nu.weights > 0
    singular = float(np.sum(m.weights[~charged]))
    if phi.kind == PhiKind.KL_DIV:
        # kl_div(x, y) = x log(x/y) - x + y = y phi(x/y), and is +inf
        # when y = 0 < x
        return float(np.sum(sp.kl_div(m.weights, nu.weights)))
    ratio = m.weights[charged] / nu.weights[charged]
    value = float(nu.weights[charged] @ phi(ratio))
    if singular > 0:
        value += singular * phi.slope_at_infinity
    return value


def power_entropy_root(
    m: semigroups.DiscreteMeasure, nu: semigroups.DiscreteMeasure, p: float
) -> float:
    """(Ent_phi_p(m | nu))^(1/p), evaluated in log space."""
    semigroups.same_support(m, nu)
    charged = nu.weights > 0
    gap = 1.0 - m.weights[charged] / nu.weights[charged]
    positive = gap > 0
    if not np.any(positive):
        return 0.0
    log_terms = np.log(nu.weights[charged][positive]) + p * np.log(
        gap[positive]
    )
    return float(np.exp(sp.logsumexp(log_terms) / p))


def tv(m: semigroups.DiscreteMeasure, nu: semigroups.DiscreteMeasure):
    semigroups.same_support(m, nu)
    return 0.5 * float(np.sum(np.abs(m.weights - nu.weights)))


def separation(m: semigroups.DiscreteMeasure, nu: semigroups.DiscreteMeasure):
    semigroups.same_support(m, nu)
    charged = nu.weights > 0
    gap = 1.0 - m.weights[charged] / nu.weights[charged]
    return float(max(0.0, np.max(gap)))


def two_point_log_sobolev(rate: float, mu) -> float:
    """Log-Sobolev constant of rate (mu - Id) on {0, 1}.

    4 (1 - 2 mu_min) / ln(1 / mu_min - 1) rate, written as
    2 rate x / atanh(x) with x = 1 - 2 mu_min so that mu_min = 1/2 gives
    the limit 2 rate.
    """
    model = kernels.TwoPointModel(rate, mu)
    x = 1.0 - 2.0 * model.mu_min
    if x == 0:
        return 2.0 * model.rate
    return 2.0 * model.rate * x / math.atanh(x)


def isospectral_bound(mu, rate: float, grid, t: float):
    """Best transferred entropy decay factor over isospectral targets.

    For each uniform-rate target mu~ on the grid the factor is
    exp(-alpha(L~) (t - t0(L, L~))_+). Returns the smallest factor and
    the target reaching it.
    """
    best = (math.inf, None)
    for mu0 in grid:
        target = (float(mu0), 1.0 - float(mu0))
        warm_up = kernels.two_point_optimal(mu, target, rate).t0
        factor = math.exp(
            -two_point_log_sobolev(rate, target) * max(0.0, t - warm_up)
        )
        if factor < best[0]:
            best = (factor, target)
    return best


@dataclasses.dataclass(frozen=True)
class ErgodicConstants:
    hardy: float
    lower: float
    upper: float
    alpha: t.Optional[float] = None
    alpha_modified: t.Optional[float] = None

    def __post_init__(self):
        assert self.lower <= self.upper


def _log_minus_log1p(log_value, log_complement):
    # ln(1 / V) from whichever of V, 1 - V is known accurately
    return np.where(
        log_value < math.log(0.5),
        -log_value,
        -np.log1p(-np.exp(np.minimum(log_complement, 0.0))),
    )


def _log_interval_sums(prefix):
    # log sum_{l=m}^{n-1} e^{a(l)} on the (n, m) grid, -inf unless m < n
    hi = prefix[:, None]
    lo = prefix[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        result = hi + np.log(-np.expm1(lo - hi))
    size = prefix.size
    valid = np.arange(size)[None, :] < np.arange(size)[:, None]
    return np.where(valid, result, -np.inf)


def hardy_constant(
    beta: float, sigma: float, cap: t.Optional[int] = None
) -> ErgodicConstants:
    """C = min_n max(C-(n), C+(n)) for the Laguerre birth-and-death chain.

    C-(n) = sup_{m<n} S(m, n) V(<=m) ln(1/V(<=m)) and
    C+(n) = sup_{m>n} S(n, m) V(>=m) ln(1/V(>=m)), with
    S(m, n) = sum_{m<=l<n} 1 / (v(l) sigma (l + beta)) and v the negative
    binomial invariant law. C+ includes its limit (sigma+1) ln(1+1/sigma)
    as m grows. The log-Sobolev constant lies in [1/(10 C), 12.73/C].
    """
    cap = CONF.ergodics.hardy_cap if cap is None else cap
    if not (beta > 0 and sigma > 0):
        raise exception.DomainError(
            name="(beta, sigma)", value=(beta, sigma), why="must be positive"
        )
    law = stats.nbinom(beta, 1.0 / (1.0 + sigma))
    tail = float(law.sf(cap))
    if tail > HARDY_TAIL:
        raise exception.PrecisionError(
            detail=f"invariant mass {tail:.3e} beyond N={cap}"
        )
    n = np.arange(cap + 1, dtype=float)
    log_v = law.logpmf(n)
    log_tail = float(law.logsf(cap))

    log_terms = -log_v - np.log(sigma * (n + beta))
    prefix = np.concatenate(
        ([-np.inf], np.logaddexp.accumulate(log_terms))
    )[: cap + 1]
    log_below = np.logaddexp.accumulate(log_v)
    log_above = np.logaddexp(
        np.logaddexp.accumulate(log_v[::-1])[::-1], log_tail
    )
    # complements: V(<=m) = 1 - V(>=m+1), V(>=m) = 1 - V(<=m-1)
    comp_below = np.append(log_above[1:], log_tail)
    comp_above = np.concatenate(([-np.inf], log_below[:-1]))
    log_ent_below = log_below + np.log(
        np.maximum(_log_minus_log1p(log_below, comp_below), 1e-300)
    )
    log_ent_above = log_above + np.log(
        np.maximum(_log_minus_log1p(log_above, comp_above), 1e-300)
    )

    sums = _log_interval_sums(prefix)
    # sums[n, m] = log S(m, n) for m < n
    with np.errstate(over="ignore"):
        lower_terms = np.exp(sums + log_ent_below[None, :])
        upper_terms = np.exp(sums.T + log_ent_above[None, :])
    c_minus = np.max(lower_terms, axis=1)
    limit = (sigma + 1.0) * math.log1p(1.0 / sigma)
    c_plus = np.maximum(np.max(upper_terms, axis=1), limit)

    balanced = np.maximum(c_minus, c_plus)
    best = int(np.argmin(balanced))
    hardy = float(balanced[best])
    LOG.debug(f"Hardy constant {hardy:.6g} at n={best} with N={cap}")
    return ErgodicConstants(
        hardy=hardy,
        lower=HARDY_LOWER_FACTOR / hardy,
        upper=HARDY_UPPER_FACTOR / hardy,
    )


@dataclasses.dataclass(frozen=True, eq=False)
class DecayCurve:
    times: np.ndarray
    entropies: np.ndarray
    initial: float
    tvs: np.ndarray
    separations: np.ndarray


def decay_experiment(
    sg: semigroups.FiniteSemigroup,
    m0: semigroups.DiscreteMeasure,
    t_grid,
    phi: t.Optional[Phi] = None,
) -> DecayCurve:
    """phi-entropy of m0 P_t along an increasing time grid."""
    phi = Phi.kl() if phi is None else phi
    times = np.asarray(t_grid, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise exception.DomainError(
            name="t_grid", value="...", why="must be nonnegative, increasing"
        )
    entropies, tvs, separations = [], [], []
    current, now = m0, 0.0
    for time in times:
        current = semigroups.evolve(sg, current, time - now)
        now = time
        entropies.append(phi_entropy(current, sg.invariant, phi))
        tvs.append(tv(current, sg.invariant))
        separations.append(separation(current, sg.invariant))
    return DecayCurve(
        times,
        np.array(entropies),
        phi_entropy(m0, sg.invariant, phi),
        np.array(tvs),
        np.array(separations),
    )


def transfer_bound_curve(
    times, rate: float, warm_up: float, prefactor: float, initial: float
) -> np.ndarray:
    """prefactor exp(-rate (t - warm_up)_+) Ent(m0)."""
    times = np.asarray(times, dtype=float)
    return (
        prefactor * np.exp(-rate * np.clip(times - warm_up, 0.0, None))
    ) * initial


@dataclasses.dataclass(frozen=True)
class BoundCheck:
    passed: bool
    margin: float
    worst_time: float


def check_transfer_bound(
    curve: DecayCurve,
    rate: float,
    warm_up: float = 0.0,
    prefactor: float = 1.0,
    slack: float = 1e-12,
) -> BoundCheck:
    bound = transfer_bound_curve(
        curve.times, rate, warm_up, prefactor, curve.initial
    )
    margins = bound - curve.entropies
    worst = int(np.argmin(margins))
    margin = float(margins[worst])
    return BoundCheck(
        margin >= -slack * max(1.0, curve.initial),
        margin,
        float(curve.times[worst]),
    )


def is_nonincreasing(values, slack: float = 1e-12) -> bool:
    values = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(values) <= slack * max(1.0, values[0])))


def crossover(
    direct_rate: float, transfer_rate: float, warm_up: float
) -> t.Optional[float]:
    """Time after which exp(-transfer_rate (t - warm_up)_+) is below
    exp(-direct_rate t), or None when it never is."""
    if direct_rate >= transfer_rate:
        return None
    return transfer_rate * warm_up / (transfer_rate - direct_rate)


def two_point_crossover(rate: float, mu) -> t.Optional[float]:
    """Crossover between the direct bound and the one transferred from
    the uniform two point chain with the same rate."""
    warm_up = kernels.two_point_optimal(mu, (0.5, 0.5), rate).t0
    return crossover(
        two_point_log_sobolev(rate, mu), 2.0 * rate, warm_up
    )


def separation_transfer(
    sg: semigroups.FiniteSemigroup,
    m0: semigroups.DiscreteMeasure,
    t_grid,
    p: float = 200.0,
) -> float:
    """Largest gap between separation and the phi_p-entropy root along
    the curve m0 P_t, normalised by the separation."""
    worst, current, now = 0.0, m0, 0.0
    for time in np.asarray(t_grid, dtype=float):
        current = semigroups.evolve(sg, current, time - now)
        now = time
        sep = separation(current, sg.invariant)
        if sep > 0:
            root = power_entropy_root(current, sg.invariant, p)
            worst = max(worst, abs(sep - root) / sep)
    return worst


def _lp_norm(values, weights, p):
    return float(weights @ np.abs(values) ** p) ** (1.0 / p)


def hyperbound_norm(
    sg: semigroups.FiniteSemigroup,
    t: float,
    p: float,
    restarts: int,
    rng: np.random.Generator,
    steps: t.Optional[int] = None,
) -> float:
    """Largest ||P_t f||_p found over ||f||_2 = 1, norms in L^q(nu).

    Projected gradient ascent on the unit sphere of h = sqrt(nu) f, from
    the constant function, a few indicators and random starts. The
    result is a lower bound on the operator norm.
    """
    if p < 2:
        raise exception.DomainError(name="p", value=p, why="must be >= 2")
    if t < 0:
        raise exception.DomainError(name="t", value=t, why="must be >= 0")
    if not sg.is_reversible():
        raise exception.DomainError(
            name="semigroup", value="...", why="must be reversible"
        )
    steps = CONF.ergodics.ascent_steps if steps is None else steps
    nu = sg.invariant.weights
    root = np.sqrt(nu)
    transition = sg.dense(t)

    def value(h):
        return _lp_norm(transition @ (h / root), nu, p)

    def gradient(h):
        image = transition @ (h / root)
        total = float(nu @ np.abs(image) ** p)
        direction = transition.T @ (
            nu * np.abs(image) ** (p - 1) * np.sign(image)
        )
        grad = total ** (1.0 / p - 1.0) * direction / root
        return grad - (grad @ h) * h

    starts = [root.copy()]
    for state in np.unique(np.linspace(0, sg.size - 1, 8).astype(int)):
        start = np.zeros(sg.size)
        start[state] = 1.0
        starts.append(start)
    for _ in range(restarts):
        starts.append(rng.standard_normal(sg.size))

    best = 0.0
    for start in starts:
        h = start / np.linalg.norm(start)
        current, step = value(h), 1.0
        for _ in range(steps):
            direction = gradient(h)
            if np.linalg.norm(direction) < 1e-14:
                break
            while step > 1e-12:
                candidate = h + step * direction
                candidate /= np.linalg.norm(candidate)
                score = value(candidate)
                if score > current:
                    h, current = candidate, score
                    step *= 1.5
                    break
                step /= 2.0
            else:
                break
        best = max(best, current)
    LOG.debug(f"Norm search at t={t}, p={p}: best {best:.10f}")
    return best


def data_processing_gap(m_tilde, m, xi, phi: Phi) -> t.Tuple[float, float]:
    """(Ent_phi(m~ Xi | m Xi), Ent_phi(m~ | m))."""
    m_tilde = semigroups.DiscreteMeasure(m_tilde)
    m = semigroups.DiscreteMeasure(m)
    xi = np.asarray(xi, dtype=float)
    after = phi_entropy(
        semigroups.DiscreteMeasure.normalized(m_tilde.weights @ xi),
        semigroups.DiscreteMeasure.normalized(m.weights @ xi),
        phi,
    )
    return after, phi_entropy(m_tilde, m, phi)


@dataclasses.dataclass(frozen=True)
class DataProcessingResult:
    passed: bool
    trials: int
    worst_margin: float


def data_processing_test(
    trials: int, rng: np.random.Generator
) -> DataProcessingResult:
    """Ent_phi(m~ Xi | m Xi) <= Ent_phi(m~ | m) on random finite triples,
    for the KL and the squared power entropy."""
    if trials < 1:
        raise exception.DomainError(
            name="trials", value=trials, why="must be >= 1"
        )
    worst = math.inf
    for _ in range(trials):
        size, image = rng.integers(2, 7, size=2)
        m_tilde = rng.dirichlet(np.ones(size))
        m = rng.dirichlet(np.ones(size))
        xi = rng.dirichlet(np.ones(image), size=size)
        for phi in (Phi.kl(), Phi.power(2)):
            after, before = data_processing_gap(m_tilde, m, xi, phi)
            worst = min(worst, before - after)
    LOG.debug(f"Data processing over {trials} trials, worst {worst:.3e}")
    return DataProcessingResult(
        worst >= -DATA_PROCESSING_SLACK, trials, float(worst)
    )
