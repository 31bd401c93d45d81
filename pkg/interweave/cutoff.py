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

"""Cut-off profiles of tensorised OU families.

The n-th member of a family runs n independent copies of a base OU
model, every copy started from the same law. Total variation to
equilibrium is estimated at times r t(n), t(n) = log(n) / (2 b_min),
using the block structure: only the base-sized covariances are formed.
"""

from concurrent import futures
import dataclasses
import itertools
import math
import typing as t

import numpy as np
from oslo_log import log as logging
from scipy import linalg

from interweave import conf
from interweave import exception
from interweave import gauss
from interweave import special

LOG = logging.getLogger(__name__)
CONF = conf.CONF

MIN_CHUNK = 1000
SE_SLACK = 3.0
SIGNATURE_HIGH = 0.9
SIGNATURE_LOW = 0.1


@dataclasses.dataclass(frozen=True, eq=False)
class OUFamily:
    """n copies of base, each started from Normal(start_mean, start_cov)."""

    name: str
    base: gauss.OUModel
    sizes: t.Tuple[int, ...]
    start_mean: np.ndarray
    start_cov: np.ndarray
    time_scale: float = 1.0

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if not sizes or min(sizes) < 1:
            raise exception.DomainError(
                name="sizes", value=sizes, why="need sizes >= 1"
            )
        mean = np.array(self.start_mean, dtype=float).reshape(-1)
        cov = np.array(self.start_cov, dtype=float)
        if mean.shape != (self.base.dim,) or cov.shape != (
            self.base.dim,
            self.base.dim,
        ):
            raise exception.DimensionMismatch(
                detail="start law does not match the base dimension"
            )
        if not self.time_scale > 0:
            raise exception.DomainError(
                name="time_scale", value=self.time_scale, why="must be > 0"
            )
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "start_mean", mean)
        object.__setattr__(self, "start_cov", cov)

    @property
    def b_min(self) -> float:
        return float(np.min(np.linalg.eigvals(self.base.drift).real))

    def cutoff_time(self, n: int) -> float:
        return self.time_scale * math.log(n) / (2.0 * self.b_min)

    def marginal(self, t: float) -> gauss.Gaussian:
        """Law of one block at time t."""
        decay = linalg.expm(-t * self.base.drift)
        cov = decay @ self.start_cov @ decay.T + gauss.ou_covariance(
            self.base, t
        )
        return gauss.Gaussian(decay @ self.start_mean, (cov + cov.T) / 2.0)

    def equilibrium(self) -> gauss.Gaussian:
        dim = self.base.dim
        return gauss.Gaussian(np.zeros(dim), self.base.gamma_infinity)


def _start(dim, scale):
    start = np.zeros(dim)
    start[-1] = scale
    return start


def kinetic_example() -> gauss.OUModel:
    """B = ((0, -1), (1/2, 2)) with noise on the velocity only."""
    return gauss.OUModel(
        np.array([[0.0, -1.0], [0.5, 2.0]]), np.diag([0.0, 1.0])
    )


def point_family(
    name: str,
    base: gauss.OUModel,
    sizes,
    scale: t.Optional[float] = None,
    time_scale: float = 1.0,
) -> OUFamily:
    """Every block starts at scale * (0, ..., 0, 1)."""
    scale = CONF.cutoff.start_scale if scale is None else scale
    if scale == 0:
        raise exception.DomainError(
            name="start_scale", value=scale, why="must be nonzero"
        )
    return OUFamily(
        name,
        base,
        sizes,
        _start(base.dim, scale),
        np.zeros((base.dim, base.dim)),
        time_scale,
    )


def kinetic_family(sizes, scale=None, time_scale=1.0) -> OUFamily:
    return point_family("kinetic", kinetic_example(), sizes, scale, time_scale)


def diagonal_family(
    sizes, b: float = 1.0, scale=None, time_scale=1.0
) -> OUFamily:
    """One dimensional blocks with B = b and Gamma = 2 b."""
    base = gauss.OUModel(np.array([[b]]), np.array([[2.0 * b]]))
    return point_family("diagonal", base, sizes, scale, time_scale)


def transfer_family(
    base: gauss.OUModel, sizes, scale=None, time_scale=1.0
) -> OUFamily:
    """The diagonal partner of base, started from the image of the point
    start under the intertwining kernel."""
    scale = CONF.cutoff.start_scale if scale is None else scale
    setup = gauss.transfer_setup(base)
    x0 = _start(base.dim, scale)
    return OUFamily(
        "transfer",
        setup.partner,
        sizes,
        setup.kernel.mean(x0),
        setup.kernel.sigma,
        time_scale,
    )


def _cap_bytes():
    return CONF.cutoff.memory_cap_mb * 2**20


def tensorize(model: gauss.OUModel, n: int) -> gauss.OUModel:
    """Dense block-diagonal model of n copies."""
    needed = 2 * 8 * (n * model.dim) ** 2
    if needed > _cap_bytes():
        raise exception.MemoryCapError(needed=needed, cap=_cap_bytes())
    return gauss.OUModel(
        linalg.block_diag(*[model.drift] * n),
        linalg.block_diag(*[model.noise] * n),
    )


def tensorized_condition_number(family: OUFamily, n: int) -> float:
    return float(np.linalg.cond(tensorize(family.base, n).gamma_infinity))


@dataclasses.dataclass(frozen=True)
class ProfileRow:
    n: int
    r: float
    time: float
    tv: float
    se: float


def _degenerate(cov):
    return float(linalg.eigvalsh(cov)[0]) <= 1e-14 * max(
        1.0, float(np.max(np.abs(cov)))
    )


def _cell(family, n, r, nsamples, rng):
    time = r * family.cutoff_time(n)
    marginal = family.marginal(time)
    if _degenerate(marginal.cov):
        # a singular law against a nondegenerate one
        return ProfileRow(n, r, time, 1.0, 0.0)
    estimate, se = gauss.tv_gaussian_mc(
        marginal, family.equilibrium(), nsamples, rng, blocks=n
    )
    return ProfileRow(n, r, time, estimate, se)


def tv_profile(
    family: OUFamily,
    r_grid,
    nsamples: t.Optional[int] = None,
    seed: int = 0,
    workers: int = 1,
) -> t.List[ProfileRow]:
    """TV to equilibrium on the (n, r) grid, one substream per cell."""
    r_grid = [float(r) for r in r_grid]
    if not r_grid or min(r_grid) <= 0:
        raise exception.DomainError(
            name="r_grid", value=r_grid, why="must be positive"
        )
    nsamples = CONF.montecarlo.samples if nsamples is None else nsamples
    largest = max(family.sizes)
    needed = MIN_CHUNK * 3 * 8 * largest * family.base.dim
    if needed > _cap_bytes():
        raise exception.MemoryCapError(needed=needed, cap=_cap_bytes())
    cells = list(itertools.product(family.sizes, r_grid))
    streams = special.substreams(seed, len(cells))
    LOG.info(
        f"TV profile of the {family.name} family over {len(cells)} cells"
    )
    with futures.ThreadPoolExecutor(max_workers=workers) as pool:
        jobs = [
            pool.submit(_cell, family, n, r, nsamples, rng)
            for (n, r), rng in zip(cells, streams)
        ]
        return [job.result() for job in jobs]


@dataclasses.dataclass(frozen=True)
class CutoffSummary:
    signature: bool
    r_low: float
    r_high: float
    low_trend: t.Tuple[t.Tuple[int, float, float], ...]
    high_trend: t.Tuple[t.Tuple[int, float, float], ...]
    monotone_in_r: bool
    reasons: t.Tuple[str, ...]


def _trend(rows, r):
    picked = sorted(
        (row for row in rows if math.isclose(row.r, r)), key=lambda x: x.n
    )
    return tuple((row.n, row.tv, row.se) for row in picked)


def _rises_to(trend, level):
    previous = -math.inf
    for _, value, se in trend:
        if value < min(previous, level) - SE_SLACK * se:
            return False
        previous = value
    return trend[-1][1] >= level


def _falls_to(trend, level):
    previous = math.inf
    for _, value, se in trend:
        if value > max(previous, level) + SE_SLACK * se:
            return False
        previous = value
    return trend[-1][1] <= level


def cutoff_summary(
    rows: t.Sequence[ProfileRow], r_low: float = 0.5, r_high: float = 2.0
) -> CutoffSummary:
    """Declare a cut-off signature over the ladder of sizes.

    TV at r_low must climb to SIGNATURE_HIGH and TV at r_high fall to
    SIGNATURE_LOW, each without moving against its trend by more than
    SE_SLACK standard errors. Size 1 has t(1) = 0 for every r and is
    left out of the trends.
    """
    sizes = sorted({row.n for row in rows})
    if len(sizes) < 4:
        raise exception.InsufficientData(
            detail=f"need profiles for at least 4 sizes, got {sizes}"
        )
    ladder = [row for row in rows if row.n > 1]
    low, high = _trend(ladder, r_low), _trend(ladder, r_high)
    if not low or not high:
        raise exception.InsufficientData(
            detail=f"profiles lack r={r_low} or r={r_high}"
        )
    reasons = []
    rises = _rises_to(low, SIGNATURE_HIGH)
    falls = _falls_to(high, SIGNATURE_LOW)
    if not rises:
        reasons.append(f"TV at r={r_low} does not rise to {SIGNATURE_HIGH}")
    if not falls:
        reasons.append(f"TV at r={r_high} does not fall to {SIGNATURE_LOW}")

    monotone = True
    for n in sizes:
        profile = sorted(
            (row for row in rows if row.n == n), key=lambda x: x.r
        )
        for before, after in zip(profile, profile[1:]):
            if after.tv > before.tv + SE_SLACK * max(before.se, after.se):
                monotone = False
    if not monotone:
        reasons.append("a profile increases in r beyond its error band")
    LOG.info(f"Cut-off summary over sizes {sizes}: {reasons or 'signature'}")
    return CutoffSummary(
        rises and falls,
        r_low,
        r_high,
        low,
        high,
        monotone,
        tuple(reasons),
    )
