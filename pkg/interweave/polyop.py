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

"""Operators on degree-truncated polynomial spaces.

Every generator and kernel handled here maps polynomials of degree n to
polynomials of degree at most n, so its restriction to degree <= N is an
upper-triangular (N+1)x(N+1) matrix. Column n holds the coefficients of
the image of the n-th basis element. Composition of operators acting on
functions is matrix product: (A B) f = A (B f).
"""

import abc
import csv
import dataclasses
import enum
import math
import typing as t

import numpy as np
from oslo_log import log as logging
from scipy import linalg

from interweave import conf
from interweave import exception
from interweave import special
from interweave import warmup

LOG = logging.getLogger(__name__)
CONF = conf.CONF


class Basis(enum.Enum):
    MONOMIAL = "monomial"
    FALLING_FACTORIAL = "falling_factorial"
    # {1, phi} on the two point space, phi the normalised eigenfunction
    TWO_POINT = "two_point"


class Space(enum.Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


@dataclasses.dataclass(frozen=True, eq=False)
class PolyOp:
    matrix: np.ndarray
    dom: Basis
    cod: Basis
    dom_space: Space
    cod_space: Space

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise exception.DimensionMismatch(
                detail=f"PolyOp needs a square matrix, got {matrix.shape}"
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def degree(self) -> int:
        return self.matrix.shape[0] - 1

    def __matmul__(self, other: "PolyOp") -> "PolyOp":
        if (other.cod, other.cod_space) != (self.dom, self.dom_space):
            raise exception.DimensionMismatch(
                detail=(
                    f"cannot apply {self.dom.value}/{self.dom_space.value} "
                    f"operator after {other.cod.value}/"
                    f"{other.cod_space.value} operator"
                )
            )
        if self.degree != other.degree:
            raise exception.DimensionMismatch(
                detail=f"degrees {self.degree} and {other.degree}"
            )
        return PolyOp(
            self.matrix @ other.matrix,
            other.dom,
            self.cod,
            other.dom_space,
            self.cod_space,
        )

    def is_endomorphism(self) -> bool:
        return (self.dom, self.dom_space) == (self.cod, self.cod_space)

    def is_upper_triangular(self) -> bool:
        return not np.any(np.tril(self.matrix, -1))


def identity(
    degree: int,
    basis: Basis = Basis.MONOMIAL,
    space: Space = Space.CONTINUOUS,
) -> PolyOp:
    return PolyOp(np.eye(degree + 1), basis, basis, space, space)


def dilation(scale: float, degree: int) -> PolyOp:
    """f -> f(scale * x) in the monomial basis, diagonal scale^n."""
    if scale == 0:
        raise exception.SingularError(name="dilation", detail="zero scale")
    return PolyOp(
        np.diag(float(scale) ** np.arange(degree + 1)),
        Basis.MONOMIAL,
        Basis.MONOMIAL,
        Space.CONTINUOUS,
        Space.CONTINUOUS,
    )


def _require_positive(**params):
    for name, value in params.items():
        if not value > 0:
            raise exception.DomainError(
                name=name, value=value, why="must be positive"
            )


@dataclasses.dataclass(frozen=True)
class BernsteinSpec:
    """phi(u) = u + m + sum_i w_i (exp(-u y_i) - 1).

    atoms is a sequence of (y_i, w_i) pairs describing a finite Levy
    measure. phi(0) = m, and phi is nondecreasing when the first moment
    pi_bar = sum w_i y_i is at most 1.
    """

    m: float = 0.0
    atoms: t.Tuple[t.Tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "atoms", tuple((float(y), float(w)) for y, w in self.atoms)
        )
        if not self.m >= 0:
            raise exception.DomainError(name="m", value=self.m, why="< 0")
        for y, w in self.atoms:
            if not (y > 0 and w >= 0):
                raise exception.DomainError(
                    name="atom",
                    value=(y, w),
                    why="needs location > 0 and weight >= 0",
                )
        if self.pi_bar > 1:
            raise exception.DomainError(
                name="pi_bar",
                value=self.pi_bar,
                why="phi would decrease near 0",
            )

    @property
    def pi_bar(self) -> float:
        return float(sum(y * w for y, w in self.atoms))

    def phi(self, u):
        u = np.asarray(u, dtype=float)
        value = u + self.m
        for y, w in self.atoms:
            value = value + w * np.expm1(-u * y)
        return float(value) if value.ndim == 0 else value

    def log_w(self, n: int) -> float:
        """log W(n+1) = sum_{k=1}^{n} log phi(k)."""
        values = self.phi(np.arange(1, n + 1))
        if np.any(np.asarray(values) <= 0):
            raise exception.DomainError(
                name="phi", value=values, why="must be positive on k >= 1"
            )
        return float(np.sum(np.log(values)))


class GeneratorSpec(abc.ABC):
    """A degree-preserving Markov generator and its column action."""

    basis = Basis.MONOMIAL
    space = Space.CONTINUOUS

    @abc.abstractmethod
    def matrix(self, degree: int) -> np.ndarray:
        pass

    def _new(self, degree):
        return np.zeros((degree + 1, degree + 1))


@dataclasses.dataclass(frozen=True)
class TwoPoint(GeneratorSpec):
    """L = rate (mu - Id) on {0, 1}, in the eigenbasis {1, phi}."""

    rate: float
    mu0: float

    basis = Basis.TWO_POINT
    space = Space.DISCRETE

    def __post_init__(self):
        _require_positive(rate=self.rate)
        if not 0 < self.mu0 < 1:
            raise exception.DomainError(
                name="mu0", value=self.mu0, why="must be in (0, 1)"
            )

    def matrix(self, degree):
        if degree != 1:
            raise exception.DimensionMismatch(
                detail="the two point space carries degree 1 only"
            )
        return np.diag([0.0, -self.rate])


@dataclasses.dataclass(frozen=True)
class BesselDiffusion(GeneratorSpec):
    """x f'' + beta f'."""

    beta: float

    def __post_init__(self):
        _require_positive(beta=self.beta)

    def matrix(self, degree):
        g = self._new(degree)
        for n in range(1, degree + 1):
            g[n - 1, n] = n * (n - 1 + self.beta)
        return g


@dataclasses.dataclass(frozen=True)
class BesselBirthDeath(GeneratorSpec):
    """sigma ((n + beta) d+ + n d-), acting on falling factorials."""

    beta: float
    sigma: float = 1.0

    basis = Basis.FALLING_FACTORIAL
    space = Space.DISCRETE

    def __post_init__(self):
        _require_positive(beta=self.beta, sigma=self.sigma)

    def matrix(self, degree):
        g = self._new(degree)
        for k in range(1, degree + 1):
            g[k - 1, k] = self.sigma * k * (k - 1 + self.beta)
        return g


@dataclasses.dataclass(frozen=True)
class LaguerreDiffusion(GeneratorSpec):
    """scale x f'' + (scale beta - x) f'."""

    beta: float
    scale: float = 1.0

    def __post_init__(self):
        _require_positive(beta=self.beta, scale=self.scale)

    def matrix(self, degree):
        g = self._new(degree)
        for n in range(1, degree + 1):
            g[n - 1, n] = self.scale * n * (n - 1 + self.beta)
            g[n, n] = -n
        return g


@dataclasses.dataclass(frozen=True)
class LaguerreBirthDeath(GeneratorSpec):
    """sigma (n + beta) d+ + (sigma + 1) n d-, on falling factorials."""

    beta: float
    sigma: float

    basis = Basis.FALLING_FACTORIAL
    space = Space.DISCRETE

    def __post_init__(self):
        _require_positive(beta=self.beta, sigma=self.sigma)

    def matrix(self, degree):
        g = self._new(degree)
        for k in range(1, degree + 1):
            g[k - 1, k] = self.sigma * k * (k - 1 + self.beta)
            g[k, k] = -k
        return g


@dataclasses.dataclass(frozen=True)
class Jacobi(GeneratorSpec):
    """x (1 - x) f'' + (lam1 - beta - lam1 x) f' on [0, 1]."""

    lam1: float
    beta: float

    def __post_init__(self):
        if not self.lam1 >= 2 * self.beta > 2:
            raise exception.DomainError(
                name="(lam1, beta)",
                value=(self.lam1, self.beta),
                why="requires lam1 >= 2 beta > 2",
            )

    def matrix(self, degree):
        g = self._new(degree)
        for n in range(1, degree + 1):
            g[n - 1, n] = n * (n - 1 + self.lam1 - self.beta)
            g[n, n] = -(n * (n - 1) + self.lam1 * n)
        return g

    def invariant_moment(self, n: int) -> float:
        """E[X^n] under the invariant Beta(lam1 - beta, beta) law."""
        return float(
            special.gamma_ratio(
                [self.lam1, n + self.lam1 - self.beta],
                [self.lam1 - self.beta, n + self.lam1],
            )
        )


@dataclasses.dataclass(frozen=True)
class GeneralizedLaguerre(GeneratorSpec):
    """L_phi with L_phi p_n = n phi(n) p_{n-1} - n p_n."""

    bernstein: BernsteinSpec

    def matrix(self, degree):
        g = self._new(degree)
        for n in range(1, degree + 1):
            g[n - 1, n] = n * self.bernstein.phi(n)
            g[n, n] = -n
        return g


@dataclasses.dataclass(frozen=True)
class OrnsteinUhlenbeck(GeneratorSpec):
    """gamma/2 f'' - b x f' on the real line."""

    b: float
    gamma: float

    def __post_init__(self):
        _require_positive(b=self.b)
        if not self.gamma >= 0:
            raise exception.DomainError(
                name="gamma", value=self.gamma, why="must be >= 0"
            )

    def matrix(self, degree):
        g = self._new(degree)
        for n in range(1, degree + 1):
            if n >= 2:
                g[n - 2, n] = 0.5 * self.gamma * n * (n - 1)
            g[n, n] = -self.b * n
        return g


def generator_polyop(spec: GeneratorSpec, degree: t.Optional[int] = None):
    degree = CONF.polyop.degree if degree is None else degree
    if degree < 1:
        raise exception.DomainError(
            name="degree", value=degree, why="must be >= 1"
        )
    return PolyOp(
        spec.matrix(degree), spec.basis, spec.basis, spec.space, spec.space
    )


def _is_metzler(matrix):
    off = matrix - np.diag(np.diag(matrix))
    return not np.any(off < 0)


def _metzler_expm(matrix, t):
    # exp(tG) = (exp(-c h) exp(h A))^(2^k), A = G + cI >= 0 entrywise.
    # Every term of the series is nonnegative, so each entry is accurate
    # relative to itself, including the tiny ones.
    size = matrix.shape[0]
    shift = max(0.0, float(-np.min(np.diag(matrix))))
    shifted = matrix + shift * np.eye(size)
    norm = t * float(np.max(np.sum(shifted, axis=1)))
    squarings = max(0, math.ceil(math.log2(norm))) if norm > 1 else 0
    h = t / 2**squarings
    step = h * shifted
    term = np.eye(size)
    total = np.eye(size)
    for j in range(1, 200):
        term = term @ step / j
        total = total + term
        if np.all(term <= np.finfo(float).eps * total):
            break
    result = np.exp(-shift * h) * total
    for _ in range(squarings):
        result = result @ result
    LOG.debug("Metzler exponential with %d squarings", squarings)
    return result


def semigroup_polyop(gen: PolyOp, t: float) -> PolyOp:
    """exp(t gen) for a generator on a truncated polynomial space."""
    if t < 0:
        raise exception.DomainError(name="t", value=t, why="must be >= 0")
    if not gen.is_endomorphism():
        raise exception.DimensionMismatch(
            detail="a semigroup needs an endomorphism"
        )
    if t == 0:
        return dataclasses.replace(gen, matrix=np.eye(gen.degree + 1))
    if _is_metzler(gen.matrix):
        matrix = _metzler_expm(gen.matrix, t)
    else:
        LOG.warning("Falling back to dense expm for a non-Metzler operator")
        matrix = linalg.expm(t * gen.matrix)
    return dataclasses.replace(gen, matrix=matrix)


def _stirling(degree, first_kind):
    table = [[0] * (degree + 1) for _ in range(degree + 1)]
    table[0][0] = 1
    for n in range(degree):
        for k in range(1, n + 2):
            if first_kind:
                # signed: (x)_{n+1} = (x)_n (x - n)
                table[n + 1][k] = table[n][k - 1] - n * table[n][k]
            else:
                table[n + 1][k] = k * table[n][k] + table[n][k - 1]
    # column j holds the expansion of the j-th basis element
    return np.array(table, dtype=float).T


def stirling_first_kind(degree: int) -> np.ndarray:
    """Column j: coefficients of (n)_j in powers of n."""
    return _stirling(degree, True)


def stirling_second_kind(degree: int) -> np.ndarray:
    """Column j: coefficients of n^j in falling factorials of n."""
    return _stirling(degree, False)


def convert_basis(op: PolyOp, target: Basis) -> PolyOp:
    """Re-express the discrete sides of op in the target basis."""
    if target == Basis.TWO_POINT:
        raise exception.DomainError(
            name="target", value=target.value, why="not a polynomial basis"
        )
    if Space.DISCRETE not in (op.dom_space, op.cod_space):
        raise exception.DomainError(
            name="op",
            value="continuous",
            why="basis changes are only defined on the integer lattice",
        )
    to_ff = stirling_second_kind(op.degree)
    to_mono = stirling_first_kind(op.degree)
    matrix = op.matrix
    dom, cod = op.dom, op.cod
    if op.dom_space == Space.DISCRETE and dom != target:
        matrix = matrix @ (to_ff if target == Basis.MONOMIAL else to_mono)
        dom = target
    if op.cod_space == Space.DISCRETE and cod != target:
        matrix = (to_mono if target == Basis.MONOMIAL else to_ff) @ matrix
        cod = target
    return PolyOp(matrix, dom, cod, op.dom_space, op.cod_space)


def _scaled_residual(left, right, scale):
    diff = np.abs(left - right)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(scale > 0, diff / scale, diff)
    return float(np.max(ratio))


def check_intertwining(
    p: PolyOp, kernel: PolyOp, p_tilde: PolyOp, absolute: bool = False
) -> float:
    """Residual of P Lambda = Lambda P~.

    By default the residual is taken entrywise relative to
    |P||Lambda| + |Lambda||P~|, since the entries span many orders of
    magnitude; absolute=True gives the plain max-abs difference.
    """
    left = p @ kernel
    right = kernel @ p_tilde
    if absolute:
        return float(np.max(np.abs(left.matrix - right.matrix)))
    scale = np.abs(p.matrix) @ np.abs(kernel.matrix) + np.abs(
        kernel.matrix
    ) @ np.abs(p_tilde.matrix)
    return _scaled_residual(left.matrix, right.matrix, scale)


def check_interweaving(
    kernel: PolyOp,
    kernel_tilde: PolyOp,
    p_warm: PolyOp,
    absolute: bool = False,
) -> float:
    """Residual of Lambda Lambda~ = P_tau, scaled as check_intertwining."""
    product = kernel @ kernel_tilde
    if (product.dom, product.cod) != (p_warm.dom, p_warm.cod) or (
        product.degree != p_warm.degree
    ):
        raise exception.DimensionMismatch(
            detail="kernel product and warm-up operator differ in shape"
        )
    if absolute:
        return float(np.max(np.abs(product.matrix - p_warm.matrix)))
    scale = np.abs(kernel.matrix) @ np.abs(kernel_tilde.matrix) + np.abs(
        p_warm.matrix
    )
    return _scaled_residual(product.matrix, p_warm.matrix, scale)


def _check_gaps(diagonal, tolerance):
    order = np.argsort(diagonal)
    values = diagonal[order]
    gaps = np.diff(values)
    scale = np.maximum(1.0, np.abs(values[1:]))
    for i in np.nonzero(gaps <= tolerance * scale)[0]:
        raise exception.DegeneracyError(
            first=values[i], second=values[i + 1], tol=tolerance
        )


def eigenpolynomials(gen: PolyOp, tolerance: t.Optional[float] = None):
    """Monic eigenvectors of a triangular generator, as columns.

    Column n solves gen v = lambda_n v with v[n] = 1 by back-substitution.
    """
    tolerance = CONF.polyop.eigen_gap if tolerance is None else tolerance
    g = gen.matrix
    if np.any(np.tril(g, -1)):
        raise exception.DimensionMismatch(
            detail="eigenpolynomials need an upper triangular generator"
        )
    diagonal = np.diag(g).copy()
    _check_gaps(diagonal, tolerance)
    size = g.shape[0]
    vectors = np.eye(size)
    for n in range(size):
        for i in range(n - 1, -1, -1):
            vectors[i, n] = (
                g[i, i + 1 : n + 1] @ vectors[i + 1 : n + 1, n]
            ) / (diagonal[n] - diagonal[i])
    return diagonal, vectors


def _multiplier_fit(op, gen, cod_gen):
    if (gen.dom, cod_gen.dom) != (op.dom, op.cod) or (
        gen.degree != op.degree or cod_gen.degree != op.degree
    ):
        raise exception.DimensionMismatch(
            detail="generators do not match the operator's bases"
        )
    _, v_dom = eigenpolynomials(gen)
    _, v_cod = eigenpolynomials(cod_gen)
    multipliers = np.diag(op.matrix).copy()
    left = op.matrix @ v_dom
    right = v_cod * multipliers
    scale = np.abs(op.matrix) @ np.abs(v_dom) + np.abs(right)
    return multipliers, _scaled_residual(left, right, scale)


def eigen_multipliers(
    op: PolyOp,
    gen: PolyOp,
    cod_gen: t.Optional[PolyOp] = None,
    tolerance: t.Optional[float] = None,
) -> np.ndarray:
    """Scalars m_n with op V_dom[:, n] = m_n V_cod[:, n].

    gen acts on the domain of op, cod_gen (default gen) on its codomain.
    Both eigenbases are monic and op is triangular, so m_n is the n-th
    diagonal entry of op. An op that does not map eigenpolynomials onto
    eigenpolynomials within tolerance has no multipliers.
    """
    cod_gen = gen if cod_gen is None else cod_gen
    tolerance = CONF.polyop.tolerance if tolerance is None else tolerance
    multipliers, residual = _multiplier_fit(op, gen, cod_gen)
    if residual > tolerance:
        raise exception.DimensionMismatch(
            detail=(
                f"operator does not act diagonally on the eigenpolynomials "
                f"(residual {residual:.3g} > {tolerance:.3g})"
            )
        )
    return multipliers


def eigenvector_residual(
    op: PolyOp, gen: PolyOp, cod_gen: t.Optional[PolyOp] = None
) -> float:
    """Scaled residual of op V_dom = V_cod diag(diagonal of op)."""
    cod_gen = gen if cod_gen is None else cod_gen
    return _multiplier_fit(op, gen, cod_gen)[1]


def similarity_transform(p: PolyOp, m: PolyOp) -> PolyOp:
    """M P M^-1."""
    if p.degree != m.degree:
        raise exception.DimensionMismatch(
            detail=f"degrees {p.degree} and {m.degree}"
        )
    matrix = m.matrix
    if np.linalg.cond(matrix) > 1.0 / np.finfo(float).eps:
        raise exception.SingularError(name="M", detail="not invertible")
    product = (matrix @ p.matrix).T
    if not np.any(np.tril(matrix, -1)):
        result = linalg.solve_triangular(matrix.T, product, lower=True).T
    else:
        result = np.linalg.solve(matrix.T, product).T
    return dataclasses.replace(p, matrix=result)


def warmup_polyop(gen: PolyOp, law: warmup.WarmupLaw) -> PolyOp:
    """E[exp(tau gen)] on the truncated space.

    Quadrature is used when it is exact for this generator: always for
    atomic rules, and for spectra in -{0, 1, ..., order} otherwise.
    The remaining cases go through the eigenbasis, V diag(F) V^-1 with F
    the Laplace transform at -lambda_n.
    """
    if not gen.is_endomorphism():
        raise exception.DimensionMismatch(
            detail="a warm-up operator needs an endomorphism"
        )
    diagonal = np.diag(gen.matrix)
    integer_spectrum = np.allclose(diagonal, np.round(diagonal)) and np.all(
        diagonal <= 0
    )
    try:
        rule = law.quadrature(gen.degree)
    except exception.UnsupportedError:
        rule = None
    if rule is not None and (
        rule.atomic
        or (integer_spectrum and -np.min(diagonal) <= rule.order)
    ):
        LOG.debug("Warm-up operator by %d-node quadrature", len(rule.nodes))
        total = np.zeros_like(gen.matrix)
        for node, weight in zip(rule.nodes, rule.weights):
            total = total + weight * semigroup_polyop(gen, node).matrix
        return dataclasses.replace(gen, matrix=total)
    eigenvalues, vectors = eigenpolynomials(gen)
    multipliers = law.laplace(-eigenvalues)
    scaled = vectors * multipliers
    matrix = linalg.solve_triangular(
        vectors.T, scaled.T, lower=True, unit_diagonal=True
    ).T
    return dataclasses.replace(gen, matrix=matrix)


@dataclasses.dataclass(frozen=True)
class IPhi:
    """Multiplicative kernel f -> E[f(x I_phi)], moments only."""

    bernstein: BernsteinSpec

    dom = cod = Basis.MONOMIAL
    dom_space = cod_space = Space.CONTINUOUS

    def moment_matrix(self, degree):
        logs = [
            special.log_gamma(n + 1) - self.bernstein.log_w(n)
            for n in range(degree + 1)
        ]
        return np.diag(np.exp(logs))


@dataclasses.dataclass(frozen=True)
class VBeta:
    """Diagonal kernel with multipliers Gamma(1+beta) W(n+1) / Gamma(n+1+beta).

    Markovian only for beta > pi_bar + m.
    """

    bernstein: BernsteinSpec
    beta: float

    dom = cod = Basis.MONOMIAL
    dom_space = cod_space = Space.CONTINUOUS

    def __post_init__(self):
        bound = self.bernstein.pi_bar + self.bernstein.m
        if not self.beta > bound:
            raise exception.DomainError(
                name="beta", value=self.beta, why=f"must exceed {bound}"
            )

    def moment_matrix(self, degree):
        logs = [
            special.log_gamma(1 + self.beta)
            + self.bernstein.log_w(n)
            - special.log_gamma(n + 1 + self.beta)
            for n in range(degree + 1)
        ]
        return np.diag(np.exp(logs))


def kernel_polyop(
    kernel,
    degree: t.Optional[int] = None,
    target: t.Optional[Basis] = None,
) -> PolyOp:
    """Moment action of a Markov kernel on the truncated space.

    kernel is any spec exposing moment_matrix(degree) with its bases.
    A target basis re-expresses the discrete sides of the result.
    """
    degree = CONF.polyop.degree if degree is None else degree
    try:
        matrix = kernel.moment_matrix(degree)
    except AttributeError:
        raise exception.UnsupportedError(
            what=repr(kernel), operation="a polynomial moment action"
        )
    op = PolyOp(
        matrix, kernel.dom, kernel.cod, kernel.dom_space, kernel.cod_space
    )
    unit = np.zeros(degree + 1)
    unit[0] = 1.0
    if not np.array_equal(op.matrix[:, 0], unit):
        raise exception.InfeasibleError(
            name=repr(kernel), detail="constants are not preserved"
        )
    if target is not None and Space.DISCRETE in (op.dom_space, op.cod_space):
        op = convert_basis(op, target)
    elif target not in (None, Basis.MONOMIAL):
        raise exception.DomainError(
            name="target",
            value=target.value,
            why="continuous kernels act on monomials only",
        )
    return op


def dump_csv(op: PolyOp, path) -> None:
    """Row-major CSV; the header names the bases and the degree."""
    header = [f"{op.cod.value}<-{op.dom.value} N={op.degree}"] + [
        f"col{j}" for j in range(op.degree + 1)
    ]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for i, row in enumerate(op.matrix):
            writer.writerow([f"row{i}"] + [repr(float(v)) for v in row])
