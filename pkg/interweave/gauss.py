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

"""Affine-Gaussian kernels and Ornstein-Uhlenbeck semigroups.

The OU process dX = -B X dt + Gamma^(1/2) dW has transition kernel
x -> Normal(exp(-tB) x, Gamma_t), where Gamma_t solves
d/dt Gamma_t = Gamma - B Gamma_t - Gamma_t B^T from Gamma_0 = 0.
Kernels of the form x -> Normal(M x + c, Sigma) are closed under
composition, so intertwining and interweaving relations between OU
semigroups reduce to identities between (M, c, Sigma) triples.
"""

import dataclasses
import functools
import math
import typing as t

import numpy as np
from oslo_log import log as logging
from scipy import integrate
from scipy import linalg
from scipy import optimize

from interweave import conf
from interweave import exception

LOG = logging.getLogger(__name__)
CONF = conf.CONF

SYMMETRY_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-12
FEASIBILITY_TOLERANCE = 1e-9
HYPOELLIPTIC_TIMES = (1e-3, 1e-2, 1e-1, 1.0)
HYPOELLIPTIC_DETERMINANT = 1e-14
DIAGONALIZABLE_CONDITION = 1e10


def _square(name, matrix, dim=None):
    matrix = np.atleast_2d(np.array(matrix, dtype=float))
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise exception.DimensionMismatch(
            detail=f"{name} must be square, got {matrix.shape}"
        )
    if dim is not None and matrix.shape[0] != dim:
        raise exception.DimensionMismatch(
            detail=f"{name} must be {dim}x{dim}, got {matrix.shape}"
        )
    return matrix


def _check_covariance(name, sigma, tolerance=PSD_TOLERANCE):
    scale = max(1.0, float(np.max(np.abs(sigma))))
    if np.max(np.abs(sigma - sigma.T)) > SYMMETRY_TOLERANCE * scale:
        raise exception.DomainError(
            name=name, value="...", why="covariance must be symmetric"
        )
    sigma = (sigma + sigma.T) / 2.0
    lowest = float(np.min(linalg.eigvalsh(sigma)))
    if lowest < -tolerance * scale:
        raise exception.InfeasibleError(
            name=name, detail=f"smallest eigenvalue {lowest:.3e}"
        )
    return sigma


def psd_sqrt(sigma: np.ndarray) -> np.ndarray:
    values, vectors = linalg.eigh(sigma)
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.T


@dataclasses.dataclass(frozen=True, eq=False)
class AffineGaussianKernel:
    """x -> Normal(m x + c, sigma)."""

    m: np.ndarray
    c: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        m = _square("M", self.m)
        dim = m.shape[0]
        c = np.array(self.c, dtype=float).reshape(-1)
        if c.shape != (dim,):
            raise exception.DimensionMismatch(
                detail=f"c must have length {dim}, got {c.shape}"
            )
        sigma = _check_covariance("Sigma", _square("Sigma", self.sigma, dim))
        for name, value in (("m", m), ("c", c), ("sigma", sigma)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def identity(cls, dim: int):
        return cls(np.eye(dim), np.zeros(dim), np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    def mean(self, x) -> np.ndarray:
        return self.m @ np.asarray(x, dtype=float) + self.c

    def sample(self, x, rng: np.random.Generator, size=None):
        return rng.multivariate_normal(
            self.mean(x), self.sigma, size=size, method="eigh"
        )


def compose(
    first: AffineGaussianKernel, second: AffineGaussianKernel
) -> AffineGaussianKernel:
    """The operator product first * second: draw from first, then second."""
    if first.dim != second.dim:
        raise exception.DimensionMismatch(
            detail=f"kernels of dimensions {first.dim} and {second.dim}"
        )
    return AffineGaussianKernel(
        second.m @ first.m,
        second.m @ first.c + second.c,
        second.m @ first.sigma @ second.m.T + second.sigma,
    )


def kernel_residual(
    first: AffineGaussianKernel,
    second: AffineGaussianKernel,
    relative: bool = False,
) -> float:
    """Largest entrywise difference between the two (M, c, Sigma).

    With relative=True the difference is divided by the largest entry of
    second, when that exceeds 1.
    """
    if first.dim != second.dim:
        raise exception.DimensionMismatch(
            detail=f"kernels of dimensions {first.dim} and {second.dim}"
        )
    residual = max(
        np.max(np.abs(first.m - second.m)),
        np.max(np.abs(first.c - second.c)),
        np.max(np.abs(first.sigma - second.sigma)),
    )
    if relative:
        scale = max(
            1.0,
            np.max(np.abs(second.m)),
            np.max(np.abs(second.c)),
            np.max(np.abs(second.sigma)),
        )
        residual /= scale
    return float(residual)


def gamma_infinity(drift, noise) -> np.ndarray:
    """Stationary covariance, the solution of B X + X B^T = Gamma."""
    drift = _square("B", drift)
    noise = _square("Gamma", noise, drift.shape[0])
    _check_stable(drift)
    solution = linalg.solve_continuous_lyapunov(drift, noise)
    return (solution + solution.T) / 2.0


def _check_stable(drift):
    spectrum = np.linalg.eigvals(drift)
    if np.any(spectrum.real <= 0):
        raise exception.DomainError(
            name="B",
            value=spectrum.tolist(),
            why="spectrum must lie in the open right half-plane",
        )


@dataclasses.dataclass(frozen=True, eq=False)
class OUModel:
    """The OU semigroup with drift matrix B and noise covariance Gamma."""

    drift: np.ndarray
    noise: np.ndarray

    def __post_init__(self):
        drift = _square("B", self.drift)
        noise = _check_covariance(
            "Gamma", _square("Gamma", self.noise, drift.shape[0])
        )
        _check_stable(drift)
        drift.setflags(write=False)
        noise.setflags(write=False)
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "noise", noise)

    @classmethod
    def from_config(cls, section: t.Dict[str, t.Any]):
        return cls(np.array(section["B"]), np.array(section["Gamma"]))

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    @functools.cached_property
    def gamma_infinity(self) -> np.ndarray:
        return gamma_infinity(self.drift, self.noise)

    def stationarity_residual(self) -> float:
        g = self.gamma_infinity
        return float(
            np.max(np.abs(self.drift @ g + g @ self.drift.T - self.noise))
        )


def ou_covariance(model: OUModel, t: float) -> np.ndarray:
    """Gamma_t by adaptive Runge-Kutta integration of its Lyapunov ODE."""
    if t < 0:
        raise exception.DomainError(name="t", value=t, why="must be >= 0")
    dim = model.dim
    if t == 0:
        return np.zeros((dim, dim))
    drift, noise = model.drift, model.noise

    def rhs(_, y):
        g = y.reshape(dim, dim)
        return (noise - drift @ g - g @ drift.T).ravel()

    solution = integrate.solve_ivp(
        rhs,
        (0.0, t),
        np.zeros(dim * dim),
        method="RK45",
        rtol=1e-11,
        atol=1e-15,
    )
    if not solution.success:
        raise exception.PrecisionError(detail=solution.message)
    LOG.debug(f"Gamma_t at t={t} after {solution.nfev} evaluations")
    g = solution.y[:, -1].reshape(dim, dim)
    return (g + g.T) / 2.0


def ou_covariance_closed_form(model: OUModel, t: float) -> np.ndarray:
    """Gamma_inf - exp(-tB) Gamma_inf exp(-tB)^T."""
    decay = linalg.expm(-t * model.drift)
    g = model.gamma_infinity
    return g - decay @ g @ decay.T


def ou_kernel(model: OUModel, t: float) -> AffineGaussianKernel:
    sigma = ou_covariance(model, t)
    return AffineGaussianKernel(
        linalg.expm(-t * model.drift), np.zeros(model.dim), sigma
    )


def hypoellipticity(model: OUModel) -> bool:
    """det Gamma_t bounded away from 0 on a time grid, and Kalman rank."""
    determinants = [
        float(np.linalg.det(ou_covariance(model, s)))
        for s in HYPOELLIPTIC_TIMES
    ]
    root = psd_sqrt(model.noise)
    blocks = [root]
    for _ in range(model.dim - 1):
        blocks.append(model.drift @ blocks[-1])
    rank = int(np.linalg.matrix_rank(np.hstack(blocks)))
    LOG.debug(f"Hypoellipticity: dets {determinants}, Kalman rank {rank}")
    return rank == model.dim and min(determinants) > HYPOELLIPTIC_DETERMINANT


@dataclasses.dataclass(frozen=True, eq=False)
class TransferSetup:
    """Diagonal self-adjoint OU partner of a diagonalizable model.

    v diagonalises the drift, v B v^-1 = diag(b). With G = v Gamma_inf
    v^T, kappa its condition number and gamma_min its smallest
    eigenvalue, alpha_i = gamma_min kappa^(b_i / b_min). The partner has
    drift diag(b) and noise diag(2 alpha b), hence stationary covariance
    diag(alpha). The kernel x -> Normal(v x, diag(alpha) - G) intertwines
    the model with its partner, and warm_up = log(kappa) / b_min.
    """

    v: np.ndarray
    b: np.ndarray
    alpha: np.ndarray
    kappa: float
    gamma_min: float
    gamma_max: float
    warm_up: float
    kernel: AffineGaussianKernel
    partner: OUModel

    @property
    def b_min(self) -> float:
        return float(self.b[0])


def transfer_setup(model: OUModel) -> TransferSetup:
    values, right = linalg.eig(model.drift)
    scale = max(1.0, float(np.max(np.abs(values))))
    if np.max(np.abs(values.imag)) > 1e-12 * scale:
        raise exception.DomainError(
            name="B", value=values.tolist(), why="eigenvalues must be real"
        )
    if np.linalg.cond(right) > DIAGONALIZABLE_CONDITION:
        raise exception.DomainError(
            name="B", value="...", why="must be diagonalizable"
        )
    order = np.argsort(values.real)
    b = values.real[order]
    v = np.linalg.inv(right.real[:, order])
    v = v / np.linalg.norm(v, axis=1, keepdims=True)

    g = v @ model.gamma_infinity @ v.T
    g = (g + g.T) / 2.0
    spectrum = linalg.eigvalsh(g)
    gamma_min, gamma_max = float(spectrum[0]), float(spectrum[-1])
    if gamma_min <= 0:
        raise exception.SingularError(
            name="Gamma_inf", detail="stationary covariance is degenerate"
        )
    kappa = gamma_max / gamma_min
    warm_up = math.log(kappa) / b[0]
    alpha = gamma_min * kappa ** (b / b[0])
    partner = OUModel(np.diag(b), np.diag(2.0 * alpha * b))
    covariance = np.diag(alpha) - g
    spectrum, vectors = linalg.eigh(covariance)
    covariance = (vectors * np.clip(spectrum, 0.0, None)) @ vectors.T
    kernel = AffineGaussianKernel(v, np.zeros(model.dim), covariance)
    LOG.debug(f"Transfer setup: b={b}, kappa={kappa:.6g}, t={warm_up:.6g}")
    return TransferSetup(
        v, b, alpha, kappa, gamma_min, gamma_max, warm_up, kernel, partner
    )


def _right_factor(target, left):
    m = np.linalg.solve(left.m.T, target.m.T).T
    c = target.c - m @ left.c
    sigma = target.sigma - m @ left.sigma @ m.T
    return m, c, (sigma + sigma.T) / 2.0


def solve_right_factor(
    target: AffineGaussianKernel, left: AffineGaussianKernel
) -> AffineGaussianKernel:
    """The kernel K with compose(left, K) == target.

    Raises InfeasibleError when the recovered covariance is not positive
    semidefinite, which means the target time is too short.
    """
    if target.dim != left.dim:
        raise exception.DimensionMismatch(
            detail=f"kernels of dimensions {target.dim} and {left.dim}"
        )
    if np.linalg.cond(left.m) > 1.0 / np.finfo(float).eps:
        raise exception.SingularError(name="M", detail="not invertible")
    m, c, sigma = _right_factor(target, left)
    values, vectors = linalg.eigh(sigma)
    scale = max(1.0, float(np.max(np.abs(target.sigma))))
    if values[0] < -FEASIBILITY_TOLERANCE * scale:
        raise exception.InfeasibleError(
            name="right factor",
            detail=f"covariance eigenvalue {values[0]:.3e}",
        )
    sigma = (vectors * np.clip(values, 0.0, None)) @ vectors.T
    return AffineGaussianKernel(m, c, sigma)


def smallest_feasible_warm_up(
    model: OUModel, setup: TransferSetup, xtol: float = 1e-10
) -> float:
    """Smallest t for which the kernel factors P_t through setup.kernel."""

    def margin(s):
        _, _, sigma = _right_factor(ou_kernel(model, s), setup.kernel)
        return float(linalg.eigvalsh(sigma)[0])

    upper = setup.warm_up
    if margin(0.0) >= 0:
        return 0.0
    if margin(upper) < 0:
        raise exception.InfeasibleError(
            name="warm-up",
            detail=f"kernel does not factor P_t at t={upper}",
        )
    LOG.debug(f"Bisecting the feasible warm-up on [0, {upper}]")
    return float(optimize.bisect(margin, 0.0, upper, xtol=xtol))


def transfer_interweaving(model: OUModel, setup: TransferSetup):
    """(kernel, kernel_tilde) with kernel * kernel_tilde = P_warm_up."""
    kernel_tilde = solve_right_factor(
        ou_kernel(model, setup.warm_up), setup.kernel
    )
    return setup.kernel, kernel_tilde


def linear_variance_ratio(model: OUModel, t: float) -> float:
    """sup over linear f of Var(P_t f) / Var(f) under Normal(0, Gamma_inf).

    The largest generalised eigenvalue of (M Gamma_inf M^T, Gamma_inf)
    with M = exp(-tB).
    """
    g = model.gamma_infinity
    decay = linalg.expm(-t * model.drift)
    values = linalg.eigh(decay @ g @ decay.T, g, eigvals_only=True)
    return float(values[-1])


def quadratic_variance_ratio(model: OUModel, t: float, a, h) -> float:
    """Var(P_t f) / Var(f) for f(x) = x^T a x + h^T x.

    Under Normal(0, S), Var(x^T Q x + g^T x) = 2 tr((Q S)^2) + g^T S g.
    """
    a = _square("a", a, model.dim)
    a = (a + a.T) / 2.0
    h = np.asarray(h, dtype=float)
    g = model.gamma_infinity
    decay = linalg.expm(-t * model.drift)

    def variance(q, lin):
        qs = q @ g
        return 2.0 * float(np.trace(qs @ qs)) + float(lin @ g @ lin)

    before = variance(a, h)
    if before <= 0:
        raise exception.DomainError(
            name="f", value="...", why="test function is constant"
        )
    return variance(decay.T @ a @ decay, decay.T @ h) / before


@dataclasses.dataclass(frozen=True, eq=False)
class Gaussian:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = _square("cov", self.cov, mean.size)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def cholesky(self) -> np.ndarray:
        try:
            return linalg.cholesky(self.cov, lower=True)
        except linalg.LinAlgError:
            raise exception.SingularError(
                name="covariance", detail="not positive definite"
            )


def _log_density(x, mean, factor):
    # x has shape (..., d)
    whitened = linalg.solve_triangular(factor, (x - mean).T, lower=True)
    return -0.5 * np.sum(whitened**2, axis=0) - np.sum(
        np.log(np.diag(factor))
    )


def tv_gaussian_mc(
    p: Gaussian,
    q: Gaussian,
    nsamples: t.Optional[int] = None,
    rng: t.Optional[np.random.Generator] = None,
    blocks: int = 1,
    chunk_size: t.Optional[int] = None,
) -> t.Tuple[float, float]:
    """Monte-Carlo TV between the blocks-fold products of p and q.

    Uses TV = E_p[(1 - q(X)/p(X))_+], which is bounded by 1, with the
    density ratio formed from log densities. Chunks are reduced in
    order, so the estimate depends on the chunk size only up to
    rounding.
    """
    if p.dim != q.dim:
        raise exception.DimensionMismatch(
            detail=f"Gaussians of dimensions {p.dim} and {q.dim}"
        )
    nsamples = CONF.montecarlo.samples if nsamples is None else nsamples
    if nsamples < 2:
        raise exception.DomainError(
            name="nsamples", value=nsamples, why="must be >= 2"
        )
    assert rng is not None
    if chunk_size is None:
        chunk_size = CONF.montecarlo.chunk_size
    cap = CONF.cutoff.memory_cap_mb * 2**20
    per_sample = 8 * 3 * blocks * p.dim
    chunk_size = max(1, min(chunk_size, cap // per_sample))
    p_factor, q_factor = p.cholesky(), q.cholesky()

    total, total_sq, done = 0.0, 0.0, 0
    while done < nsamples:
        count = min(chunk_size, nsamples - done)
        noise = rng.standard_normal((count * blocks, p.dim))
        x = p.mean + noise @ p_factor.T
        log_ratio = _log_density(x, q.mean, q_factor) - _log_density(
            x, p.mean, p_factor
        )
        log_ratio = log_ratio.reshape(count, blocks).sum(axis=1)
        values = -np.expm1(np.minimum(log_ratio, 0.0))
        total += float(values.sum())
        total_sq += float(values @ values)
        done += count
    estimate = total / nsamples
    variance = max(0.0, (total_sq - nsamples * estimate**2) / (nsamples - 1))
    LOG.debug(f"TV estimate {estimate:.5f} from {nsamples} samples")
    return estimate, math.sqrt(variance / nsamples)
