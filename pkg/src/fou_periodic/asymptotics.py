"""
Limit laws of the estimator and the path identities behind them.

    e^{alpha n}(alpha_hat - alpha)  -> 2 alpha N_1 / (A_inf + alpha Z_inf)
    n^{1-H}(mu_hat - mu)            -> N(0, D)

with N_1 ~ N(0, sigma_H^2), sigma_H^2 = H Gamma(2H) / alpha^{2H},
D = m m^T, m_i = int_0^1 phi_i, and N_1, Z_inf independent.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from fou_periodic import rng
from fou_periodic.basis import (
    A_of_t,
    BasisFunction,
    PeriodicDrift,
    basis_mean,
    drift_functionals,
    drift_L,
    eval_basis,
)
from fou_periodic.config import DEFAULTS, default_z_truncation
from fou_periodic.errors import DomainError
from fou_periodic.estimator import EstimatorOutput, estimate_closed_form, sufficient_stats
from fou_periodic.fbm import FbmPath, check_hurst
from fou_periodic.process import ProcessPath, check_z_truncation, z_infinity_value, z_tail_sd_bound
from fou_periodic.quadrature import Scheme, cumulative_trapezoid, stieltjes, trapezoid
from fou_periodic.statkit import gamma_fn

logger = logging.getLogger(__name__)

# |A_inf + alpha Z_inf| below this is resampled
DENOMINATOR_FLOOR = 1e-12

# discretization under which the estimator sums reproduce a simulator step by step
MATCHED_SCHEME: dict[str, Scheme] = {"euler": "left"}


def sigma_H2(H: float, alpha: float) -> float:
    """sigma_H^2 = H Gamma(2H) / alpha^{2H}."""
    check_hurst(H)
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    return H * gamma_fn(2.0 * H) / alpha ** (2.0 * H)


def z_infinity_variance(H: float, alpha: float) -> float:
    """Var Z_inf = Gamma(2H + 1) / (2 alpha^{2H + 2})."""
    check_hurst(H)
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    return 0.5 * gamma_fn(2.0 * H + 1.0) / alpha ** (2.0 * H + 2.0)


def d_matrix(basis: "list[BasisFunction] | tuple[BasisFunction, ...]") -> np.ndarray:
    """D_ij = (int_0^1 phi_i)(int_0^1 phi_j)."""
    means = np.array([basis_mean(phi) for phi in basis])
    return np.outer(means, means)


@dataclass(frozen=True)
class AlphaLimitLaw:
    """The ratio law 2 alpha N_1 / (A_inf + alpha Z_inf) and how Z_inf is sampled."""

    alpha: float
    H: float
    A_inf: float
    sigma_H2: float
    T_trunc: float
    dt: float
    plug_in: bool = False

    @classmethod
    def from_drift(
        cls,
        d: PeriodicDrift,
        alpha: float,
        H: float,
        T_trunc: float | None = None,
        dt: float | None = None,
        plug_in: bool = False,
    ) -> "AlphaLimitLaw":
        return cls(
            alpha=alpha,
            H=check_hurst(H),
            A_inf=drift_functionals(d, alpha).A_inf,
            sigma_H2=sigma_H2(H, alpha),
            T_trunc=default_z_truncation(alpha) if T_trunc is None else T_trunc,
            dt=DEFAULTS["z_infinity"]["dt"] if dt is None else dt,
            plug_in=plug_in,
        )

    @property
    def tail_sd(self) -> float:
        return z_tail_sd_bound(self.H, self.alpha, self.T_trunc)

    def as_dict(self) -> dict[str, object]:
        return {
            "alpha": self.alpha,
            "H": self.H,
            "sigma_H2": self.sigma_H2,
            "A_inf": self.A_inf,
            "T_trunc": self.T_trunc,
            "dt": self.dt,
            "tail_sd": self.tail_sd,
            "plug_in": self.plug_in,
        }


@dataclass(frozen=True, eq=False)
class MuLimitLaw:
    """N(0, D) limit of n^{1-H}(mu_hat - mu); D has rank at most one."""

    D: np.ndarray = field(repr=False)

    @classmethod
    def from_basis(cls, basis: "list[BasisFunction] | tuple[BasisFunction, ...]") -> "MuLimitLaw":
        return cls(d_matrix(basis))

    def variance(self, i: int) -> float:
        return float(self.D[i, i])

    def degenerate(self, i: int) -> bool:
        return self.variance(i) == 0.0


def _draw_denominator(law: AlphaLimitLaw, seed: int, index: int) -> tuple[float, int]:
    attempt = 0
    while True:
        z, _ = z_infinity_value(law.H, law.alpha, law.T_trunc, law.dt, seed, key=(rng.LIMIT_ZINF, index, attempt))
        denominator = law.A_inf + law.alpha * z
        if abs(denominator) >= DENOMINATOR_FLOOR:
            return denominator, attempt
        attempt += 1


def sample_alpha_limit(law: AlphaLimitLaw, count: int, seed: int, threads: int = 1) -> np.ndarray:
    """
    Draw `count` i.i.d. samples of 2 alpha N_1 / (A_inf + alpha Z_inf).

    N_1 and each Z_inf come from separate streams keyed on the seed, so the
    vector does not depend on the thread count.
    """
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    check_z_truncation(law.alpha, law.T_trunc, law.dt)
    normals = rng.stream(seed, rng.LIMIT_NORMAL).normal(0.0, math.sqrt(law.sigma_H2), count)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        draws = list(pool.map(lambda i: _draw_denominator(law, seed, i), range(count)))
    denominators = np.array([d for d, _ in draws])
    resampled = sum(a for _, a in draws)
    if resampled:
        logger.info("Resampled %d near-zero Z_inf denominators", resampled)
    return 2.0 * law.alpha * normals / denominators


def plug_in_law(
    estimate: EstimatorOutput,
    basis: "list[BasisFunction] | tuple[BasisFunction, ...]",
    T_trunc: float | None = None,
    dt: float | None = None,
) -> AlphaLimitLaw:
    """The alpha limit law evaluated at theta_hat instead of the true theta."""
    if not estimate.alpha_hat > 0:
        raise DomainError(f"Plug-in law needs alpha_hat > 0, got {estimate.alpha_hat}")
    d = PeriodicDrift(tuple(basis), estimate.mu_hat)
    return AlphaLimitLaw.from_drift(d, estimate.alpha_hat, estimate.H, T_trunc, dt, plug_in=True)


def exp_noise_integral(bh: FbmPath, alpha: float, n: float | None = None, scheme: Scheme | None = None) -> float:
    """int_0^n e^{alpha s} dB^H_s as a Riemann-Stieltjes sum on the path grid."""
    if n is not None:
        bh = bh.truncate(round(n / bh.dt))
    scheme = scheme or DEFAULTS["estimator"]["scheme"]
    return stieltjes(np.exp(alpha * bh.times), bh.values, scheme)


def noise_integral_variance(H: float, alpha: float, n: float) -> float:
    """
    e^{-2 alpha n} E[(int_0^n e^{alpha s} dB^H_s)^2], which tends to sigma_H^2.

    For H > 1/2 this is 2 H Gamma(2H) / alpha^{2H-1} times
    int_0^n e^{2 alpha (v - n)} P(2H - 1, alpha v) dv, P the regularized
    lower incomplete gamma function.
    """
    check_hurst(H)
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    if H == 0.5:
        return -math.expm1(-2.0 * alpha * n) / (2.0 * alpha)
    a = 2.0 * H - 1.0
    integral, _ = integrate.quad(
        lambda v: math.exp(2.0 * alpha * (v - n)) * special.gammainc(a, alpha * v), 0.0, n, limit=200
    )
    return 2.0 * H * gamma_fn(2.0 * H) / alpha**a * integral


@dataclass(frozen=True)
class Decomposition:
    """Both sides of the numerator identity for alpha_hat."""

    lhs: float
    bessel_term: float
    cross_term: float
    remainder: float

    @property
    def rhs(self) -> float:
        return self.bessel_term + self.cross_term + self.remainder

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs) / (1.0 + abs(self.lhs))


def _numerator_sides(path: ProcessPath, basis: tuple[BasisFunction, ...], scheme: Scheme | None) -> Decomposition:
    scheme = scheme or DEFAULTS["estimator"]["scheme"]
    stats = sufficient_stats(path, basis, H=path.H, scheme=scheme, check_design=False)
    n, alpha, dt = path.n, path.alpha, path.dt
    t = path.times
    B = path.B
    lam, gamma_inv, phi_dX = stats.lambda_n, stats.gamma_inv, stats.phi_dX

    lhs = 0.5 * path.X[-1] ** 2 - float(np.dot(lam, phi_dX))

    a_inf = drift_functionals(path.drift, alpha).A_inf
    R = np.asarray(A_of_t(path.drift, alpha, t)) - a_inf
    grow = np.exp(alpha * t)
    noise_integral = stieltjes(grow, B, scheme)
    inner = cumulative_trapezoid(grow * B, dt)
    lam_dB = sum(
        lam_k * stieltjes(np.asarray(eval_basis(phi, t)), B, scheme) for lam_k, phi in zip(lam, basis)
    )
    remainder = (
        0.5 * B[-1] ** 2
        + grow[-1] * R[-1] * B[-1]
        - trapezoid(np.asarray(drift_L(path.drift, t)) * B, dt)
        - alpha * trapezoid(B**2, dt)
        - lam_dB
        + alpha**2 * trapezoid(np.exp(-alpha * t) * B * inner, dt)
        - alpha * trapezoid(grow * B * R, dt)
    )
    return Decomposition(
        lhs=float(lhs),
        bessel_term=n * alpha * gamma_inv,
        cross_term=(a_inf + alpha * float(path.Z[-1])) * noise_integral,
        remainder=float(remainder),
    )


def decomposition(
    path: ProcessPath,
    basis: "list[BasisFunction] | tuple[BasisFunction, ...] | None" = None,
    scheme: Scheme | None = None,
) -> Decomposition:
    """
    Both sides of

        X_n^2/2 - sum_k Lambda_k int phi_k dX = n alpha gamma_n^{-1}
            + (A_inf + alpha Z_n) int_0^n e^{alpha s} dB^H_s + S_n

    evaluated term by term on the path grid. The identity is the Young-calculus one.
    """
    if path.H == 0.5:
        logger.warning("The numerator identity is stated for H > 1/2; H = 1/2 paths carry an Ito correction")
    basis = tuple(path.drift.basis if basis is None else basis)
    return _numerator_sides(path, basis, scheme)


def decomposition_residual(
    path: ProcessPath,
    basis: "list[BasisFunction] | tuple[BasisFunction, ...] | None" = None,
    scheme: Scheme | None = None,
) -> float:
    """|LHS - RHS| / (1 + |LHS|) of the numerator identity."""
    return decomposition(path, basis, scheme).residual


@dataclass(frozen=True, eq=False)
class ErrorRepresentation:
    """mu_hat - mu against (alpha - alpha_hat) Lambda_n + G_n / n."""

    error: np.ndarray
    representation: np.ndarray
    G: np.ndarray

    @property
    def discrepancy(self) -> float:
        return float(np.max(np.abs(self.error - self.representation)))


def error_representation_check(
    path: ProcessPath,
    basis: "list[BasisFunction] | tuple[BasisFunction, ...] | None" = None,
    H: float | None = None,
    scheme: Scheme | None = None,
) -> ErrorRepresentation:
    """
    Compare mu_hat - mu with (alpha - alpha_hat) Lambda_n + G_n / n,
    G_{n,i} = int_0^n phi_i dB^H on the known driving path.

    The two sides differ by (P_phi - n mu - alpha U - G) / n, the defect of
    int phi dX = n mu + alpha U + G on the grid. An Euler path checked with
    left sums has no defect: its increments are L(t_k) dt + alpha X_k dt + dB_k
    and a Fourier basis is exactly orthonormal at the grid points, so the
    identity holds to roundoff. That pairing is the default for Euler paths.
    On exact-form paths the defect is the O(dt^2) quadrature error of the
    trapezoid sums.
    """
    basis = tuple(path.drift.basis if basis is None else basis)
    scheme = scheme or MATCHED_SCHEME.get(path.method) or DEFAULTS["estimator"]["scheme"]
    est = estimate_closed_form(sufficient_stats(path, basis, H, scheme=scheme))
    G = np.array([stieltjes(np.asarray(eval_basis(phi, path.times)), path.B, scheme) for phi in basis])
    mu, alpha = path.theta_true
    representation = (alpha - est.alpha_hat) * est.stats.lambda_n + G / path.n
    return ErrorRepresentation(error=est.mu_hat - mu, representation=representation, G=G)
