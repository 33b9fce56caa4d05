"""
Least-squares estimation of theta = (mu, alpha) from a fully observed path.

With U_n = (int_0^n phi_i X ds)_i, V_n = int_0^n X^2 ds and
P_n = (int phi_1 dX, ..., int phi_p dX, int X dX), the estimator solves

    Q_n theta = P_n,   Q_n = [[n I_p, U_n], [U_n^T, V_n]].

Two routes are offered: the closed form obtained from the block inverse of
Q_n (default) and an equilibrated LU solve of the full system.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel
from scipy import linalg

from fou_periodic.basis import BasisFunction, eval_basis
from fou_periodic.config import DEFAULTS
from fou_periodic.errors import DegenerateDesignError, DomainError
from fou_periodic.fbm import check_hurst
from fou_periodic.process import ProcessPath, truncate
from fou_periodic.quadrature import Scheme, integral, stieltjes

logger = logging.getLogger(__name__)

Route = Literal["closed_form", "matrix_solve"]


def int_phi_dX(path: ProcessPath, phi: BasisFunction, scheme: Scheme | None = None) -> float:
    """
    Riemann-Stieltjes sum of phi against the increments of X.

    The default is the trapezoid sum, which has no first-order bias for the
    e^{alpha n} growth to amplify. scheme="left" gives the left-endpoint sum
    sum_k phi(t_k)(X_{k+1} - X_k). Both telescope to X_n for a constant phi.
    """
    scheme = scheme or DEFAULTS["estimator"]["scheme"]
    return stieltjes(np.asarray(eval_basis(phi, path.times)), path.X, scheme)


def int_X_dX(path: ProcessPath, H: float | None = None) -> float:
    """
    int_0^n X dX by its closed form.

    (X_n^2 - n) / 2 in the Ito case H = 1/2, X_n^2 / 2 in the Young case H > 1/2.
    """
    H = check_hurst(path.H if H is None else H)
    x_n = float(path.X[-1])
    if H == 0.5:
        return 0.5 * (x_n * x_n - path.horizon)
    return 0.5 * x_n * x_n


def quadratic_variation(path: ProcessPath) -> float:
    """Realized sum of squared increments of X; close to n only when H = 1/2."""
    return float(np.sum(np.diff(path.X) ** 2))


@dataclass(frozen=True, eq=False)
class SufficientStats:
    """Normalized sufficient statistics of one path at integer horizon n."""

    n: int
    H: float
    lambda_n: np.ndarray = field(repr=False)
    v_n: float
    gamma_inv: float
    phi_dX: np.ndarray = field(repr=False)
    x_dX: float
    quadratic_variation: float = float("nan")

    @property
    def p(self) -> int:
        return self.lambda_n.shape[0]

    @property
    def bessel_threshold(self) -> float:
        return DEFAULTS["estimator"]["bessel_relative"] * self.v_n / self.n

    @property
    def U(self) -> np.ndarray:
        return self.n * self.lambda_n

    def Q(self) -> np.ndarray:
        p = self.p
        q = np.empty((p + 1, p + 1))
        q[:p, :p] = self.n * np.eye(p)
        q[:p, p] = q[p, :p] = self.U
        q[p, p] = self.v_n
        return q

    def P(self) -> np.ndarray:
        return np.append(self.phi_dX, self.x_dX)


def sufficient_stats(
    path: ProcessPath,
    basis: "list[BasisFunction] | tuple[BasisFunction, ...] | None" = None,
    H: float | None = None,
    n: int | None = None,
    scheme: Scheme | None = None,
    check_design: bool = True,
) -> SufficientStats:
    """
    Compute Lambda_n, V_n, gamma_n^{-1}, P_n from a path.

    Args:
        path: observed path; its horizon must be an integer
        basis: basis functions (defaults to the drift basis the path was simulated with)
        H: Hurst index selecting the int X dX convention (defaults to the path's)
        n: evaluate on the prefix [0, n] instead of the full path
        scheme: discretization family; "trapezoid" (default) pairs trapezoid
            Stieltjes sums with trapezoid quadrature for Lambda and V, "left"
            pairs left-endpoint sums with the left rectangle rule
        check_design: raise on a degenerate design (off for noise-free diagnostics)

    Raises:
        DegenerateDesignError: gamma_n^{-1} is at or below the Bessel threshold
    """
    if n is not None:
        path = truncate(path, n)
    n = path.n
    if n < 1:
        raise DomainError(f"Need an integer horizon n >= 1, got {n}")
    basis = tuple(path.drift.basis if basis is None else basis)
    H = check_hurst(path.H if H is None else H)
    scheme = scheme or DEFAULTS["estimator"]["scheme"]

    t = path.times
    lambda_n = np.array([integral(np.asarray(eval_basis(phi, t)) * path.X, path.dt, scheme) for phi in basis]) / n
    v_n = integral(path.X**2, path.dt, scheme)
    gamma_inv = v_n / n - float(np.dot(lambda_n, lambda_n))
    phi_dX = np.array([int_phi_dX(path, phi, scheme) for phi in basis])
    stats = SufficientStats(
        n=n,
        H=H,
        lambda_n=lambda_n,
        v_n=v_n,
        gamma_inv=gamma_inv,
        phi_dX=phi_dX,
        x_dX=int_X_dX(path, H),
        quadratic_variation=quadratic_variation(path),
    )
    if check_design and gamma_inv <= stats.bessel_threshold:
        raise DegenerateDesignError(
            "Path lies numerically in the span of the basis",
            {"n": n, "gamma_inv": gamma_inv, "threshold": stats.bessel_threshold},
        )
    if H == 0.5:
        logger.debug("Realized quadratic variation %.6g vs n = %d", stats.quadratic_variation, n)
    return stats


@dataclass(frozen=True, eq=False)
class EstimatorOutput:
    """theta_hat = (mu_hat, alpha_hat) with the statistics it was computed from."""

    mu_hat: np.ndarray
    alpha_hat: float
    stats: SufficientStats = field(repr=False)
    route: Route
    condition: float | None = None

    @property
    def H(self) -> float:
        return self.stats.H

    @property
    def n(self) -> int:
        return self.stats.n

    def theta(self) -> np.ndarray:
        return np.append(self.mu_hat, self.alpha_hat)

    def to_record(self, seed: int | None = None) -> "EstimationRecord":
        return EstimationRecord(
            n=self.n,
            H=self.H,
            alpha_hat=self.alpha_hat,
            mu_hat=self.mu_hat.tolist(),
            gamma_inv=self.stats.gamma_inv,
            condition=self.condition,
            route=self.route,
            seed=seed,
        )


class EstimationRecord(BaseModel):
    """JSON record of one estimation."""

    n: int
    H: float
    alpha_hat: float
    mu_hat: list[float]
    gamma_inv: float
    condition: float | None = None
    route: Route
    seed: int | None = None


def _check_design(stats: SufficientStats) -> None:
    if stats.gamma_inv <= stats.bessel_threshold:
        raise DegenerateDesignError(
            "gamma_n^{-1} is at or below the Bessel threshold",
            {"gamma_inv": stats.gamma_inv, "threshold": stats.bessel_threshold},
        )


def estimate_closed_form(stats: SufficientStats) -> EstimatorOutput:
    """Block-inverse closed form of Q_n^{-1} P_n."""
    _check_design(stats)
    gamma = 1.0 / stats.gamma_inv
    lam, phi_dx = stats.lambda_n, stats.phi_dX
    projected = float(np.dot(lam, phi_dx))
    alpha_hat = gamma / stats.n * (stats.x_dX - projected)
    mu_hat = (phi_dx + gamma * lam * projected - gamma * lam * stats.x_dX) / stats.n
    return EstimatorOutput(mu_hat, float(alpha_hat), stats, "closed_form")


def solve_normal_equations(stats: SufficientStats) -> tuple[np.ndarray, float]:
    """Solve Q_n theta = P_n by LU with partial pivoting after diagonal equilibration."""
    _check_design(stats)
    q = stats.Q()
    scale = 1.0 / np.sqrt(np.diag(q))
    scaled = q * np.outer(scale, scale)
    condition = float(np.linalg.cond(scaled, 1))
    limit = DEFAULTS["estimator"]["condition_limit"]
    if not math.isfinite(condition) or condition >= limit:
        raise DegenerateDesignError(
            f"Q_n is ill-conditioned (condition {condition:.3g} >= {limit:.3g})",
            {"condition": condition},
        )
    lu, piv = linalg.lu_factor(scaled)
    theta = scale * linalg.lu_solve((lu, piv), scale * stats.P())
    return theta, condition


def estimate_matrix(
    path: ProcessPath,
    basis: "list[BasisFunction] | tuple[BasisFunction, ...] | None" = None,
    H: float | None = None,
    n: int | None = None,
) -> EstimatorOutput:
    """Assemble Q_n and P_n and solve the dense system."""
    stats = sufficient_stats(path, basis, H, n)
    return estimate_from_stats(stats, "matrix_solve")


def estimate_from_stats(stats: SufficientStats, route: Route = "closed_form") -> EstimatorOutput:
    if route == "closed_form":
        return estimate_closed_form(stats)
    if route == "matrix_solve":
        theta, condition = solve_normal_equations(stats)
        return EstimatorOutput(theta[:-1].copy(), float(theta[-1]), stats, "matrix_solve", condition)
    raise DomainError(f"Unknown estimator route: {route}")


def estimate(
    path: ProcessPath,
    basis: "list[BasisFunction] | tuple[BasisFunction, ...] | None" = None,
    H: float | None = None,
    n: int | None = None,
    route: Route | None = None,
) -> EstimatorOutput:
    """Estimate theta on [0, n] with the configured route."""
    stats = sufficient_stats(path, basis, H, n)
    return estimate_from_stats(stats, route or DEFAULTS["estimator"]["route"])


def block_inverse(a: np.ndarray, b: float) -> np.ndarray:
    """Inverse of [[I_p, a], [a^T, b]] for b > |a|^2."""
    a = np.asarray(a, dtype=float).reshape(-1)
    schur = b - float(np.dot(a, a))
    if schur <= 0:
        raise DomainError(f"Need b > |a|^2, got b - |a|^2 = {schur:g}")
    p = a.shape[0]
    inv = np.empty((p + 1, p + 1))
    inv[:p, :p] = np.eye(p) + np.outer(a, a) / schur
    inv[:p, p] = inv[p, :p] = -a / schur
    inv[p, p] = 1.0 / schur
    return inv
