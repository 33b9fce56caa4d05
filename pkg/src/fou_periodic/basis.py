"""
Periodic drift L(t) = sum_i mu_i phi_i(t) and its deterministic functionals.

The built-in basis is the normalized Fourier family
{1, sqrt(2) cos(2 pi k t), sqrt(2) sin(2 pi k t)}. Every integral the
estimator and the limit laws need reduces to

    int_0^t e^{beta s} phi(s) ds

which has an elementary closed form for the built-in kinds. Tabulated
(piecewise-linear) basis functions fall back to composite Simpson.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from fou_periodic.config import DEFAULTS
from fou_periodic.errors import ConfigurationError, DomainError
from fou_periodic.quadrature import simpson

logger = logging.getLogger(__name__)

Kind = Literal["constant", "cos", "sin", "tabulated"]
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BasisFunction:
    """A bounded 1-periodic function on [0, 1)."""

    kind: Kind
    k: int = 0
    table: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind in ("cos", "sin") and self.k < 1:
            raise ConfigurationError(f"{self.kind} basis needs a positive frequency, got k={self.k}")
        if self.kind not in ("constant", "cos", "sin", "tabulated"):
            raise ConfigurationError(f"Unknown basis kind: {self.kind}")

    @classmethod
    def parse(cls, text: str) -> "BasisFunction":
        """Build from the config syntax: "constant", "cos:k" or "sin:k"."""
        kind, _, k = text.strip().partition(":")
        if kind == "constant" and not k:
            return cls("constant")
        if kind in ("cos", "sin") and k.isdigit():
            return cls(kind, int(k))  # type: ignore[arg-type]
        raise ConfigurationError(f"Cannot parse basis function {text!r}")

    @classmethod
    def tabulated(cls, values: "np.ndarray | list[float]") -> "BasisFunction":
        return cls("tabulated", table=tuple(float(v) for v in values))

    @property
    def label(self) -> str:
        if self.kind in ("cos", "sin"):
            return f"{self.kind}:{self.k}"
        return self.kind

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.k

    def __call__(self, t: "float | np.ndarray") -> "float | np.ndarray":
        return eval_basis(self, t)


def eval_basis(phi: BasisFunction, t: "float | np.ndarray") -> "float | np.ndarray":
    """Value of phi at t (mod 1). Accepts scalars or arrays."""
    t_arr = np.asarray(t, dtype=float)
    frac = t_arr - np.floor(t_arr)
    if phi.kind == "constant":
        out = np.ones_like(t_arr)
    elif phi.kind == "cos":
        out = SQRT2 * np.cos(phi.omega * frac)
    elif phi.kind == "sin":
        out = SQRT2 * np.sin(phi.omega * frac)
    else:
        if not phi.table:
            raise ConfigurationError("Tabulated basis function has an empty table")
        table = np.asarray(phi.table)
        knots = np.arange(len(table) + 1) / len(table)
        # close the period so interpolation wraps from the last sample back to the first
        out = np.interp(frac, knots, np.append(table, table[0]))
    if out.ndim == 0:
        return float(out)
    return out


def _sup_norm(phi: BasisFunction) -> float:
    if phi.kind == "constant":
        return 1.0
    if phi.kind in ("cos", "sin"):
        return SQRT2
    return float(np.max(np.abs(phi.table)))


def exp_weighted_integral(phi: BasisFunction, beta: float, t: "float | np.ndarray") -> "float | np.ndarray":
    """
    int_0^t e^{beta s} phi(s) ds.

    beta = 0 gives the antiderivative, beta = -alpha the discounted integral A_t
    and beta = +alpha the numerator of lambda_phi.
    """
    t_arr = np.asarray(t, dtype=float)
    if phi.kind == "constant":
        if beta == 0.0:
            out = t_arr.copy()
        else:
            out = np.expm1(beta * t_arr) / beta
    elif phi.kind in ("cos", "sin"):
        w = phi.omega
        e = np.exp(beta * t_arr)
        c, s = np.cos(w * t_arr), np.sin(w * t_arr)
        denom = beta * beta + w * w
        if phi.kind == "cos":
            out = SQRT2 * (e * (beta * c + w * s) - beta) / denom
        else:
            out = SQRT2 * (e * (beta * s - w * c) + w) / denom
    else:
        step = DEFAULTS["quadrature"]["simpson_step"]
        flat = np.atleast_1d(t_arr)
        out = np.array([
            simpson(lambda u: np.exp(beta * u) * eval_basis(phi, u), 0.0, float(ti), step)
            for ti in flat
        ]).reshape(t_arr.shape)
    if np.ndim(out) == 0:
        return float(out)
    return out


def basis_mean(phi: BasisFunction) -> float:
    """int_0^1 phi."""
    if phi.kind == "constant":
        return 1.0
    if phi.kind in ("cos", "sin"):
        return 0.0
    return float(exp_weighted_integral(phi, 0.0, 1.0))


@dataclass(frozen=True, eq=False)
class GramReport:
    """Orthonormality diagnostics for a basis."""

    gram: np.ndarray
    max_defect: float
    tolerance: float

    @property
    def orthonormal(self) -> bool:
        return self.max_defect <= self.tolerance


def gram_matrix(basis: "list[BasisFunction] | tuple[BasisFunction, ...]", step: float | None = None) -> np.ndarray:
    """Gram matrix (int_0^1 phi_i phi_j) by composite Simpson."""
    step = step or DEFAULTS["quadrature"]["gram_step"]
    p = len(basis)
    gram = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            value = simpson(
                lambda u, a=basis[i], b=basis[j]: eval_basis(a, u) * eval_basis(b, u),
                0.0,
                1.0,
                step,
            )
            gram[i, j] = gram[j, i] = value
    return gram


def validate_basis(basis: "list[BasisFunction] | tuple[BasisFunction, ...]") -> GramReport:
    """Report how far a basis is from L2([0,1])-orthonormal."""
    gram = gram_matrix(basis)
    defect = float(np.max(np.abs(gram - np.eye(len(basis)))))
    report = GramReport(gram, defect, DEFAULTS["quadrature"]["gram_tolerance"])
    if not report.orthonormal:
        logger.warning("Basis is not orthonormal: max Gram defect %.3e", defect)
    return report


@dataclass(frozen=True, eq=False)
class DriftFunctionals:
    """A_1, A_inf and lambda_phi for a drift at a given alpha."""

    alpha: float
    A1: float
    A_inf: float
    lam: np.ndarray = field(repr=False)

    def as_dict(self) -> dict[str, object]:
        return {
            "alpha": self.alpha,
            "A1": self.A1,
            "A_inf": self.A_inf,
            "lambda": self.lam.tolist(),
        }


@dataclass(frozen=True, eq=False)
class PeriodicDrift:
    """L(t) = sum_i mu_i phi_i(t)."""

    basis: tuple[BasisFunction, ...]
    mu: np.ndarray

    def __post_init__(self) -> None:
        basis = tuple(self.basis)
        mu = np.array(self.mu, dtype=float).reshape(-1)
        if not basis:
            raise ConfigurationError("A drift needs at least one basis function")
        if len(set(basis)) != len(basis):
            raise ConfigurationError("Basis functions must be pairwise distinct")
        if mu.shape[0] != len(basis):
            raise ConfigurationError(f"mu has {mu.shape[0]} entries but basis has {len(basis)}")
        mu.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "mu", mu)
        if any(phi.kind == "tabulated" for phi in basis):
            validate_basis(basis)

    @classmethod
    def from_spec(cls, basis: list[str], mu: "list[float] | np.ndarray") -> "PeriodicDrift":
        return cls(tuple(BasisFunction.parse(b) for b in basis), np.asarray(mu, dtype=float))

    @property
    def p(self) -> int:
        return len(self.basis)

    @property
    def labels(self) -> list[str]:
        return [phi.label for phi in self.basis]

    def with_mu(self, mu: "list[float] | np.ndarray") -> "PeriodicDrift":
        return PeriodicDrift(self.basis, np.asarray(mu, dtype=float))

    def __call__(self, t: "float | np.ndarray") -> "float | np.ndarray":
        return drift_L(self, t)


def _check_time(t: "float | np.ndarray") -> None:
    if np.any(np.asarray(t) < 0):
        raise DomainError("Time must be >= 0")


def _check_alpha(alpha: float) -> None:
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")


def _combine(d: PeriodicDrift, beta: float, t: "float | np.ndarray") -> "float | np.ndarray":
    t_arr = np.asarray(t, dtype=float)
    total = np.zeros_like(t_arr)
    for mu_i, phi in zip(d.mu, d.basis):
        if mu_i != 0.0:
            total = total + mu_i * np.asarray(exp_weighted_integral(phi, beta, t_arr))
    return float(total) if total.ndim == 0 else total


def drift_L(d: PeriodicDrift, t: "float | np.ndarray") -> "float | np.ndarray":
    """L(t) = sum_i mu_i phi_i(t)."""
    _check_time(t)
    t_arr = np.asarray(t, dtype=float)
    total = np.zeros_like(t_arr)
    for mu_i, phi in zip(d.mu, d.basis):
        total = total + mu_i * np.asarray(eval_basis(phi, t_arr))
    return float(total) if total.ndim == 0 else total


def tilde_L(d: PeriodicDrift, t: "float | np.ndarray") -> "float | np.ndarray":
    """Antiderivative int_0^t L(s) ds."""
    _check_time(t)
    return _combine(d, 0.0, t)


def A_of_t(d: PeriodicDrift, alpha: float, t: "float | np.ndarray") -> "float | np.ndarray":
    """A_t = int_0^t e^{-alpha s} L(s) ds."""
    _check_alpha(alpha)
    _check_time(t)
    return _combine(d, -alpha, t)


def lambda_phi(phi: BasisFunction, alpha: float) -> float:
    """lambda_phi = int_0^1 phi(s) e^{alpha s} ds / (e^alpha - 1)."""
    _check_alpha(alpha)
    if phi.kind == "constant":
        return 1.0 / alpha
    if phi.kind == "cos":
        return SQRT2 * alpha / (alpha * alpha + phi.omega**2)
    if phi.kind == "sin":
        return -SQRT2 * phi.omega / (alpha * alpha + phi.omega**2)
    return float(exp_weighted_integral(phi, alpha, 1.0)) / math.expm1(alpha)


def drift_functionals(d: PeriodicDrift, alpha: float) -> DriftFunctionals:
    """A_1, A_inf = A_1 / (1 - e^{-alpha}) and lambda_phi_i for every basis function."""
    _check_alpha(alpha)
    a1 = float(A_of_t(d, alpha, 1.0))
    a_inf = a1 / -math.expm1(-alpha)
    lam = np.array([lambda_phi(phi, alpha) for phi in d.basis])
    lam.setflags(write=False)
    return DriftFunctionals(alpha=alpha, A1=a1, A_inf=a_inf, lam=lam)


def remainder_R(d: PeriodicDrift, alpha: float, t: "float | np.ndarray") -> "float | np.ndarray":
    """R_t = A_t - A_inf, defined for t >= 1."""
    if np.any(np.asarray(t) < 1.0):
        raise DomainError("R_t is defined for t >= 1")
    a_inf = drift_functionals(d, alpha).A_inf
    values = np.asarray(A_of_t(d, alpha, t)) - a_inf
    return float(values) if values.ndim == 0 else values


def remainder_bound(d: PeriodicDrift, alpha: float) -> float:
    """C with |R_t| <= C e^{-alpha t} for t >= 1."""
    fun = drift_functionals(d, alpha)
    sup_l = float(sum(abs(m) * _sup_norm(phi) for m, phi in zip(d.mu, d.basis)))
    # e^{-alpha [t]} <= e^{alpha} e^{-alpha t}
    return math.exp(alpha) * (
        abs(fun.A1) / -math.expm1(-alpha) + sup_l * -math.expm1(-alpha) / alpha
    )
