"""
Fractional Brownian motion on uniform grids, H in [1/2, 1).

Fractional Gaussian noise is drawn by circulant embedding (Davies-Harte);
Cholesky factorization of the Toeplitz covariance is the fallback for small
sizes when the embedding is not positive semidefinite.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import fft, linalg

from fou_periodic import rng
from fou_periodic.config import DEFAULTS
from fou_periodic.errors import DomainError, EmbeddingError, NumericalError

logger = logging.getLogger(__name__)

Method = Literal["circulant", "cholesky", "auto"]
METHODS = ("circulant", "cholesky", "auto")


def check_hurst(H: float) -> float:
    """Validate 1/2 <= H < 1."""
    if not 0.5 <= H < 1.0:
        raise DomainError(f"Hurst index must satisfy 0.5 <= H < 1, got {H}")
    return float(H)


def fbm_covariance(s: "float | np.ndarray", t: "float | np.ndarray", H: float) -> "float | np.ndarray":
    """Cov(B_s, B_t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2."""
    s_arr = np.asarray(s, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(s_arr < 0) or np.any(t_arr < 0):
        raise DomainError("Times must be >= 0")
    two_h = 2.0 * H
    out = 0.5 * (s_arr**two_h + t_arr**two_h - np.abs(t_arr - s_arr) ** two_h)
    return float(out) if out.ndim == 0 else out


def fgn_autocovariance(H: float, lags: "int | np.ndarray", dt: float = 1.0) -> "float | np.ndarray":
    """gamma(j) = dt^{2H} (|j+1|^{2H} + |j-1|^{2H} - 2|j|^{2H}) / 2."""
    j = np.abs(np.asarray(lags, dtype=float))
    two_h = 2.0 * H
    out = 0.5 * dt**two_h * ((j + 1.0) ** two_h + np.abs(j - 1.0) ** two_h - 2.0 * j**two_h)
    return float(out) if out.ndim == 0 else out


def fgn_covariance_matrix(H: float, m: int, dt: float) -> np.ndarray:
    """The m x m Toeplitz covariance of fractional Gaussian noise."""
    return linalg.toeplitz(fgn_autocovariance(H, np.arange(m), dt))


def fbm_covariance_matrix(H: float, m: int, dt: float) -> np.ndarray:
    """Covariance of (B_{dt}, ..., B_{m dt}) implied by the fGn matrix (cumulative sums)."""
    cumsum = np.tril(np.ones((m, m)))
    return cumsum @ fgn_covariance_matrix(H, m, dt) @ cumsum.T


def _circulant_eigenvalues(H: float, m: int, dt: float) -> np.ndarray:
    gamma = fgn_autocovariance(H, np.arange(m + 1), dt)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigenvalues = fft.fft(row).real
    tolerance = DEFAULTS["fbm"]["embedding_tolerance"] * eigenvalues.max()
    if eigenvalues.min() < -tolerance:
        raise EmbeddingError(
            "Circulant embedding is not positive semidefinite",
            {"min_eigenvalue": float(eigenvalues.min()), "m": m, "H": H},
        )
    if eigenvalues.min() < 0:
        logger.debug("Clamping %d slightly negative embedding eigenvalues", int((eigenvalues < 0).sum()))
    return np.clip(eigenvalues, 0.0, None)


def _fgn_circulant(H: float, m: int, dt: float, gen: np.random.Generator) -> np.ndarray:
    eigenvalues = _circulant_eigenvalues(H, m, dt)
    size = eigenvalues.shape[0]
    noise = gen.standard_normal(size) + 1j * gen.standard_normal(size)
    # real and imaginary parts are independent draws with the target covariance
    sample = fft.fft(np.sqrt(eigenvalues / size) * noise)
    return sample[:m].real.copy()


def _fgn_cholesky(H: float, m: int, dt: float, gen: np.random.Generator) -> np.ndarray:
    limit = DEFAULTS["fbm"]["cholesky_max_size"]
    if m > limit:
        raise NumericalError(f"Cholesky generation is limited to m <= {limit}, got m={m}")
    try:
        factor = linalg.cholesky(fgn_covariance_matrix(H, m, dt), lower=True)
    except linalg.LinAlgError as e:
        raise NumericalError("fGn covariance is not positive definite", {"m": m, "H": H}) from e
    return factor @ gen.standard_normal(m)


def generate_fgn(
    H: float,
    m: int,
    dt: float,
    seed: int,
    method: Method | None = None,
    key: tuple[int, ...] = (),
) -> np.ndarray:
    """
    Draw m increments of fractional Gaussian noise with step dt.

    Args:
        H: Hurst index in [1/2, 1)
        m: number of increments
        dt: grid step
        seed: base seed; together with `key` it fully determines the draw
        method: "circulant", "cholesky" or "auto" (circulant, Cholesky fallback);
            defaults to DEFAULTS["fbm"]["method"]
        key: stream key (purpose tag, replication index, ...)

    Returns:
        Array of m increments.
    """
    return _draw_fgn(H, m, dt, seed, method, key)[0]


def _draw_fgn(
    H: float, m: int, dt: float, seed: int, method: Method | None, key: tuple[int, ...]
) -> tuple[np.ndarray, str]:
    check_hurst(H)
    method = method or DEFAULTS["fbm"]["method"]
    if method not in METHODS:
        raise DomainError(f"Unknown fBm method {method!r}; expected one of {METHODS}")
    if m < 1:
        raise DomainError(f"Need at least one increment, got m={m}")
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")

    if method == "cholesky":
        return _fgn_cholesky(H, m, dt, rng.stream(seed, *key)), "cholesky"
    try:
        return _fgn_circulant(H, m, dt, rng.stream(seed, *key)), "circulant"
    except EmbeddingError:
        if method == "circulant" or m > DEFAULTS["fbm"]["cholesky_max_size"]:
            raise
        logger.warning("Circulant embedding failed for H=%s, m=%d; falling back to Cholesky", H, m)
        return _fgn_cholesky(H, m, dt, rng.stream(seed, *key)), "cholesky"


@dataclass(frozen=True, eq=False)
class FbmPath:
    """A fractional Brownian motion sample path on the grid k * dt, k = 0..m."""

    H: float
    dt: float
    values: np.ndarray = field(repr=False)
    seed: int = 0
    method: str = "circulant"

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.shape[0] < 2:
            raise DomainError("An fBm path needs at least two grid points")
        if values[0] != 0.0:
            raise DomainError("An fBm path starts at 0")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zero(cls, H: float, m: int, dt: float) -> "FbmPath":
        """The identically zero path (noise-free runs)."""
        return cls(check_hurst(H), dt, np.zeros(m + 1), seed=0, method="zero")

    @property
    def m(self) -> int:
        return self.values.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.m + 1) * self.dt

    @property
    def horizon(self) -> float:
        return self.m * self.dt

    def restrict(self, every: int) -> "FbmPath":
        """Coarser path keeping every `every`-th grid point."""
        return FbmPath(self.H, self.dt * every, self.values[::every], self.seed, self.method)

    def truncate(self, m: int) -> "FbmPath":
        return FbmPath(self.H, self.dt, self.values[: m + 1], self.seed, self.method)

    def to_csv_rows(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.values.tolist()))


def generate_fbm_path(
    H: float,
    m: int,
    dt: float,
    seed: int,
    method: Method | None = None,
    key: tuple[int, ...] = (),
) -> FbmPath:
    """Cumulative sum of generate_fgn, starting at 0."""
    increments, used = _draw_fgn(H, m, dt, seed, method, key)
    values = np.concatenate([[0.0], np.cumsum(increments)])
    return FbmPath(H, dt, values, seed=seed, method=used)
