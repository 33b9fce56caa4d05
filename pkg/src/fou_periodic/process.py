"""
The observed process dX_t = (L(t) + alpha X_t) dt + dB^H_t, X_0 = 0.

The reference simulator uses the explicit solution

    X_t = e^{alpha t} A_t + alpha e^{alpha t} Z_t + B^H_t,
    Z_t = int_0^t e^{-alpha s} B^H_s ds,

whose only discretization error is the trapezoid rule for Z. An
Euler-Maruyama scheme on the same driving path is kept for cross-checks.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from scipy import signal, special

from fou_periodic import rng
from fou_periodic.basis import A_of_t, PeriodicDrift, drift_L
from fou_periodic.config import DEFAULTS, default_z_truncation
from fou_periodic.errors import DomainError, OverflowGuardError, ResultParseError
from fou_periodic.fbm import FbmPath, check_hurst, generate_fbm_path
from fou_periodic.quadrature import cumulative_trapezoid
from fou_periodic.utils import write_csv

logger = logging.getLogger(__name__)

SimMethod = Literal["exact", "euler"]

PATH_HEADER = ["t", "X", "BH", "Z"]


@dataclass(frozen=True, eq=False)
class ProcessPath:
    """A simulated X path with its driving fBm path and auxiliary Z path."""

    X: np.ndarray = field(repr=False)
    bh: FbmPath
    drift: PeriodicDrift
    alpha: float
    Z: np.ndarray = field(repr=False)
    method: SimMethod = "exact"

    def __post_init__(self) -> None:
        x = np.array(self.X, dtype=float)
        z = np.array(self.Z, dtype=float)
        if not (x.shape == z.shape == self.bh.values.shape):
            raise DomainError("X, Z and the fBm path must share one grid")
        x.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "Z", z)

    @property
    def dt(self) -> float:
        return self.bh.dt

    @property
    def H(self) -> float:
        return self.bh.H

    @property
    def times(self) -> np.ndarray:
        return self.bh.times

    @property
    def horizon(self) -> float:
        return self.bh.horizon

    @property
    def steps_per_unit(self) -> int:
        steps = 1.0 / self.dt
        if abs(steps - round(steps)) > 1e-9:
            raise DomainError("1/dt must be an integer for integer-horizon work")
        return round(steps)

    @property
    def n(self) -> int:
        """Integer observation horizon."""
        steps = self.steps_per_unit
        if self.bh.m % steps:
            raise DomainError(f"Path horizon {self.horizon} is not an integer")
        return self.bh.m // steps

    @property
    def theta_true(self) -> tuple[np.ndarray, float]:
        return self.drift.mu, self.alpha

    @property
    def B(self) -> np.ndarray:
        return self.bh.values


def _check_overflow(alpha: float, horizon: float) -> None:
    limit = DEFAULTS["process"]["overflow_alpha_n"]
    if alpha * horizon > limit:
        raise OverflowGuardError(
            f"alpha * horizon = {alpha * horizon:g} exceeds {limit:g}",
            {"alpha": alpha, "horizon": horizon},
        )


def _check_alpha(alpha: float) -> None:
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")


def _discounted_integral(values: np.ndarray, dt: float, alpha: float) -> np.ndarray:
    """Running trapezoid integral of e^{-alpha s} values(s)."""
    times = np.arange(values.shape[0]) * dt
    return cumulative_trapezoid(np.exp(-alpha * times) * values, dt)


def compute_Z(bh: FbmPath, alpha: float) -> np.ndarray:
    """Z_t = int_0^t e^{-alpha s} B^H_s ds by the cumulative trapezoid rule."""
    _check_alpha(alpha)
    return _discounted_integral(bh.values, bh.dt, alpha)


def compute_zeta(path: ProcessPath) -> np.ndarray:
    """zeta_t = e^{-alpha t} B^H_t + alpha Z_t."""
    return np.exp(-path.alpha * path.times) * path.B + path.alpha * path.Z


def simulate_exact(d: PeriodicDrift, alpha: float, bh: FbmPath) -> ProcessPath:
    """X_t = e^{alpha t} A_t + alpha e^{alpha t} Z_t + B^H_t on the grid of bh."""
    _check_alpha(alpha)
    _check_overflow(alpha, bh.horizon)
    t = bh.times
    growth = np.exp(alpha * t)
    z = compute_Z(bh, alpha)
    x = growth * np.asarray(A_of_t(d, alpha, t)) + alpha * growth * z + bh.values
    return ProcessPath(x, bh, d, alpha, z, "exact")


def simulate_euler(d: PeriodicDrift, alpha: float, bh: FbmPath) -> ProcessPath:
    """X_{k+1} = X_k + (L(t_k) + alpha X_k) dt + (B_{k+1} - B_k), X_0 = 0."""
    _check_alpha(alpha)
    _check_overflow(alpha, bh.horizon)
    t = bh.times[:-1]
    forcing = np.asarray(drift_L(d, t)) * bh.dt + np.diff(bh.values)
    # y_k = forcing_k + (1 + alpha dt) y_{k-1}, and X_{k+1} = y_k
    x = np.concatenate([[0.0], signal.lfilter([1.0], [1.0, -(1.0 + alpha * bh.dt)], forcing)])
    return ProcessPath(x, bh, d, alpha, compute_Z(bh, alpha), "euler")


def truncate(path: ProcessPath, n: int) -> ProcessPath:
    """The prefix of a path up to integer time n."""
    steps = n * path.steps_per_unit
    if n < 1 or steps > path.bh.m:
        raise DomainError(f"Horizon {n} is outside the simulated range [1, {path.horizon:g}]")
    return ProcessPath(
        path.X[: steps + 1],
        path.bh.truncate(steps),
        path.drift,
        path.alpha,
        path.Z[: steps + 1],
        path.method,
    )


def pathwise_limits(path: ProcessPath) -> dict[str, np.ndarray]:
    """
    Normalized functionals at every integer time n = 1..horizon.

    Returns:
        Dict with "n", "x" = e^{-alpha n} X_n, "int_x" = e^{-alpha n} int_0^n X ds
        and "int_x2" = e^{-2 alpha n} int_0^n X^2 ds.
    """
    steps = path.steps_per_unit
    idx = np.arange(steps, path.bh.m + 1, steps)
    n = idx // steps
    decay = np.exp(-path.alpha * n)
    int_x = cumulative_trapezoid(path.X, path.dt)[idx]
    int_x2 = cumulative_trapezoid(path.X**2, path.dt)[idx]
    return {
        "n": n,
        "x": decay * path.X[idx],
        "int_x": decay * int_x,
        "int_x2": decay**2 * int_x2,
    }


@dataclass(frozen=True)
class ZInfinitySample:
    """One truncated draw of Z_inf with the standard deviation bound of the dropped tail."""

    value: float
    tail_sd: float
    horizon: float
    dt: float


def z_tail_sd_bound(H: float, alpha: float, horizon: float) -> float:
    """int_T^inf e^{-alpha s} s^H ds, which bounds the SD of the truncated tail."""
    a = H + 1.0
    return float(special.gammaincc(a, alpha * horizon) * special.gamma(a) / alpha**a)


def check_z_truncation(alpha: float, horizon: float, dt: float) -> None:
    """Refuse truncation horizons below 5/alpha and log settings outside the design defaults."""
    zinf = DEFAULTS["z_infinity"]
    if horizon < zinf["refuse_alpha_multiple"] / alpha:
        raise DomainError(
            f"Truncation horizon {horizon:g} < {zinf['refuse_alpha_multiple']:g}/alpha leaves too heavy a tail"
        )
    if horizon < zinf["design_alpha_multiple"] / alpha:
        logger.info("Z_inf truncation %.3g is below the 10/alpha design default", horizon)
    if dt > zinf["max_dt"]:
        logger.warning("Z_inf grid step %g is coarser than %g; trapezoid bias is not controlled", dt, zinf["max_dt"])


def z_infinity_value(
    H: float, alpha: float, horizon: float, dt: float, seed: int, key: tuple[int, ...] = ()
) -> tuple[float, float]:
    """One truncated Z_inf draw and the horizon actually used, without argument checks."""
    m = max(1, math.ceil(horizon / dt - 1e-9))
    bh = generate_fbm_path(H, m, dt, seed, key=key)
    return float(_discounted_integral(bh.values, dt, alpha)[-1]), m * dt


def sample_Z_infinity(
    H: float,
    alpha: float,
    horizon: float | None = None,
    dt: float | None = None,
    seed: int = 0,
    key: tuple[int, ...] = (),
) -> ZInfinitySample:
    """Trapezoid integral of e^{-alpha s} B^H_s over [0, horizon] on a fresh fBm path."""
    check_hurst(H)
    _check_alpha(alpha)
    horizon = default_z_truncation(alpha) if horizon is None else horizon
    dt = DEFAULTS["z_infinity"]["dt"] if dt is None else dt
    check_z_truncation(alpha, horizon, dt)
    value, used = z_infinity_value(H, alpha, horizon, dt, seed, key)
    return ZInfinitySample(value, z_tail_sd_bound(H, alpha, used), used, dt)


def refine_pair(
    H: float, m_coarse: int, dt_coarse: float, seed: int, key: tuple[int, ...] = ()
) -> tuple[FbmPath, FbmPath]:
    """A fine path at dt/2 and its every-other-point restriction at dt (same realization)."""
    fine = generate_fbm_path(H, 2 * m_coarse, dt_coarse / 2.0, seed, key=key)
    return fine.restrict(2), fine


def simulate_from_seed(
    d: PeriodicDrift,
    alpha: float,
    H: float,
    n: int,
    dt: float,
    seed: int,
    index: int = 0,
    method: SimMethod = "exact",
) -> ProcessPath:
    """Generate the driving path for (seed, index) and simulate X up to integer time n."""
    m = round(n / dt)
    bh = generate_fbm_path(H, m, dt, seed, key=(rng.PATH, index))
    if method == "euler":
        return simulate_euler(d, alpha, bh)
    return simulate_exact(d, alpha, bh)


def write_path_csv(path: ProcessPath, target: str | Path) -> Path:
    """Dump t, X, BH, Z rows with 17 significant digits."""
    columns = (path.times, path.X, path.B, path.Z)
    return write_csv(Path(target), PATH_HEADER, zip(*(c.tolist() for c in columns)))


def write_fbm_csv(bh: FbmPath, target: str | Path) -> Path:
    """Dump the driving fBm path as t, BH rows."""
    return write_csv(Path(target), ["t", "BH"], bh.to_csv_rows())


def read_path_csv(
    source: str | Path, d: PeriodicDrift, alpha: float, H: float
) -> ProcessPath:
    """Load a `t,X,BH,Z` dump back into a ProcessPath."""
    source = Path(source)
    rows: list[list[float]] = []
    with source.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PATH_HEADER:
            raise ResultParseError(str(source), 1, f"expected header t,X,BH,Z, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ResultParseError(str(source), lineno, f"expected 4 columns, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as e:
                raise ResultParseError(str(source), lineno, str(e)) from e
    if len(rows) < 2:
        raise ResultParseError(str(source), len(rows) + 1, "path needs at least two rows")
    data = np.asarray(rows)
    dt = float(data[1, 0] - data[0, 0])
    if not dt > 0:
        raise ResultParseError(str(source), 3, "time column must be increasing")
    bh = FbmPath(H, dt, data[:, 2], method="file")
    return ProcessPath(data[:, 1], bh, d, alpha, data[:, 3], "exact")
