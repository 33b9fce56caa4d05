"""
Statistics helpers: the gamma function, Kolmogorov-Smirnov tests and
empirical summaries.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special, stats

from fou_periodic.errors import DomainError

MIN_KS_SAMPLE = 30


@dataclass(frozen=True)
class KsResult:
    """A Kolmogorov-Smirnov test outcome; n2 = 0 for one-sample tests."""

    statistic: float
    p_value: float
    n1: int
    n2: int = 0
    label: str = ""

    def as_dict(self) -> dict[str, object]:
        return asdict(self)


def gamma_fn(x: float) -> float:
    """Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"gamma_fn is defined for x > 0, got {x}")
    return float(special.gamma(x))


def normal_cdf(x: "float | np.ndarray", mean: float = 0.0, sd: float = 1.0) -> "float | np.ndarray":
    """Normal CDF."""
    if not sd > 0:
        raise DomainError(f"sd must be > 0, got {sd}")
    out = special.ndtr((np.asarray(x, dtype=float) - mean) / sd)
    return float(out) if np.ndim(out) == 0 else out


def _sample(values: "np.ndarray | list[float]", name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.shape[0] < MIN_KS_SAMPLE:
        raise DomainError(f"{name} needs at least {MIN_KS_SAMPLE} values, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def ks_two_sample(a: "np.ndarray | list[float]", b: "np.ndarray | list[float]", label: str = "") -> KsResult:
    """Two-sample KS test with the asymptotic p-value."""
    a = _sample(a, "first sample")
    b = _sample(b, "second sample")
    result = stats.ks_2samp(a, b, method="asymp")
    return KsResult(float(result.statistic), float(result.pvalue), a.shape[0], b.shape[0], label)


def ks_one_sample_normal(
    a: "np.ndarray | list[float]", mean: float = 0.0, sd: float = 1.0, label: str = ""
) -> KsResult:
    """One-sample KS test against N(mean, sd^2) with the asymptotic p-value."""
    if not sd > 0:
        raise DomainError(f"sd must be > 0, got {sd}")
    a = _sample(a, "sample")
    result = stats.kstest(a, "norm", args=(mean, sd), method="asymp")
    return KsResult(float(result.statistic), float(result.pvalue), a.shape[0], 0, label)


def summarize(values: "np.ndarray | list[float]") -> dict[str, float]:
    """Count, mean, sd, median, IQR and the 5/25/75/95% quantiles."""
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.shape[0] == 0:
        raise DomainError("Cannot summarize an empty sample")
    q05, q25, q50, q75, q95 = np.quantile(arr, [0.05, 0.25, 0.5, 0.75, 0.95])
    return {
        "count": int(arr.shape[0]),
        "mean": float(arr.mean()),
        "sd": float(arr.std(ddof=1)) if arr.shape[0] > 1 else 0.0,
        "median": float(q50),
        "iqr": float(q75 - q25),
        "q05": float(q05),
        "q25": float(q25),
        "q75": float(q75),
        "q95": float(q95),
    }


def tail_quantile(values: "np.ndarray | list[float]", level: float = 0.01) -> float:
    """Quantile of |values| at 1 - level, for heavy-tail checks."""
    if not 0 < level < 1:
        raise DomainError(f"level must be in (0, 1), got {level}")
    return float(np.quantile(np.abs(np.asarray(values, dtype=float)), 1.0 - level))


def correlation_test(a: "np.ndarray | list[float]", b: "np.ndarray | list[float]") -> dict[str, float | bool]:
    """
    Spearman rank correlation with standard error 1/sqrt(n - 3) on the Fisher scale.

    `independent` is True when |atanh r| is within 3 standard errors of zero.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.shape[0] < 4:
        raise DomainError("Correlation needs two equally long samples of at least 4 values")
    r = float(stats.spearmanr(a, b).statistic)
    se = 1.0 / math.sqrt(a.shape[0] - 3)
    z = float(np.arctanh(np.clip(r, -0.999999, 0.999999)))
    return {"correlation": r, "fisher_z": z, "standard_error": se, "independent": abs(z) <= 3.0 * se}
