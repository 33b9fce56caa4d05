"""
Grid quadrature and Riemann-Stieltjes sums on uniform grids.
"""

from collections.abc import Callable
from typing import Literal

import numpy as np
from scipy import integrate

Scheme = Literal["trapezoid", "left"]


def trapezoid(values: np.ndarray, dt: float) -> float:
    """Trapezoid rule for samples on a uniform grid."""
    return float(integrate.trapezoid(values, dx=dt))


def cumulative_trapezoid(values: np.ndarray, dt: float) -> np.ndarray:
    """Running trapezoid integral, starting at 0."""
    return integrate.cumulative_trapezoid(values, dx=dt, initial=0.0)


def integral(values: np.ndarray, dt: float, scheme: Scheme = "trapezoid") -> float:
    """Grid quadrature paired with a Stieltjes scheme: trapezoid, or the left rectangle rule for "left"."""
    if scheme == "left":
        return float(np.sum(values[:-1]) * dt)
    if scheme == "trapezoid":
        return trapezoid(values, dt)
    raise ValueError(f"Unknown scheme: {scheme}")


def simpson(
    func: Callable[[np.ndarray], np.ndarray], a: float, b: float, max_step: float
) -> float:
    """Composite Simpson rule for a vectorized callable on [a, b] with step <= max_step."""
    if b <= a:
        return 0.0
    intervals = max(2, int(np.ceil((b - a) / max_step)))
    intervals += intervals % 2
    grid = np.linspace(a, b, intervals + 1)
    return float(integrate.simpson(func(grid), x=grid))


def stieltjes(integrand: np.ndarray, integrator: np.ndarray, scheme: Scheme = "trapezoid") -> float:
    """
    Riemann-Stieltjes sum of `integrand` against the increments of `integrator`.

    Args:
        integrand: f(t_k), k = 0..m
        integrator: g(t_k), k = 0..m
        scheme: "left" uses f(t_k); "trapezoid" uses (f(t_k) + f(t_{k+1})) / 2

    Returns:
        Approximation of the integral of f dg over the grid.
    """
    increments = np.diff(integrator)
    if scheme == "left":
        weights = integrand[:-1]
    elif scheme == "trapezoid":
        weights = 0.5 * (integrand[:-1] + integrand[1:])
    else:
        raise ValueError(f"Unknown scheme: {scheme}")
    return float(np.dot(weights, increments))
