"""
Model tools: drift functionals, limit-law constants and numerical defaults.
"""

import copy
from typing import Any

from fou_periodic.asymptotics import d_matrix, sigma_H2, z_infinity_variance
from fou_periodic.basis import PeriodicDrift, drift_functionals, remainder_bound
from fou_periodic.config import DEFAULTS
from fou_periodic.tools.base import register_tool

DRIFT_PROPERTIES: dict[str, Any] = {
    "basis": {
        "type": "array",
        "items": {"type": "string"},
        "description": 'Basis functions: "constant", "cos:k" or "sin:k"',
        "default": ["constant"],
    },
    "mu": {
        "type": "array",
        "items": {"type": "number"},
        "description": "Drift coefficients, one per basis function",
        "default": [1.0],
    },
    "alpha": {
        "type": "number",
        "description": "Mean-reversion rate alpha > 0",
    },
}

HURST_PROPERTY: dict[str, Any] = {
    "type": "number",
    "description": "Hurst index, 0.5 <= H < 1",
}


def drift_from_args(args: dict[str, Any]) -> PeriodicDrift:
    return PeriodicDrift.from_spec(args.get("basis", ["constant"]), args.get("mu", [1.0]))


@register_tool(
    name="fou_drift_functionals",
    description="""Deterministic functionals of a periodic drift at a given alpha:
- A1 = int_0^1 e^{-alpha s} L(s) ds and A_inf = A1 / (1 - e^{-alpha})
- lambda_phi for each basis function
- the basis means and the covariance D of the mu limit law
- the constant C of |A_t - A_inf| <= C e^{-alpha t}""",
    input_schema={
        "type": "object",
        "properties": DRIFT_PROPERTIES,
        "required": ["alpha"],
    },
)
async def drift_functionals_tool(args: dict[str, Any]) -> Any:
    """Compute A1, A_inf, lambda and D for a drift."""
    drift = drift_from_args(args)
    alpha = float(args["alpha"])
    result = drift_functionals(drift, alpha).as_dict()
    result["basis"] = drift.labels
    result["D"] = d_matrix(drift.basis).tolist()
    result["remainder_bound"] = remainder_bound(drift, alpha)
    return result


@register_tool(
    name="fou_sigma_h2",
    description="sigma_H^2 = H Gamma(2H) / alpha^{2H}, the variance of N_1 in the alpha limit law, and Var Z_inf.",
    input_schema={
        "type": "object",
        "properties": {
            "H": HURST_PROPERTY,
            "alpha": {"type": "number", "description": "alpha > 0"},
        },
        "required": ["H", "alpha"],
    },
)
async def sigma_h2_tool(args: dict[str, Any]) -> Any:
    """Limit-law variances."""
    H, alpha = float(args["H"]), float(args["alpha"])
    return {
        "H": H,
        "alpha": alpha,
        "sigma_H2": sigma_H2(H, alpha),
        "z_infinity_variance": z_infinity_variance(H, alpha),
    }


@register_tool(
    name="fou_get_defaults",
    description="Get the numerical defaults: quadrature steps, fBm embedding tolerance, overflow guard, estimator thresholds and Z_inf truncation rule.",
    input_schema={
        "type": "object",
        "properties": {},
    },
)
async def get_defaults(args: dict[str, Any]) -> Any:
    """Get numerical defaults."""
    return copy.deepcopy(DEFAULTS)
