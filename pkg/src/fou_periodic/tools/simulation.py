"""
Simulation tools: simulate a seeded path and estimate theta on it.
"""

import asyncio
from typing import Any

from fou_periodic.asymptotics import error_representation_check
from fou_periodic.estimator import estimate
from fou_periodic.fbm import generate_fbm_path
from fou_periodic.process import simulate_euler, simulate_exact
from fou_periodic.tools.base import register_tool
from fou_periodic.tools.model import DRIFT_PROPERTIES, HURST_PROPERTY, drift_from_args


def _simulate_estimate(args: dict[str, Any]) -> dict[str, Any]:
    drift = drift_from_args(args)
    alpha, H = float(args["alpha"]), float(args["H"])
    n = int(args["n"])
    dt = float(args.get("dt", 2.0**-8))
    seed = int(args.get("seed", 0))
    bh = generate_fbm_path(H, round(n / dt), dt, seed)
    if args.get("method", "exact") == "euler":
        path = simulate_euler(drift, alpha, bh)
    else:
        path = simulate_exact(drift, alpha, bh)
    est = estimate(path, route=args.get("route"))
    check = error_representation_check(path)
    return {
        "estimate": est.to_record(seed=seed).model_dump(),
        "x_n": float(path.X[-1]),
        "fbm_method": bh.method,
        "error_representation_discrepancy": check.discrepancy,
    }


@register_tool(
    name="fou_simulate_estimate",
    description="""Simulate one seeded path of dX = (L(t) + alpha X) dt + dB^H on [0, n] and
return the least-squares estimate of (mu, alpha) with gamma_n^{-1}. The same
seed always gives the same path.""",
    input_schema={
        "type": "object",
        "properties": {
            **DRIFT_PROPERTIES,
            "H": HURST_PROPERTY,
            "n": {"type": "integer", "description": "Integer observation horizon"},
            "dt": {"type": "number", "description": "Grid step, 1/dt integer", "default": 2.0**-8},
            "seed": {"type": "integer", "description": "Base seed", "default": 0},
            "method": {"type": "string", "enum": ["exact", "euler"], "default": "exact"},
            "route": {"type": "string", "enum": ["closed_form", "matrix_solve"]},
        },
        "required": ["alpha", "H", "n"],
    },
)
async def simulate_estimate(args: dict[str, Any]) -> Any:
    """Simulate and estimate off the event loop."""
    return await asyncio.to_thread(_simulate_estimate, args)
