"""
Limit-law tools: sample the ratio law of e^{alpha n}(alpha_hat - alpha).
"""

import asyncio
from typing import Any

from fou_periodic.asymptotics import AlphaLimitLaw, sample_alpha_limit
from fou_periodic.errors import UsageError
from fou_periodic.statkit import summarize, tail_quantile
from fou_periodic.tools.base import register_tool
from fou_periodic.tools.model import DRIFT_PROPERTIES, HURST_PROPERTY, drift_from_args

MAX_DRAWS = 20000


def _sample(args: dict[str, Any]) -> dict[str, Any]:
    drift = drift_from_args(args)
    count = int(args.get("count", 500))
    if not 1 <= count <= MAX_DRAWS:
        raise UsageError(f"count must be between 1 and {MAX_DRAWS}, got {count}")
    law = AlphaLimitLaw.from_drift(drift, float(args["alpha"]), float(args["H"]), dt=args.get("dt"))
    draws = sample_alpha_limit(law, count, int(args.get("seed", 0)))
    result: dict[str, Any] = {"law": law.as_dict(), "summary": summarize(draws)}
    if count > 1:
        result["tail_quantile_99"] = tail_quantile(draws, 0.01)
    if args.get("include_draws", False):
        result["draws"] = draws.tolist()
    return result


@register_tool(
    name="fou_sample_alpha_limit",
    description="""Draw from the limit law 2 alpha N_1 / (A_inf + alpha Z_inf) of
e^{alpha n}(alpha_hat - alpha). Returns the law constants (sigma_H^2, A_inf,
truncation horizon and tail bound) and a summary of the draws; the law is
heavy tailed, so use medians and quantiles rather than the mean.""",
    input_schema={
        "type": "object",
        "properties": {
            **DRIFT_PROPERTIES,
            "H": HURST_PROPERTY,
            "count": {"type": "integer", "description": "Number of draws", "default": 500},
            "seed": {"type": "integer", "description": "Base seed", "default": 0},
            "dt": {"type": "number", "description": "Z_inf grid step (default 2^-8)"},
            "include_draws": {"type": "boolean", "default": False},
        },
        "required": ["alpha", "H"],
    },
)
async def sample_alpha_limit_tool(args: dict[str, Any]) -> Any:
    """Sample the limit law off the event loop."""
    return await asyncio.to_thread(_sample, args)
