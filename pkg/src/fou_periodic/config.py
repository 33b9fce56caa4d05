"""
Configuration for fou-periodic.

This module holds the numerical defaults used across the toolkit and the
validated experiment specification read from INI-style config files.
"""

import configparser
import math
import os
from pathlib import Path
from typing import Any

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from fou_periodic.errors import ConfigurationError

# =============================================================================
# Numerical defaults
# =============================================================================

DEFAULTS: dict[str, Any] = {
    "quadrature": {
        "simpson_step": 2.0**-10,
        "gram_step": 2.0**-12,
        "gram_tolerance": 1e-8,
    },
    "fbm": {
        "embedding_tolerance": 1e-9,
        "cholesky_max_size": 4096,
        "method": "auto",
    },
    "process": {
        "overflow_alpha_n": 40.0,
    },
    "estimator": {
        "bessel_relative": 1e-8,
        "condition_limit": 1e12,
        "route": "closed_form",
        "scheme": "trapezoid",
    },
    "z_infinity": {
        "min_horizon": 20.0,
        "alpha_multiple": 12.0,
        "refuse_alpha_multiple": 5.0,
        "design_alpha_multiple": 10.0,
        "dt": 2.0**-8,
        "max_dt": 2.0**-8,
    },
    "harness": {
        "skip_warning_fraction": 0.05,
        "threads_env": "FOU_THREADS",
    },
}

KIND_NAMES = ("constant", "cos", "sin")
SUITES = ("consistency", "rate", "limits")
FORMATS = ("csv", "json")


def default_z_truncation(alpha: float) -> float:
    """Default Z-infinity truncation horizon max(20, 12/alpha)."""
    zinf = DEFAULTS["z_infinity"]
    return max(zinf["min_horizon"], zinf["alpha_multiple"] / alpha)


def load_environment(env_file: str | None = None) -> None:
    """Load environment variables from a .env file."""
    if env_file:
        if not os.path.exists(env_file):
            raise ConfigurationError(f"Env file not found: {env_file}")
        load_dotenv(env_file)
    else:
        load_dotenv()


def threads_from_env(default: int = 1) -> int:
    """Worker count from FOU_THREADS, falling back to `default`."""
    raw = os.environ.get(DEFAULTS["harness"]["threads_env"])
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigurationError(f"FOU_THREADS must be an integer, got {raw!r}") from e
    if value < 1:
        raise ConfigurationError(f"FOU_THREADS must be >= 1, got {value}")
    return value


# =============================================================================
# Experiment specification
# =============================================================================


class ModelSpec(BaseModel):
    """Drift basis, coefficients and process parameters."""

    basis: list[str] = Field(default_factory=lambda: ["constant"])
    mu: list[float] = Field(default_factory=lambda: [1.0])
    alpha: float = 0.5
    H: float = 0.7

    @field_validator("basis")
    @classmethod
    def _check_basis(cls, value: list[str]) -> list[str]:
        if not value:
            raise ValueError("basis must name at least one function")
        for item in value:
            kind, _, k = item.partition(":")
            if kind not in KIND_NAMES:
                raise ValueError(f"unknown basis kind {kind!r}; expected one of {KIND_NAMES}")
            if kind == "constant":
                if k:
                    raise ValueError("constant basis takes no frequency")
            elif not k.isdigit() or int(k) < 1:
                raise ValueError(f"{kind} basis needs a positive integer frequency, got {item!r}")
        if len(set(value)) != len(value):
            raise ValueError("basis functions must be pairwise distinct")
        return value

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("alpha must be > 0")
        return value

    @field_validator("H")
    @classmethod
    def _check_hurst(cls, value: float) -> float:
        if not 0.5 <= value < 1.0:
            raise ValueError("H must satisfy 0.5 <= H < 1")
        return value

    @model_validator(mode="after")
    def _check_lengths(self) -> "ModelSpec":
        if len(self.mu) != len(self.basis):
            raise ValueError(f"mu has {len(self.mu)} entries but basis has {len(self.basis)}")
        return self


class GridSpec(BaseModel):
    """Time grid and the integer horizons at which to estimate."""

    dt: float = 2.0**-8
    horizons: list[int] = Field(default_factory=lambda: [6, 10, 14, 18])

    @field_validator("dt")
    @classmethod
    def _check_dt(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("dt must be > 0")
        steps = 1.0 / value
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("1/dt must be an integer so integer horizons fall on the grid")
        return value

    @field_validator("horizons")
    @classmethod
    def _check_horizons(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("at least one horizon is required")
        if any(n < 2 for n in value):
            raise ValueError("horizons must be integers >= 2")
        return sorted(set(value))


class McSpec(BaseModel):
    """Monte Carlo replication settings."""

    replications: int = 200
    base_seed: int = 20240101
    zero_noise: bool = False

    @field_validator("replications")
    @classmethod
    def _check_replications(cls, value: int) -> int:
        if value < 1:
            raise ValueError("replications must be >= 1")
        return value

    @field_validator("base_seed")
    @classmethod
    def _check_seed(cls, value: int) -> int:
        if not 0 <= value < 2**64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")
        return value


class TestsSpec(BaseModel):
    """Acceptance suites to run and limit-law sampling size."""

    __test__ = False

    suites: list[str] = Field(default_factory=lambda: list(SUITES))
    limit_draws: int = 2000
    limit_dt: float = 2.0**-8

    @field_validator("suites")
    @classmethod
    def _check_suites(cls, value: list[str]) -> list[str]:
        unknown = [s for s in value if s not in SUITES]
        if unknown:
            raise ValueError(f"unknown suites {unknown}; expected a subset of {SUITES}")
        return value


class OutputSpec(BaseModel):
    """Where and how to write results."""

    directory: str = "results"
    formats: list[str] = Field(default_factory=lambda: ["csv", "json"])

    @field_validator("formats")
    @classmethod
    def _check_formats(cls, value: list[str]) -> list[str]:
        unknown = [f for f in value if f not in FORMATS]
        if unknown or not value:
            raise ValueError(f"formats must be a non-empty subset of {FORMATS}, got {value}")
        return value


class ExperimentSpec(BaseModel):
    """A complete, validated Monte Carlo experiment configuration."""

    model: ModelSpec = Field(default_factory=ModelSpec)
    grid: GridSpec = Field(default_factory=GridSpec)
    mc: McSpec = Field(default_factory=McSpec)
    tests: TestsSpec = Field(default_factory=TestsSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def _check_overflow(self) -> "ExperimentSpec":
        limit = DEFAULTS["process"]["overflow_alpha_n"]
        worst = self.model.alpha * max(self.grid.horizons)
        if worst > limit:
            raise ValueError(f"alpha * max(horizons) = {worst:g} exceeds the guard {limit:g}")
        return self

    @property
    def steps_per_unit(self) -> int:
        return round(1.0 / self.grid.dt)

    @property
    def max_horizon(self) -> int:
        return max(self.grid.horizons)


_LIST_FIELDS = {"basis", "mu", "horizons", "suites", "formats"}


def _parse_value(key: str, raw: str) -> Any:
    raw = raw.strip()
    if key in _LIST_FIELDS:
        return [item.strip() for item in raw.split(",") if item.strip()]
    if key == "dt" or key == "limit_dt":
        return _parse_float(raw)
    return raw


def _parse_float(raw: str) -> float:
    # accept "2^-8" alongside plain decimals
    if "^" in raw:
        base, _, exponent = raw.partition("^")
        return math.pow(float(base), float(exponent))
    return float(raw)


def parse_config_text(text: str, source: str = "<config>") -> ExperimentSpec:
    """Parse INI-style `key = value` sections into an ExperimentSpec."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigurationError(f"Cannot parse {source}: {e}") from e

    data: dict[str, dict[str, Any]] = {}
    for section in parser.sections():
        if section not in ExperimentSpec.model_fields:
            raise ConfigurationError(f"Unknown section [{section}] in {source}")
        try:
            data[section] = {
                key: _parse_value(key, value) for key, value in parser.items(section)
            }
        except ValueError as e:
            raise ConfigurationError(f"Bad value in [{section}] of {source}: {e}") from e

    try:
        return ExperimentSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid experiment config {source}", e.errors()) from e


def load_config(path: str | Path) -> ExperimentSpec:
    """Read and validate an experiment config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}")
    return parse_config_text(path.read_text(), source=str(path))
