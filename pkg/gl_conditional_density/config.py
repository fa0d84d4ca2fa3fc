"""Configuration schemas and flat configuration files."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import voluptuous as vol
import yaml
from voluptuous.humanize import humanize_error

from .const import (
    CONF_BASE_SEED,
    CONF_CLAMP_NONNEG,
    CONF_DEGREE_X,
    CONF_DEGREE_Y,
    CONF_ESTIMATOR,
    CONF_ETA,
    CONF_EXAMPLE,
    CONF_FX_KNOWN,
    CONF_HEAVY_TAILED,
    CONF_MARGINAL_GRID_SIZE,
    CONF_MARGINAL_TUNING,
    CONF_N,
    CONF_NEIGHBORHOOD_A,
    CONF_NEIGHBORHOOD_POINTS,
    CONF_PER_AXIS,
    CONF_PROJECTION_A,
    CONF_QUADRATURE_POINTS,
    CONF_REPLICATIONS,
    CONF_SIMPLIFIED_PENALTY,
    CONF_STRICT_GRID,
    CONF_X,
    DEFAULT_BASE_SEED,
    DEFAULT_DEGREE_X,
    DEFAULT_DEGREE_Y,
    DEFAULT_ETA,
    DEFAULT_MARGINAL_GRID_SIZE,
    DEFAULT_MARGINAL_TUNING,
    DEFAULT_NEIGHBORHOOD_A,
    DEFAULT_NEIGHBORHOOD_POINTS,
    DEFAULT_PER_AXIS,
    DEFAULT_PROJECTION_A,
    DEFAULT_QUADRATURE_POINTS,
    DEFAULT_REPLICATIONS,
    ESTIMATORS,
    MIN_ETA,
    MIN_GRID_SAMPLE_SIZE,
    MIN_QUADRATURE_POINTS,
)
from .evaluation import RiskConfig
from .exceptions import ConditionalDensityError, ConfigurationError
from .marginal import MarginalConfig
from .sampling import ExampleId

_LOGGER = logging.getLogger(__name__)


def example_id(value: Any) -> ExampleId:
    """Validate an example name."""
    try:
        return ExampleId.parse(value)
    except ConditionalDensityError as err:
        raise vol.Invalid(str(err)) from err


def even(value: int) -> int:
    """Validate an even integer."""
    if value % 2:
        raise vol.Invalid(f"expected an even number, got {value}")
    return value


MARGINAL_CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_MARGINAL_GRID_SIZE, default=DEFAULT_MARGINAL_GRID_SIZE): vol.All(
            vol.Coerce(int), vol.Range(min=2)
        ),
        vol.Optional(CONF_MARGINAL_TUNING, default=DEFAULT_MARGINAL_TUNING): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_NEIGHBORHOOD_A, default=DEFAULT_NEIGHBORHOOD_A): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_NEIGHBORHOOD_POINTS, default=DEFAULT_NEIGHBORHOOD_POINTS): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
    }
)

RISK_CONFIG_SCHEMA = MARGINAL_CONFIG_SCHEMA.extend(
    {
        vol.Required(CONF_EXAMPLE): example_id,
        vol.Required(CONF_ESTIMATOR): vol.All(vol.Coerce(str), vol.Lower, vol.In(ESTIMATORS)),
        vol.Required(CONF_X): vol.Coerce(float),
        vol.Required(CONF_N): vol.All(vol.Coerce(int), vol.Range(min=MIN_GRID_SAMPLE_SIZE)),
        vol.Optional(CONF_ETA, default=DEFAULT_ETA): vol.All(
            vol.Coerce(float), vol.Range(min=MIN_ETA, min_included=False)
        ),
        vol.Optional(CONF_FX_KNOWN, default=False): vol.Boolean(),
        vol.Optional(CONF_REPLICATIONS, default=DEFAULT_REPLICATIONS): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_BASE_SEED, default=DEFAULT_BASE_SEED): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional(CONF_QUADRATURE_POINTS, default=DEFAULT_QUADRATURE_POINTS): vol.All(
            vol.Coerce(int), vol.Range(min=MIN_QUADRATURE_POINTS), even
        ),
        vol.Optional(CONF_HEAVY_TAILED, default=False): vol.Boolean(),
        vol.Optional(CONF_STRICT_GRID, default=False): vol.Boolean(),
        vol.Optional(CONF_CLAMP_NONNEG, default=False): vol.Boolean(),
        vol.Optional(CONF_PER_AXIS, default=DEFAULT_PER_AXIS): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_PROJECTION_A, default=DEFAULT_PROJECTION_A): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_DEGREE_X, default=DEFAULT_DEGREE_X): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional(CONF_DEGREE_Y, default=DEFAULT_DEGREE_Y): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional(CONF_SIMPLIFIED_PENALTY, default=True): vol.Boolean(),
    }
)

_MARGINAL_FIELDS = {
    CONF_MARGINAL_GRID_SIZE: "grid_size",
    CONF_MARGINAL_TUNING: "tuning_constant",
    CONF_NEIGHBORHOOD_A: "neighborhood_halfwidth_A",
    CONF_NEIGHBORHOOD_POINTS: "neighborhood_grid_points",
}


def _validate(schema: vol.Schema, data: Mapping[str, Any]) -> Dict[str, Any]:
    try:
        return schema(dict(data))
    except vol.Invalid as err:
        raise ConfigurationError(humanize_error(dict(data), err)) from err


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a flat YAML mapping of configuration keys."""
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as err:
        raise ConfigurationError(f"Cannot read configuration file {path}: {err}") from err
    except yaml.YAMLError as err:
        raise ConfigurationError(f"Invalid YAML in {path}: {err}") from err

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must contain a mapping of key: value lines")
    nested = sorted(str(key) for key, value in data.items() if isinstance(value, (dict, list)))
    if nested:
        raise ConfigurationError(f"Nested values are not supported (keys: {', '.join(nested)})")
    _LOGGER.debug("Loaded %d keys from %s", len(data), path)
    return {str(key): value for key, value in data.items()}


def build_marginal_config(mapping: Mapping[str, Any]) -> MarginalConfig:
    """Validate the marginal keys of a mapping and build a MarginalConfig."""
    marginal_keys = {key: value for key, value in mapping.items() if key in _MARGINAL_FIELDS}
    validated = _validate(MARGINAL_CONFIG_SCHEMA, marginal_keys)
    return MarginalConfig(**{_MARGINAL_FIELDS[key]: value for key, value in validated.items()})


def build_risk_config(mapping: Optional[Mapping[str, Any]] = None, **overrides: Any) -> RiskConfig:
    """Merge overrides (ignoring None) over a mapping, validate and build a RiskConfig."""
    merged: Dict[str, Any] = dict(mapping or {})
    merged.update({key: value for key, value in overrides.items() if value is not None})
    validated = _validate(RISK_CONFIG_SCHEMA, merged)

    marginal = MarginalConfig(
        **{_MARGINAL_FIELDS[key]: validated.pop(key) for key in list(validated) if key in _MARGINAL_FIELDS}
    )
    return RiskConfig(marginal=marginal, **validated)
