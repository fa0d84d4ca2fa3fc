"""Tests for configuration schemas and files."""

from pathlib import Path

import pytest
import voluptuous as vol

from gl_conditional_density import const
from gl_conditional_density.config import (
    MARGINAL_CONFIG_SCHEMA,
    RISK_CONFIG_SCHEMA,
    build_marginal_config,
    build_risk_config,
    even,
    example_id,
    load_config_file,
)
from gl_conditional_density.exceptions import ConfigurationError
from gl_conditional_density.sampling import ExampleId

EXAMPLE_FILE = Path(__file__).resolve().parent.parent / "example_configuration.yaml"
REQUIRED = {"example": "ex1", "estimator": "kernel", "x": 0.5, "n": 500}


class TestValidators:
    """Test the custom validators."""

    def test_example_id(self):
        """Test example parsing inside a schema."""
        assert example_id("Ex3") is ExampleId.EX3
        with pytest.raises(vol.Invalid):
            example_id("ex0")

    def test_even(self):
        """Test the even validator."""
        assert even(64) == 64
        with pytest.raises(vol.Invalid):
            even(65)


class TestSchemas:
    """Test the voluptuous schemas."""

    def test_defaults(self):
        """Test that optional keys get their defaults."""
        validated = RISK_CONFIG_SCHEMA(dict(REQUIRED))
        assert validated["eta"] == 1.0
        assert validated["replications"] == 100
        assert validated["quadrature_points"] == 2048
        assert validated["marginal_grid_size"] == 10

    def test_marginal_schema(self):
        """Test the marginal defaults on their own."""
        assert MARGINAL_CONFIG_SCHEMA({})["marginal_tuning_constant"] == 0.5
        assert RISK_CONFIG_SCHEMA(dict(REQUIRED))["projection_A"] == 0.5

    def test_keys_match_constants(self):
        """Test that the configuration key names and the schema agree."""
        names = {value for name, value in vars(const).items() if name.startswith("CONF_")}
        assert names == {str(marker) for marker in RISK_CONFIG_SCHEMA.schema}
        assert not hasattr(const, "DOMAIN")

    def test_missing_required(self):
        """Test that the cell keys are required."""
        with pytest.raises(vol.Invalid):
            RISK_CONFIG_SCHEMA({"example": "ex1"})


class TestBuildRiskConfig:
    """Test building a cell from mappings and overrides."""

    def test_coercion(self):
        """Test that string values from files and flags are coerced."""
        cfg = build_risk_config({**REQUIRED, "n": "250", "eta": "0.5", "fx_known": "true", "estimator": "KERNEL"})
        assert cfg.n == 250
        assert cfg.eta == 0.5
        assert cfg.fx_known is True
        assert cfg.estimator == "kernel"

    def test_overrides_win(self):
        """Test that overrides replace mapping values and None is ignored."""
        cfg = build_risk_config(REQUIRED, n=1000, eta=None)
        assert cfg.n == 1000
        assert cfg.eta == 1.0

    def test_marginal_keys(self):
        """Test that marginal keys reach the MarginalConfig."""
        cfg = build_risk_config({**REQUIRED, "marginal_grid_size": 5, "neighborhood_grid_points": 3})
        assert cfg.marginal.grid_size == 5
        assert cfg.marginal.neighborhood_grid_points == 3
        assert build_marginal_config({"marginal_tuning_constant": 1.5}).tuning_constant == 1.5

    @pytest.mark.parametrize(
        "changes",
        [
            {"quadrature_points": 2047},
            {"quadrature_points": 32},
            {"eta": -1.0},
            {"n": 4},
            {"estimator": "spline"},
            {"example": "ex7"},
            {"colour": "blue"},
        ],
    )
    def test_invalid(self, changes):
        """Test that invalid values surface as ConfigurationError."""
        with pytest.raises(ConfigurationError):
            build_risk_config({**REQUIRED, **changes})

    def test_heavy_tailed_example(self):
        """Test the cross-field check on the heavy-tailed variant."""
        with pytest.raises(ConfigurationError):
            build_risk_config({**REQUIRED, "example": "ex2", "heavy_tailed": True})


class TestLoadConfigFile:
    """Test flat YAML files."""

    def test_example_file(self):
        """Test the shipped example configuration."""
        data = load_config_file(EXAMPLE_FILE)
        cfg = build_risk_config(data)
        assert cfg.example is ExampleId.EX1
        assert cfg.n == 1000
        assert cfg.marginal.neighborhood_grid_points == 21

    def test_empty_file(self, tmp_path):
        """Test that an empty file is an empty mapping."""
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config_file(path) == {}

    def test_missing_file(self, tmp_path):
        """Test that a missing file is a configuration error."""
        with pytest.raises(ConfigurationError):
            load_config_file(tmp_path / "missing.yaml")

    def test_invalid_yaml(self, tmp_path):
        """Test that malformed YAML is rejected."""
        path = tmp_path / "bad.yaml"
        path.write_text("example: [ex1\n")
        with pytest.raises(ConfigurationError):
            load_config_file(path)

    def test_nested(self, tmp_path):
        """Test that nested values are rejected."""
        path = tmp_path / "nested.yaml"
        path.write_text("example: ex1\nmarginal:\n  grid_size: 5\n")
        with pytest.raises(ConfigurationError):
            load_config_file(path)

    def test_not_a_mapping(self, tmp_path):
        """Test that a top-level list is rejected."""
        path = tmp_path / "list.yaml"
        path.write_text("- ex1\n- ex2\n")
        with pytest.raises(ConfigurationError):
            load_config_file(path)
