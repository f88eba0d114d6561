"""Tests for configuration loading."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import pytest
import yaml

from tor_height.config import (
    EnvConfig,
    FileConfig,
    RuntimeConfig,
    load_file_config,
    load_runtime_config,
    write_default_config,
)
from tor_height.exceptions import ConfigurationError

MISSING = Path("/nonexistent/.torheight.yml")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("PRECISION_BITS", "THREADS", "CONSTANT_EXPONENT", "LOG_LEVEL", "THETA_CAP"):
        monkeypatch.delenv(f"TORHEIGHT_{name}", raising=False)


class TestFileConfig:
    """Tests for FileConfig model."""

    def test_all_optional(self):
        config = FileConfig()
        assert config.precision_bits is None
        assert config.constant_exponent is None

    def test_with_values(self):
        config = FileConfig(precision_bits=256, threads=4)
        assert config.precision_bits == 256
        assert config.threads == 4


class TestRuntimeConfig:
    """Tests for RuntimeConfig defaults and validation."""

    def test_defaults(self):
        config = RuntimeConfig()
        assert config.precision_bits == 128
        assert config.constant_exponent == 21
        assert config.lnum_constant == 2.4e11
        assert config.threads == 1

    def test_rejects_unknown_exponent(self):
        with pytest.raises(ValueError):
            RuntimeConfig(constant_exponent=25)

    def test_normalizes_log_level(self):
        assert RuntimeConfig(log_level="debug").log_level == "DEBUG"


class TestLoadFileConfig:
    """Tests for load_file_config function."""

    def test_missing_file_returns_empty(self):
        config = load_file_config(MISSING)
        assert config.precision_bits is None

    def test_valid_yaml_file(self):
        with tempfile.NamedTemporaryFile(mode="w", suffix=".yml", delete=False) as f:
            yaml.dump({"precision_bits": 512, "theta_cap": 1000}, f)
            f.flush()

            try:
                config = load_file_config(Path(f.name))
                assert config.precision_bits == 512
                assert config.theta_cap == 1000
            finally:
                os.unlink(f.name)

    def test_non_mapping_raises(self, tmp_path):
        path = tmp_path / "bad.yml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigurationError) as exc_info:
            load_file_config(path)
        assert "mapping" in str(exc_info.value)


class TestLoadRuntimeConfig:
    """Tests for load_runtime_config function."""

    def test_defaults_without_sources(self):
        config = load_runtime_config(MISSING)
        assert config == RuntimeConfig()

    def test_env_vars_override_file(self, monkeypatch, tmp_path):
        path = tmp_path / "config.yml"
        path.write_text(yaml.safe_dump({"precision_bits": 256, "threads": 2}))
        monkeypatch.setenv("TORHEIGHT_PRECISION_BITS", "512")

        config = load_runtime_config(path)
        assert config.precision_bits == 512
        assert config.threads == 2

    def test_overrides_win_and_none_is_ignored(self, monkeypatch):
        monkeypatch.setenv("TORHEIGHT_THREADS", "3")
        config = load_runtime_config(MISSING, threads=8, precision_bits=None)
        assert config.threads == 8
        assert config.precision_bits == 128

    def test_local_file_overrides_main_file(self, tmp_path):
        (tmp_path / "config.yml").write_text(yaml.safe_dump({"threads": 2}))
        (tmp_path / ".torheight.local.yml").write_text(yaml.safe_dump({"threads": 5}))
        assert load_runtime_config(tmp_path / "config.yml").threads == 5

    def test_invalid_value_raises(self, monkeypatch):
        monkeypatch.setenv("TORHEIGHT_CONSTANT_EXPONENT", "25")
        with pytest.raises(ConfigurationError) as exc_info:
            load_runtime_config(MISSING)
        assert "constant_exponent" in str(exc_info.value)

    def test_env_config_reads_prefix(self, monkeypatch):
        monkeypatch.setenv("TORHEIGHT_LOG_LEVEL", "info")
        assert EnvConfig().log_level == "info"


class TestWriteDefaultConfig:
    """Tests for write_default_config function."""

    def test_creates_config_file(self, tmp_path):
        path = tmp_path / ".torheight.yml"
        result = write_default_config(path)

        assert result == path
        content = yaml.safe_load(path.read_text())
        assert RuntimeConfig(**content) == RuntimeConfig()

    def test_does_not_overwrite_existing(self, tmp_path):
        path = tmp_path / ".torheight.yml"
        path.write_text("threads: 4\n")
        write_default_config(path)
        assert path.read_text() == "threads: 4\n"
