#!/usr/bin/env python3
"""
Run configuration manager for superflow runs
Handles persistence, validation and environment overrides of RunConfig
"""

import json
import os
import re
import shutil
import tempfile
from dataclasses import asdict, dataclass, fields
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

CONFIG_FILENAME = "superflow_config.json"

ENV_THREADS = "SUPERFLOW_THREADS"
ENV_SEED = "SUPERFLOW_SEED"

_INTEGER_TEXT = re.compile(r"^[+-]?\d+$")


@dataclass
class RunConfig:
    """Settings shared by every subcommand"""
    seed: int = 20240607
    rtol: float = 1e-10
    quadrature_target: float = 1e-10
    tau_g: float = 1e-9
    tau_v: float = 1e-9
    max_order: int = 10000
    output_dir: str = "superflow_output"
    threads: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        """Build from a validated dict; unknown keys raise ValueError"""
        is_valid, error_msg = validate_run_config(data)
        if not is_valid:
            raise ValueError(f"Invalid configuration: {error_msg}")
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


DEFAULT_CONFIG = RunConfig().to_dict()

_POSITIVE_FLOATS = ("rtol", "quadrature_target", "tau_g", "tau_v")


def validate_run_config(config: Mapping[str, Any]) -> Tuple[bool, str]:
    """
    Validate a run configuration dictionary

    Args:
        config: configuration mapping, possibly partial

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not isinstance(config, Mapping):
        return False, "Configuration must be a JSON object"

    unknown = sorted(set(config) - set(DEFAULT_CONFIG))
    if unknown:
        return False, f"Unknown fields: {', '.join(unknown)}"

    for name in ("seed", "max_order", "threads"):
        if name in config:
            value = config[name]
            if isinstance(value, bool) or not isinstance(value, int):
                return False, f"{name} must be an integer, got {value!r}"

    if config.get("seed", 0) < 0:
        return False, "seed must be non-negative"
    if config.get("threads", 1) < 1:
        return False, "threads must be at least 1"
    if config.get("max_order", 1) < 1:
        return False, "max_order must be at least 1"

    for name in _POSITIVE_FLOATS:
        if name in config:
            value = config[name]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return False, f"{name} must be a number, got {value!r}"
            if not 0 < value < 1:
                return False, f"{name} must lie in (0, 1)"

    if "output_dir" in config:
        value = config["output_dir"]
        if not isinstance(value, str) or not value.strip():
            return False, "output_dir must be a non-empty path"

    return True, "Configuration is valid"


def apply_environment(config: Mapping[str, Any],
                      environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    """
    Overlay SUPERFLOW_THREADS and SUPERFLOW_SEED onto a configuration

    Integer text is converted; anything else is passed through unchanged
    so that validation rejects it.
    """
    environ = os.environ if environ is None else environ
    merged = dict(config)
    for key, name in ((ENV_THREADS, "threads"), (ENV_SEED, "seed")):
        raw = environ.get(key)
        if raw is None or raw == "":
            continue
        raw = raw.strip()
        merged[name] = int(raw) if _INTEGER_TEXT.match(raw) else raw
    return merged


class RunConfigManager:
    """Manages superflow_config.json inside a config directory"""

    def __init__(self, config_dir: Optional[Path] = None):
        """
        Initialize RunConfigManager

        Args:
            config_dir: Directory for the configuration file (defaults to the working directory)
        """
        self.config_dir = Path(config_dir) if config_dir else Path.cwd()
        self.config_file = self.config_dir / CONFIG_FILENAME
        self.config_dir.mkdir(parents=True, exist_ok=True)

    def validate_run_config(self, config: Mapping[str, Any]) -> Tuple[bool, str]:
        return validate_run_config(config)

    def save_run_config(self, config: Optional[Mapping[str, Any]] = None) -> bool:
        """
        Save a run configuration, merged over the defaults

        Returns:
            True if saved successfully
        """
        merged = dict(DEFAULT_CONFIG)
        if config:
            merged.update(config)

        is_valid, error_msg = validate_run_config(merged)
        if not is_valid:
            raise ValueError(f"Invalid configuration: {error_msg}")

        temp_path = None
        try:
            # Write to temporary file first, then move (atomic operation)
            with tempfile.NamedTemporaryFile(mode="w", delete=False,
                                             dir=self.config_dir, suffix=".tmp") as temp_file:
                json.dump(merged, temp_file, indent=2, sort_keys=True)
                temp_file.write("\n")
                temp_path = Path(temp_file.name)

            temp_path.replace(self.config_file)
            return True

        except Exception:
            if temp_path is not None and temp_path.exists():
                temp_path.unlink()
            raise

    def load_run_config(self) -> Optional[Dict[str, Any]]:
        """
        Load the stored configuration

        Returns:
            Configuration dictionary or None if not found/invalid
        """
        try:
            if not self.config_file.exists():
                return None

            with open(self.config_file, "r") as f:
                config = json.load(f)

            is_valid, _ = validate_run_config(config)
            if not is_valid:
                return None

            return config

        except (OSError, ValueError):
            return None

    def is_configured(self) -> bool:
        return self.load_run_config() is not None

    def resolve(self, overrides: Optional[Mapping[str, Any]] = None,
                environ: Optional[Mapping[str, str]] = None) -> RunConfig:
        """
        Effective configuration: defaults, then the stored file, then the
        environment, then explicit overrides (None values are ignored)
        """
        merged = dict(DEFAULT_CONFIG)
        stored = self.load_run_config()
        if stored:
            merged.update(stored)
        merged = apply_environment(merged, environ)
        if overrides:
            merged.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_dict(merged)

    def get_configuration_summary(self) -> Dict[str, Any]:
        """
        Get summary of current configuration status

        Returns:
            Dictionary with configuration status
        """
        summary: Dict[str, Any] = {
            "config_file": str(self.config_file),
            "configured": False,
            "details": None,
            "error": None,
            "environment": {},
        }

        if not self.config_file.exists():
            summary["error"] = "Configuration missing"
        else:
            config = self.load_run_config()
            if config is None:
                summary["error"] = "Configuration invalid"
            else:
                summary["configured"] = True
                summary["details"] = config

        for key in (ENV_THREADS, ENV_SEED):
            if os.environ.get(key):
                summary["environment"][key] = os.environ[key]

        return summary

    def create_default_config(self, force: bool = False) -> bool:
        """
        Create the default configuration file

        Args:
            force: Whether to overwrite an existing configuration

        Returns:
            True if the file was written
        """
        if not force and self.is_configured():
            return False
        return self.save_run_config()

    def backup_config(self, backup_dir: Optional[Path] = None) -> Optional[Path]:
        """
        Copy the configuration file into backup_dir (defaults to config_dir/backups)

        Returns:
            Path of the backup, or None when there is nothing to back up
        """
        if not self.config_file.exists():
            return None
        backup_dir = Path(backup_dir) if backup_dir else self.config_dir / "backups"
        backup_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
        backup_file = backup_dir / f"superflow_config_{timestamp}.json"
        shutil.copy2(self.config_file, backup_file)
        return backup_file
