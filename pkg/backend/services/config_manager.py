import copy
import hashlib
import json
import os
from pathlib import Path
from typing import Any, Optional

import yaml

from backend.services.errors import ConfigError

_MISSING = object()


# Class: ConfigManager
class ConfigManager:
    """Manages run configuration from a YAML file

    Physical setup, gate, solver and output settings all live in one file. The
    file path may also be given through the RYDFID_CONFIG environment variable
    (loaded from `.env` by the entry point).
    """

    # Function: __init__
    def __init__(self, config_path: Optional[Path] = None, config: Optional[dict] = None):
        if config is not None:
            self.config_path = config_path
            self.config = copy.deepcopy(config)
        else:
            if config_path is None:
                env_path = os.getenv("RYDFID_CONFIG")
                if not env_path:
                    raise ConfigError("CONFIG_MISSING", "No config path given")
                config_path = Path(env_path)
            self.config_path = Path(config_path)
            self.config = self._load_config()

    # Function: _load_config
    def _load_config(self) -> dict:
        """Load configuration from YAML file"""
        if not self.config_path.exists():
            raise ConfigError(
                "CONFIG_NOT_FOUND",
                f"Config file not found: {self.config_path}",
                {"path": str(self.config_path)},
            )

        with open(self.config_path, "r") as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigError("CONFIG_PARSE", str(e), {"path": str(self.config_path)})

        if not isinstance(data, dict):
            raise ConfigError("CONFIG_PARSE", "Top level of config must be a mapping")
        return data

    # Function: get
    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation

        Example: config_manager.get("trap.freq_parallel_hz"); list entries are
        addressed by index, e.g. "beams.0.wavelength_nm"
        """
        keys = key_path.split(".")
        value = self.config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            elif isinstance(value, list) and key.isdigit() and int(key) < len(value):
                value = value[int(key)]
            else:
                return default

        return value

    # Function: has
    def has(self, key_path: str) -> bool:
        return self.get(key_path, _MISSING) is not _MISSING

    # Function: set
    def set(self, key_path: str, value: Any) -> None:
        """Overwrite an existing key (scan axes only ever touch existing keys)."""
        if not self.has(key_path):
            raise ConfigError(
                "CONFIG_UNKNOWN_KEY",
                f"Scan variable does not name a config key: {key_path}",
                {"key": key_path},
            )
        keys = key_path.split(".")
        node = self.config
        for key in keys[:-1]:
            node = node[int(key)] if isinstance(node, list) else node[key]
        if isinstance(node, list):
            node[int(keys[-1])] = value
        else:
            node[keys[-1]] = value

    # Function: with_overrides
    def with_overrides(self, overrides: dict) -> "ConfigManager":
        """Return a copy with dotted-key overrides applied."""
        clone = ConfigManager(self.config_path, config=self.config)
        for key, value in overrides.items():
            clone.set(key, value)
        return clone

    # Function: hash
    def hash(self) -> str:
        """SHA-256 of the canonical JSON dump; embedded in every output."""
        canonical = json.dumps(self.config, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    # Function: get_all
    def get_all(self) -> dict:
        """Get entire configuration dictionary"""
        return self.config
