"""
Configuration loader.

Reads config/config.yml, substitutes ${VAR} and ${VAR:-default} references from the
environment (after loading .env), and serves dotted lookups with typed accessors. Every key
has an in-code default at its call site, so a missing file only means defaults everywhere.
"""

import os
import re
from pathlib import Path
from typing import Any, Optional

import yaml
from dotenv import load_dotenv

from src.utils.logger import logger

_ENV_REFERENCE = re.compile(r"\$\{(?P<name>[^}:]+)(?::-(?P<default>[^}]*))?\}")
_TRUE_WORDS = frozenset({"1", "true", "yes", "on"})


def _substitute(node: Any) -> Any:
    """Resolve environment references in every string of a parsed YAML tree."""
    if isinstance(node, dict):
        return {key: _substitute(value) for key, value in node.items()}
    if isinstance(node, list):
        return [_substitute(item) for item in node]
    if not isinstance(node, str):
        return node

    def replace(match: re.Match) -> str:
        value = os.getenv(match["name"])
        if value is not None:
            return value
        if match["default"] is not None:
            return match["default"]
        logger.warning(f"Environment variable {match['name']} is unset and has no default")
        return match.group(0)

    return _ENV_REFERENCE.sub(replace, node)


class ConfigLoader:
    """
    Dotted-key view of the YAML configuration.

    Values that came through ${VAR} substitution are strings; use get_int, get_float or
    get_bool where a number or flag is expected.
    """

    def __init__(self, config_file: str = "config/config.yml"):
        self.config_file = config_file
        if Path(".env").exists():
            load_dotenv(".env")
            logger.debug("Loaded .env")
        path = self._locate()
        self.config: dict[str, Any] = _substitute(self._read(path)) if path else {}

    def _locate(self) -> Optional[Path]:
        """The config file as given, else relative to the repository the package sits in."""
        for candidate in (Path(self.config_file), Path(__file__).resolve().parents[2] / self.config_file):
            if candidate.exists():
                return candidate
        logger.warning(f"Config file {self.config_file} not found, using in-code defaults")
        return None

    @staticmethod
    def _read(path: Path) -> dict[str, Any]:
        try:
            with open(path) as f:
                loaded = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"Could not read {path}: {e}")
            return {}
        logger.debug(f"Loaded configuration from {path}")
        return loaded if isinstance(loaded, dict) else {}

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Value at a dotted key path, or default when any segment is missing.

        Example:
            config.get("oracle.strategy", "auto")
        """
        value: Any = self.config
        for key in key_path.split("."):
            if not isinstance(value, dict) or key not in value:
                return default
            value = value[key]
        return value

    def get_int(self, key_path: str, default: int) -> int:
        return int(self.get(key_path, default))

    def get_float(self, key_path: str, default: float) -> float:
        return float(self.get(key_path, default))

    def get_bool(self, key_path: str, default: bool) -> bool:
        """Flags may arrive as YAML booleans or as substituted strings such as "false"."""
        value = self.get(key_path, default)
        if isinstance(value, str):
            return value.strip().lower() in _TRUE_WORDS
        return bool(value)

    def get_all(self) -> dict[str, Any]:
        return self.config


# Global config instance
config = ConfigLoader()
