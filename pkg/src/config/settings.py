import os
from pathlib import Path
from typing import Optional

import structlog
from dotenv import load_dotenv

from src.model.errors import LocoError

logger = structlog.get_logger(__name__)

DEFAULT_FUEL = 2_000_000
DEFAULT_SEED = 0
ORACLE_CAP_LIMIT = 12
DEFAULT_PROPAGATION_MAX_STEPS = 1_000_000
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
LOG_FORMATS = ("json", "console")


class SettingsError(LocoError):
    """Raised when an environment variable holds an unusable value."""

    code = "SETTINGS"


class Settings:
    """Runtime configuration loaded from the environment and an optional .env file."""

    def __init__(self, dotenv_path: Optional[Path] = None) -> None:
        self._load_environment(dotenv_path)
        self._validate_and_set_variables()
        self._log_initialization()

    def _load_environment(self, dotenv_path: Optional[Path]) -> None:
        """Load variables from .env without overriding the process environment."""
        dotenv_path = dotenv_path or Path.cwd() / ".env"
        if dotenv_path.exists():
            load_dotenv(dotenv_path=dotenv_path)
            logger.debug("Environment loaded", dotenv_path=str(dotenv_path))

    def _validate_and_set_variables(self) -> None:
        self.color = self._get_flag("LOCO_COLOR", True)
        self.log_level = self._get_choice("LOCO_LOG_LEVEL", "WARNING", LOG_LEVELS, upper=True)
        self.log_format = self._get_choice("LOCO_LOG_FORMAT", "console", LOG_FORMATS)
        self.default_fuel = self._get_int("LOCO_DEFAULT_FUEL", DEFAULT_FUEL, minimum=1)
        self.default_seed = self._get_int("LOCO_DEFAULT_SEED", DEFAULT_SEED, minimum=0)
        self.oracle_max_cap = self._get_int("LOCO_ORACLE_MAX_CAP", ORACLE_CAP_LIMIT, minimum=0)
        if self.oracle_max_cap > ORACLE_CAP_LIMIT:
            raise SettingsError(
                f"LOCO_ORACLE_MAX_CAP must not exceed {ORACLE_CAP_LIMIT}, got {self.oracle_max_cap}")
        self.propagation_max_steps = self._get_int(
            "LOCO_PROPAGATION_MAX_STEPS", DEFAULT_PROPAGATION_MAX_STEPS, minimum=1)

    def _log_initialization(self) -> None:
        logger.debug(
            "Settings initialized",
            color=self.color,
            log_level=self.log_level,
            log_format=self.log_format,
            default_fuel=self.default_fuel,
            default_seed=self.default_seed,
            oracle_max_cap=self.oracle_max_cap,
            propagation_max_steps=self.propagation_max_steps,
        )

    def _get_required(self, key: str, default: str) -> str:
        """Get a variable, falling back to ``default`` when unset or blank."""
        value = os.getenv(key, default).strip()
        return value or default

    def _get_int(self, key: str, default: int, minimum: int) -> int:
        raw = self._get_required(key, str(default))
        try:
            value = int(raw)
        except ValueError:
            raise SettingsError(f"{key} must be an integer, got {raw!r}") from None
        if value < minimum:
            raise SettingsError(f"{key} must be at least {minimum}, got {value}")
        return value

    def _get_flag(self, key: str, default: bool) -> bool:
        raw = self._get_required(key, "1" if default else "0").lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off"):
            return False
        raise SettingsError(f"{key} must be 0 or 1, got {raw!r}")

    def _get_choice(self, key: str, default: str, choices: tuple, upper: bool = False) -> str:
        raw = self._get_required(key, default)
        value = raw.upper() if upper else raw.lower()
        if value not in choices:
            raise SettingsError(f"{key} must be one of {', '.join(choices)}, got {raw!r}")
        return value
