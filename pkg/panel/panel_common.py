import os
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from dotenv import load_dotenv

from panel.panel_errors import ConfigError

load_dotenv()  # .env in the working directory provides defaults for every PANEL_* setting

LOGGER_NAME = "agency_panel"
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(LOGGER_NAME)


def configure_logging(debug: bool = False, level_name: Optional[str] = None) -> None:
    # Third-party loggers stay quiet, ours follow the flag / env setting
    logging.basicConfig(level=logging.WARNING, format=LOG_FORMAT)
    if debug:
        level = logging.DEBUG
    else:
        level = logging.getLevelName((level_name or os.getenv("PANEL_LOG_LEVEL", "INFO")).upper())
        if not isinstance(level, int):
            level = logging.INFO
    logger.setLevel(level)
    logger.debug(f"Log level set to: {logging.getLevelName(level)}")


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    return float(raw) if raw not in (None, "") else default


def parse_star_levels(text: str) -> Tuple[float, float, float]:
    levels = tuple(float(part) for part in text.split(",") if part.strip())
    if len(levels) != 3 or not (0 < levels[0] < levels[1] < levels[2] <= 1):
        raise ValueError(f"star levels must be three increasing probabilities, got {text!r}")
    return levels


@dataclass(frozen=True)
class Settings:
    workers: int = 5
    winsor_lower: float = 0.01
    winsor_upper: float = 0.99
    stars: Tuple[float, float, float] = (0.01, 0.05, 0.1)


def load_settings() -> Settings:
    try:
        return _settings_from_env()
    except ValueError as error:
        raise ConfigError(f"bad PANEL_* environment setting: {error}") from None


def _settings_from_env() -> Settings:
    return Settings(
        workers=int(os.getenv("PANEL_WORKERS", "5")),
        winsor_lower=_env_float("PANEL_WINSOR_LOWER", 0.01),
        winsor_upper=_env_float("PANEL_WINSOR_UPPER", 0.99),
        stars=parse_star_levels(os.getenv("PANEL_STARS", "0.01,0.05,0.1")),
    )
