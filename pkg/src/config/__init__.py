import logging
from typing import Optional

from .settings import settings, TomofuseSettings


def configure_logging(level: Optional[str] = None) -> None:
    """Install the project-wide log format once (CLI and scripts call this)."""
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format=settings.LOG_FORMAT
    )


__all__ = ["settings", "TomofuseSettings", "configure_logging"]
