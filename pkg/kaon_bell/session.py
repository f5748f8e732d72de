import logging
import os
from typing import Any, Dict, Mapping, Optional

from kaon_bell.config import RunConfig, parse_config
from kaon_bell.errors import ConfigError

logger = logging.getLogger(__name__)


class KaonBellSession:
    """Base configuration shared by every MCP tool call.

    Each call re-validates the base text with its own overrides, so a bad
    argument never leaks into later calls.
    """

    def __init__(self, config_path: Optional[str] = None, text: Optional[str] = None):
        self.config_path = config_path or os.getenv("KAON_BELL_CONFIG")
        if text is None and self.config_path:
            try:
                with open(self.config_path, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as e:
                raise ConfigError([("<config>", f"cannot read {self.config_path}: {e.strerror}")]) from e
        self.text = text or ""
        self.base: RunConfig = parse_config(self.text)
        logger.info(f"Session ready ({self.config_path or 'built-in defaults'})")

    def configure(self, **sections: Optional[Mapping[str, Any]]) -> RunConfig:
        """The base configuration with per-section overrides; ``None`` values are ignored."""
        overrides: Dict[str, Dict[str, str]] = {}
        for section, values in sections.items():
            for key, value in (values or {}).items():
                if value is not None:
                    overrides.setdefault(section, {})[key] = str(value)
        if not overrides:
            return self.base
        return parse_config(self.text, overrides)
