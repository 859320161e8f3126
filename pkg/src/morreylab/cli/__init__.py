"""Config-driven experiment runner."""

from .config import ConfigError, validate
from .main import main
