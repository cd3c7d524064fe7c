"""Discrete-event quantum network simulator with a symbolic frontend."""

__version__ = "0.1.0"

from .engine import AllOf, AnyOf, Simulation, Timeout, TARGET_GONE
from .errors import SimError, UnsupportedOnBackend, ConfigError
