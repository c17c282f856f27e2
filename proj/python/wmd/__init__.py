"""Wireless motor drive network simulator."""

from ._wmd import *  # noqa: F401,F403
from ._wmd import __version__, ConfigError, DomainError, SolverError  # noqa: F401
