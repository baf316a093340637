"""Data-driven event-triggered control of linear time-varying plants."""

from ._ddetc import *  # noqa: F401,F403
from ._ddetc import __version__  # noqa: F401
