"""Telemetry-aware job placement toolkit.

Thin re-export of the native module: duration models (linear / random
forest / gradient-boosted trees), node ranking, the resource-availability
baseline, and the deterministic geo-distributed cluster simulator.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
