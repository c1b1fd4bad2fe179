"""Similarity-cache performance model: fixed-point hit-rate prediction and
trace-driven simulators for RND-LRU / SIM-LRU caches."""

from simcache._core import *  # noqa: F401,F403
from simcache._core import __version__  # noqa: F401
