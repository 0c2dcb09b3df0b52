"""Simulation and numerical certification of switched negative-imaginary systems."""

from ._swni import *  # noqa: F401,F403
from ._swni import __version__  # noqa: F401
