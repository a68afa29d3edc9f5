"""Disentangled shape/pose embedding toolkit."""

from ._posekit import *  # noqa: F401,F403
from ._posekit import __version__  # noqa: F401
