"""Spatial dynamics of a three-section pneumatic soft robotic snake.

Thin wrapper around the compiled ``_core`` module: constant-curvature
kinematics, Lagrangian dynamics, distributed ground contact, rolling
gaits, and the drop-test / gait experiment harness.
"""

from ._core import *  # noqa: F401,F403

__version__ = "0.1.0"
