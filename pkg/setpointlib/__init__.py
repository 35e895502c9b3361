"""
Setpoint Lab - sampled-feedback setpoint algorithms and their closed-loop maps
"""

from .core import SetpointLab

__all__ = ["SetpointLab"]

__version__ = "1.0.0"
__description__ = "Setpoint holding algorithms, closed-loop maps and bifurcation analysis"
