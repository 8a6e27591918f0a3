"""
grouserlab - adaptive-grouser wheel toolkit.

Cam kinematics, closed-loop grouser height control, a simulated testbed with
calibrated terrain response, slip and energy estimation, sieve analysis and
the particle-size to grouser-height scaling analysis.
"""

__version__ = "0.1.0"
__author__ = "grouserlab Contributors"

from .errors import GrouserLabError

__all__ = ["GrouserLabError", "__version__"]
