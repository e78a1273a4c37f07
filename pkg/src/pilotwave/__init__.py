"""Wave-packet propagation, pilot-wave kinematics and classical-limit tools."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .fields import (  # noqa: F401
    ComplexField,
    Grid,
    PhysicalParams,
    Scaling,
    SpinorField,
    expectation_position,
    gaussian_packet,
    norm2,
)
