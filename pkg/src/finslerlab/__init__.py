"""Numerical verification toolkit for anisotropic semilinear equations -Qu = f(u)."""
from .anisotropy import NormSpec, verify_properties
from .errors import BlowUpError, DomainError, NonConvergenceError, NumericError
from .radial import Nonlinearity, RadialProfile

__version__ = "0.1.0"
SCHEMA = "finsler-lab/1"
