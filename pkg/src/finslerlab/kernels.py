"""Backend selection for the hot kernels.

The compiled extension ``_core`` is used when it imports; otherwise, or when
the environment variable ``FINSLERLAB_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the pure-Python ``_pure`` module is used.  ``BACKEND``
names the active choice.
"""
import os

from . import _pure
from ._pure import EXPONENTIAL, LINEAR, NEGATIVE_POWER, POWER, ZERO

__all__ = ["BACKEND", "rk4_radial", "contour_cells", "EXPONENTIAL", "LINEAR", "NEGATIVE_POWER", "POWER", "ZERO"]

_core = None
if os.environ.get("FINSLERLAB_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _core
    except ImportError:
        _core = None

if _core is not None:
    BACKEND = "cython"
    rk4_radial = _core.rk4_radial
    contour_cells = _core.contour_cells
else:
    BACKEND = "python"
    rk4_radial = _pure.rk4_radial
    contour_cells = _pure.contour_cells
