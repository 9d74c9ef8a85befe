"""Counterfactual decoding via recovered Gumbel noise.

The heavy lifting lives in the C++ extension module; this package just
re-exports it. Wheel builds place the extension inside the package; in-tree
CMake builds put it on PYTHONPATH instead.
"""

try:
    from ._gumbelcf import *  # noqa: F401,F403
    from ._gumbelcf import __doc__  # noqa: F401
except ImportError:  # pragma: no cover - dev layout
    from _gumbelcf import *  # noqa: F401,F403
    from _gumbelcf import __doc__  # noqa: F401

__version__ = "0.1.0"
