"""Fixed-velocity friction linearization for transient gas pipeline flow.

Thin re-export of the compiled ``gaslin._core`` extension.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
