"""Szego and Garabedian kernels, Ahlfors maps and potential theory on smooth planar domains.

Submodules are imported on first attribute access so that ``import
szegokit`` stays cheap (the CLI sets thread counts before numpy loads).
"""

from importlib import import_module

__version__ = "0.1.0"

_SUBMODULES = ("geometry", "bie", "szego", "ahlfors", "representation", "potential",
               "propermap", "fitkit", "harness", "oracles", "cli")

__all__ = ["__version__", *_SUBMODULES]


def __getattr__(name):
    if name in _SUBMODULES:
        return import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
