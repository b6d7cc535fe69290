"""Rot-Pro knowledge graph embedding engine (C++ core)."""

try:
    from ._rotpro import *  # noqa: F401,F403
    from ._rotpro import __version__  # noqa: F401
except ImportError:
    # Development tree: the extension sits on PYTHONPATH next to the package
    # instead of inside it.
    from _rotpro import *  # noqa: F401,F403
    from _rotpro import __version__  # noqa: F401
