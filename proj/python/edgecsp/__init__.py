"""Solver for Boolean edge CSPs whose constraints are delta-matroid tuple lists."""

try:
    from ._edgecsp import *  # noqa: F401,F403
except ImportError:
    # in-tree builds keep the extension next to the package instead of inside it
    from _edgecsp import *  # noqa: F401,F403

__version__ = "0.1.0"
