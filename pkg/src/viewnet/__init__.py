"""Consistency checking for networks of UML views (class, object, state machine,
composite structure and sequence diagrams) related by DOL-style expressions."""

__version__ = "0.1.0"

from .checker import (  # noqa: E402
    ConsistencyReport,
    Verdict,
    check_decentralized_compat,
    check_model,
    check_network,
    check_refinement,
)
from .netlang import load, parse_dol, resolve  # noqa: E402
from .structural import Bounds  # noqa: E402

__all__ = [
    "Bounds",
    "ConsistencyReport",
    "Verdict",
    "check_decentralized_compat",
    "check_model",
    "check_network",
    "check_refinement",
    "load",
    "parse_dol",
    "resolve",
]
