"""Explicit-state model checking for ATLK with fairness constraints."""

from .amf import load_model, load_model_file, print_model
from .errors import (
    AmfSyntaxError,
    CapExceeded,
    EmptyCoalition,
    EmptyFairnessWarning,
    EnabledConsistencyViolation,
    FormulaSyntaxError,
    ModelError,
    NonProductEnabledWarning,
    NonSerialState,
    ParseError,
    ProtocolMismatch,
    UndeclaredSymbol,
    UnknownAgent,
    UnknownAtom,
)
from .formula import negate_path, parse_formula, to_text
from .model import AgentDecl, Model, build_model, reachable
from .sets import PairSet, StateSet

__version__ = "0.1.0"
