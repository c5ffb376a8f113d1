"""Exception and warning types raised by the checker."""

from __future__ import annotations


class ModelError(ValueError):
    """Raised when a model fails validation.

    ``location`` is an optional ``(line, column)`` pair set by the AMF loader
    when the offending construct came from a source file.
    """

    def __init__(self, message, location=None):
        self.message = message
        self.location = location
        super().__init__(self._render())

    def _render(self):
        if self.location is None:
            return self.message
        line, col = self.location
        return f"{line}:{col}: {self.message}"

    def at(self, location):
        """Attach a source location and return self."""
        self.location = location
        self.args = (self._render(),)
        return self


class UndeclaredSymbol(ModelError):
    pass


class DuplicateDeclaration(ModelError):
    pass


class EmptyProtocol(ModelError):
    pass


class NonSerialState(ModelError):
    def __init__(self, state, location=None):
        self.state = state
        super().__init__(f"state {state} has no outgoing transition", location)


class EnabledConsistencyViolation(ModelError):
    def __init__(self, agent, first, second, location=None):
        self.agent = agent
        self.states = (first, second)
        super().__init__(
            f"agent {agent} cannot distinguish {first} and {second} "
            f"but their enabled actions differ",
            location,
        )


class ProtocolMismatch(ModelError):
    def __init__(self, agent, state, declared, derived, location=None):
        self.agent = agent
        self.state = state
        super().__init__(
            f"agent {agent} in {state}: protocol declares {{{', '.join(declared)}}} "
            f"but transitions enable {{{', '.join(derived)}}}",
            location,
        )


class EmptyCoalition(ValueError):
    pass


class UnknownAgent(ValueError):
    pass


class UnknownAtom(ValueError):
    pass


class CapExceeded(RuntimeError):
    pass


class ParseError(ValueError):
    """Syntax error with a 1-based line/column and the set of expected tokens."""

    def __init__(self, message, line, column, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        text = f"{line}:{column}: {message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(text)


class FormulaSyntaxError(ParseError):
    pass


class AmfSyntaxError(ParseError):
    pass


class EmptyFairnessWarning(UserWarning):
    """A fairness constraint is the empty set, so no path is fair."""


class NonProductEnabledWarning(UserWarning):
    """Some state enables agent actions whose combination has no transition."""
