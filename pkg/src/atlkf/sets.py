"""Bit-vector state sets and (state, coalition-action) pair sets."""

from __future__ import annotations

import numpy as np


def _frozen(bits):
    bits = np.array(bits, dtype=np.bool_, copy=True)
    bits.flags.writeable = False
    return bits


class StateSet:
    """Immutable subset of the interned global states ``0..n-1``.

    Supports ``| & - ^ ~``, ``<=``/``>=`` for inclusion, ``len`` for the
    cardinality and iteration over member indices in increasing order.
    """

    __slots__ = ("bits",)

    def __init__(self, bits):
        bits = np.asarray(bits)
        if bits.ndim != 1:
            raise ValueError("StateSet bits must be one-dimensional")
        self.bits = _frozen(bits)

    @classmethod
    def empty(cls, n):
        return cls(np.zeros(n, dtype=np.bool_))

    @classmethod
    def full(cls, n):
        return cls(np.ones(n, dtype=np.bool_))

    @classmethod
    def of(cls, n, indices):
        bits = np.zeros(n, dtype=np.bool_)
        bits[list(indices)] = True
        return cls(bits)

    @property
    def universe(self):
        return self.bits.shape[0]

    def _check(self, other):
        if not isinstance(other, StateSet):
            return NotImplemented
        if other.bits.shape != self.bits.shape:
            raise ValueError("state sets over different universes")
        return other

    def __or__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return StateSet(self.bits | other.bits)

    def __and__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return StateSet(self.bits & other.bits)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return StateSet(self.bits & ~other.bits)

    def __xor__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return StateSet(self.bits ^ other.bits)

    def __invert__(self):
        return StateSet(~self.bits)

    complement = __invert__

    def __le__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return not bool((self.bits & ~other.bits).any())

    def __ge__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return other <= self

    def __eq__(self, other):
        if not isinstance(other, StateSet):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits)
        )

    def __hash__(self):
        return hash((self.bits.shape[0], np.packbits(self.bits).tobytes()))

    def __contains__(self, s):
        return bool(self.bits[s])

    def __len__(self):
        return int(np.count_nonzero(self.bits))

    def __bool__(self):
        return bool(self.bits.any())

    def __iter__(self):
        return iter(np.flatnonzero(self.bits).tolist())

    def indices(self):
        return np.flatnonzero(self.bits).tolist()

    def __repr__(self):
        return f"StateSet({self.indices()!r}, n={self.universe})"


class PairSet:
    """Set of ``(state, coalition action)`` pairs for one coalition.

    ``space`` is the model's :class:`~atlkf.model.CoalitionSpace` for the
    coalition; ``bits[s, c]`` is set when the pair (state ``s``, coalition
    action column ``c``) is a member.
    """

    __slots__ = ("space", "bits")

    def __init__(self, space, bits):
        bits = np.asarray(bits)
        if bits.shape != (space.n_states, space.n_cols):
            raise ValueError(
                f"pair bits have shape {bits.shape}, "
                f"expected {(space.n_states, space.n_cols)}"
            )
        self.space = space
        self.bits = _frozen(bits)

    @property
    def coalition(self):
        return self.space.agents

    @classmethod
    def empty(cls, space):
        return cls(space, np.zeros((space.n_states, space.n_cols), dtype=np.bool_))

    @classmethod
    def all_enabled(cls, space):
        """S x Act_Gamma restricted to enabled pairs."""
        return cls(space, space.enabled)

    @classmethod
    def of(cls, space, pairs):
        bits = np.zeros((space.n_states, space.n_cols), dtype=np.bool_)
        for s, action in pairs:
            bits[s, space.column(action)] = True
        return cls(space, bits)

    def states(self):
        return StateSet(self.bits.any(axis=1))

    def actions_at(self, s):
        return [self.space.columns[c] for c in np.flatnonzero(self.bits[s])]

    def _check(self, other):
        if not isinstance(other, PairSet):
            return NotImplemented
        if other.space.agents != self.space.agents or other.bits.shape != self.bits.shape:
            raise ValueError("pair sets over different coalitions")
        return other

    def __or__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return PairSet(self.space, self.bits | other.bits)

    def __and__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return PairSet(self.space, self.bits & other.bits)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return PairSet(self.space, self.bits & ~other.bits)

    def __le__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return not bool((self.bits & ~other.bits).any())

    def __eq__(self, other):
        if not isinstance(other, PairSet):
            return NotImplemented
        return self.space.agents == other.space.agents and bool(
            np.array_equal(self.bits, other.bits)
        )

    def __hash__(self):
        return hash((self.space.agents, np.packbits(self.bits).tobytes()))

    def __contains__(self, pair):
        s, action = pair
        return bool(self.bits[s, self.space.column(action)])

    def __len__(self):
        return int(np.count_nonzero(self.bits))

    def __bool__(self):
        return bool(self.bits.any())

    def __iter__(self):
        columns = self.space.columns
        for s, c in zip(*np.nonzero(self.bits)):
            yield int(s), columns[c]

    def __repr__(self):
        return f"PairSet({sorted(self)!r}, coalition={self.space.agents})"
