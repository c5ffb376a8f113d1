"""Multi-agent models and their semantic primitives.

Global states are the full product of the agents' local states, interned
densely in mixed-radix order (first agent most significant).  Joint actions
are interned the same way over the agents' declared actions.  The transition
relation is kept as three parallel int64 arrays sorted by
``(src, joint action, dst)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import (
    DuplicateDeclaration,
    EmptyCoalition,
    EmptyFairnessWarning,
    EmptyProtocol,
    EnabledConsistencyViolation,
    NonProductEnabledWarning,
    NonSerialState,
    ProtocolMismatch,
    UndeclaredSymbol,
    UnknownAgent,
)
from .sets import PairSet, StateSet


@dataclass(frozen=True)
class AgentDecl:
    name: str
    states: tuple
    actions: tuple
    protocol: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(
            self, "protocol", {k: tuple(v) for k, v in dict(self.protocol).items()}
        )


def _radix_strides(sizes):
    strides = [1] * len(sizes)
    for k in range(len(sizes) - 2, -1, -1):
        strides[k] = strides[k + 1] * sizes[k + 1]
    return strides


class CoalitionSpace:
    """Column layout of ``Act_Gamma`` for one coalition of a model.

    Columns enumerate the product of the coalition members' declared actions
    in lexicographic order, so column order is also the deterministic
    "lowest action" order.  ``tcol`` maps every transition to its column and
    ``enabled[s, c]`` tells whether column ``c`` is enabled in state ``s``.
    """

    def __init__(self, model, agents):
        self.model = model
        self.agents = agents
        self.n_states = model.n_states
        sizes = [len(model.agents[i].actions) for i in agents]
        self.columns = list(product(*[range(n) for n in sizes]))
        self.n_cols = len(self.columns)
        self._col_of = {a: c for c, a in enumerate(self.columns)}
        self.parts = np.array(self.columns, dtype=np.int64).reshape(self.n_cols, len(agents))

        col_of_joint = np.zeros(model.n_joint, dtype=np.int64)
        strides = _radix_strides(sizes)
        for k, i in enumerate(agents):
            col_of_joint += model.joint_parts[:, i] * strides[k]
        self.col_of_joint = col_of_joint
        self.tcol = col_of_joint[model.jact]

        enabled = np.zeros((self.n_states, self.n_cols), dtype=np.bool_)
        enabled[model.src, self.tcol] = True
        enabled.flags.writeable = False
        self.enabled = enabled

    def column(self, action):
        try:
            return self._col_of[tuple(action)]
        except KeyError:
            raise ValueError(f"{action!r} is not an action of coalition {self.agents}") from None

    def names(self, c):
        return tuple(
            self.model.agents[i].actions[a] for i, a in zip(self.agents, self.columns[c])
        )

    def __repr__(self):
        return f"CoalitionSpace(agents={self.agents}, n_cols={self.n_cols})"


class Model:
    """A validated, immutable model.  Build it with :func:`build_model`."""

    def __init__(self, agents, src, jact, dst, init, labels, fairness):
        self.agents = tuple(agents)
        self.n_agents = len(self.agents)
        self._agent_index = {a.name: i for i, a in enumerate(self.agents)}
        self._local_index = [{s: k for k, s in enumerate(a.states)} for a in self.agents]
        self._action_index = [{s: k for k, s in enumerate(a.actions)} for a in self.agents]

        local_sizes = [len(a.states) for a in self.agents]
        self.state_strides = _radix_strides(local_sizes)
        self.n_states = int(np.prod(local_sizes, dtype=np.int64))
        self.locals = np.array(
            list(product(*[range(n) for n in local_sizes])), dtype=np.int64
        ).reshape(self.n_states, self.n_agents)

        action_sizes = [len(a.actions) for a in self.agents]
        self.joint_strides = _radix_strides(action_sizes)
        self.n_joint = int(np.prod(action_sizes, dtype=np.int64))
        self.joint_parts = np.array(
            list(product(*[range(n) for n in action_sizes])), dtype=np.int64
        ).reshape(self.n_joint, self.n_agents)

        for arr in (src, jact, dst):
            arr.flags.writeable = False
        self.src, self.jact, self.dst = src, jact, dst
        self.init = init
        self.labels = dict(labels)
        self.fairness = tuple(fairness)
        self._spaces = {}

    # -- naming -----------------------------------------------------------

    def agent_index(self, name):
        if isinstance(name, (int, np.integer)):
            if not 0 <= name < self.n_agents:
                raise UnknownAgent(f"no agent with index {name}")
            return int(name)
        try:
            return self._agent_index[name]
        except KeyError:
            raise UnknownAgent(f"unknown agent {name!r}") from None

    def coalition(self, agents):
        """Normalise agent names or indices into a sorted index tuple."""
        return tuple(sorted({self.agent_index(a) for a in agents}))

    def local_index(self, agent, name):
        return self._local_index[self.agent_index(agent)][name]

    def action_index(self, agent, name):
        return self._action_index[self.agent_index(agent)][name]

    def action_name(self, agent, a):
        return self.agents[self.agent_index(agent)].actions[a]

    def state_index(self, local_names):
        if len(local_names) != self.n_agents:
            raise ValueError(f"expected {self.n_agents} local states, got {local_names!r}")
        idx = 0
        for i, (name, stride) in enumerate(zip(local_names, self.state_strides)):
            try:
                idx += self._local_index[i][name] * stride
            except KeyError:
                raise UndeclaredSymbol(
                    f"agent {self.agents[i].name} has no local state {name!r}"
                ) from None
        return idx

    def state_tuple(self, s):
        return tuple(a.states[k] for a, k in zip(self.agents, self.locals[s]))

    def state_name(self, s):
        return "(" + ",".join(self.state_tuple(s)) + ")"

    def joint_index(self, parts):
        return int(sum(p * st for p, st in zip(parts, self.joint_strides)))

    def joint_action(self, action_names):
        return tuple(self.action_index(i, n) for i, n in enumerate(action_names))

    def states_of(self, tuples):
        return StateSet.of(self.n_states, [self.state_index(t) for t in tuples])

    # -- derived structure ------------------------------------------------

    @property
    def all_states(self):
        return StateSet.full(self.n_states)

    @property
    def no_states(self):
        return StateSet.empty(self.n_states)

    def space(self, coalition):
        key = tuple(coalition)
        sp = self._spaces.get(key)
        if sp is None:
            sp = self._spaces[key] = CoalitionSpace(self, key)
        return sp

    @cached_property
    def enabled_agents(self):
        """Per agent, a ``(n_states, n_actions)`` boolean enabled matrix."""
        out = []
        for i, agent in enumerate(self.agents):
            m = np.zeros((self.n_states, len(agent.actions)), dtype=np.bool_)
            m[self.src, self.joint_parts[self.jact, i]] = True
            m.flags.writeable = False
            out.append(m)
        return out

    def successors(self, s):
        lo, hi = np.searchsorted(self.src, [s, s + 1])
        return self.jact[lo:hi], self.dst[lo:hi]

    @property
    def n_transitions(self):
        return int(self.src.shape[0])

    def __repr__(self):
        names = ", ".join(a.name for a in self.agents)
        return (
            f"Model(agents=[{names}], states={self.n_states}, "
            f"transitions={self.n_transitions}, fairness={len(self.fairness)})"
        )


def _check_agents(agents):
    seen = set()
    for agent in agents:
        if agent.name in seen:
            raise DuplicateDeclaration(f"duplicate agent {agent.name!r}")
        seen.add(agent.name)
        for kind, names in (("local state", agent.states), ("action", agent.actions)):
            if len(set(names)) != len(names):
                dup = next(n for n in names if names.count(n) > 1)
                raise DuplicateDeclaration(f"agent {agent.name}: duplicate {kind} {dup!r}")
        if not agent.states:
            raise EmptyProtocol(f"agent {agent.name} declares no local states")
        for local in agent.protocol:
            if local not in agent.states:
                raise UndeclaredSymbol(
                    f"agent {agent.name}: protocol mentions undeclared state {local!r}"
                )
        for local in agent.states:
            acts = agent.protocol.get(local)
            if not acts:
                raise EmptyProtocol(f"agent {agent.name}: empty protocol for {local!r}")
            for a in acts:
                if a not in agent.actions:
                    raise UndeclaredSymbol(
                        f"agent {agent.name}: protocol action {a!r} is not declared"
                    )


def build_model(
    agents: Sequence[AgentDecl],
    transitions,
    init,
    labels: Mapping | None = None,
    fairness=None,
):
    """Validate and intern a model.

    ``transitions`` is an iterable of ``(source, action, target)`` name
    tuples, one local state (resp. action) per agent in declaration order.
    ``init`` is an iterable of state tuples, ``labels`` maps atoms to state
    tuples and ``fairness`` is a list of state-tuple collections.
    """
    agents = list(agents)
    if not agents:
        raise ValueError("a model needs at least one agent")
    _check_agents(agents)
    shell = Model(
        agents,
        np.zeros(0, np.int64),
        np.zeros(0, np.int64),
        np.zeros(0, np.int64),
        None,
        {},
        (),
    )

    triples = set()
    for source, action, target in transitions:
        if len(action) != shell.n_agents:
            raise UndeclaredSymbol(f"joint action {tuple(action)!r} has wrong arity")
        parts = []
        for i, name in enumerate(action):
            try:
                parts.append(shell.action_index(i, name))
            except KeyError:
                raise UndeclaredSymbol(
                    f"agent {agents[i].name} has no action {name!r}"
                ) from None
        triples.add(
            (shell.state_index(tuple(source)), shell.joint_index(parts), shell.state_index(tuple(target)))
        )
    rows = np.array(sorted(triples), dtype=np.int64).reshape(-1, 3)
    src, jact, dst = (np.ascontiguousarray(rows[:, k]) for k in range(3))

    init_set = shell.states_of(init)
    label_sets = {atom: shell.states_of(states) for atom, states in (labels or {}).items()}
    fair_sets = [shell.states_of(f) for f in (fairness or [])]

    model = Model(agents, src, jact, dst, init_set, label_sets, fair_sets)
    _validate(model)
    return model


def _validate(m):
    has_out = np.zeros(m.n_states, dtype=np.bool_)
    has_out[m.src] = True
    if not has_out.all():
        raise NonSerialState(m.state_name(int(np.flatnonzero(~has_out)[0])))

    for i, agent in enumerate(m.agents):
        enabled = m.enabled_agents[i]
        first_of_class = {}
        for s in range(m.n_states):
            local = int(m.locals[s, i])
            t = first_of_class.setdefault(local, s)
            if t != s and not np.array_equal(enabled[s], enabled[t]):
                raise EnabledConsistencyViolation(agent.name, m.state_name(t), m.state_name(s))
        for local, s in first_of_class.items():
            derived = [agent.actions[a] for a in np.flatnonzero(enabled[s])]
            declared = agent.protocol[agent.states[local]]
            if set(derived) != set(declared):
                raise ProtocolMismatch(agent.name, m.state_name(s), declared, derived)

    for k, f in enumerate(m.fairness):
        if not f:
            warnings.warn(
                f"fairness constraint #{k} is empty: no path of this model is fair",
                EmptyFairnessWarning,
                stacklevel=3,
            )

    if m.n_agents > 1:
        full = m.space(tuple(range(m.n_agents)))
        per_agent = np.ones((m.n_states, full.n_cols), dtype=np.bool_)
        for k in range(m.n_agents):
            per_agent &= m.enabled_agents[k][:, full.parts[:, k]]
        bad = np.flatnonzero((per_agent & ~full.enabled).any(axis=1))
        if bad.size:
            warnings.warn(
                f"state {m.state_name(int(bad[0]))} enables agent actions whose "
                "combination has no transition; uniform strategies may not be executable",
                NonProductEnabledWarning,
                stacklevel=3,
            )


# -- semantic primitives ---------------------------------------------------


def enabled_agent(m, s, i):
    """Indices of agent ``i``'s actions occurring in some transition from ``s``."""
    i = m.agent_index(i)
    return {int(a) for a in np.flatnonzero(m.enabled_agents[i][s])}


def enabled_coalition(m, s, coalition):
    """Coalition projections of the joint actions enabled in ``s``."""
    sp = m.space(m.coalition(coalition))
    return {sp.columns[c] for c in np.flatnonzero(sp.enabled[s])}


def img(m, s, action):
    """States reachable from ``s`` in one step through joint action ``action``."""
    j = m.joint_index(action)
    jact, dst = m.successors(s)
    return StateSet.of(m.n_states, dst[jact == j].tolist())


def completes(coalition, coalition_action, action):
    """True iff joint ``action`` agrees with ``coalition_action`` on ``coalition``."""
    return all(action[i] == a for i, a in zip(coalition, coalition_action))


def equiv_class(m, s, i):
    i = m.agent_index(i)
    return StateSet(m.locals[:, i] == m.locals[s, i])


def equiv_union(m, s, coalition):
    """States some member of ``coalition`` cannot distinguish from ``s``."""
    coalition = m.coalition(coalition)
    if not coalition:
        raise EmptyCoalition("equiv_union needs a nonempty coalition")
    bits = np.zeros(m.n_states, dtype=np.bool_)
    for i in coalition:
        bits |= m.locals[:, i] == m.locals[s, i]
    return StateSet(bits)


def union_closed_interior(m, coalition, bits):
    """``{s | equiv_union(s, coalition) is inside bits}`` as a bool array."""
    out = np.ones(m.n_states, dtype=np.bool_)
    for i in coalition:
        loc = m.locals[:, i]
        bad_locals = np.unique(loc[~bits])
        out &= ~np.isin(loc, bad_locals)
    return out


def post_image(m, bits):
    return _kernels.active.post(m.src, m.dst, bits, m.n_states)


def reachable(m):
    """Least fixpoint of the forward image from the initial states."""
    reach = m.init.bits.copy()
    while True:
        nxt = reach | post_image(m, reach)
        if np.array_equal(nxt, reach):
            return StateSet(reach)
        reach = nxt


def all_pairs(m, coalition):
    return PairSet.all_enabled(m.space(m.coalition(coalition)))
