"""Brute-force reference evaluation for differential testing.

Strategies are enumerated explicitly, the model is pruned to each
strategy's outcomes and path properties are decided by graph search over
strongly connected components.  None of this shares code with the fixpoint
engines beyond the model itself, so agreement between the two is evidence
rather than tautology.

A path is fair when it visits every fairness constraint infinitely often;
with no constraints every infinite path is fair.  A fair path from ``s``
exists iff ``s`` reaches a nontrivial SCC that meets every constraint.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import CapExceeded
from .fo import EvalContext, path_kind
from .formula import Exists
from .model import union_closed_interior

DEFAULT_CAP = 2**20


def strategy_cap():
    raw = os.environ.get("ATLK_STRATEGY_CAP", "").strip()
    return int(raw) if raw else DEFAULT_CAP


# -- enumeration -------------------------------------------------------------


def _class_choices(m, coalition):
    """Per (member, local state), the enabled actions of that member."""
    slots = []
    for i in coalition:
        enabled = m.enabled_agents[i]
        for local in range(len(m.agents[i].states)):
            rows = m.locals[:, i] == local
            acts = np.flatnonzero(enabled[rows].any(axis=0)).tolist()
            slots.append((i, local, acts))
    return slots


def count_global(m, coalition):
    space = m.space(m.coalition(coalition))
    return int(np.prod(space.enabled.sum(axis=1), dtype=object))


def enumerate_uniform(m, coalition, cap=None):
    """All per-member uniform strategies as ``state -> column`` int arrays.

    Each member picks one enabled action per local state; the coalition
    action at a state is the tuple of its members' picks.
    """
    coalition = m.coalition(coalition)
    space = m.space(coalition)
    cap = strategy_cap() if cap is None else cap
    slots = _class_choices(m, coalition)
    total = 1
    for _, _, acts in slots:
        total *= len(acts)
    if total > cap:
        raise CapExceeded(f"{total} uniform strategies exceed the cap of {cap}")
    out = []
    for picks in product(*[acts for _, _, acts in slots]):
        parts = np.zeros((m.n_states, len(coalition)), dtype=np.int64)
        for (i, local, _), a in zip(slots, picks):
            parts[m.locals[:, i] == local, coalition.index(i)] = a
        out.append(np.array([space.column(tuple(row)) for row in parts.tolist()], dtype=np.int64))
    return out


def enumerate_global(m, coalition, cap=None):
    """All memoryless strategies choosing any enabled coalition action per state."""
    space = m.space(m.coalition(coalition))
    cap = strategy_cap() if cap is None else cap
    total = count_global(m, coalition)
    if total > cap:
        raise CapExceeded(f"{total} global strategies exceed the cap of {cap}")
    options = [np.flatnonzero(row).tolist() for row in space.enabled]
    return [np.array(cols, dtype=np.int64) for cols in product(*options)]


def strategy_mapping(m, coalition, cols):
    """``{state name: coalition action names}`` for a column array."""
    space = m.space(m.coalition(coalition))
    return {m.state_name(s): space.names(int(c)) for s, c in enumerate(cols)}


# -- pruned models and fair-path search ------------------------------------------


@dataclass
class PrunedModel:
    model: object
    coalition: tuple
    strategy: np.ndarray
    src: np.ndarray
    dst: np.ndarray

    def successors(self, s):
        return sorted(set(self.dst[self.src == s].tolist()))


def prune(m, coalition, cols=None):
    """Keep the transitions whose joint action completes the strategy's choice."""
    coalition = m.coalition(coalition)
    space = m.space(coalition)
    if cols is None:
        if coalition:
            raise ValueError("a nonempty coalition needs a strategy")
        cols = np.zeros(m.n_states, dtype=np.int64)
    keep = space.tcol == cols[m.src]
    return PrunedModel(m, coalition, cols, m.src[keep], m.dst[keep])


class _Graph:
    def __init__(self, n, src, dst, constraints):
        self.n = n
        self.src, self.dst = src, dst
        self.constraints = constraints
        self.everything = np.ones(n, dtype=np.bool_)
        self.fs = self.fair_states(self.everything)

    def fair_states(self, nodes):
        """Nodes in ``nodes`` starting a fair path that stays inside ``nodes``."""
        keep = nodes[self.src] & nodes[self.dst]
        s, d = self.src[keep], self.dst[keep]
        adj = csr_matrix((np.ones(s.size, dtype=np.int8), (s, d)), shape=(self.n, self.n))
        n_comp, label = connected_components(adj, directed=True, connection="strong")
        size = np.bincount(label, minlength=n_comp)
        looped = np.zeros(n_comp, dtype=np.bool_)
        looped[label[s[s == d]]] = True
        good = (size > 1) | looped
        for f in self.constraints:
            hits = np.zeros(n_comp, dtype=np.bool_)
            hits[label[f & nodes]] = True
            good &= hits
        seeds = nodes & good[label]
        return self.backward(seeds, nodes)

    def backward(self, targets, within):
        """Nodes of ``within`` with a path inside ``within`` to ``targets``.

        Breadth-first over predecessor layers.
        """
        seen = targets & within
        frontier = seen
        while frontier.any():
            layer = np.zeros(self.n, dtype=np.bool_)
            layer[self.src[frontier[self.dst]]] = True
            frontier = layer & within & ~seen
            seen = seen | frontier
        return seen

    def pre_some(self, targets):
        out = np.zeros(self.n, dtype=np.bool_)
        out[self.src[targets[self.dst]]] = True
        return out


def _graph(pm):
    m = pm.model
    constraints = [f.bits for f in m.fairness] or [np.ones(m.n_states, dtype=np.bool_)]
    return _Graph(m.n_states, pm.src, pm.dst, constraints)


def violating(pm, kind, ops, graph=None):
    """States with a fair outcome path violating the path formula."""
    g = graph or _graph(pm)
    everything, fs = g.everything, g.fs
    if kind == "X":
        (phi,) = ops
        return g.pre_some(~phi & fs)
    if kind == "G":
        (phi,) = ops
        return g.backward(~phi & fs, everything)
    phi1, phi2 = ops
    stay = phi1 & ~phi2
    # reach a state satisfying neither operand through stay-states, then go on fairly
    bad = g.backward(~phi1 & ~phi2 & fs, stay | (~phi1 & ~phi2))
    if kind == "U":
        # or remain in stay-states forever on a fair path
        bad |= g.fair_states(stay)
    return bad


def satisfying(pm, kind, ops, graph=None):
    """States with some fair outcome path satisfying the path formula."""
    g = graph or _graph(pm)
    fs = g.fs
    if kind == "X":
        (phi,) = ops
        return g.pre_some(phi & fs)
    if kind == "G":
        (phi,) = ops
        return g.fair_states(phi)
    phi1, phi2 = ops
    until = g.backward(phi2 & fs, phi1 | phi2)
    if kind == "W":
        until |= g.fair_states(phi1)
    return until


def holds_all_fair_paths(pm, s, path, *operands):
    """True iff no fair path from ``s`` in ``pm`` violates the path formula."""
    ops = [np.asarray(getattr(o, "bits", o), dtype=np.bool_) for o in operands]
    return not bool(violating(pm, path_kind(path), ops)[s])


# -- strategic operators --------------------------------------------------------


def _ops(operands):
    return [np.asarray(getattr(o, "bits", o), dtype=np.bool_) for o in operands]


def _strategies(m, coalition, uniform, cap):
    if not coalition:
        return [np.zeros(m.n_states, dtype=np.int64)]
    if uniform:
        return enumerate_uniform(m, coalition, cap)
    return enumerate_global(m, coalition, cap)


def oracle_batch(m, coalition, queries, uniform=True, cap=None):
    """Answer several ``(path kind, operands, forced)`` queries at once.

    Strategies are enumerated and pruned once and shared by all queries.
    ``uniform`` selects uniform (po) or memoryless global (fo) strategies.
    """
    coalition = m.coalition(coalition)
    queries = [(path_kind(k), _ops(ops), forced) for k, ops, forced in queries]
    results = [np.zeros(m.n_states, dtype=np.bool_) for _ in queries]
    # the closure over indistinguishable states applies only to nonempty coalitions
    close = uniform and bool(coalition)
    for cols in _strategies(m, coalition, uniform, cap):
        pm = prune(m, coalition, cols)
        g = _graph(pm)
        for acc, (kind, ops, forced) in zip(results, queries):
            if forced:
                won = ~satisfying(pm, kind, ops, g)
            else:
                won = ~violating(pm, kind, ops, g)
            if close:
                won = union_closed_interior(m, coalition, won)
            acc |= won
    return [~acc if forced else acc for acc, (_, _, forced) in zip(results, queries)]


def _oracle(m, coalition, kind, ops, forced, uniform, cap):
    return oracle_batch(m, coalition, [(kind, ops, forced)], uniform, cap)[0]


def oracle_eval_po(m, coalition, path, *operands, forced=False, cap=None):
    """``<G>path`` (or ``[G]path`` with ``forced``) over uniform strategies."""
    return _oracle(m, coalition, path_kind(path), _ops(operands), forced, True, cap)


def oracle_eval_fo(m, coalition, path, *operands, forced=False, cap=None):
    """``<G>path`` (or ``[G]path``) over memoryless global strategies."""
    return _oracle(m, coalition, path_kind(path), _ops(operands), forced, False, cap)


def oracle_eval(m, f, semantics="po", cap=None):
    """Evaluate ``f`` with every strategic operator decided by the oracle."""
    uniform = semantics == "po"

    def strategic(node, kind, ops):
        coalition = m.coalition(node.agents)
        return _oracle(m, coalition, kind, ops, not isinstance(node, Exists), uniform, cap)

    return EvalContext(m, strategic=strategic).sat(f)
