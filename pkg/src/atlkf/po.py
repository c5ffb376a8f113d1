"""Evaluation under partial observability (uniform strategies).

A coalition strategy is uniform when every member ``i`` picks the same
action component in all states it cannot tell apart (same local state of
``i``).  Strategy relations are boolean ``(n_states, n_cols)`` matrices over
the coalition's action columns, as in :mod:`atlkf.fo`.

Two pairs conflict when some member ``i`` cannot distinguish their states but
their actions differ in ``i``'s component.  :func:`split` enumerates the
maximal conflict-free subsets of a relation, i.e. the uniform strategies it
contains.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCoalition
from .fo import (
    Diagnostics,
    EvalContext,
    Game,
    exists,
    exists_ac,
    forced,
    negated_operands,
    path_kind,
)
from .formula import Exists, path_operands, to_text
from .model import union_closed_interior
from .sets import PairSet, StateSet

ALGORITHMS = ("basic", "improved", "auto")


@dataclass(frozen=True)
class PoOptions:
    algorithm: str = "auto"
    parallel: bool = False
    threads: int | None = None
    witness: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")

    @property
    def resolved(self):
        return "improved" if self.algorithm == "auto" else self.algorithm


# -- conflicts and Split ------------------------------------------------------


def _component_masks(space, k):
    """Boolean ``(n_cols, n_actions_i)`` one-hot of member ``k``'s component."""
    comp = space.parts[:, k]
    n_act = len(space.model.agents[space.agents[k]].actions)
    onehot = np.zeros((space.n_cols, n_act), dtype=np.bool_)
    onehot[np.arange(space.n_cols), comp] = True
    return onehot


def _class_components(space, bits, k):
    """``(n_locals_i, n_actions_i)``: components used by pairs in each i-class."""
    m = space.model
    i = space.agents[k]
    per_state = (bits.astype(np.int64) @ _component_masks(space, k).astype(np.int64)) > 0
    out = np.zeros((len(m.agents[i].states), per_state.shape[1]), dtype=np.bool_)
    np.logical_or.at(out, m.locals[:, i], per_state)
    return out


def find_conflict(space, bits):
    """Deterministic conflict pick, or ``None`` when ``bits`` is conflict-free.

    Returns ``(s, c, k)``: the lowest state with a conflicting pair, its
    lowest action column and the lowest coalition position ``k`` through
    which that pair conflicts.
    """
    m = space.model
    occupied = bits.any(axis=1)
    conflicted = np.zeros((m.n_states, len(space.agents)), dtype=np.bool_)
    for k, i in enumerate(space.agents):
        multi = _class_components(space, bits, k).sum(axis=1) > 1
        conflicted[:, k] = multi[m.locals[:, i]] & occupied
    rows = np.flatnonzero(conflicted.any(axis=1))
    if rows.size == 0:
        return None
    s = int(rows[0])
    c = int(np.flatnonzero(bits[s])[0])
    k = int(np.flatnonzero(conflicted[s])[0])
    return s, c, k


def _restrict(space, bits, s, k, alpha):
    """Keep only component ``alpha`` of member ``k`` inside ``s``'s class."""
    m = space.model
    i = space.agents[k]
    in_class = m.locals[:, i] == m.locals[s, i]
    out = bits.copy()
    out[np.ix_(in_class, space.parts[:, k] != alpha)] = False
    return out


def _leaf_dropped(space, cur, win):
    """Alternatives of ambiguous classes in ``cur`` that a leaf never tries."""
    dropped = 0
    for k in range(len(space.agents)):
        before = _class_components(space, cur, k).sum(axis=1)
        after = _class_components(space, win, k).sum(axis=1)
        ambiguous = before > 1
        dropped += int((before - np.maximum(after, 1))[ambiguous].sum())
    return dropped


def _class_alternatives(space, bits, s, k):
    i = space.agents[k]
    comps = _class_components(space, bits, k)[space.model.locals[s, i]]
    return np.flatnonzero(comps).tolist()


def iter_split(space, bits):
    """Yield the conflict-free maximal subsets of ``bits`` in split order."""
    if not space.agents:
        raise EmptyCoalition("split needs a nonempty coalition")
    stack = [bits]
    while stack:
        cur = stack.pop()
        pick = find_conflict(space, cur)
        if pick is None:
            yield cur
            continue
        s, _, k = pick
        branches = [_restrict(space, cur, s, k, a) for a in _class_alternatives(space, cur, s, k)]
        stack.extend(reversed(branches))


def split(m, coalition, strats=None):
    """All uniform strategies contained in ``strats`` (default: all enabled pairs)."""
    coalition = m.coalition(coalition)
    if not coalition:
        raise EmptyCoalition("split needs a nonempty coalition")
    space = m.space(coalition)
    bits = space.enabled if strats is None else strats.bits & space.enabled
    return [PairSet(space, b) for b in iter_split(space, np.array(bits))]


def count_uniform(m, coalition):
    """Number of uniform strategies: product of per-class enabled action counts."""
    total = 1
    for i in m.coalition(coalition):
        enabled = m.enabled_agents[i]
        for local in range(len(m.agents[i].states)):
            rows = m.locals[:, i] == local
            total *= int(enabled[rows].any(axis=0).sum())
    return total


def strategy_bound(m, coalition):
    """Upper bound ``prod_i |Act_i| ** |S_i|`` on the uniform strategy count."""
    return math.prod(
        len(m.agents[i].actions) ** len(m.agents[i].states) for i in m.coalition(coalition)
    )


# -- the two algorithms for <G> ----------------------------------------------------


def _winning(m, space, coalition, bits, kind, ops, diag):
    """States where the uniform strategy ``bits`` wins for every indistinguishable state."""
    g = Game(m, coalition, bits, diag)
    won = exists(g, kind, ops)
    return union_closed_interior(m, coalition, won)


def eval_po_basic(m, coalition, path, *operands, options=None, diag=None, on_strategy=None):
    """Union over uniform strategies of the states they win uniformly.

    ``on_strategy(bits, good)`` is called for every strategy in split order,
    which is how witnesses are collected.
    """
    coalition = m.coalition(coalition)
    if not coalition:
        raise EmptyCoalition("partial-observability strategies need a nonempty coalition")
    options = options or PoOptions()
    diag = diag if diag is not None else Diagnostics()
    kind = path_kind(path)
    ops = [o.bits if isinstance(o, StateSet) else np.asarray(o, np.bool_) for o in operands]
    space = m.space(coalition)
    result = np.zeros(m.n_states, dtype=np.bool_)

    def run(bits):
        local = Diagnostics()
        return bits, _winning(m, space, coalition, bits, kind, ops, local), local

    strategies = iter_split(space, np.array(space.enabled))
    if options.parallel:
        with ThreadPoolExecutor(max_workers=options.threads) as pool:
            outcomes = pool.map(run, strategies)
            result = _merge(outcomes, result, diag, on_strategy)
    else:
        result = _merge(map(run, strategies), result, diag, on_strategy)
    return StateSet(result)


def _merge(outcomes, result, diag, on_strategy):
    for bits, good, local in outcomes:
        diag.strategies_enumerated += 1
        diag.merge(local)
        result |= good
        if on_strategy is not None:
            on_strategy(bits, good)
    return result


def eval_po_improved(m, coalition, path, *operands, strats=None, diag=None):
    """Filter-and-split evaluation of ``<G>path``.

    Each step computes the pairs from which some strategy inside the current
    relation wins.  If they conflict, the relation is split on one
    conflicting class, keeping only the alternatives that still have a
    winning pair there, and each branch is solved recursively.
    """
    coalition = m.coalition(coalition)
    if not coalition:
        raise EmptyCoalition("partial-observability strategies need a nonempty coalition")
    diag = diag if diag is not None else Diagnostics()
    kind = path_kind(path)
    ops = [o.bits if isinstance(o, StateSet) else np.asarray(o, np.bool_) for o in operands]
    space = m.space(coalition)
    top = space.enabled if strats is None else strats.bits & space.enabled
    result = np.zeros(m.n_states, dtype=np.bool_)

    stack = [np.array(top)]
    while stack:
        cur = stack.pop()
        if not cur.any():
            continue
        win = exists_ac(Game(m, coalition, cur, diag), kind, ops)
        pick = find_conflict(space, win)
        if pick is None:
            diag.strategies_enumerated += 1
            diag.branches_pruned += _leaf_dropped(space, cur, win)
            result |= union_closed_interior(m, coalition, win.any(axis=1))
            continue
        s, _, k = pick
        kept = _class_alternatives(space, win, s, k)
        diag.branches_pruned += len(_class_alternatives(space, cur, s, k)) - len(kept)
        stack.extend(reversed([_restrict(space, cur, s, k, a) for a in kept]))
    return StateSet(result)


# -- witnesses -----------------------------------------------------------------


def describe_strategy(m, coalition, bits):
    """Readable ``class(local) -> action`` lines, one per member and class."""
    space = m.space(tuple(coalition))
    lines = []
    for k, i in enumerate(space.agents):
        agent = m.agents[i]
        comps = _class_components(space, bits, k)
        for local, row in enumerate(comps):
            acts = np.flatnonzero(row)
            if acts.size != 1:
                continue
            prefix = f"{agent.name}: " if len(space.agents) > 1 else ""
            lines.append(f"{prefix}class({agent.states[local]}) -> {agent.actions[acts[0]]}")
    return lines


def find_witnesses(m, coalition, path, *operands, diag=None):
    """First winning uniform strategy (split order) for each initial state."""
    coalition = m.coalition(coalition)
    pending = set(m.init.indices())
    found = {}

    def record(bits, good):
        for s in sorted(pending):
            if good[s]:
                found[s] = describe_strategy(m, coalition, bits)
                pending.discard(s)

    eval_po_basic(m, coalition, path, *operands, diag=diag or Diagnostics(), on_strategy=record)
    return {m.state_name(s): found.get(s) for s in m.init.indices()}


# -- recursive evaluation --------------------------------------------------------


@dataclass
class CheckResult:
    formula: str
    sat: StateSet
    holds: bool
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    witness: dict | None = None

    def sat_names(self, m, only=None):
        states = self.sat if only is None else self.sat & only
        return [m.state_name(s) for s in states]


class PoEvaluator:
    """Strategic-operator handler injected into :class:`~atlkf.fo.EvalContext`."""

    def __init__(self, model, options=None, diag=None):
        self.model = model
        self.options = options or PoOptions()
        self.diag = diag if diag is not None else Diagnostics()
        self.ctx = EvalContext(model, strategic=self.strategic, diag=self.diag)

    def exists(self, coalition, kind, ops):
        m = self.model
        if not coalition:
            return exists(Game(m, (), None, self.diag), kind, ops)
        if self.options.resolved == "basic":
            out = eval_po_basic(m, coalition, kind, *ops, options=self.options, diag=self.diag)
        else:
            out = eval_po_improved(m, coalition, kind, *ops, diag=self.diag)
        return out.bits.copy()

    def strategic(self, node, kind, ops):
        coalition = self.model.coalition(node.agents)
        if isinstance(node, Exists):
            return self.exists(coalition, kind, ops)
        if not coalition:
            return forced(self.ctx.game(()), kind, ops)
        nkind, nops = negated_operands(kind, ops)
        return ~self.exists(coalition, nkind, nops)


def eval_po(m, f, options=None):
    """Evaluate ``f`` under partial observability and report the result."""
    options = options or PoOptions()
    ev = PoEvaluator(m, options)
    sat = ev.ctx.sat(f)
    result = CheckResult(to_text(f), sat, m.init <= sat, ev.diag)
    if options.witness and isinstance(f, Exists) and f.agents:
        kind = path_kind(f.path)
        ops = [ev.ctx.eval(o) for o in path_operands(f.path)]
        result.witness = find_witnesses(m, f.agents, kind, *ops)
    return result


def eval_fo_result(m, f):
    """Full-observability counterpart of :func:`eval_po`."""
    ctx = EvalContext(m)
    sat = ctx.sat(f)
    return CheckResult(to_text(f), sat, m.init <= sat, ctx.diag)
