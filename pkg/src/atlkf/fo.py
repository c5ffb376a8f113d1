"""Fixpoint evaluation under full observability.

Every fixpoint is written once against :class:`Game`, a coalition together
with the coalition actions it may use in each state.  The unrestricted game
allows every enabled action; restricting it to a strategy gives the
``|strat`` variants used by the partial-observability algorithms.

Fairness: an empty constraint list is evaluated as the single constraint
``S`` (every infinite path visits ``S`` infinitely often), which turns the
``[G]G`` equation into the plain greatest fixpoint ``nu Z. phi & Pre(Z)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import EmptyCoalition, UnknownAtom, UnknownAgent
from .formula import (
    And,
    Atom,
    CommonKnows,
    DistKnows,
    EveryKnows,
    Exists,
    ExistsPath,
    FalseConst,
    ForAllPath,
    Forced,
    Globally,
    Iff,
    Implies,
    Know,
    Next,
    Not,
    Or,
    TrueConst,
    Until,
    WeakUntil,
    agents_of,
    atoms_of,
    path_operands,
)
from .model import reachable
from .sets import PairSet, StateSet

KINDS = {Next: "X", Globally: "G", Until: "U", WeakUntil: "W"}


def path_kind(path):
    """Normalise a PathForm instance/class or a letter to ``X|G|U|W``."""
    if isinstance(path, str):
        if path not in ("X", "G", "U", "W"):
            raise ValueError(f"unknown path operator {path!r}")
        return path
    cls = path if isinstance(path, type) else type(path)
    return KINDS[cls]


@dataclass
class Diagnostics:
    fixpoint_iterations: int = 0
    strategies_enumerated: int = 0
    branches_pruned: int = 0

    def merge(self, other):
        self.fixpoint_iterations += other.fixpoint_iterations
        self.strategies_enumerated += other.strategies_enumerated
        self.branches_pruned += other.branches_pruned
        return self


def lfp(step, start, diag):
    z = start
    while True:
        diag.fixpoint_iterations += 1
        nz = step(z)
        if np.array_equal(nz, z):
            return z
        z = nz


gfp = lfp  # same iteration; callers pass the bottom or top element


class Game:
    """A coalition and the coalition actions it may choose in each state."""

    def __init__(self, model, coalition, allowed=None, diag=None):
        self.model = model
        self.coalition = tuple(coalition)
        self.space = model.space(self.coalition)
        if allowed is None:
            self.allowed = self.space.enabled
        else:
            self.allowed = np.ascontiguousarray(allowed & self.space.enabled)
        self.diag = diag if diag is not None else Diagnostics()
        self._k = _kernels.active

    @property
    def n(self):
        return self.model.n_states

    @cached_property
    def covered(self):
        return self.allowed.any(axis=1)

    @cached_property
    def constraints(self):
        if not self.model.fairness:
            return [np.ones(self.n, dtype=np.bool_)]
        return [f.bits for f in self.model.fairness]

    def pre_forced(self, z):
        m = self.model
        return self._k.pre_forced(m.src, self.space.tcol, m.dst, self.allowed, z)

    def pre_exists(self, z):
        m = self.model
        return self._k.pre_exists(m.src, self.space.tcol, m.dst, self.allowed, z)

    def pre_exists_ac(self, z):
        m = self.model
        return self._k.pre_exists_ac(m.src, self.space.tcol, m.dst, self.allowed, z)

    @cached_property
    def fair(self):
        """Fair_[G]: states where the coalition cannot avoid a fair path."""
        return forced_G(self, np.ones(self.n, dtype=np.bool_))

    @cached_property
    def unfair(self):
        return ~self.fair

    def lift(self, states):
        return self.allowed & states[:, None]


# -- [G] forms ---------------------------------------------------------------


def forced_X(g, phi):
    return g.pre_forced(phi & g.fair)


def forced_U(g, phi1, phi2):
    target = phi2 & g.fair
    return lfp(lambda z: target | (phi1 & g.pre_forced(z)), np.zeros(g.n, np.bool_), g.diag)


def forced_G(g, phi):
    constraints = g.constraints

    def step(z):
        out = phi.copy()
        for f in constraints:
            zf = z & f
            reach = lfp(lambda y: zf | (phi & g.pre_forced(y)), np.zeros(g.n, np.bool_), g.diag)
            out &= g.pre_forced(reach)
        return out

    return gfp(step, np.ones(g.n, np.bool_), g.diag)


def forced_W(g, phi1, phi2):
    target = phi2 & g.fair
    constraints = g.constraints

    def step(z):
        inner = phi1.copy()
        for f in constraints:
            base = target | (z & f)
            reach = lfp(lambda y: base | (phi1 & g.pre_forced(y)), np.zeros(g.n, np.bool_), g.diag)
            inner &= g.pre_forced(reach)
        return target | inner

    return gfp(step, np.ones(g.n, np.bool_), g.diag)


def forced(g, kind, ops):
    if kind == "X":
        return forced_X(g, *ops)
    if kind == "G":
        return forced_G(g, *ops)
    if kind == "U":
        return forced_U(g, *ops)
    if kind == "W":
        return forced_W(g, *ops)
    raise ValueError(kind)


# -- <G> forms -----------------------------------------------------------------


def negated_operands(kind, ops):
    """Operands of ``negate_path`` applied to a path of the given kind."""
    if kind == "X":
        (phi,) = ops
        return "X", (~phi,)
    if kind == "G":
        (phi,) = ops
        return "U", (np.ones_like(phi), ~phi)
    a, b = ~ops[0], ~ops[1]
    return ("W" if kind == "U" else "U"), (b, a & b)


def exists_X(g, phi):
    return g.pre_exists(phi | g.unfair)


def exists_G(g, phi):
    keep = phi | g.unfair
    return gfp(lambda z: keep & g.pre_exists(z), np.ones(g.n, np.bool_), g.diag)


def exists(g, kind, ops):
    """States where the coalition can enforce the path on all fair outcomes.

    X and G use the direct dual equations; U and W are complements of the
    ``[G]`` forms on ``negate_path`` operands.
    """
    if kind == "X":
        out = exists_X(g, *ops)
    elif kind == "G":
        out = exists_G(g, *ops)
    else:
        nkind, nops = negated_operands(kind, ops)
        out = ~forced(g, nkind, nops)
    return out & g.covered


def exists_via_complement(g, kind, ops):
    nkind, nops = negated_operands(kind, ops)
    return ~forced(g, nkind, nops) & g.covered


# -- action-coupled <G> forms ---------------------------------------------------


def exists_ac(g, kind, ops):
    """Pairs (s, a) from which playing ``a`` first can win on all fair outcomes.

    Same equations as :func:`exists` with every state operand lifted to its
    allowed pairs and ``Pre_<G>`` replaced by the pair-valued pre-image.
    """
    lift, pre = g.lift, g.pre_exists_ac
    unfair = g.unfair
    bottom = np.zeros_like(g.allowed)

    if kind == "X":
        (phi,) = ops
        return pre(phi | unfair)
    if kind == "G":
        (phi,) = ops
        keep = lift(phi | unfair)
        return gfp(lambda z: keep & pre(z.any(axis=1)), g.allowed, g.diag)

    phi1, phi2 = ops
    keep = lift(phi1 | phi2 | unfair)
    done = lift(phi2)
    if kind == "W":
        return gfp(lambda z: keep & (done | pre(z.any(axis=1))), g.allowed, g.diag)

    # <G>[phi1 U phi2] is the dual of [G][!phi2 W (!phi1 & !phi2)]
    constraints = [lift(~f) for f in g.constraints]

    def outer(z):
        acc = bottom.copy()
        for escape in constraints:
            base = keep & (z | escape)
            inner = gfp(lambda y: base & (done | pre(y.any(axis=1))), g.allowed, g.diag)
            acc |= pre(inner.any(axis=1))
        return keep & (done | acc)

    return lfp(outer, bottom, g.diag)


# -- public operation wrappers --------------------------------------------------


def _coalition(m, coalition):
    return m.coalition(coalition)


def _bits(x):
    return x.bits if isinstance(x, StateSet) else np.asarray(x, dtype=np.bool_)


def _game(m, coalition, strat=None, diag=None):
    allowed = None if strat is None else strat.bits
    return Game(m, _coalition(m, coalition), allowed, diag)


def pre_forced(m, coalition, z):
    """``{s | every enabled coalition action can reach z}``."""
    return StateSet(_game(m, coalition).pre_forced(_bits(z)))


def pre_exists(m, coalition, z):
    """``{s | some enabled coalition action forces the successor into z}``."""
    return StateSet(_game(m, coalition).pre_exists(_bits(z)))


def pre_exists_restricted(m, coalition, strat, z):
    return StateSet(_game(m, coalition, strat).pre_exists(_bits(z)))


def pre_forced_restricted(m, coalition, strat, z):
    return StateSet(_game(m, coalition, strat).pre_forced(_bits(z)))


def fair_forced(m, coalition):
    return StateSet(_game(m, coalition).fair)


def eval_forced(m, coalition, path, *operands, strat=None, diag=None):
    g = _game(m, coalition, strat, diag)
    return StateSet(forced(g, path_kind(path), [_bits(o) for o in operands]))


def eval_exists(m, coalition, path, *operands, strat=None, diag=None):
    g = _game(m, coalition, strat, diag)
    return StateSet(exists(g, path_kind(path), [_bits(o) for o in operands]))


def eval_exists_restricted(m, coalition, strat, path, *operands, diag=None):
    return eval_exists(m, coalition, path, *operands, strat=strat, diag=diag)


def states_actions(m, coalition, strats, z):
    g = _game(m, coalition, strats)
    return PairSet(g.space, g.lift(_bits(z)))


def pre_exists_ac(m, coalition, strats, zp):
    g = _game(m, coalition, strats)
    return PairSet(g.space, g.pre_exists_ac(np.asarray(zp.bits).any(axis=1)))


def eval_exists_ac(m, coalition, strats, path, *operands, diag=None):
    g = _game(m, coalition, strats, diag)
    return PairSet(g.space, exists_ac(g, path_kind(path), [_bits(o) for o in operands]))


CTL_OPS = {
    "EX": ("E", "X"), "EG": ("E", "G"), "EU": ("E", "U"), "EW": ("E", "W"), "EF": ("E", "F"),
    "AX": ("A", "X"), "AG": ("A", "G"), "AU": ("A", "U"), "AW": ("A", "W"), "AF": ("A", "F"),
}


def eval_ctl(m, op, *operands, diag=None):
    """Fair CTL: E-forms are ``[{}]`` forms, A-forms are ``<{}>`` forms."""
    q, kind = CTL_OPS[op]
    ops = [_bits(o) for o in operands]
    if kind == "F":
        kind, ops = "U", [np.ones(m.n_states, np.bool_), ops[0]]
    g = Game(m, (), None, diag)
    if q == "E":
        return StateSet(forced(g, kind, ops))
    return StateSet(exists(g, kind, ops))


def knowledge_domain(m, diag=None):
    """Reachable fair states, the states knowledge quantifies over."""
    return reachable(m).bits & Game(m, (), None, diag).fair


def eval_know(m, kind, agents, phi, domain=None):
    """K, GK (everybody knows), DK (distributed) and CK (common) knowledge."""
    coalition = m.coalition([agents] if kind == "K" and isinstance(agents, (str, int)) else agents)
    if not coalition:
        raise EmptyCoalition(f"{kind} needs at least one agent")
    dom = knowledge_domain(m) if domain is None else _bits(domain)
    phi = _bits(phi)
    if kind == "K":
        return StateSet(_know_all(m, coalition, dom, phi))
    if kind == "GK":
        return StateSet(_know_all(m, coalition, dom, phi))
    if kind == "DK":
        return StateSet(_know_dist(m, coalition, dom, phi))
    if kind == "CK":
        z = np.ones(m.n_states, np.bool_)
        while True:
            nz = _know_all(m, coalition, dom, phi & z)
            if np.array_equal(nz, z):
                return StateSet(z)
            z = nz
    raise ValueError(f"unknown knowledge operator {kind!r}")


def _know_all(m, coalition, dom, phi):
    out = np.ones(m.n_states, np.bool_)
    bad = dom & ~phi
    for i in coalition:
        loc = m.locals[:, i]
        out &= ~np.isin(loc, np.unique(loc[bad]))
    return out


def _know_dist(m, coalition, dom, phi):
    keys = m.locals[:, list(coalition)]
    bad = dom & ~phi
    bad_keys = {tuple(k) for k in keys[bad].tolist()}
    return np.array([tuple(k) not in bad_keys for k in keys.tolist()], dtype=np.bool_)


# -- recursive evaluation ------------------------------------------------------


class EvalContext:
    """Bottom-up evaluator with a subformula cache.

    ``strategic`` evaluates ``Exists``/``Forced`` nodes given the operand
    arrays; the default is the full-observability engine.  The partial
    observability engine injects its own handler.
    """

    def __init__(self, model, strategic=None, diag=None):
        self.model = model
        self.diag = diag if diag is not None else Diagnostics()
        self.cache = {}
        self.strategic = strategic or self._fo_strategic
        self._games = {}
        self._domain = None

    def bind(self, f):
        names = {a.name for a in self.model.agents}
        unknown = sorted(agents_of(f) - names)
        if unknown:
            raise UnknownAgent(f"unknown agent(s): {', '.join(unknown)}")
        missing = sorted(atoms_of(f) - set(self.model.labels))
        if missing:
            raise UnknownAtom(f"unknown atom(s): {', '.join(missing)}")
        return f

    def sat(self, f):
        self.bind(f)
        return StateSet(self.eval(f))

    def game(self, coalition):
        g = self._games.get(coalition)
        if g is None:
            g = self._games[coalition] = Game(self.model, coalition, None, self.diag)
        return g

    def _fo_strategic(self, node, kind, ops):
        g = self.game(self.model.coalition(node.agents))
        if isinstance(node, Exists):
            return exists(g, kind, ops)
        return forced(g, kind, ops)

    def domain(self):
        if self._domain is None:
            self._domain = reachable(self.model).bits & self.game(()).fair
        return self._domain

    def eval(self, f):
        hit = self.cache.get(f)
        if hit is None:
            hit = self.cache[f] = self._eval(f)
        return hit

    def _eval(self, f):
        m = self.model
        n = m.n_states
        if isinstance(f, TrueConst):
            return np.ones(n, np.bool_)
        if isinstance(f, FalseConst):
            return np.zeros(n, np.bool_)
        if isinstance(f, Atom):
            return m.labels[f.name].bits.copy()
        if isinstance(f, Not):
            return ~self.eval(f.arg)
        if isinstance(f, And):
            return self.eval(f.left) & self.eval(f.right)
        if isinstance(f, Or):
            return self.eval(f.left) | self.eval(f.right)
        if isinstance(f, Implies):
            return ~self.eval(f.left) | self.eval(f.right)
        if isinstance(f, Iff):
            return self.eval(f.left) == self.eval(f.right)
        if isinstance(f, (ExistsPath, ForAllPath)):
            kind = path_kind(f.path)
            ops = [self.eval(o) for o in path_operands(f.path)]
            g = self.game(())
            if isinstance(f, ExistsPath):
                return forced(g, kind, ops)
            return exists(g, kind, ops)
        if isinstance(f, (Exists, Forced)):
            kind = path_kind(f.path)
            ops = [self.eval(o) for o in path_operands(f.path)]
            return self.strategic(f, kind, ops)
        if isinstance(f, Know):
            coalition = m.coalition([f.agent])
            return _know_all(m, coalition, self.domain(), self.eval(f.arg))
        if isinstance(f, (EveryKnows, DistKnows, CommonKnows)):
            coalition = m.coalition(f.agents)
            if not coalition:
                raise EmptyCoalition("knowledge operators need at least one agent")
            phi = self.eval(f.arg)
            if isinstance(f, EveryKnows):
                return _know_all(m, coalition, self.domain(), phi)
            if isinstance(f, DistKnows):
                return _know_dist(m, coalition, self.domain(), phi)
            return eval_know(m, "CK", coalition, phi, self.domain()).bits.copy()
        raise TypeError(f"cannot evaluate {f!r}")


def eval_fo(m, f, diag=None):
    """States satisfying ``f`` under full-observability semantics."""
    return EvalContext(m, diag=diag).sat(f)
