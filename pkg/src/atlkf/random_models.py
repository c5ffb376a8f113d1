"""Seeded random models for property and differential tests."""

from __future__ import annotations

from itertools import product

import numpy as np

from .model import AgentDecl, build_model


def random_model(
    seed,
    max_agents=2,
    max_locals=4,
    max_actions=3,
    max_successors=2,
    max_fairness=2,
):
    """Build a small serial, enabled-consistent model from ``seed``.

    Every combination of protocol-enabled local actions has between one and
    ``max_successors`` successors, so uniform strategies are always
    executable.  Atoms ``p`` and ``q`` label random state subsets and up to
    ``max_fairness`` nonempty fairness constraints are drawn.
    """
    rng = np.random.default_rng(seed)
    n_agents = int(rng.integers(1, max_agents + 1))
    agents = []
    for k in range(n_agents):
        n_loc = int(rng.integers(1, max_locals + 1))
        n_act = int(rng.integers(1, max_actions + 1))
        states = [f"l{j}" for j in range(n_loc)]
        actions = [f"a{j}" for j in range(n_act)]
        protocol = {}
        for local in states:
            mask = rng.random(n_act) < 0.6
            if not mask.any():
                mask[rng.integers(n_act)] = True
            protocol[local] = [a for a, keep in zip(actions, mask) if keep]
        agents.append(AgentDecl(f"ag{k}", states, actions, protocol))

    globals_ = list(product(*[a.states for a in agents]))
    n = len(globals_)
    transitions = []
    for src in globals_:
        for act in product(*[a.protocol[loc] for a, loc in zip(agents, src)]):
            k = int(rng.integers(1, max_successors + 1))
            for t in rng.choice(n, size=min(k, n), replace=False):
                transitions.append((src, act, globals_[int(t)]))

    def subset(p):
        return [g for g in globals_ if rng.random() < p]

    init = subset(0.4) or [globals_[int(rng.integers(n))]]
    labels = {"p": subset(0.5), "q": subset(0.4)}
    fairness = []
    for _ in range(int(rng.integers(0, max_fairness + 1))):
        fairness.append(subset(0.4) or [globals_[int(rng.integers(n))]])
    return build_model(agents, transitions, init, labels, fairness)


def coalitions(m):
    """Nonempty coalitions of ``m`` (all of them, as name tuples)."""
    names = [a.name for a in m.agents]
    out = [(x,) for x in names]
    if len(names) > 1:
        out.append(tuple(names))
    return out
