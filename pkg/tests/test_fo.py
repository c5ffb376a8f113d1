import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atlkf import fixtures
from atlkf.errors import EmptyCoalition, UnknownAgent, UnknownAtom
from atlkf.fo import (
    Diagnostics,
    EvalContext,
    Game,
    eval_ctl,
    eval_exists,
    eval_exists_ac,
    eval_exists_restricted,
    eval_fo,
    eval_forced,
    eval_know,
    exists_via_complement,
    fair_forced,
    knowledge_domain,
    pre_exists,
    pre_exists_ac,
    pre_exists_restricted,
    pre_forced,
    pre_forced_restricted,
    states_actions,
)
from atlkf.formula import parse_formula
from atlkf.model import AgentDecl, build_model, equiv_class
from atlkf.random_models import coalitions
from atlkf.sets import PairSet, StateSet

from conftest import names, random_models

RANDOM = random_models(60, start=1000)


def S(m, *tuples):
    return m.states_of(tuples)


def test_pre_forced(m1, m2):
    assert names(m1, pre_forced(m1, ["g"], S(m1, ("y",)))) == {"(y)"}
    for m in (m1, m2):
        for coalition in ([], [m.agents[0].name]):
            assert not pre_forced(m, coalition, m.no_states)
            assert pre_forced(m, coalition, m.all_states) == m.all_states


def test_pre_exists(m1, m2):
    assert names(m1, pre_exists(m1, ["g"], S(m1, ("y",)))) == {"(x)", "(y)"}
    assert pre_exists(m1, ["g"], m1.all_states) == m1.all_states
    assert names(m2, pre_exists(m2, [], S(m2, ("u", "w")))) == {"(u,w)"}


def test_fair_forced(m1, m2, cg_fair):
    for m in (m1, m2):
        assert fair_forced(m, []) == m.all_states
        assert fair_forced(m, [m.agents[0].name]) == m.all_states
    assert fair_forced(cg_fair, ["player"]) == cg_fair.all_states


def test_fair_forced_with_empty_constraint():
    g = AgentDecl("g", ["x", "y"], ["a", "b"], {"x": ["a", "b"], "y": ["a", "b"]})
    rows = [(("x",), (a,), (t,)) for a, t in (("a", "x"), ("b", "y"))]
    rows += [(("y",), (a,), ("y",)) for a in ("a", "b")]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = build_model([g], rows, [("x",)], fairness=[[]])
    assert not fair_forced(m, ["g"])
    assert not fair_forced(m, [])


def test_eval_forced_examples(m1, m2):
    p = m1.labels["p"]
    assert names(m1, eval_forced(m1, ["g"], "G", p)) == {"(y)"}
    for m in (m1, m2):
        assert eval_forced(m, [], "U", m.all_states, m.all_states) == m.all_states


def test_eval_exists_examples(m1, m2):
    assert names(m1, eval_exists(m1, ["g"], "G", m1.labels["p"])) == {"(y)"}
    assert names(m2, eval_exists(m2, ["g"], "X", m2.labels["q"])) == {"(u,v)", "(u,w)"}
    for m in (m1, m2):
        assert eval_exists(m, [m.agents[0].name], "X", m.all_states) == m.all_states


def test_eval_ctl(m1):
    p = m1.labels["p"]
    assert names(m1, eval_ctl(m1, "EG", p)) == {"(y)"}
    assert names(m1, eval_ctl(m1, "EU", m1.all_states, p)) == {"(x)", "(y)"}
    assert names(m1, eval_ctl(m1, "EF", p)) == {"(x)", "(y)"}
    assert names(m1, eval_ctl(m1, "AF", p)) == {"(y)"}
    assert eval_ctl(m1, "AX", m1.all_states) == m1.all_states


def test_eval_know(m2, cg):
    ak = cg.state_index(("A", "K"))
    not_win = ~cg.labels["win"]
    assert ak in eval_know(cg, "K", "player", not_win)
    assert eval_know(cg, "K", "player", cg.all_states) == cg.all_states
    assert names(m2, eval_know(m2, "DK", ["g", "e"], m2.labels["q"])) == {"(u,w)"}
    for kind in ("GK", "DK", "CK"):
        with pytest.raises(EmptyCoalition):
            eval_know(m2, kind, [], m2.all_states)


def test_knowledge_operators_in_formulas(m2, cg):
    assert names(m2, eval_fo(m2, parse_formula("K<e> q"))) == {"(u,w)"}
    assert not eval_fo(m2, parse_formula("K<g> q"))
    assert eval_fo(m2, parse_formula("GK<g,e> (q | !q)")) == m2.all_states
    assert eval_fo(m2, parse_formula("CK<g,e> q")) <= eval_fo(m2, parse_formula("GK<g,e> q"))
    choice = {"(A,K)", "(A,Q)", "(K,A)", "(K,Q)", "(Q,A)", "(Q,K)"}
    assert choice <= names(cg, eval_fo(cg, parse_formula("K<player> !win")))


def test_eval_fo_examples(m1, m2, cg1):
    assert eval_fo(m1, parse_formula("!p | p")) == m1.all_states
    assert names(m2, eval_fo(m2, parse_formula("<<g>> X q"))) == {"(u,v)", "(u,w)"}
    assert cg1.init <= eval_fo(cg1, parse_formula("<<player>> F win"))


def test_binding_errors(m1):
    with pytest.raises(UnknownAgent):
        eval_fo(m1, parse_formula("<<h>> X p"))
    with pytest.raises(UnknownAtom):
        eval_fo(m1, parse_formula("EX nope"))


def _m2_strats(m2):
    sp = m2.space((0,))
    all_a = PairSet.of(sp, [(0, (0,)), (1, (0,))])
    all_b = PairSet.of(sp, [(0, (1,)), (1, (1,))])
    return sp, all_a, all_b


def test_restricted_pre(m2):
    sp, all_a, all_b = _m2_strats(m2)
    uw = S(m2, ("u", "w"))
    assert names(m2, pre_exists_restricted(m2, ["g"], all_b, uw)) == {"(u,v)", "(u,w)"}
    assert names(m2, pre_exists_restricted(m2, ["g"], all_a, uw)) == {"(u,w)"}
    for z in (uw, m2.all_states, m2.no_states):
        assert not pre_exists_restricted(m2, ["g"], PairSet.empty(sp), z)


def test_restricted_exists(m2):
    sp, all_a, all_b = _m2_strats(m2)
    q = m2.labels["q"]
    assert names(m2, eval_exists_restricted(m2, ["g"], all_b, "X", q)) == {"(u,v)", "(u,w)"}
    assert names(m2, eval_exists_restricted(m2, ["g"], all_a, "X", q)) == {"(u,w)"}
    for kind, ops in (("X", [q]), ("G", [q]), ("U", [q, q]), ("W", [q, q])):
        assert not eval_exists_restricted(m2, ["g"], PairSet.empty(sp), kind, *ops)


def test_states_actions(m2):
    sp = m2.space((0,))
    full = PairSet.all_enabled(sp)
    uw = S(m2, ("u", "w"))
    assert sorted(states_actions(m2, ["g"], full, uw)) == [(1, (0,)), (1, (1,))]
    assert not states_actions(m2, ["g"], full, m2.no_states)
    assert states_actions(m2, ["g"], full, m2.all_states) == full


def test_pre_exists_ac(m2):
    sp = m2.space((0,))
    full = PairSet.all_enabled(sp)
    zp = PairSet.of(sp, [(1, (0,)), (1, (1,))])
    assert sorted(pre_exists_ac(m2, ["g"], full, zp)) == [(0, (1,)), (1, (0,)), (1, (1,))]
    assert not pre_exists_ac(m2, ["g"], full, PairSet.empty(sp))
    assert pre_exists_ac(m2, ["g"], full, full) == full


def test_eval_exists_ac(m2):
    sp = m2.space((0,))
    full = PairSet.all_enabled(sp)
    got = eval_exists_ac(m2, ["g"], full, "X", m2.labels["q"])
    assert sorted(got) == [(0, (1,)), (1, (0,)), (1, (1,))]
    assert not eval_exists_ac(m2, ["g"], PairSet.empty(sp), "X", m2.labels["q"])


def _ops(m):
    p, q = m.labels["p"], m.labels["q"]
    return [("X", (p,)), ("G", (p,)), ("U", (p, q)), ("W", (p, q)), ("U", (~q, p)), ("W", (q, ~p))]


def _labelled(m):
    if not {"p", "q"} <= set(m.labels):
        atom = sorted(m.labels)[0]
        return {"p": m.labels[atom], "q": ~m.labels[atom]}
    return m.labels


@pytest.mark.parametrize("name", ["m1", "m2", "cg_oneround"])
def test_ac_projection_on_fixtures(name):
    m = fixtures.load(name)
    lab = _labelled(m)
    p, q = lab["p"], lab["q"]
    for coalition in [(a.name,) for a in m.agents]:
        full = PairSet.all_enabled(m.space(m.coalition(coalition)))
        for kind, ops in (("X", (p,)), ("G", (p,)), ("U", (p, q)), ("W", (p, q))):
            assert eval_exists_ac(m, coalition, full, kind, *ops).states() == eval_exists(
                m, coalition, kind, *ops
            )


@pytest.mark.parametrize("m", RANDOM, ids=repr)
def test_properties_on_random_models(m):
    rng = np.random.default_rng(m.n_states * 7 + m.n_transitions)
    for coalition in coalitions(m) + [()]:
        g = Game(m, m.coalition(coalition))
        full = PairSet.all_enabled(g.space)
        for _ in range(5):
            z = rng.random(m.n_states) < 0.5
            zz = z | (rng.random(m.n_states) < 0.3)
            # duality of the one-step pre-images
            assert np.array_equal(g.pre_exists(z), ~g.pre_forced(~z))
            # monotonicity
            assert not (g.pre_forced(z) & ~g.pre_forced(zz)).any()
            assert not (g.pre_exists(z) & ~g.pre_exists(zz)).any()
        for kind, ops in _ops(m):
            direct = eval_exists(m, coalition, kind, *ops)
            assert direct == ~eval_forced(m, coalition, *_negated(kind, ops))
            assert np.array_equal(direct.bits, exists_via_complement(g, kind, [o.bits for o in ops]))
            assert eval_exists_ac(m, coalition, full, kind, *ops).states() == direct
        if not m.fairness:
            assert fair_forced(m, coalition) == m.all_states


def _negated(kind, ops):
    from atlkf.fo import negated_operands

    nkind, nops = negated_operands(kind, [o.bits for o in ops])
    return (nkind, *[StateSet(o) for o in nops])


@pytest.mark.parametrize("m", RANDOM[:30], ids=repr)
def test_restricted_duality_and_monotone_ac(m):
    rng = np.random.default_rng(m.n_states)
    for coalition in coalitions(m):
        space = m.space(m.coalition(coalition))
        strat = PairSet(space, space.enabled & (rng.random(space.enabled.shape) < 0.6))
        z = StateSet(rng.random(m.n_states) < 0.5)
        covered = strat.states()
        assert pre_exists_restricted(m, coalition, strat, z) == covered & ~pre_forced_restricted(
            m, coalition, strat, ~z
        )
        # pair results grow with the relation as long as every state stays covered
        first = np.zeros_like(space.enabled)
        first[np.arange(m.n_states), space.enabled.argmax(axis=1)] = True
        strat = PairSet(space, strat.bits | first)
        full = PairSet.all_enabled(space)
        for kind, ops in _ops(m):
            small = eval_exists_ac(m, coalition, strat, kind, *ops)
            assert small <= eval_exists_ac(m, coalition, full, kind, *ops)


@pytest.mark.parametrize("m", RANDOM[:30], ids=repr)
def test_ctl_is_empty_coalition(m):
    p, q = m.labels["p"], m.labels["q"]
    assert eval_ctl(m, "EG", p) == eval_forced(m, [], "G", p)
    assert eval_ctl(m, "EU", p, q) == eval_forced(m, [], "U", p, q)
    assert eval_ctl(m, "AG", p) == eval_exists(m, [], "G", p)
    assert eval_ctl(m, "AW", p, q) == eval_exists(m, [], "W", p, q)
    assert eval_ctl(m, "AX", p) == ~eval_ctl(m, "EX", ~p)


@pytest.mark.parametrize("m", RANDOM[:30], ids=repr)
def test_knowledge_is_class_closed_on_domain(m):
    dom = knowledge_domain(m)
    ctx = EvalContext(m)
    for f in ("K<ag0> p", "K<ag0> (p | EX q)"):
        sat = ctx.sat(parse_formula(f)).bits
        for s in np.flatnonzero(sat):
            cls = equiv_class(m, int(s), 0).bits
            assert not (cls & dom & ~sat).any()


def test_diagnostics_count_iterations(m1):
    diag = Diagnostics()
    eval_fo(m1, parse_formula("EG p"), diag=diag)
    assert diag.fixpoint_iterations > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["X", "G", "U", "W"]))
def test_fixpoints_never_exceed_state_bound(seed, kind):
    from atlkf.random_models import random_model

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = random_model(seed)
    ops = (m.labels["p"],) if kind in "XG" else (m.labels["p"], m.labels["q"])
    diag = Diagnostics()
    eval_forced(m, [], kind, *ops, diag=diag)
    # nested G/W fixpoints run one inner iteration sequence per outer step
    bound = (m.n_states + 2) * (1 + max(1, len(m.fairness)) * (m.n_states + 2))
    assert diag.fixpoint_iterations <= bound
