"""Loader and printer for the textual model format (``.amf``).

::

    agent g { states: x, y; actions: a, b; protocol { x: a, b; y: a, b; } }
    transitions { (x) -[a]-> (x); (_) -[b]-> (y); }
    labels { p: (y); }
    init { (x); }
    fairness { label: p; }

Tuples list one local state (or action) per agent in declaration order.  A
``_`` in a source local-state slot ranges over the agent's declared states; in
an action slot it ranges over the actions the agent's protocol enables in the
source local state.  Each ``fairness`` block is one constraint.
"""

from __future__ import annotations

import re
from itertools import product
from pathlib import Path

from .errors import (
    AmfSyntaxError,
    EnabledConsistencyViolation,
    ModelError,
    NonSerialState,
    ProtocolMismatch,
    UndeclaredSymbol,
)
from .model import AgentDecl, build_model

WILDCARD = "_"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<arrow_open>-\[)
  | (?P<arrow_close>\]->)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[{}(),;:])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise AmfSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            if kind == "arrow_open":
                value = "-["
            elif kind == "arrow_close":
                value = "]->"
            tokens.append((kind, value, line, col))
        newlines = value.count("\n") if kind == "ws" else 0
        if newlines:
            line += newlines
            line_start = m.start() + m.group().rindex("\n") + 1
        pos = m.end()
    tokens.append(("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def loc(self):
        return self.tok[2], self.tok[3]

    def error(self, message, expected=()):
        _, value, line, col = self.tok
        found = value or "end of input"
        raise AmfSyntaxError(f"{message}, found {found!r}", line, col, expected)

    def accept(self, value):
        if self.tok[1] == value and self.tok[0] != "eof":
            self.i += 1
            return True
        return False

    def expect(self, value):
        if not self.accept(value):
            self.error(f"expected {value!r}", (value,))

    def ident(self):
        kind, value, _, _ = self.tok
        if kind != "ident":
            self.error("expected an identifier", ("IDENT",))
        self.i += 1
        return value

    def ident_list(self, stop):
        """Comma-separated identifiers up to (not including) ``stop``."""
        items = []
        if self.tok[1] == stop:
            return items
        items.append(self.ident())
        while self.accept(","):
            items.append(self.ident())
        return items

    def tuple_(self):
        loc = self.loc()
        if self.tok[0] == "ident":
            return [self.ident()], loc
        self.expect("(")
        items = self.ident_list(")")
        self.expect(")")
        return items, loc

    # -- blocks -------------------------------------------------------------

    def document(self):
        doc = {
            "agents": [],
            "agent_locs": {},
            "transitions": None,
            "labels": [],
            "init": None,
            "fairness": [],
        }
        while self.tok[0] != "eof":
            loc = self.loc()
            word = self.tok[1] if self.tok[0] == "ident" else None
            if word == "agent":
                self.i += 1
                self.agent(doc, loc)
            elif word == "transitions":
                self.i += 1
                if doc["transitions"] is not None:
                    raise AmfSyntaxError("duplicate transitions block", *loc)
                doc["transitions"] = (self.transitions(), loc)
            elif word == "labels":
                self.i += 1
                doc["labels"].extend(self.labels())
            elif word == "init":
                self.i += 1
                if doc["init"] is not None:
                    raise AmfSyntaxError("duplicate init block", *loc)
                doc["init"] = (self.state_block(), loc)
            elif word == "fairness":
                self.i += 1
                doc["fairness"].append((self.fairness(), loc))
            else:
                self.error(
                    "expected a block", ("agent", "transitions", "labels", "init", "fairness")
                )
        for block in ("transitions", "init"):
            if doc[block] is None:
                line, col = self.loc()
                raise AmfSyntaxError(f"missing {block} block", line, col)
        return doc

    def agent(self, doc, loc):
        name_loc = self.loc()
        name = self.ident()
        if name in doc["agent_locs"]:
            raise AmfSyntaxError("duplicate agent", *name_loc)
        doc["agent_locs"][name] = loc
        self.expect("{")
        fields = {}
        while not self.accept("}"):
            key_loc = self.loc()
            key = self.ident()
            if key in fields:
                raise AmfSyntaxError(f"duplicate {key!r} in agent {name}", *key_loc)
            if key in ("states", "actions"):
                self.expect(":")
                fields[key] = self.ident_list(";")
                self.expect(";")
            elif key == "protocol":
                self.expect("{")
                protocol = {}
                while not self.accept("}"):
                    local_loc = self.loc()
                    local = self.ident()
                    if local in protocol:
                        raise AmfSyntaxError(f"duplicate protocol entry {local!r}", *local_loc)
                    self.expect(":")
                    protocol[local] = self.ident_list(";")
                    self.expect(";")
                fields[key] = protocol
            else:
                raise AmfSyntaxError(
                    f"unknown agent field {key!r}", *key_loc, ("states", "actions", "protocol")
                )
        for key in ("states", "actions", "protocol"):
            if key not in fields:
                raise AmfSyntaxError(f"agent {name} has no {key}", *loc)
        doc["agents"].append(
            (AgentDecl(name, fields["states"], fields["actions"], fields["protocol"]), loc)
        )

    def transitions(self):
        self.expect("{")
        rows = []
        while not self.accept("}"):
            source, loc = self.tuple_()
            self.expect("-[")
            action = self.ident_list("]->")
            self.expect("]->")
            target, target_loc = self.tuple_()
            self.expect(";")
            rows.append((source, action, target, loc, target_loc))
        return rows

    def state_list(self):
        states = []
        if self.tok[1] == ";":
            return states
        states.append(self.tuple_())
        while self.accept(","):
            states.append(self.tuple_())
        return states

    def state_block(self):
        self.expect("{")
        states = []
        while not self.accept("}"):
            states.extend(self.state_list())
            self.expect(";")
        return states

    def labels(self):
        self.expect("{")
        out = []
        while not self.accept("}"):
            loc = self.loc()
            atom = self.ident()
            self.expect(":")
            out.append((atom, self.state_list(), loc))
            self.expect(";")
        return out

    def fairness(self):
        """Entries are state tuples or ``label: atom`` references."""
        self.expect("{")
        entries = []
        while not self.accept("}"):
            if self.tok[1] == "label" and self.tokens[self.i + 1][1] == ":":
                self.i += 2
                loc = self.loc()
                entries.append(("label", self.ident(), loc))
            else:
                entries.extend(("state",) + item for item in self.state_list())
            self.expect(";")
        return entries


def _check_tuple(agents, items, loc, what="state", wildcard=False):
    if len(items) != len(agents):
        raise UndeclaredSymbol(
            f"{what} tuple has {len(items)} components, expected {len(agents)}"
        ).at(loc)
    for agent, item in zip(agents, items):
        if wildcard and item == WILDCARD:
            continue
        pool = agent.states if what == "state" else agent.actions
        if item not in pool:
            raise UndeclaredSymbol(f"agent {agent.name} has no {what} {item!r}").at(loc)


def _expand(agents, rows):
    out = []
    for source, action, target, loc, target_loc in rows:
        _check_tuple(agents, source, loc, "state", wildcard=True)
        _check_tuple(agents, action, loc, "action", wildcard=True)
        if WILDCARD in target:
            raise AmfSyntaxError("wildcard is not allowed in a target state", *target_loc)
        _check_tuple(agents, target, target_loc, "state")
        sources = [
            agent.states if local == WILDCARD else (local,)
            for agent, local in zip(agents, source)
        ]
        for src in product(*sources):
            choices = [
                agent.protocol.get(local, ()) if a == WILDCARD else (a,)
                for agent, local, a in zip(agents, src, action)
            ]
            for act in product(*choices):
                out.append((src, act, tuple(target)))
    return out


def load_model(text):
    """Parse AMF source and return a validated :class:`~atlkf.model.Model`."""
    doc = _Parser(text).document()
    agents = [a for a, _ in doc["agents"]]
    if not agents:
        raise AmfSyntaxError("a model needs at least one agent", 1, 1)
    agent_loc = {a.name: loc for a, loc in doc["agents"]}

    rows, trans_loc = doc["transitions"]
    transitions = _expand(agents, rows)

    init_states, _ = doc["init"]
    init = []
    for items, loc in init_states:
        _check_tuple(agents, items, loc)
        init.append(tuple(items))

    labels = {}
    for atom, states, loc in doc["labels"]:
        bucket = labels.setdefault(atom, [])
        for items, sloc in states:
            _check_tuple(agents, items, sloc)
            bucket.append(tuple(items))

    fairness = []
    for entries, _ in doc["fairness"]:
        states = []
        for entry in entries:
            if entry[0] == "label":
                _, atom, loc = entry
                if atom not in labels:
                    raise UndeclaredSymbol(f"fairness refers to unknown label {atom!r}").at(loc)
                states.extend(labels[atom])
            else:
                _, items, loc = entry
                _check_tuple(agents, items, loc)
                states.append(tuple(items))
        fairness.append(states)

    try:
        return build_model(agents, transitions, init, labels, fairness)
    except (EnabledConsistencyViolation, ProtocolMismatch) as exc:
        raise exc.at(agent_loc[exc.agent])
    except NonSerialState as exc:
        raise exc.at(trans_loc)
    except ModelError as exc:
        if exc.location is None:
            exc.at(agent_loc[agents[0].name])
        raise


def load_model_file(path):
    return load_model(Path(path).read_text(encoding="utf-8"))


def _tuple_text(names):
    return "(" + ", ".join(names) + ")"


def print_model(m):
    """Render ``m`` as AMF source; ``load_model`` of the result rebuilds it."""
    lines = []
    for agent in m.agents:
        lines.append(f"agent {agent.name} {{")
        lines.append(f"  states: {', '.join(agent.states)};")
        lines.append(f"  actions: {', '.join(agent.actions)};")
        lines.append("  protocol {")
        for local in agent.states:
            lines.append(f"    {local}: {', '.join(agent.protocol[local])};")
        lines.append("  }")
        lines.append("}")
    lines.append("transitions {")
    for s, j, t in zip(m.src.tolist(), m.jact.tolist(), m.dst.tolist()):
        action = [m.agents[i].actions[a] for i, a in enumerate(m.joint_parts[j].tolist())]
        lines.append(
            f"  {_tuple_text(m.state_tuple(s))} -[{', '.join(action)}]-> "
            f"{_tuple_text(m.state_tuple(t))};"
        )
    lines.append("}")

    def state_list(bits):
        return ", ".join(_tuple_text(m.state_tuple(s)) for s in bits)

    if m.labels:
        lines.append("labels {")
        for atom in sorted(m.labels):
            lines.append(f"  {atom}: {state_list(m.labels[atom])};")
        lines.append("}")
    lines.append("init {")
    lines.append(f"  {state_list(m.init)};")
    lines.append("}")
    for f in m.fairness:
        lines.append("fairness {")
        lines.append(f"  {state_list(f)};")
        lines.append("}")
    return "\n".join(lines) + "\n"
