"""State machines, composite structures and their run-to-completion semantics.

A configuration is a :class:`TSState`: the snapshot, the control state of
every machine-bearing object, and one bounded FIFO event pool per object.
One move is either the dispatch of an object's head event (firing at most
one transition, effects applied atomically), the discard of an
unconsumable event, or the injection of an event through a gate.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import Diagnostic, DiagnosticError, TypingError, UnresolvedSymbol
from .expr import BOOL, Expr, Value, evaluate, format_expr, parse_expr, same_sort, typecheck
from .lexer import Cursor
from .structural import (
    Bounds,
    ClassDiagram,
    Event,
    EventLabel,
    Snapshot,
    SnapshotTS,
    Symbol,
    TSState,
)

ENV = "env"


# -- syntax --------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    attr: str
    expr: Expr

    def __str__(self) -> str:
        return f"{self.attr} := {format_expr(self.expr)}"


@dataclass(frozen=True)
class Send:
    target: str  # association role, "self" or "env"
    message: str
    args: Tuple[Expr, ...] = ()

    def __str__(self) -> str:
        return f"send {self.target}.{self.message}({', '.join(format_expr(a) for a in self.args)})"


@dataclass(frozen=True)
class Transition:
    source: str
    message: str
    params: Tuple[str, ...]
    guard: Optional[Expr]
    effects: Tuple[object, ...]
    target: str

    def __str__(self) -> str:
        trig = f"{self.message}({', '.join(self.params)})" if self.params else self.message
        guard = f" [{format_expr(self.guard)}]" if self.guard is not None else ""
        effs = f" / {' ; '.join(str(e) for e in self.effects)}" if self.effects else ""
        return f"{self.source} -> {self.target} on {trig}{guard}{effs}"


@dataclass(frozen=True)
class StateMachine:
    name: str
    context: str
    states: Tuple[str, ...]
    initial: str
    transitions: Tuple[Transition, ...] = ()

    def symbols(self) -> frozenset:
        return frozenset({Symbol("machine", self.name)})


@dataclass(frozen=True)
class Part:
    name: str
    cls: str
    machine: Optional[str] = None


@dataclass(frozen=True)
class Connector:
    a: str
    b: str
    messages: Optional[Tuple[str, ...]] = None  # None: every message

    def carries(self, m: str) -> bool:
        return self.messages is None or m in self.messages


@dataclass(frozen=True)
class Gate:
    name: str
    part: str
    messages: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class CompositeStructure:
    name: str
    parts: Tuple[Part, ...] = ()
    connectors: Tuple[Connector, ...] = ()
    gates: Tuple[Gate, ...] = ()
    # machine definitions bound by the resolver (name -> machine)
    bound: Tuple[StateMachine, ...] = field(default=(), compare=False)

    def part(self, name: str) -> Part:
        for p in self.parts:
            if p.name == name:
                return p
        raise UnresolvedSymbol(f"unknown part {name!r} in component {self.name}")

    def machine_for(self, part: Part) -> Optional[StateMachine]:
        if part.machine is None:
            return None
        for m in self.bound:
            if m.name == part.machine:
                return m
        raise UnresolvedSymbol(f"machine {part.machine!r} of part {part.name} is not bound")


# -- signatures for the STM and CMP institutions -------------------------

@dataclass(frozen=True)
class MachineSignature:
    cd: ClassDiagram
    machines: Tuple[str, ...] = ()

    def symbols(self) -> frozenset:
        return self.cd.symbols() | {Symbol("machine", m) for m in self.machines}


@dataclass(frozen=True)
class CompositeSignature:
    cd: ClassDiagram
    machines: Tuple[str, ...] = ()
    parts: Tuple[Tuple[str, str], ...] = ()  # (part, class)

    def symbols(self) -> frozenset:
        return (
            self.cd.symbols()
            | {Symbol("machine", m) for m in self.machines}
            | {Symbol("part", p) for p, _ in self.parts}
        )


# -- parsing -------------------------------------------------------------

def parse_stm(text: str, source: str = "") -> StateMachine:
    cur = Cursor(text, source)
    cur.expect("statemachine")
    name = cur.ident("machine name")
    cur.expect("for")
    context = cur.ident("class name")
    cur.expect("{")
    states: List[str] = []
    initial: Optional[str] = None
    init_tok = None
    raw: List[Tuple[Transition, object]] = []
    diags: List[Diagnostic] = []
    while True:
        cur.skip_semis()
        if cur.accept("}"):
            break
        t = cur.tok
        if cur.accept("init"):
            init_tok = t
            initial = cur.ident("state name")
        elif cur.accept("state"):
            while True:
                s = cur.ident("state name")
                if s in states:
                    diags.append(Diagnostic(f"duplicate state {s!r}", t.line, t.column, "duplicate-name", aspect="behavioural"))
                states.append(s)
                if not cur.accept(","):
                    break
        elif t.kind == "ident" and cur.peek().text == "->":
            raw.append((_parse_transition(cur), t))
        else:
            cur.error(f"expected init, state or transition, found {cur.describe(t)}")
    cur.skip_semis()
    cur.expect_eof()
    if initial is None:
        diags.append(Diagnostic("machine has no initial state", code="no-initial", aspect="behavioural"))
    elif initial not in states:
        if not states:
            states.append(initial)
        else:
            diags.append(Diagnostic(f"initial state {initial!r} is not declared", init_tok.line, init_tok.column, "unknown-state", aspect="behavioural"))
    for tr, tok in raw:
        for s in (tr.source, tr.target):
            if s not in states:
                diags.append(Diagnostic(f"transition uses undeclared state {s!r}", tok.line, tok.column, "unknown-state", aspect="behavioural"))
    if diags:
        raise DiagnosticError(diags, source)
    return StateMachine(name, context, tuple(states), initial, tuple(tr for tr, _ in raw))


def _is_effect_start(cur: Cursor) -> bool:
    t = cur.tok
    if t.kind != "ident":
        return False
    if t.text == "send" and cur.peek().kind == "ident":
        return True
    if cur.peek().text == ":=":
        return True
    return t.text == "self" and cur.peek().text == "." and cur.peek(3).text == ":="


def _parse_effect(cur: Cursor):
    if cur.accept("send"):
        target = cur.ident("send target")
        cur.expect(".")
        msg = cur.ident("message name")
        args: List[Expr] = []
        if cur.accept("("):
            if not cur.at(")"):
                args.append(parse_expr(cur))
                while cur.accept(","):
                    args.append(parse_expr(cur))
            cur.expect(")")
        return Send(target, msg, tuple(args))
    if cur.accept("self"):
        cur.expect(".")
    attr = cur.ident("attribute name")
    cur.expect(":=")
    return Assign(attr, parse_expr(cur))


def _parse_transition(cur: Cursor) -> Transition:
    src = cur.ident("state name")
    cur.expect("->")
    tgt = cur.ident("state name")
    cur.expect("on")
    msg = cur.ident("trigger message")
    params: List[str] = []
    if cur.accept("("):
        if not cur.at(")"):
            params.append(cur.ident("parameter name"))
            while cur.accept(","):
                params.append(cur.ident("parameter name"))
        cur.expect(")")
    guard = None
    if cur.accept("["):
        guard = parse_expr(cur)
        cur.expect("]")
    effects = []
    if cur.accept("/"):
        effects.append(_parse_effect(cur))
        while cur.at(";"):
            save = cur.i
            cur.skip_semis()
            if _is_effect_start(cur):
                effects.append(_parse_effect(cur))
            else:
                cur.i = save
                break
    return Transition(src, msg, tuple(params), guard, tuple(effects), tgt)


def parse_cmp(text: str, source: str = "") -> CompositeStructure:
    cur = Cursor(text, source)
    cur.expect("component")
    name = cur.ident("component name")
    cur.expect("{")
    parts: List[Part] = []
    conns: List[Tuple[Connector, object]] = []
    gates: List[Tuple[Gate, object]] = []
    diags: List[Diagnostic] = []
    while True:
        cur.skip_semis()
        if cur.accept("}"):
            break
        t = cur.tok
        if cur.accept("part"):
            pname = cur.ident("part name")
            cur.expect(":")
            cls = cur.ident("class name")
            machine = cur.ident("machine name") if cur.accept("machine") else None
            if any(p.name == pname for p in parts):
                diags.append(Diagnostic(f"duplicate part {pname!r}", t.line, t.column, "duplicate-name"))
            parts.append(Part(pname, cls, machine))
        elif cur.accept("connector"):
            a = cur.ident("part name")
            cur.expect("--")
            b = cur.ident("part name")
            conns.append((Connector(a, b, _carries(cur)), t))
        elif cur.accept("gate"):
            g = cur.ident("gate name")
            cur.expect("->")
            p = cur.ident("part name")
            gates.append((Gate(g, p, _carries(cur)), t))
        else:
            cur.error(f"expected part, connector or gate, found {cur.describe(t)}")
    cur.skip_semis()
    cur.expect_eof()
    names = {p.name for p in parts}
    for c, t in conns:
        for end in (c.a, c.b):
            if end not in names:
                diags.append(Diagnostic(f"connector end {end!r} is not a part", t.line, t.column, "dangling-connector"))
    for g, t in gates:
        if g.part not in names:
            diags.append(Diagnostic(f"gate {g.name} targets unknown part {g.part!r}", t.line, t.column, "dangling-connector"))
    if diags:
        raise DiagnosticError(diags, source)
    return CompositeStructure(name, tuple(parts), tuple(c for c, _ in conns), tuple(g for g, _ in gates))


def _carries(cur: Cursor) -> Optional[Tuple[str, ...]]:
    if not cur.accept("carries"):
        return None
    msgs = [cur.ident("message name")]
    while cur.accept(","):
        msgs.append(cur.ident("message name"))
    return tuple(msgs)


# -- well-formedness against a class diagram ------------------------------

def wellformed_stm(m: StateMachine, cd: ClassDiagram) -> List[Diagnostic]:
    diags: List[Diagnostic] = []

    def d(msg, code="type-error"):
        diags.append(Diagnostic(f"{m.name}: {msg}", code=code, aspect="behavioural"))

    if not cd.has_class(m.context):
        d(f"context class {m.context!r} is not declared", "unknown-class")
        return diags
    attrs = cd.attr_types(m.context)
    recs = cd.receptions(m.context)
    lits = cd.enum_literals()
    for tr in m.transitions:
        rec = recs.get(tr.message)
        if rec is None:
            d(f"trigger {tr.message!r} is not a reception of {m.context}", "unknown-message")
            continue
        if len(rec.params) != len(tr.params):
            d(f"trigger {tr.message} takes {len(rec.params)} parameters, got {len(tr.params)}", "arity")
            continue
        params = {p: t for p, (_, t) in zip(tr.params, rec.params)}
        try:
            if tr.guard is not None and typecheck(tr.guard, attrs, params, lits) != BOOL:
                d(f"guard of {tr} is not Boolean")
            for eff in tr.effects:
                if isinstance(eff, Assign):
                    if eff.attr not in attrs:
                        raise UnresolvedSymbol(f"unknown attribute {eff.attr!r}")
                    t = typecheck(eff.expr, attrs, params, lits)
                    if not same_sort(t, attrs[eff.attr]):
                        d(f"{tr}: assigns {t} to {eff.attr}: {attrs[eff.attr]}")
                else:
                    for a in eff.args:
                        typecheck(a, attrs, params, lits)
                    _check_send(m, cd, eff, d)
        except (TypingError, UnresolvedSymbol) as e:
            d(f"{tr}: {e}")
    return diags


def _check_send(m: StateMachine, cd: ClassDiagram, eff: Send, d) -> None:
    if eff.target == ENV:
        return
    if eff.target == "self":
        classes = [m.context]
    else:
        ends = cd.navigate(m.context, eff.target)
        if not ends:
            d(f"send target {eff.target!r} is not a role navigable from {m.context}", "unknown-role")
            return
        classes = [(a.end_b if far == "b" else a.end_a).cls for a, far in ends]
    for c in classes:
        rec = cd.receptions(c).get(eff.message)
        if rec is None:
            d(f"{c} has no reception {eff.message!r}", "unknown-message")
        elif len(rec.params) != len(eff.args):
            d(f"{eff}: {eff.message} takes {len(rec.params)} arguments", "arity")


def wellformed_cmp(c: CompositeStructure, machines: Mapping[str, StateMachine], cd: ClassDiagram) -> List[Diagnostic]:
    diags: List[Diagnostic] = []

    def d(msg, code):
        diags.append(Diagnostic(f"{c.name}: {msg}", code=code, aspect="behavioural"))

    names = [p.name for p in c.parts]
    for n in sorted({n for n in names if names.count(n) > 1}):
        d(f"duplicate part {n!r}", "duplicate-name")
    for p in c.parts:
        if not cd.has_class(p.cls):
            d(f"part {p.name} has unknown class {p.cls!r}", "unknown-class")
            continue
        if p.machine is not None:
            m = machines.get(p.machine)
            if m is None:
                d(f"part {p.name} uses unknown machine {p.machine!r}", "unknown-machine")
            elif m.context != p.cls:
                d(f"part {p.name}: class {p.cls} does not match machine context {m.context}", "class-mismatch")
    byname = {p.name: p for p in c.parts}
    for con in c.connectors:
        if con.a not in byname or con.b not in byname:
            d(f"connector {con.a} -- {con.b} has a dangling end", "dangling-connector")
            continue
        if con.messages is not None:
            for msg in con.messages:
                if not any(cd.has_class(byname[x].cls) and msg in cd.receptions(byname[x].cls) for x in (con.a, con.b)):
                    d(f"connector {con.a} -- {con.b} carries {msg!r}, not a reception of either end", "unknown-message")
    for g in c.gates:
        p = byname.get(g.part)
        if p is None:
            d(f"gate {g.name} targets unknown part {g.part!r}", "dangling-connector")
        elif g.messages is not None and cd.has_class(p.cls):
            for msg in g.messages:
                if msg not in cd.receptions(p.cls):
                    d(f"gate {g.name} injects {msg!r}, not a reception of {p.cls}", "unknown-message")
    return diags


# -- operational semantics -----------------------------------------------

@dataclass
class StepStats:
    pruned_overflow: int = 0
    undelivered: int = 0


class System:
    """Compiled run-to-completion semantics of a set of machine-bearing objects."""

    def __init__(
        self,
        cd: ClassDiagram,
        machines: Mapping[str, StateMachine],
        connectors: Optional[Sequence[Connector]] = None,
        gates: Sequence[Tuple[str, str, Tuple[Tuple[Value, ...], ...]]] = (),
    ):
        # machines: object id -> machine; gates: (part, message, argument tuples)
        self.cd = cd
        self.machines = dict(machines)
        self.connectors = list(connectors) if connectors is not None else None
        self.gates = list(gates)
        self.stats = StepStats()
        self._lits = frozenset(cd.enum_literals())
        self._index: Dict[Tuple[str, str, str], List[Transition]] = {}
        for oid, m in self.machines.items():
            for tr in m.transitions:
                self._index.setdefault((oid, tr.source, tr.message), []).append(tr)
        self._attr_types: Dict[str, dict] = {}
        self._route_cache: Dict[Tuple[Snapshot, str, str, str], Tuple[str, ...]] = {}

    @staticmethod
    def from_composite(c: CompositeStructure, cd: ClassDiagram) -> "System":
        machines = {}
        for p in c.parts:
            m = c.machine_for(p)
            if m is not None:
                machines[p.name] = m
        gates = []
        for g in sorted(c.gates, key=lambda g: (g.name, g.part)):
            cls = c.part(g.part).cls
            recs = cd.receptions(cls)
            msgs = g.messages if g.messages is not None else tuple(sorted(recs))
            for msg in msgs:
                rec = recs[msg]
                args = tuple(itertools.product(*(t.domain() for _, t in rec.params)))
                gates.append((g.part, msg, args))
        return System(cd, machines, c.connectors, gates)

    @staticmethod
    def from_machines(machines: Sequence[StateMachine], cd: ClassDiagram, snapshot: Snapshot) -> "System":
        """Every object of a machine's context class runs that machine; no gates."""
        assign = {}
        for o in snapshot.objects:
            for m in machines:
                if cd.is_a(o.cls, m.context):
                    assign[o.id] = m
                    break
        return System(cd, assign)

    # configuration helpers ---------------------------------------------
    def initial_state(self, snapshot: Snapshot) -> TSState:
        ids = set(snapshot.ids())
        missing = set(self.machines) - ids
        if missing:
            raise TypingError(f"snapshot lacks machine-bearing objects {sorted(missing)}")
        control = tuple(sorted((oid, m.initial) for oid, m in self.machines.items()))
        queues = tuple((oid, ()) for oid, _ in control)
        return TSState(snapshot, control, queues)

    def _types(self, cls: str) -> dict:
        t = self._attr_types.get(cls)
        if t is None:
            t = self._attr_types[cls] = self.cd.attr_types(cls)
        return t

    def _route(self, snap: Snapshot, sender: str, target: str, message: str) -> Tuple[str, ...]:
        key = (snap, sender, target, message)
        hit = self._route_cache.get(key)
        if hit is not None:
            return hit
        if target == "self":
            out: Tuple[str, ...] = (sender,)
        elif target == ENV:
            out = ()
        else:
            cls = snap.obj(sender).cls
            found = set()
            for a, far in self.cd.navigate(cls, target):
                for n, x, y in snap.links:
                    if n != a.name:
                        continue
                    if far == "b" and x == sender:
                        found.add(y)
                    elif far == "a" and y == sender:
                        found.add(x)
            if self.connectors is not None:
                found = {
                    t for t in found
                    if any({c.a, c.b} == {sender, t} and c.carries(message) for c in self.connectors)
                }
            out = tuple(sorted(found))
        if len(self._route_cache) < 100000:
            self._route_cache[key] = out
        return out

    def fire(self, state: TSState, oid: str):
        """Outcome of dispatching ``oid``'s head event.

        Returns None (empty pool), ("discard", None, event) or
        ("fire", (transition, new attrs, sends), event).
        """
        q = state.queue_of(oid)
        if not q:
            return None
        ev = q[0]
        control = state.control_of(oid)
        obj = state.snapshot.obj(oid)
        attrs = obj.valuation()
        types = self._types(obj.cls)
        for tr in self._index.get((oid, control, ev.message), ()):
            if len(tr.params) != len(ev.args):
                continue
            binds = dict(zip(tr.params, ev.args))
            try:
                if tr.guard is not None and evaluate(tr.guard, attrs, binds, self._lits) is not True:
                    continue
            except TypingError:
                continue
            new_attrs = dict(attrs)
            sends = []
            ok = True
            for eff in tr.effects:
                if isinstance(eff, Assign):
                    v = evaluate(eff.expr, new_attrs, binds, self._lits)
                    if not types[eff.attr].contains(v):
                        ok = False  # out-of-range assignment disables the transition
                        break
                    new_attrs[eff.attr] = v
                else:
                    args = tuple(evaluate(a, new_attrs, binds, self._lits) for a in eff.args)
                    sends.append((eff.target, eff.message, args))
            if ok:
                return ("fire", (tr, new_attrs, sends), ev)
        return ("discard", None, ev)

    def moves(self, state: TSState) -> List[Tuple[EventLabel, TSState]]:
        out: List[Tuple[EventLabel, TSState]] = []
        snap = state.snapshot
        queues = dict(state.queues)
        bound = self.queue_depth
        for oid in sorted(self.machines):
            res = self.fire(state, oid)
            if res is None:
                continue
            kind, detail, ev = res
            newq = dict(queues)
            newq[oid] = queues[oid][1:]
            label = EventLabel(ev.sender, oid, ev.message, ev.args, "dispatch" if kind == "fire" else "discard")
            if kind == "discard":
                out.append((label, TSState(snap, state.control, tuple(sorted(newq.items())))))
                continue
            tr, new_attrs, sends = detail
            overflow = False
            for target, msg, args in sends:
                receivers = self._route(snap, oid, target, msg)
                if not receivers and target != ENV:
                    self.stats.undelivered += 1
                for r in receivers:
                    if r not in newq:
                        self.stats.undelivered += 1
                        continue
                    newq[r] = newq[r] + (Event(oid, msg, args),)
                    if len(newq[r]) > bound:
                        overflow = True
            if overflow:
                self.stats.pruned_overflow += 1
                continue
            control = tuple((o, tr.target if o == oid else st) for o, st in state.control)
            new_snap = snap.with_values(oid, new_attrs) if new_attrs != snap.obj(oid).valuation() else snap
            out.append((label, TSState(new_snap, control, tuple(sorted(newq.items())))))
        for part, msg, arg_tuples in self.gates:
            q = queues.get(part)
            if q is None or len(q) >= bound:
                if q is not None:
                    self.stats.pruned_overflow += len(arg_tuples)
                continue
            for args in arg_tuples:
                newq = dict(queues)
                newq[part] = q + (Event(ENV, msg, args),)
                out.append((EventLabel(ENV, part, msg, args, "inject"), TSState(snap, state.control, tuple(sorted(newq.items())))))
        return out

    queue_depth = 2


def step(system: System, c: TSState, b: Bounds) -> List[Tuple[EventLabel, TSState]]:
    """All successor moves of configuration ``c``."""
    system.queue_depth = b.queue_depth
    return system.moves(c)


def generate_ts(system: System, init: Snapshot, b: Bounds) -> SnapshotTS:
    """Breadth-first closure of :func:`step` from ``init`` within the bounds."""
    system.queue_depth = b.queue_depth
    start = system.initial_state(init)
    index = {start: 0}
    states = [start]
    transitions: List[Tuple[int, EventLabel, int]] = []
    frontier = [0]
    complete = True
    capped = False
    level = 0
    while frontier:
        if level >= b.depth:
            if any(system.moves(states[i]) for i in frontier):
                complete = False
            break
        nxt = []
        for i in frontier:
            for label, succ in system.moves(states[i]):
                j = index.get(succ)
                if j is None:
                    if len(states) >= b.max_states:
                        capped = True
                        continue
                    j = index[succ] = len(states)
                    states.append(succ)
                    nxt.append(j)
                transitions.append((i, label, j))
        frontier = nxt
        level += 1
    if capped:
        complete = False
    stats = (
        ("states", len(states)),
        ("transitions", len(transitions)),
        ("levels", level),
        ("pruned_overflow", system.stats.pruned_overflow),
        ("undelivered", system.stats.undelivered),
        ("state_cap_hit", int(capped)),
    )
    return SnapshotTS(tuple(states), (0,), tuple(transitions), complete, stats)


def traces(ts: SnapshotTS, depth: int):
    """All observable label sequences of length <= depth from the initial states."""
    from .interaction import TraceSet

    succ = ts.successors()
    seen = set()
    work = [(i, ()) for i in ts.initial]
    found = set()
    while work:
        item = work.pop()
        if item in seen:
            continue
        seen.add(item)
        s, tr = item
        found.add(tr)
        for label, t in succ[s]:
            if label.observable:
                if len(tr) < depth:
                    work.append((t, tr + (label,)))
            else:
                work.append((t, tr))
    return TraceSet(frozenset(found), depth)


# -- satisfaction for machine and composite sentences ---------------------

def machine_satisfied(ts: SnapshotTS, m: StateMachine, cd: ClassDiagram) -> bool:
    """Every move of an object running ``m`` is one ``m`` allows; other moves leave it alone."""
    return not machine_violations(ts, m, cd)


def machine_violations(ts: SnapshotTS, m: StateMachine, cd: ClassDiagram) -> List[str]:
    problems: List[str] = []
    if not cd.has_class(m.context):
        return [f"context class {m.context} missing"]

    def runners(state: TSState):
        return [o.id for o in state.snapshot.objects if cd.is_a(o.cls, m.context) and state.control_of(o.id) is not None]

    for s in ts.states:
        for oid in runners(s):
            if s.control_of(oid) not in m.states:
                problems.append(f"{oid} in unknown state {s.control_of(oid)!r}")
    for i in ts.initial:
        s = ts.states[i]
        for oid in runners(s):
            if s.control_of(oid) != m.initial or s.queue_of(oid):
                problems.append(f"{oid} does not start in {m.initial} with an empty pool")
    for a, label, b in ts.transitions:
        pre, post = ts.states[a], ts.states[b]
        mine = set(runners(pre))
        if label.kind in ("dispatch", "discard") and label.receiver in mine:
            oid = label.receiver
            sysm = System(cd, {oid: m})
            res = sysm.fire(pre, oid)
            if res is None:
                problems.append(f"{label}: empty pool")
                continue
            kind, detail, ev = res
            if (ev.sender, ev.message, ev.args) != (label.sender, label.message, label.args):
                problems.append(f"{label}: not the head event")
                continue
            expect_kind = "dispatch" if kind == "fire" else "discard"
            if label.kind != expect_kind:
                problems.append(f"{label}: expected a {expect_kind} move")
                continue
            if kind == "fire":
                tr, new_attrs, sends = detail
                if post.control_of(oid) != tr.target:
                    problems.append(f"{label}: {oid} should move to {tr.target}")
                if post.snapshot.obj(oid).valuation() != new_attrs:
                    problems.append(f"{label}: wrong attribute update of {oid}")
            elif post.control_of(oid) != pre.control_of(oid):
                problems.append(f"{label}: discard changed the state of {oid}")
        else:
            for oid in mine:
                if pre.control_of(oid) != post.control_of(oid):
                    problems.append(f"{label}: {oid} changed state without a dispatch")
                try:
                    if pre.snapshot.obj(oid).values != post.snapshot.obj(oid).values:
                        problems.append(f"{label}: {oid} changed attributes without a dispatch")
                except UnresolvedSymbol:
                    problems.append(f"{label}: {oid} disappeared")
    return problems


def composite_satisfied(ts: SnapshotTS, c: CompositeStructure, signature, queue_depth: Optional[int] = None) -> bool:
    return not composite_violations(ts, c, signature, queue_depth)


def composite_violations(ts: SnapshotTS, c: CompositeStructure, signature, queue_depth: Optional[int] = None) -> List[str]:
    """Every transition of ``ts`` must be a legal move of the composed system."""
    cd = signature.cd if hasattr(signature, "cd") else signature
    system = System.from_composite(c, cd)
    if queue_depth is None:
        longest = max((len(q) for s in ts.states for _, q in s.queues), default=0)
        queue_depth = max(longest, 1)
    system.queue_depth = queue_depth
    problems = []
    parts = {p.name for p in c.parts}
    for i in ts.initial:
        s = ts.states[i]
        if set(s.snapshot.ids()) & parts != parts:
            problems.append("initial snapshot lacks some parts")
            continue
        try:
            if s != system.initial_state(s.snapshot):
                problems.append("initial state is not the initial configuration")
        except TypingError as e:
            problems.append(str(e))
    for a, label, b in ts.transitions:
        pre, post = ts.states[a], ts.states[b]
        if (label, post) not in system.moves(pre):
            problems.append(f"illegal move {label} ({label.kind})")
    return problems


def format_machine(m: StateMachine) -> str:
    lines = [f"statemachine {m.name} for {m.context} {{", f"  init {m.initial} ;", f"  state {', '.join(m.states)} ;"]
    for tr in m.transitions:
        lines.append(f"  {tr} ;")
    lines.append("}")
    return "\n".join(lines) + "\n"


def state_counts(ts: SnapshotTS) -> Counter:
    return Counter(l.kind for _, l, _ in ts.transitions)
