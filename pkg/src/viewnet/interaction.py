"""Sequence diagrams: interaction terms, trace automata and trace-set satisfaction.

Each message is observed as a single event ``sender -> receiver : m(args)``.
Argument patterns are literals, ``_`` or variables; a variable binds on
its first match and must agree on every later occurrence in the run.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import Diagnostic, DiagnosticError, ParseError
from .expr import IntType, Value, format_value
from .lexer import Cursor
from .structural import ClassDiagram, EventLabel, SnapshotTS, Symbol, parse_value

ENV = "env"


# -- terms ---------------------------------------------------------------

@dataclass(frozen=True)
class PLit:
    value: Value


@dataclass(frozen=True)
class PWild:
    pass


@dataclass(frozen=True)
class PVar:
    name: str


Pattern = Union[PLit, PWild, PVar]


@dataclass(frozen=True)
class Msg:
    sender: str
    receiver: str
    message: str
    args: Tuple[Pattern, ...] = ()


@dataclass(frozen=True)
class Seq:
    terms: Tuple["Term", ...] = ()


@dataclass(frozen=True)
class Alt:
    terms: Tuple["Term", ...]


@dataclass(frozen=True)
class Opt:
    term: "Term"


@dataclass(frozen=True)
class Loop:
    lo: int
    hi: int
    term: "Term"


Term = Union[Msg, Seq, Alt, Opt, Loop]


@dataclass(frozen=True)
class Lifeline:
    name: str
    cls: str


@dataclass(frozen=True)
class Interaction:
    """An interaction theory; it is also its own (single) sentence."""

    name: str
    lifelines: Tuple[Lifeline, ...]
    body: Term
    context: Optional[str] = None

    def lifeline_class(self, name: str) -> Optional[str]:
        for l in self.lifelines:
            if l.name == name:
                return l.cls
        return None

    def messages(self) -> FrozenSet[str]:
        return frozenset(m.message for m in iter_msgs(self.body))

    def symbols(self) -> frozenset:
        return frozenset(
            {Symbol("lifeline", l.name) for l in self.lifelines}
            | {Symbol("message", m) for m in self.messages()}
        )


def iter_msgs(t: Term):
    if isinstance(t, Msg):
        yield t
    elif isinstance(t, (Seq, Alt)):
        for x in t.terms:
            yield from iter_msgs(x)
    else:
        yield from iter_msgs(t.term)


@dataclass(frozen=True)
class SDSignature:
    """Lifelines with their classes, and typed messages keyed by receiver class."""

    lifelines: Tuple[Tuple[str, str], ...] = ()
    messages: Tuple[Tuple[str, str, Tuple[Tuple[str, object], ...]], ...] = ()  # (class, message, params)

    def symbols(self) -> frozenset:
        return frozenset(
            {Symbol("lifeline", n) for n, _ in self.lifelines}
            | {Symbol("message", m) for _, m, _ in self.messages}
        )

    def lifeline_class(self, name: str) -> Optional[str]:
        return dict(self.lifelines).get(name)

    def restrict(self, symbols) -> "SDSignature":
        syms = frozenset(symbols)
        return SDSignature(
            tuple(l for l in self.lifelines if Symbol("lifeline", l[0]) in syms),
            tuple(m for m in self.messages if Symbol("message", m[1]) in syms),
        )


def sd_signature(th: Interaction, cd: Optional[ClassDiagram] = None) -> SDSignature:
    """Signature of an interaction; parameter types come from ``cd`` or from literal patterns."""
    from .expr import BOOL, EnumType

    msgs: Dict[Tuple[str, str], list] = {}
    diags: List[Diagnostic] = []
    for m in iter_msgs(th.body):
        cls = th.lifeline_class(m.receiver)
        if cls is None:
            continue
        msgs.setdefault((cls, m.message), []).append(m)
    out = []
    for (cls, name), occ in msgs.items():
        rec = None
        if cd is not None and cd.has_class(cls):
            rec = cd.receptions(cls).get(name)
        if rec is not None and len(rec.params) == len(occ[0].args):
            out.append((cls, name, tuple(rec.params)))
            continue
        params = []
        for i in range(len(occ[0].args)):
            lits = [o.args[i].value for o in occ if i < len(o.args) and isinstance(o.args[i], PLit)]
            if not lits:
                diags.append(Diagnostic(f"{th.name}: cannot infer the type of argument {i + 1} of {name}", code="untypable", aspect="behavioural"))
                continue
            if all(isinstance(v, bool) for v in lits):
                t = BOOL
            elif all(isinstance(v, int) and not isinstance(v, bool) for v in lits):
                t = IntType(min(lits), max(lits))
            elif all(isinstance(v, str) for v in lits):
                t = EnumType(tuple(sorted(set(lits))))
            else:
                diags.append(Diagnostic(f"{th.name}: mixed literal types for argument {i + 1} of {name}", code="untypable", aspect="behavioural"))
                continue
            params.append((f"p{i + 1}", t))
        out.append((cls, name, tuple(params)))
    if diags:
        raise DiagnosticError(diags)
    return SDSignature(tuple((l.name, l.cls) for l in th.lifelines), tuple(out))


# -- parsing -------------------------------------------------------------

def parse_sd(text: str, source: str = "") -> Interaction:
    cur = Cursor(text, source)
    cur.expect("interaction")
    name = cur.ident("interaction name")
    context = cur.ident("class diagram name") if cur.accept("for") else None
    cur.expect("{")
    lifelines: List[Lifeline] = []
    diags: List[Diagnostic] = []
    while True:
        cur.skip_semis()
        if not cur.at("lifeline"):
            break
        t = cur.advance()
        ln = cur.ident("lifeline name")
        cur.expect(":")
        cls = cur.ident("class name")
        if ln == ENV or any(l.name == ln for l in lifelines):
            diags.append(Diagnostic(f"duplicate lifeline {ln!r}", t.line, t.column, "duplicate-name", aspect="behavioural"))
        lifelines.append(Lifeline(ln, cls))
    names = {l.name for l in lifelines} | {ENV}
    body = _parse_items(cur, names, diags)
    cur.expect("}")
    cur.skip_semis()
    cur.expect_eof()
    if diags:
        raise DiagnosticError(diags, source)
    return Interaction(name, tuple(lifelines), body, context)


def _parse_items(cur: Cursor, names, diags) -> Seq:
    items: List[Term] = []
    while True:
        cur.skip_semis()
        if cur.at("}") or cur.at_kind("eof"):
            return Seq(tuple(items))
        items.append(_parse_item(cur, names, diags))


def _block(cur, names, diags) -> Seq:
    cur.expect("{")
    s = _parse_items(cur, names, diags)
    cur.expect("}")
    return s


def _parse_item(cur: Cursor, names, diags) -> Term:
    t = cur.tok
    if cur.accept("msg"):
        a = cur.ident("lifeline")
        cur.expect("->")
        b = cur.ident("lifeline")
        cur.expect(":")
        m = cur.ident("message name")
        args: List[Pattern] = []
        if cur.accept("("):
            if not cur.at(")"):
                args.append(_parse_pattern(cur))
                while cur.accept(","):
                    args.append(_parse_pattern(cur))
            cur.expect(")")
        for end in (a, b):
            if end not in names:
                diags.append(Diagnostic(f"unknown lifeline {end!r}", t.line, t.column, "unknown-lifeline", aspect="behavioural"))
        return Msg(a, b, m, tuple(args))
    if cur.accept("alt"):
        branches = [_block(cur, names, diags)]
        while cur.accept("else"):
            branches.append(_block(cur, names, diags))
        return Alt(tuple(branches))
    if cur.accept("opt"):
        return Opt(_block(cur, names, diags))
    if cur.accept("loop"):
        if not cur.accept("("):
            cur.error("loop needs finite bounds loop(lo, hi)", t)
        lo = cur.integer()
        cur.expect(",")
        if cur.at("*"):
            cur.error("unbounded loops are not supported", t)
        hi = cur.integer()
        cur.expect(")")
        if lo < 0 or lo > hi:
            diags.append(Diagnostic(f"loop bounds {lo}..{hi} out of order", t.line, t.column, "bounds-order", aspect="behavioural"))
        return Loop(lo, hi, _block(cur, names, diags))
    cur.error(f"expected msg, alt, opt or loop, found {cur.describe(t)}")


def _parse_pattern(cur: Cursor) -> Pattern:
    t = cur.tok
    if t.kind == "ident" and t.text not in ("true", "false"):
        cur.advance()
        return PWild() if t.text == "_" else PVar(t.text)
    return PLit(parse_value(cur))


def wellformed_sd(th: Interaction, cd: Optional[ClassDiagram]) -> List[Diagnostic]:
    diags: List[Diagnostic] = []

    def d(msg, code):
        diags.append(Diagnostic(f"{th.name}: {msg}", code=code, aspect="behavioural"))

    names = [l.name for l in th.lifelines]
    for n in sorted({n for n in names if names.count(n) > 1}):
        d(f"duplicate lifeline {n!r}", "duplicate-name")
    _check_loops(th.body, d)
    if cd is None:
        return diags
    for l in th.lifelines:
        if not cd.has_class(l.cls):
            d(f"lifeline {l.name} has unknown class {l.cls!r}", "unknown-class")
    var_types: Dict[str, object] = {}
    for m in iter_msgs(th.body):
        if m.receiver == ENV:
            d(f"message {m.message} is sent to the environment; receivers must be lifelines", "unknown-message")
            continue
        cls = th.lifeline_class(m.receiver)
        if cls is None or not cd.has_class(cls):
            continue
        rec = cd.receptions(cls).get(m.message)
        if rec is None:
            d(f"{m.message!r} is not a reception of {cls}", "unknown-message")
            continue
        if len(rec.params) != len(m.args):
            d(f"{m.message} takes {len(rec.params)} arguments, got {len(m.args)}", "arity")
            continue
        for (p, t), pat in zip(rec.params, m.args):
            if isinstance(pat, PLit) and not t.contains(pat.value):
                d(f"{m.message}: literal {format_value(pat.value)} is not a {t}", "type-error")
            if isinstance(pat, PVar):
                prev = var_types.setdefault(pat.name, t)
                if type(prev) is not type(t):
                    d(f"variable {pat.name} used at types {prev} and {t}", "type-error")
    return diags


def _check_loops(t: Term, d) -> None:
    if isinstance(t, Loop):
        if t.lo < 0 or t.lo > t.hi:
            d(f"loop bounds {t.lo}..{t.hi} out of order", "bounds-order")
        _check_loops(t.term, d)
    elif isinstance(t, (Seq, Alt)):
        for x in t.terms:
            _check_loops(x, d)
    elif isinstance(t, Opt):
        _check_loops(t.term, d)


def format_pattern(p: Pattern) -> str:
    if isinstance(p, PLit):
        return format_value(p.value)
    if isinstance(p, PWild):
        return "_"
    return p.name


def format_term(t: Term, indent: str = "  ") -> List[str]:
    if isinstance(t, Msg):
        args = f"({', '.join(format_pattern(a) for a in t.args)})" if t.args else ""
        return [f"{indent}msg {t.sender} -> {t.receiver} : {t.message}{args}"]
    if isinstance(t, Seq):
        return [line for x in t.terms for line in format_term(x, indent)]
    inner = indent + "  "
    if isinstance(t, Alt):
        out = [f"{indent}alt {{"]
        for i, b in enumerate(t.terms):
            if i:
                out.append(f"{indent}}} else {{")
            out.extend(format_term(b, inner))
        out.append(f"{indent}}}")
        return out
    if isinstance(t, Opt):
        return [f"{indent}opt {{", *format_term(t.term, inner), f"{indent}}}"]
    return [f"{indent}loop({t.lo},{t.hi}) {{", *format_term(t.term, inner), f"{indent}}}"]


def format_sd(th: Interaction) -> str:
    head = f"interaction {th.name}" + (f" for {th.context}" if th.context else "") + " {"
    lines = [head] + [f"  lifeline {l.name}: {l.cls}" for l in th.lifelines] + format_term(th.body) + ["}"]
    return "\n".join(lines) + "\n"


# -- automata ------------------------------------------------------------

@dataclass(frozen=True)
class TraceAutomaton:
    n_states: int
    initial: int
    accepting: FrozenSet[int]
    edges: Tuple[Tuple[int, Optional[Msg], int], ...]  # None = epsilon
    alphabet: FrozenSet[str]

    def out(self) -> Dict[int, List[Tuple[Optional[Msg], int]]]:
        table: Dict[int, List[Tuple[Optional[Msg], int]]] = {i: [] for i in range(self.n_states)}
        for a, m, b in self.edges:
            table[a].append((m, b))
        return table


class _Builder:
    def __init__(self):
        self.n = 0
        self.edges: List[Tuple[int, Optional[Msg], int]] = []

    def new(self) -> int:
        self.n += 1
        return self.n - 1

    def build(self, t: Term, s: int) -> int:
        """Wire ``t`` starting at ``s``; returns the exit state."""
        if isinstance(t, Msg):
            e = self.new()
            self.edges.append((s, t, e))
            return e
        if isinstance(t, Seq):
            cur = s
            for x in t.terms:
                cur = self.build(x, cur)
            return cur
        if isinstance(t, Alt):
            e = self.new()
            for x in t.terms:
                b = self.new()
                self.edges.append((s, None, b))
                self.edges.append((self.build(x, b), None, e))
            return e
        if isinstance(t, Opt):
            e = self.new()
            self.edges.append((s, None, e))
            b = self.new()
            self.edges.append((s, None, b))
            self.edges.append((self.build(t.term, b), None, e))
            return e
        cur = s
        for _ in range(t.lo):
            cur = self.build(t.term, cur)
        e = self.new()
        for _ in range(t.hi - t.lo):
            self.edges.append((cur, None, e))
            cur = self.build(t.term, cur)
        self.edges.append((cur, None, e))
        return e


def sd_to_nfa(th: Union[Interaction, Term]) -> TraceAutomaton:
    body = th.body if isinstance(th, Interaction) else th
    b = _Builder()
    start = b.new()
    end = b.build(body, start)
    return TraceAutomaton(b.n, start, frozenset({end}), tuple(b.edges), frozenset(m.message for m in iter_msgs(body)))


Bind = Tuple[Tuple[str, Value], ...]


def _match(m: Msg, e: EventLabel, binds: Bind) -> Optional[Bind]:
    if m.sender != e.sender or m.receiver != e.receiver or m.message != e.message or len(m.args) != len(e.args):
        return None
    env = dict(binds)
    for p, v in zip(m.args, e.args):
        if isinstance(p, PLit):
            if p.value != v or isinstance(p.value, bool) != isinstance(v, bool):
                return None
        elif isinstance(p, PVar):
            if p.name in env:
                if env[p.name] != v:
                    return None
            else:
                env[p.name] = v
    return tuple(sorted(env.items()))


class _Runner:
    def __init__(self, a: TraceAutomaton):
        self.a = a
        self.table = a.out()
        self._closure: Dict[int, FrozenSet[int]] = {}

    def closure(self, q: int) -> FrozenSet[int]:
        c = self._closure.get(q)
        if c is None:
            seen = {q}
            stack = [q]
            while stack:
                x = stack.pop()
                for m, y in self.table[x]:
                    if m is None and y not in seen:
                        seen.add(y)
                        stack.append(y)
            c = self._closure[q] = frozenset(seen)
        return c

    def start(self) -> FrozenSet[Tuple[int, Bind]]:
        return frozenset((q, ()) for q in self.closure(self.a.initial))

    def step(self, configs, e: EventLabel) -> FrozenSet[Tuple[int, Bind]]:
        out = set()
        for q, binds in configs:
            for m, y in self.table[q]:
                if m is None:
                    continue
                nb = _match(m, e, binds)
                if nb is not None:
                    for z in self.closure(y):
                        out.add((z, nb))
        return frozenset(out)

    def accepting(self, configs) -> bool:
        return any(q in self.a.accepting for q, _ in configs)


def matches(t: Sequence[EventLabel], a: TraceAutomaton) -> bool:
    """Nondeterministic acceptance; events outside the alphabet are rejected."""
    r = _Runner(a)
    configs = r.start()
    for e in t:
        if e.message not in a.alphabet:
            return False
        configs = r.step(configs, e)
        if not configs:
            return False
    return r.accepting(configs)


# -- trace sets ----------------------------------------------------------

@dataclass(frozen=True)
class TraceSet:
    traces: FrozenSet[Tuple[EventLabel, ...]]
    depth: Optional[int] = None  # depth at which the set was cut, if any

    @staticmethod
    def of(*traces) -> "TraceSet":
        return TraceSet(frozenset(tuple(t) for t in traces))

    def prefix_closure(self) -> "TraceSet":
        return TraceSet(frozenset(t[:i] for t in self.traces for i in range(len(t) + 1)), self.depth)

    def maximal(self) -> List[Tuple[EventLabel, ...]]:
        longer = {t[:i] for t in self.traces for i in range(len(t))}
        return sorted((t for t in self.traces if t not in longer), key=_trace_key)

    def sorted(self) -> List[Tuple[EventLabel, ...]]:
        return sorted(self.traces, key=_trace_key)


@dataclass(frozen=True)
class SystemTraces:
    """The (depth-bounded) observable traces of a transition system, kept implicit.

    ``alphabet`` and ``lifelines`` (when set) filter the events, which is
    how a reduct along a signature inclusion acts on this representation.
    """

    ts: SnapshotTS
    depth: int
    alphabet: Optional[FrozenSet[str]] = None
    lifelines: Optional[FrozenSet[str]] = None

    def keeps(self, e: EventLabel) -> bool:
        if not e.observable:
            return False
        if self.alphabet is not None and e.message not in self.alphabet:
            return False
        if self.lifelines is not None:
            return all(x == ENV or x in self.lifelines for x in (e.sender, e.receiver))
        return True

    def restrict(self, alphabet, lifelines) -> "SystemTraces":
        a = frozenset(alphabet) if self.alphabet is None else self.alphabet & frozenset(alphabet)
        l = frozenset(lifelines) if self.lifelines is None else self.lifelines & frozenset(lifelines)
        return SystemTraces(self.ts, self.depth, a, l)

    def labels(self) -> FrozenSet[EventLabel]:
        """Every kept label on some transition (all states of a generated TS are reachable)."""
        return frozenset(l for _, l, _ in self.ts.transitions if self.keeps(l))

    def materialize(self) -> TraceSet:
        from .behavioral import traces as ts_traces

        t = ts_traces(self.ts, self.depth)
        if self.alphabet is None and self.lifelines is None:
            return t
        return TraceSet(frozenset(tuple(e for e in x if self.keeps(e)) for x in t.traces), self.depth)


def is_trace_set(x) -> bool:
    return isinstance(x, (TraceSet, SystemTraces))


def _trace_key(t):
    return (len(t), t)


def project(trace: Sequence[EventLabel], alphabet) -> Tuple[EventLabel, ...]:
    return tuple(e for e in trace if e.observable and e.message in alphabet)


@dataclass
class ProductResult:
    path: Optional[List[Tuple[int, EventLabel, int]]]  # TS transitions, None if nothing accepted
    complete: bool
    explored: int


def search_product(ts: SnapshotTS, a: TraceAutomaton, max_states: int = 10**6) -> ProductResult:
    """Breadth-first search of TS x automaton for a prefix whose projection is accepted."""
    r = _Runner(a)
    succ = ts.successors()
    start_cfgs = r.start()
    queue = deque()
    parent: Dict[tuple, Optional[tuple]] = {}
    for i in ts.initial:
        for c in sorted(start_cfgs, key=repr):
            node = (i, c)
            if node not in parent:
                parent[node] = None
                queue.append(node)
    capped = False
    while queue:
        node = queue.popleft()
        s, (q, binds) = node
        if q in a.accepting:
            return ProductResult(_unwind(parent, node), True, len(parent))
        for label, t in succ[s]:
            if label.observable and label.message in a.alphabet:
                nxt = [(t, c) for c in sorted(r.step([(q, binds)], label), key=repr)]
            else:
                nxt = [(t, (q, binds))]
            for n in nxt:
                if n not in parent:
                    if len(parent) >= max_states:
                        capped = True
                        continue
                    parent[n] = (node, (s, label, t))
                    queue.append(n)
    return ProductResult(None, ts.explored_completely and not capped, len(parent))


def _unwind(parent, node):
    path = []
    while parent[node] is not None:
        prev, edge = parent[node]
        path.append(edge)
        node = prev
    path.reverse()
    return path


def product_applies(T: SystemTraces, th: Interaction) -> bool:
    """Whether T's event filter is invisible after projecting onto th's messages."""
    msgs = th.messages()
    if T.alphabet is not None and not msgs <= T.alphabet:
        return False
    if T.lifelines is not None:
        ends = {x for m in iter_msgs(th.body) for x in (m.sender, m.receiver)} - {ENV}
        if not ends <= T.lifelines:
            return False
    return True


def sd_satisfies(T, th: Interaction, mode: str = "exists") -> bool:
    """Trace-set satisfaction after projecting onto the interaction's messages."""
    if mode not in ("exists", "all"):
        raise ValueError(f"unknown satisfaction mode {mode!r}")
    a = sd_to_nfa(th)
    if isinstance(T, SystemTraces):
        if mode == "exists" and product_applies(T, th):
            return search_product(T.ts, a).path is not None
        T = T.materialize()
    projected = {project(t, a.alphabet) for t in T.traces}
    if mode == "exists":
        return any(matches(t, a) for t in projected)
    longer = {t[:i] for t in T.traces for i in range(len(t))}
    return all(matches(project(t, a.alphabet), a) for t in T.traces if t not in longer)


def shortest_accepted(th: Interaction, domain: Callable[[Msg, int], Sequence[Value]]) -> Optional[Tuple[EventLabel, ...]]:
    """A shortest accepted word; unbound variables and wildcards take ``domain``'s first value."""
    a = sd_to_nfa(th)
    r = _Runner(a)
    table = a.out()
    queue = deque([(c, ()) for c in sorted(r.start(), key=repr)])
    seen = set(c for c, _ in queue)
    while queue:
        (q, binds), word = queue.popleft()
        if q in a.accepting:
            return word
        for m, y in table[q]:
            if m is None:
                continue
            env = dict(binds)
            args = []
            for i, p in enumerate(m.args):
                if isinstance(p, PLit):
                    args.append(p.value)
                elif isinstance(p, PVar) and p.name in env:
                    args.append(env[p.name])
                else:
                    dom = domain(m, i)
                    args.append(dom[0] if dom else 0)
            e = EventLabel(m.sender, m.receiver, m.message, tuple(args))
            for c in sorted(r.step([(q, binds)], e), key=repr):
                if c not in seen:
                    seen.add(c)
                    queue.append((c, word + (e,)))
    return None


def accepted_language(th: Interaction, domain: Callable[[Msg, int], Sequence[Value]], limit: int = 100000) -> TraceSet:
    """Every accepted word, variables ranging over ``domain`` (finite: loops are bounded)."""
    a = sd_to_nfa(th)
    r = _Runner(a)
    table = a.out()
    words = set()
    stack = [(c, ()) for c in r.start()]
    while stack:
        (q, binds), word = stack.pop()
        if q in a.accepting:
            words.add(word)
            if len(words) > limit:
                raise OverflowError("interaction language exceeds the enumeration limit")
        for m, y in table[q]:
            if m is None:
                continue
            env = dict(binds)
            choices: List[List[Value]] = []
            for i, p in enumerate(m.args):
                if isinstance(p, PLit):
                    choices.append([p.value])
                elif isinstance(p, PVar) and p.name in env:
                    choices.append([env[p.name]])
                else:
                    choices.append(list(domain(m, i)))
            for args in itertools.product(*choices):
                e = EventLabel(m.sender, m.receiver, m.message, tuple(args))
                for c in r.step([(q, binds)], e):
                    stack.append((c, word + (e,)))
    return TraceSet(frozenset(words))


def cd_domain(th: Interaction, cd: Optional[ClassDiagram]) -> Callable[[Msg, int], Sequence[Value]]:
    """Argument domains from the receiver's reception; literals seen in the diagram otherwise."""
    literals: Dict[Tuple[str, int], set] = {}
    for m in iter_msgs(th.body):
        for i, p in enumerate(m.args):
            if isinstance(p, PLit):
                literals.setdefault((m.message, i), set()).add(p.value)

    def domain(m: Msg, i: int):
        if cd is not None:
            cls = th.lifeline_class(m.receiver)
            if cls and cd.has_class(cls):
                rec = cd.receptions(cls).get(m.message)
                if rec is not None and i < len(rec.params):
                    t = rec.params[i][1]
                    if not (isinstance(t, IntType) and (t.lo is None or t.hi is None)):
                        return list(t.domain())
        seen = literals.get((m.message, i))
        return sorted(seen, key=repr) if seen else [0]

    return domain


# -- renaming along signature morphisms -----------------------------------

def rename_term(th, mapping: Mapping[Symbol, Symbol]):
    def life(n):
        if n == ENV:
            return n
        return mapping[Symbol("lifeline", n)].name

    def go(t):
        if isinstance(t, Msg):
            return Msg(life(t.sender), life(t.receiver), mapping[Symbol("message", t.message)].name, t.args)
        if isinstance(t, Seq):
            return Seq(tuple(go(x) for x in t.terms))
        if isinstance(t, Alt):
            return Alt(tuple(go(x) for x in t.terms))
        if isinstance(t, Opt):
            return Opt(go(t.term))
        return Loop(t.lo, t.hi, go(t.term))

    if isinstance(th, Interaction):
        return Interaction(th.name, tuple(Lifeline(life(l.name), l.cls) for l in th.lifelines), go(th.body), th.context)
    return go(th)


def reduct_traces(T, mapping: Mapping[Symbol, Symbol]):
    inv = {b: a for a, b in mapping.items()}
    if isinstance(T, SystemTraces):
        if all(a == b for a, b in mapping.items()):
            return T.restrict(
                [s.name for s in mapping if s.kind == "message"],
                [s.name for s in mapping if s.kind == "lifeline"],
            )
        T = T.materialize()

    def keep(e: EventLabel) -> Optional[EventLabel]:
        m = inv.get(Symbol("message", e.message))
        if m is None:
            return None
        ends = []
        for x in (e.sender, e.receiver):
            if x == ENV:
                ends.append(x)
                continue
            l = inv.get(Symbol("lifeline", x))
            if l is None:
                return None
            ends.append(l.name)
        return EventLabel(ends[0], ends[1], m.name, e.args, e.kind)

    out = set()
    for t in T.traces:
        out.add(tuple(k for k in (keep(e) for e in t) if k is not None))
    return TraceSet(frozenset(out), T.depth)


# -- trace witness text format ---------------------------------------------

_LINE = re.compile(r"^\s*(\w+)\s*->\s*(\w+)\s*:\s*(\w+)\s*(?:\((.*)\))?\s*$")


def format_event(e: EventLabel) -> str:
    return str(e)


def parse_event(line: str, kind: str = "dispatch") -> EventLabel:
    m = _LINE.match(line)
    if m is None:
        raise ParseError(f"malformed event line {line.strip()!r}")
    args: Tuple[Value, ...] = ()
    if m.group(4) and m.group(4).strip():
        cur = Cursor(m.group(4))
        vals = [parse_value(cur)]
        while cur.accept(","):
            vals.append(parse_value(cur))
        cur.expect_eof()
        args = tuple(vals)
    return EventLabel(m.group(1), m.group(2), m.group(3), args, kind)


def format_traces(T: TraceSet) -> str:
    blocks = []
    for t in T.sorted():
        blocks.append("\n".join(format_event(e) for e in t) if t else "<empty>")
    return "\n\n".join(blocks) + "\n"


def parse_traces(text: str) -> TraceSet:
    traces = []
    for block in re.split(r"\n\s*\n", text.strip("\n")):
        lines = [l for l in block.splitlines() if l.strip() and not l.strip().startswith("//")]
        if lines == ["<empty>"]:
            traces.append(())
        elif lines:
            traces.append(tuple(parse_event(l) for l in lines))
    return TraceSet(frozenset(traces))
