"""Class diagrams, object diagrams, snapshots and snapshot transition systems.

A class diagram is both a signature (classes, attributes, receptions,
associations) and a set of sentences (invariants, association-end
multiplicities, class multiplicities).  Its realizations are transition
systems whose states are conformant snapshots.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import Diagnostic, DiagnosticError, TypingError, UnresolvedSymbol
from .expr import (
    BOOL,
    EnumType,
    Expr,
    IntType,
    Type,
    Value,
    attrs_of,
    evaluate,
    format_expr,
    format_value,
    parse_expr,
    parse_type,
    typecheck,
)
from .lexer import Cursor

STAR = None  # upper bound of an unbounded multiplicity


# -- signature -----------------------------------------------------------

@dataclass(frozen=True)
class Symbol:
    kind: str  # class | attribute | reception | association | machine | part | lifeline | message
    name: str

    def __str__(self) -> str:
        return f"{self.kind} {self.name}"


@dataclass(frozen=True)
class Reception:
    name: str
    params: Tuple[Tuple[str, Type], ...] = ()


@dataclass(frozen=True)
class ClassDecl:
    name: str
    attributes: Tuple[Tuple[str, Type], ...] = ()
    receptions: Tuple[Reception, ...] = ()
    parent: Optional[str] = None
    # class multiplicity: number of instances (including subclass instances)
    count: Optional[Tuple[int, Optional[int]]] = None


@dataclass(frozen=True)
class AssocEnd:
    cls: str
    role: str
    lo: int = 0
    hi: Optional[int] = STAR


@dataclass(frozen=True)
class Association:
    name: str
    end_a: AssocEnd
    end_b: AssocEnd


# -- sentences -----------------------------------------------------------

@dataclass(frozen=True)
class Invariant:
    cls: str
    expr: Expr

    def __str__(self) -> str:
        return f"inv {self.cls} : {format_expr(self.expr)}"


@dataclass(frozen=True)
class Multiplicity:
    """Each instance of the opposite end is linked to lo..hi instances of ``end``."""

    assoc: str
    end: str  # "a" | "b"
    lo: int
    hi: Optional[int]

    def __str__(self) -> str:
        return f"mult {self.assoc}.{self.end} {_fmt_mult(self.lo, self.hi)}"


@dataclass(frozen=True)
class ClassCount:
    cls: str
    lo: int
    hi: Optional[int]

    def __str__(self) -> str:
        return f"count {self.cls} {_fmt_mult(self.lo, self.hi)}"


@dataclass(frozen=True)
class InitialContains:
    """Some initial state embeds the given snapshot (an object diagram)."""

    snapshot: "Snapshot"
    source: str = ""

    def __str__(self) -> str:
        return f"initial contains {self.source or 'object diagram'}"


CDSentence = object  # Invariant | Multiplicity | ClassCount | InitialContains


def _fmt_mult(lo, hi) -> str:
    return f"{lo}..{'*' if hi is None else hi}"


# -- class diagram -------------------------------------------------------

@dataclass(frozen=True)
class ClassDiagram:
    name: str
    classes: Tuple[ClassDecl, ...] = ()
    associations: Tuple[Association, ...] = ()
    invariants: Tuple[Invariant, ...] = ()
    extra: Tuple[object, ...] = ()  # further sentences, e.g. InitialContains

    # lookups -----------------------------------------------------------
    def cls(self, name: str) -> ClassDecl:
        for c in self.classes:
            if c.name == name:
                return c
        raise UnresolvedSymbol(f"unknown class {name!r} in {self.name}")

    def has_class(self, name: str) -> bool:
        return any(c.name == name for c in self.classes)

    def assoc(self, name: str) -> Association:
        for a in self.associations:
            if a.name == name:
                return a
        raise UnresolvedSymbol(f"unknown association {name!r} in {self.name}")

    def ancestors(self, name: str) -> List[str]:
        """``name`` followed by its superclasses; stops on cycles."""
        chain, cur = [], name
        while cur is not None and cur not in chain and self.has_class(cur):
            chain.append(cur)
            cur = self.cls(cur).parent
        return chain

    def is_a(self, sub: str, sup: str) -> bool:
        return sup in self.ancestors(sub)

    def attributes(self, name: str) -> List[Tuple[str, Type, str]]:
        """(attribute, type, declaring class) including inherited ones, root first."""
        out = []
        for c in reversed(self.ancestors(name)):
            for a, t in self.cls(c).attributes:
                out.append((a, t, c))
        return out

    def attr_types(self, name: str) -> Dict[str, Type]:
        return {a: t for a, t, _ in self.attributes(name)}

    def receptions(self, name: str) -> Dict[str, Reception]:
        out = {}
        for c in reversed(self.ancestors(name)):
            for r in self.cls(c).receptions:
                out[r.name] = r
        return out

    def reception_owner(self, cls: str, message: str) -> Optional[str]:
        for c in self.ancestors(cls):
            if any(r.name == message for r in self.cls(c).receptions):
                return c
        return None

    def enum_literals(self) -> Dict[str, EnumType]:
        lits = {}
        for c in self.classes:
            for _, t in c.attributes:
                if isinstance(t, EnumType):
                    for l in t.literals:
                        lits[l] = t
            for r in c.receptions:
                for _, t in r.params:
                    if isinstance(t, EnumType):
                        for l in t.literals:
                            lits[l] = t
        return lits

    def navigate(self, cls: str, role: str) -> List[Tuple[Association, str]]:
        """Association ends reachable from ``cls`` under ``role``: (assoc, far end "a"|"b")."""
        out = []
        for a in self.associations:
            if a.end_b.role == role and self.is_a(cls, a.end_a.cls):
                out.append((a, "b"))
            if a.end_a.role == role and self.is_a(cls, a.end_b.cls):
                out.append((a, "a"))
        return out

    # institution view ----------------------------------------------------
    def symbols(self) -> frozenset:
        syms = set()
        for c in self.classes:
            syms.add(Symbol("class", c.name))
            for a, _ in c.attributes:
                syms.add(Symbol("attribute", f"{c.name}.{a}"))
            for r in c.receptions:
                syms.add(Symbol("reception", f"{c.name}.{r.name}"))
        for a in self.associations:
            syms.add(Symbol("association", a.name))
        return frozenset(syms)

    def sentences(self) -> Tuple[object, ...]:
        out: List[object] = []
        for c in self.classes:
            if c.count is not None:
                out.append(ClassCount(c.name, c.count[0], c.count[1]))
        for a in self.associations:
            if (a.end_a.lo, a.end_a.hi) != (0, STAR):
                out.append(Multiplicity(a.name, "a", a.end_a.lo, a.end_a.hi))
            if (a.end_b.lo, a.end_b.hi) != (0, STAR):
                out.append(Multiplicity(a.name, "b", a.end_b.lo, a.end_b.hi))
        out.extend(self.invariants)
        out.extend(self.extra)
        return tuple(out)

    def signature(self) -> "ClassDiagram":
        """The same diagram with every sentence removed."""
        return ClassDiagram(
            self.name,
            tuple(replace(c, count=None) for c in self.classes),
            tuple(
                Association(a.name, replace(a.end_a, lo=0, hi=STAR), replace(a.end_b, lo=0, hi=STAR))
                for a in self.associations
            ),
        )

    def with_sentences(self, sentences: Sequence[object]) -> "ClassDiagram":
        """Rebuild a diagram with this signature and the given sentence list."""
        counts = {s.cls: (s.lo, s.hi) for s in sentences if isinstance(s, ClassCount)}
        mults = {(s.assoc, s.end): (s.lo, s.hi) for s in sentences if isinstance(s, Multiplicity)}
        classes = tuple(replace(c, count=counts.get(c.name)) for c in self.classes)
        assocs = []
        for a in self.associations:
            la, ha = mults.get((a.name, "a"), (0, STAR))
            lb, hb = mults.get((a.name, "b"), (0, STAR))
            assocs.append(Association(a.name, replace(a.end_a, lo=la, hi=ha), replace(a.end_b, lo=lb, hi=hb)))
        invs = tuple(s for s in sentences if isinstance(s, Invariant))
        extra = tuple(s for s in sentences if isinstance(s, InitialContains))
        return ClassDiagram(self.name, classes, tuple(assocs), invs, extra)

    def restrict(self, symbols) -> "ClassDiagram":
        """Sub-signature on ``symbols``; keeps sentences whose symbols all survive."""
        keep = set(symbols)
        classes = []
        for c in self.classes:
            if Symbol("class", c.name) not in keep:
                continue
            parent = c.parent if c.parent and Symbol("class", c.parent) in keep else None
            classes.append(
                ClassDecl(
                    c.name,
                    tuple((a, t) for a, t in c.attributes if Symbol("attribute", f"{c.name}.{a}") in keep),
                    tuple(r for r in c.receptions if Symbol("reception", f"{c.name}.{r.name}") in keep),
                    parent,
                    c.count,
                )
            )
        assocs = tuple(
            a for a in self.associations
            if Symbol("association", a.name) in keep
            and Symbol("class", a.end_a.cls) in keep
            and Symbol("class", a.end_b.cls) in keep
        )
        out = ClassDiagram(self.name, tuple(classes), assocs)
        kept_sentences = [s for s in self.sentences() if sentence_symbols(self, s) <= keep]
        return out.with_sentences(kept_sentences)


def sentence_symbols(cd: ClassDiagram, s) -> frozenset:
    if isinstance(s, Invariant):
        syms = {Symbol("class", s.cls)}
        owners = {a: owner for a, _, owner in cd.attributes(s.cls)} if cd.has_class(s.cls) else {}
        for a in attrs_of(s.expr):
            syms.add(Symbol("attribute", f"{owners.get(a, s.cls)}.{a}"))
        return frozenset(syms)
    if isinstance(s, Multiplicity):
        a = cd.assoc(s.assoc)
        return frozenset({Symbol("association", s.assoc), Symbol("class", a.end_a.cls), Symbol("class", a.end_b.cls)})
    if isinstance(s, ClassCount):
        return frozenset({Symbol("class", s.cls)})
    if isinstance(s, InitialContains):
        syms = set()
        for o in s.snapshot.objects:
            syms.add(Symbol("class", o.cls))
            owners = {a: owner for a, _, owner in cd.attributes(o.cls)} if cd.has_class(o.cls) else {}
            for a, _ in o.values:
                syms.add(Symbol("attribute", f"{owners.get(a, o.cls)}.{a}"))
        for assoc, _, _ in s.snapshot.links:
            syms.add(Symbol("association", assoc))
        return frozenset(syms)
    raise TypingError(f"not a class-diagram sentence: {s!r}")


# -- parsing -------------------------------------------------------------

def parse_cd(text: str, source: str = "") -> ClassDiagram:
    cur = Cursor(text, source)
    cur.expect("classdiagram")
    name = cur.ident("diagram name")
    braced = cur.accept("{") is not None
    classes: List[ClassDecl] = []
    assocs: List[Association] = []
    invs: List[Invariant] = []
    dups: List[Diagnostic] = []
    seen_classes = set()
    seen_assocs = set()
    while True:
        cur.skip_semis()
        t = cur.tok
        if braced and cur.accept("}"):
            break
        if t.kind == "eof":
            if braced:
                cur.error("expected '}'")
            break
        if cur.accept("class"):
            c = _parse_class(cur, dups)
            if c.name in seen_classes:
                dups.append(Diagnostic(f"duplicate class {c.name!r}", t.line, t.column, "duplicate-name"))
            seen_classes.add(c.name)
            classes.append(c)
        elif cur.accept("assoc"):
            a = _parse_assoc(cur)
            if a.name in seen_assocs:
                dups.append(Diagnostic(f"duplicate association {a.name!r}", t.line, t.column, "duplicate-name"))
            seen_assocs.add(a.name)
            assocs.append(a)
        elif cur.accept("inv"):
            cls = cur.ident("class name")
            cur.expect(":")
            invs.append(Invariant(cls, parse_expr(cur)))
        else:
            cur.error(f"expected class, assoc or inv, found {cur.describe(t)}")
    cur.skip_semis()
    cur.expect_eof()
    if dups:
        raise DiagnosticError(dups, source)
    return ClassDiagram(name, tuple(classes), tuple(assocs), tuple(invs))


def _parse_mult(cur: Cursor) -> Tuple[int, Optional[int]]:
    cur.expect("[")
    if cur.accept("*"):
        cur.expect("]")
        return 0, STAR
    lo = cur.integer()
    if cur.accept(".."):
        hi = STAR if cur.accept("*") else cur.integer()
    else:
        hi = lo
    cur.expect("]")
    return lo, hi


def _parse_class(cur: Cursor, dups: List[Diagnostic]) -> ClassDecl:
    name = cur.ident("class name")
    parent, count = None, None
    for _ in range(2):
        if cur.at("["):
            count = _parse_mult(cur)
        elif cur.accept("extends"):
            parent = cur.ident("class name")
    cur.expect("{")
    attrs: List[Tuple[str, Type]] = []
    recs: List[Reception] = []
    names = set()
    while not cur.accept("}"):
        cur.skip_semis()
        if cur.accept("}"):
            break
        t = cur.tok
        if cur.accept("attr"):
            a = cur.ident("attribute name")
            cur.expect(":")
            ty = parse_type(cur)
            if a in names:
                dups.append(Diagnostic(f"duplicate member {a!r} in class {name}", t.line, t.column, "duplicate-name"))
            names.add(a)
            attrs.append((a, ty))
        elif cur.accept("reception"):
            m = cur.ident("message name")
            params = []
            if cur.accept("("):
                if not cur.at(")"):
                    while True:
                        p = cur.ident("parameter name")
                        cur.expect(":")
                        params.append((p, parse_type(cur)))
                        if not cur.accept(","):
                            break
                cur.expect(")")
            if m in names:
                dups.append(Diagnostic(f"duplicate member {m!r} in class {name}", t.line, t.column, "duplicate-name"))
            names.add(m)
            recs.append(Reception(m, tuple(params)))
        else:
            cur.error(f"expected attr or reception, found {cur.describe(t)}")
    return ClassDecl(name, tuple(attrs), tuple(recs), parent, count)


def _parse_assoc(cur: Cursor) -> Association:
    name = cur.ident("association name")
    cur.expect(":")
    ca = cur.ident("class name")
    la, ha = _parse_mult(cur) if cur.at("[") else (0, STAR)
    ra = cur.ident("role name")
    cur.expect("--")
    rb = cur.ident("role name")
    lb, hb = _parse_mult(cur) if cur.at("[") else (0, STAR)
    cb = cur.ident("class name")
    return Association(name, AssocEnd(ca, ra, la, ha), AssocEnd(cb, rb, lb, hb))


def wellformed_cd(cd: ClassDiagram) -> List[Diagnostic]:
    diags: List[Diagnostic] = []

    def d(msg, code):
        diags.append(Diagnostic(msg, code=code, level="syntactic", aspect="structural"))

    names = [c.name for c in cd.classes]
    for n in sorted({n for n in names if names.count(n) > 1}):
        d(f"duplicate class {n!r}", "duplicate-name")
    for c in cd.classes:
        if c.parent is not None and not cd.has_class(c.parent):
            d(f"class {c.name} extends unknown class {c.parent!r}", "unknown-class")
        members = [a for a, _ in c.attributes] + [r.name for r in c.receptions]
        for n in sorted({n for n in members if members.count(n) > 1}):
            d(f"duplicate member {n!r} in class {c.name}", "duplicate-name")
        for a, t in c.attributes:
            if isinstance(t, IntType) and (t.lo is None or t.hi is None):
                d(f"attribute {c.name}.{a} needs a bounded Int range", "unbounded-type")
            elif isinstance(t, IntType) and t.lo > t.hi:
                d(f"attribute {c.name}.{a} has empty range {t}", "bounds-order")
        if c.count is not None and c.count[1] is not None and c.count[0] > c.count[1]:
            d(f"class multiplicity of {c.name} has lo > hi", "bounds-order")
    # generalization cycles
    reported = set()
    for c in cd.classes:
        seen, cur = [], c.name
        while cur is not None and cd.has_class(cur):
            if cur in seen:
                cyc = tuple(sorted(seen[seen.index(cur):]))
                if cyc not in reported:
                    reported.add(cyc)
                    d(f"cyclic generalization among {', '.join(cyc)}", "cyclic-generalization")
                break
            seen.append(cur)
            cur = cd.cls(cur).parent
    anames = [a.name for a in cd.associations]
    for n in sorted({n for n in anames if anames.count(n) > 1}):
        d(f"duplicate association {n!r}", "duplicate-name")
    for a in cd.associations:
        for end in (a.end_a, a.end_b):
            if not cd.has_class(end.cls):
                d(f"association {a.name} references unknown class {end.cls!r}", "unknown-class")
            if end.hi is not None and end.lo > end.hi:
                d(f"association {a.name} end {end.role} has multiplicity {end.lo}..{end.hi} with lo > hi", "bounds-order")
    lits = cd.enum_literals()
    for inv in cd.invariants:
        if not cd.has_class(inv.cls):
            d(f"invariant on unknown class {inv.cls!r}", "unknown-class")
            continue
        try:
            t = typecheck(inv.expr, cd.attr_types(inv.cls), {}, lits)
            if t != BOOL:
                d(f"invariant on {inv.cls} is not Boolean", "type-error")
        except (TypingError, UnresolvedSymbol) as e:
            d(f"invariant on {inv.cls}: {e}", "type-error")
    return diags


# -- snapshots -----------------------------------------------------------

@dataclass(frozen=True, order=True)
class Obj:
    id: str
    cls: str
    values: Tuple[Tuple[str, Value], ...] = ()

    def value(self, attr: str) -> Value:
        for a, v in self.values:
            if a == attr:
                return v
        raise UnresolvedSymbol(f"object {self.id} has no attribute {attr!r}")

    def valuation(self) -> Dict[str, Value]:
        return dict(self.values)


@dataclass(frozen=True)
class Snapshot:
    objects: Tuple[Obj, ...] = ()
    links: Tuple[Tuple[str, str, str], ...] = ()  # (association, a-end object, b-end object)

    @staticmethod
    def make(objects, links=()) -> "Snapshot":
        return Snapshot(tuple(sorted(objects, key=lambda o: o.id)), tuple(sorted(set(links))))

    def obj(self, oid: str) -> Obj:
        for o in self.objects:
            if o.id == oid:
                return o
        raise UnresolvedSymbol(f"no object {oid!r} in snapshot")

    def ids(self) -> Tuple[str, ...]:
        return tuple(o.id for o in self.objects)

    def with_values(self, oid: str, values: Mapping[str, Value]) -> "Snapshot":
        objs = tuple(
            Obj(o.id, o.cls, tuple((a, values.get(a, v)) for a, v in o.values)) if o.id == oid else o
            for o in self.objects
        )
        return Snapshot(objs, self.links)


@dataclass(frozen=True)
class ObjectDiagram:
    name: str
    context: str
    snapshot: Snapshot


def conformance_diagnostics(s: Snapshot, cd: ClassDiagram) -> List[str]:
    """Reasons why ``s`` is not a conformant snapshot of ``cd`` (empty if it is).

    Unknown classes or attributes raise :class:`UnresolvedSymbol`.
    """
    problems: List[str] = []
    ids = [o.id for o in s.objects]
    if len(set(ids)) != len(ids):
        problems.append("duplicate object ids")
    by_id = {o.id: o for o in s.objects}
    lits = frozenset(cd.enum_literals())
    for o in s.objects:
        cd.cls(o.cls)
        types = cd.attr_types(o.cls)
        have = dict(o.values)
        for a in have:
            if a not in types:
                raise UnresolvedSymbol(f"class {o.cls} has no attribute {a!r}")
        for a, t in types.items():
            if a not in have:
                problems.append(f"{o.id}.{a} has no value")
            elif not t.contains(have[a]):
                problems.append(f"{o.id}.{a} = {format_value(have[a])} outside {t}")
    for c in cd.classes:
        if c.count is not None:
            n = sum(1 for o in s.objects if cd.is_a(o.cls, c.name))
            if not _within(n, c.count[0], c.count[1]):
                problems.append(f"{n} instances of {c.name}, expected {_fmt_mult(*c.count)}")
    for assoc, a_id, b_id in s.links:
        a = cd.assoc(assoc)
        oa, ob = by_id.get(a_id), by_id.get(b_id)
        if oa is None or ob is None:
            problems.append(f"link {assoc}({a_id}, {b_id}) has a dangling end")
        elif not (cd.is_a(oa.cls, a.end_a.cls) and cd.is_a(ob.cls, a.end_b.cls)):
            problems.append(f"link {assoc}({a_id}, {b_id}) connects incompatible classes")
    for a in cd.associations:
        pairs = [(x, y) for n, x, y in s.links if n == a.name]
        for o in s.objects:
            if cd.is_a(o.cls, a.end_a.cls) and (a.end_b.lo, a.end_b.hi) != (0, STAR):
                n = sum(1 for x, _ in pairs if x == o.id)
                if not _within(n, a.end_b.lo, a.end_b.hi):
                    problems.append(f"{o.id} has {n} {a.end_b.role} links in {a.name}, expected {_fmt_mult(a.end_b.lo, a.end_b.hi)}")
            if cd.is_a(o.cls, a.end_b.cls) and (a.end_a.lo, a.end_a.hi) != (0, STAR):
                n = sum(1 for _, y in pairs if y == o.id)
                if not _within(n, a.end_a.lo, a.end_a.hi):
                    problems.append(f"{o.id} has {n} {a.end_a.role} links in {a.name}, expected {_fmt_mult(a.end_a.lo, a.end_a.hi)}")
    for inv in cd.invariants:
        for o in s.objects:
            if cd.is_a(o.cls, inv.cls):
                try:
                    ok = evaluate(inv.expr, o.valuation(), {}, lits)
                except UnresolvedSymbol:
                    raise
                except TypingError:
                    ok = False
                if ok is not True:
                    problems.append(f"{o.id} violates {inv}")
    for sentence in cd.extra:
        pass  # InitialContains constrains initial states only; see holds_in_ts
    return problems


def _within(n: int, lo: int, hi: Optional[int]) -> bool:
    return n >= lo and (hi is None or n <= hi)


def conforms(s: Snapshot, cd: ClassDiagram) -> bool:
    return not conformance_diagnostics(s, cd)


def eval_expr(
    e: Expr,
    s: Snapshot,
    bindings: Mapping[str, Value] = {},
    self_id: Optional[str] = None,
    cd: Optional[ClassDiagram] = None,
) -> Value:
    """Evaluate ``e`` in snapshot ``s``; ``self`` is ``self_id`` (or ``bindings['self']``)."""
    env = dict(bindings)
    oid = self_id if self_id is not None else env.pop("self", None)
    attrs = s.obj(oid).valuation() if oid is not None else {}
    lits = frozenset(cd.enum_literals()) if cd is not None else frozenset()
    return evaluate(e, attrs, env, lits)


def holds_in_state(sentence, s: Snapshot, cd: ClassDiagram) -> bool:
    """Truth of one class-diagram sentence in one snapshot."""
    if isinstance(sentence, Invariant):
        lits = frozenset(cd.enum_literals())
        for o in s.objects:
            if cd.is_a(o.cls, sentence.cls):
                attrs = o.valuation()
                for a in attrs_of(sentence.expr):
                    if a not in attrs:
                        raise UnresolvedSymbol(f"attribute {a!r} absent from object {o.id}")
                if evaluate(sentence.expr, attrs, {}, lits) is not True:
                    return False
        return True
    if isinstance(sentence, ClassCount):
        n = sum(1 for o in s.objects if cd.is_a(o.cls, sentence.cls))
        return _within(n, sentence.lo, sentence.hi)
    if isinstance(sentence, Multiplicity):
        a = cd.assoc(sentence.assoc)
        near, far = (a.end_b, a.end_a) if sentence.end == "a" else (a.end_a, a.end_b)
        for o in s.objects:
            if not cd.is_a(o.cls, near.cls):
                continue
            if sentence.end == "b":
                n = sum(1 for name, x, _ in s.links if name == a.name and x == o.id)
            else:
                n = sum(1 for name, _, y in s.links if name == a.name and y == o.id)
            if not _within(n, sentence.lo, sentence.hi):
                return False
        return True
    if isinstance(sentence, InitialContains):
        return embeds(sentence.snapshot, s, cd)
    raise TypingError(f"not a class-diagram sentence: {sentence!r}")


def embeds(small: Snapshot, big: Snapshot, cd: Optional[ClassDiagram] = None) -> bool:
    """Is there an injective class/value/link-preserving map from ``small`` into ``big``?

    With ``cd`` an object may be matched by an instance of a subclass.
    """
    cands = []
    for o in small.objects:
        want = dict(o.values)
        cands.append([
            b.id for b in big.objects
            if (b.cls == o.cls or (cd is not None and cd.is_a(b.cls, o.cls)))
            and all(b.valuation().get(k) == v for k, v in want.items())
        ])
    big_links = set(big.links)
    ids = [o.id for o in small.objects]

    def search(i, used, mapping):
        if i == len(ids):
            return all((n, mapping[x], mapping[y]) in big_links for n, x, y in small.links)
        for c in cands[i]:
            if c not in used:
                mapping[ids[i]] = c
                if search(i + 1, used | {c}, mapping):
                    return True
        return False

    return search(0, frozenset(), {})


# -- transition systems --------------------------------------------------

@dataclass(frozen=True, order=True)
class Event:
    """A pending event in an object's pool."""

    sender: str
    message: str
    args: Tuple[Value, ...] = ()


@dataclass(frozen=True, order=True)
class EventLabel:
    """Transition label; only ``dispatch`` labels are observable."""

    sender: str
    receiver: str
    message: str
    args: Tuple[Value, ...] = ()
    kind: str = "dispatch"  # dispatch | discard | inject | tau

    @property
    def observable(self) -> bool:
        return self.kind == "dispatch"

    def __str__(self) -> str:
        args = f"({', '.join(format_value(a) for a in self.args)})" if self.args else ""
        return f"{self.sender} -> {self.receiver} : {self.message}{args}"


TAU = EventLabel("", "", "", (), "tau")


@dataclass(frozen=True)
class TSState:
    snapshot: Snapshot
    control: Tuple[Tuple[str, str], ...] = ()  # (object, machine state)
    queues: Tuple[Tuple[str, Tuple[Event, ...]], ...] = ()

    def control_of(self, oid: str) -> Optional[str]:
        for o, st in self.control:
            if o == oid:
                return st
        return None

    def queue_of(self, oid: str) -> Tuple[Event, ...]:
        for o, q in self.queues:
            if o == oid:
                return q
        return ()

    def plain(self) -> "TSState":
        return TSState(self.snapshot)


@dataclass(frozen=True)
class SnapshotTS:
    """Finite transition system over snapshots (optionally with control state)."""

    states: Tuple[TSState, ...]
    initial: Tuple[int, ...]
    transitions: Tuple[Tuple[int, EventLabel, int], ...]
    explored_completely: bool = True
    stats: Tuple[Tuple[str, int], ...] = field(default=(), compare=False)

    @staticmethod
    def build(states, initial, transitions, explored_completely=True, stats=()) -> "SnapshotTS":
        """Index states by first appearance; merges equal states."""
        index: Dict[TSState, int] = {}
        order: List[TSState] = []

        def idx(s):
            if s not in index:
                index[s] = len(order)
                order.append(s)
            return index[s]

        for s in states:
            idx(s)
        init = tuple(sorted({idx(s) for s in initial}))
        trans = sorted({(idx(a), l, idx(b)) for a, l, b in transitions})
        return SnapshotTS(tuple(order), init, tuple(trans), explored_completely, tuple(stats))

    @staticmethod
    def single(state: TSState) -> "SnapshotTS":
        return SnapshotTS((state,), (0,), ())

    def as_sets(self):
        st = self.states
        return (
            frozenset(st),
            frozenset(st[i] for i in self.initial),
            frozenset((st[a], l, st[b]) for a, l, b in self.transitions),
        )

    def same_as(self, other: "SnapshotTS") -> bool:
        """Equality up to state naming."""
        return self.as_sets() == other.as_sets()

    def successors(self) -> Dict[int, List[Tuple[EventLabel, int]]]:
        out: Dict[int, List[Tuple[EventLabel, int]]] = {i: [] for i in range(len(self.states))}
        for a, l, b in self.transitions:
            out[a].append((l, b))
        return out

    def stat(self, key: str, default: int = 0) -> int:
        return dict(self.stats).get(key, default)


def labels_well_typed(ts: SnapshotTS, cd: ClassDiagram) -> List[str]:
    """Problems with transition labels against the receptions of ``cd``."""
    problems = []
    for a, l, _ in ts.transitions:
        if l.kind == "tau":
            continue
        state = ts.states[a].snapshot
        try:
            recv = state.obj(l.receiver)
        except UnresolvedSymbol:
            problems.append(f"label {l}: unknown receiver {l.receiver!r}")
            continue
        rec = cd.receptions(recv.cls).get(l.message) if cd.has_class(recv.cls) else None
        if rec is None:
            problems.append(f"label {l}: {recv.cls} has no reception {l.message!r}")
            continue
        if len(rec.params) != len(l.args) or not all(t.contains(v) for (_, t), v in zip(rec.params, l.args)):
            problems.append(f"label {l}: arguments do not match {l.message}{_fmt_params(rec.params)}")
        if l.sender != "env":
            try:
                state.obj(l.sender)
            except UnresolvedSymbol:
                problems.append(f"label {l}: unknown sender {l.sender!r}")
    return problems


def _fmt_params(params) -> str:
    return "(" + ", ".join(f"{p}: {t}" for p, t in params) + ")"


# -- bounds and enumeration ----------------------------------------------

@dataclass(frozen=True)
class Bounds:
    max_objects: int = 2
    depth: int = 60
    queue_depth: int = 2
    max_states: int = 100000

    def __post_init__(self):
        for k in ("max_objects", "depth", "queue_depth", "max_states"):
            if getattr(self, k) <= 0:
                raise ValueError(f"bound {k} must be positive")


def canonical_id(cls: str, i: int) -> str:
    return f"{cls.lower()}{i}"


def _domain(t: Type):
    if isinstance(t, IntType) and (t.lo is None or t.hi is None):
        raise TypingError(f"attribute type {t} has no finite domain")
    return t.domain()


def enumerate_snapshots(cd: ClassDiagram, bounds: Bounds) -> Iterator[Snapshot]:
    """Conformant snapshots up to isomorphism, in canonical order.

    Objects of class C are named c1..ck ordered by their valuations;
    order is by total size, then per-class valuation tuples, then links.
    """
    classes = sorted(c.name for c in cd.classes)
    attrs = {c: cd.attributes(c) for c in classes}
    domains = {c: [tuple(v) for v in itertools.product(*(_domain(t) for _, t, _ in attrs[c]))] for c in classes}
    lits = frozenset(cd.enum_literals())

    def value_ok(c, vals):
        env = {a: v for (a, _, _), v in zip(attrs[c], vals)}
        for inv in cd.invariants:
            if cd.is_a(c, inv.cls) and evaluate(inv.expr, env, {}, lits) is not True:
                return False
        return True

    allowed = {c: [i for i, v in enumerate(domains[c]) if value_ok(c, v)] for c in classes}
    per_class = {
        c: [combo for k in range(bounds.max_objects + 1)
            for combo in itertools.combinations_with_replacement(allowed[c], k)]
        for c in classes
    }
    configs = list(itertools.product(*(per_class[c] for c in classes)))

    def config_key(cfg):
        return (sum(len(x) for x in cfg), tuple(len(x) for x in cfg), cfg)

    configs.sort(key=config_key)
    for cfg in configs:
        objs: List[Obj] = []
        groups: List[List[int]] = []
        for c, combo in zip(classes, cfg):
            prev = None
            for i, vi in enumerate(combo, start=1):
                vals = domains[c][vi]
                objs.append(Obj(canonical_id(c, i), c, tuple((a, v) for (a, _, _), v in zip(attrs[c], vals))))
                if vi != prev:
                    groups.append([])
                groups[-1].append(len(objs) - 1)
                prev = vi
        if not _counts_ok(cd, objs):
            continue
        for links in _enumerate_links(cd, objs, groups):
            snap = Snapshot(tuple(objs), tuple(sorted(links)))
            if conforms(snap, cd):
                yield snap


def _counts_ok(cd: ClassDiagram, objs: Sequence[Obj]) -> bool:
    for c in cd.classes:
        if c.count is not None:
            n = sum(1 for o in objs if cd.is_a(o.cls, c.name))
            if not _within(n, c.count[0], c.count[1]):
                return False
    return True


def _enumerate_links(cd: ClassDiagram, objs: Sequence[Obj], groups: List[List[int]]):
    """Link sets satisfying the multiplicities, one per orbit under tie permutations."""
    per_assoc = []
    for a in sorted(cd.associations, key=lambda a: a.name):
        pairs = [
            (i, j) for i, x in enumerate(objs) if cd.is_a(x.cls, a.end_a.cls)
            for j, y in enumerate(objs) if cd.is_a(y.cls, a.end_b.cls)
        ]
        options = []
        for k in range(len(pairs) + 1):
            for sub in itertools.combinations(pairs, k):
                if _assoc_mult_ok(a, sub, objs, cd):
                    options.append(tuple((a.name, i, j) for i, j in sub))
        per_assoc.append(options)
    perms = _group_permutations(groups, len(objs))
    seen = set()
    results = []
    for choice in itertools.product(*per_assoc):
        links = tuple(sorted(l for part in choice for l in part))
        canon = min(tuple(sorted((n, p[i], p[j]) for n, i, j in links)) for p in perms)
        if canon in seen:
            continue
        seen.add(canon)
        results.append(canon)
    results.sort(key=lambda ls: (len(ls), ls))
    for ls in results:
        yield [(n, objs[i].id, objs[j].id) for n, i, j in ls]


def _assoc_mult_ok(a: Association, sub, objs, cd) -> bool:
    for i, o in enumerate(objs):
        if cd.is_a(o.cls, a.end_a.cls):
            n = sum(1 for x, _ in sub if x == i)
            if not _within(n, a.end_b.lo, a.end_b.hi):
                return False
        if cd.is_a(o.cls, a.end_b.cls):
            n = sum(1 for _, y in sub if y == i)
            if not _within(n, a.end_a.lo, a.end_a.hi):
                return False
    return True


def _group_permutations(groups: List[List[int]], n: int) -> List[Tuple[int, ...]]:
    perms = [tuple(range(n))]
    for g in groups:
        if len(g) < 2:
            continue
        nxt = []
        for base in perms:
            for image in itertools.permutations(g):
                p = list(base)
                for src, dst in zip(g, image):
                    p[src] = base[dst]
                nxt.append(tuple(p))
        perms = nxt
    return perms


# -- object diagrams -----------------------------------------------------

def parse_value(cur: Cursor) -> Value:
    t = cur.tok
    if t.kind == "int" or cur.at("-"):
        return cur.integer()
    if t.kind == "ident":
        cur.advance()
        if t.text == "true":
            return True
        if t.text == "false":
            return False
        return t.text
    cur.error(f"expected value, found {cur.describe(t)}")


def parse_od(text: str, source: str = "", cd: Optional[ClassDiagram] = None) -> ObjectDiagram:
    """Parse an object diagram.  Attribute values are not range-checked here."""
    cur = Cursor(text, source)
    cur.expect("objectdiagram")
    name = cur.ident("diagram name")
    cur.expect("for")
    context = cur.ident("class diagram name")
    if cd is not None and cd.name != context:
        cur.error(f"object diagram refers to unknown context {context!r}")
    cur.expect("{")
    objs: List[Obj] = []
    links: List[Tuple[str, str, str]] = []
    while True:
        cur.skip_semis()
        if cur.accept("}"):
            break
        t = cur.tok
        if cur.accept("link"):
            assoc = cur.ident("association name")
            cur.expect("(")
            a = cur.ident("object id")
            cur.expect(",")
            b = cur.ident("object id")
            cur.expect(")")
            links.append((assoc, a, b))
            continue
        oid = cur.ident("object id")
        cur.expect(":")
        cls = cur.ident("class name")
        vals = []
        if cur.accept("{"):
            while True:
                cur.skip_semis()
                if cur.accept("}"):
                    break
                a = cur.ident("attribute name")
                cur.expect("=")
                vals.append((a, parse_value(cur)))
                cur.accept(",")
        if any(o.id == oid for o in objs):
            cur.error(f"duplicate object id {oid!r}", t)
        objs.append(Obj(oid, cls, tuple(vals)))
    cur.skip_semis()
    cur.expect_eof()
    ids = {o.id for o in objs}
    for n, a, b in links:
        if a not in ids or b not in ids:
            raise DiagnosticError([Diagnostic(f"link {n}({a}, {b}) references an unknown object")], source)
    if cd is not None:
        objs = [_order_values(o, cd) for o in objs]
    return ObjectDiagram(name, context, Snapshot.make(objs, links))


def _order_values(o: Obj, cd: ClassDiagram) -> Obj:
    if not cd.has_class(o.cls):
        return o
    order = [a for a, _, _ in cd.attributes(o.cls)]
    have = dict(o.values)
    ranked = sorted(have, key=lambda a: order.index(a) if a in order else len(order))
    return Obj(o.id, o.cls, tuple((a, have[a]) for a in ranked))


def format_snapshot(s: Snapshot, indent: str = "") -> List[str]:
    lines = []
    for o in s.objects:
        vals = " ".join(f"{a} = {format_value(v)}" for a, v in o.values)
        lines.append(f"{indent}{o.id}: {o.cls} {{ {vals} }}" if vals else f"{indent}{o.id}: {o.cls} {{ }}")
    for n, a, b in s.links:
        lines.append(f"{indent}link {n} ({a}, {b})")
    return lines


def format_od(name: str, context: str, s: Snapshot) -> str:
    body = format_snapshot(s, "  ")
    return "\n".join([f"objectdiagram {name} for {context} {{", *body, "}"]) + "\n"


def format_type(t: Type) -> str:
    return str(t)


def format_cd(cd: ClassDiagram) -> str:
    out = [f"classdiagram {cd.name}"]
    for c in cd.classes:
        head = f"class {c.name}"
        if c.count is not None:
            head += f" [{_fmt_mult(*c.count)}]"
        if c.parent:
            head += f" extends {c.parent}"
        out.append(head + " {")
        for a, t in c.attributes:
            out.append(f"  attr {a}: {t} ;")
        for r in c.receptions:
            ps = ", ".join(f"{p}: {t}" for p, t in r.params)
            out.append(f"  reception {r.name}({ps}) ;")
        out.append("}")
    for a in cd.associations:
        out.append(
            f"assoc {a.name} : {a.end_a.cls} [{_fmt_mult(a.end_a.lo, a.end_a.hi)}] {a.end_a.role}"
            f" -- {a.end_b.role} [{_fmt_mult(a.end_b.lo, a.end_b.hi)}] {a.end_b.cls}"
        )
    for inv in cd.invariants:
        out.append(str(inv))
    return "\n".join(out) + "\n"
