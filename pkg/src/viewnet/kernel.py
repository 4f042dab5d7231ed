"""Institution framework: theories, realizations, satisfaction and reducts.

Four institutions are built in: class diagrams (CD), state machines (STM),
interactions (SD) and composite structures (CMP).  Every value here is
immutable; every operation is a pure function.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

from .errors import TypingError, UnresolvedSymbol
from .expr import rename_attrs
from .structural import (
    AssocEnd,
    Association,
    ClassCount,
    ClassDecl,
    ClassDiagram,
    EventLabel,
    Event,
    InitialContains,
    Invariant,
    Multiplicity,
    Obj,
    Reception,
    Snapshot,
    SnapshotTS,
    Symbol,
    TSState,
    TAU,
    holds_in_state,
    sentence_symbols,
)


class InstitutionId(str, enum.Enum):
    CD = "CD"
    STM = "STM"
    SD = "SD"
    CMP = "CMP"

    def __str__(self) -> str:
        return self.value


TS_INSTITUTIONS = (InstitutionId.CD, InstitutionId.STM, InstitutionId.CMP)


@dataclass(frozen=True)
class Theory:
    institution: InstitutionId
    signature: Any
    sentences: Tuple[Any, ...] = ()

    def symbols(self) -> frozenset:
        return self.signature.symbols()


@dataclass(frozen=True)
class Realization:
    institution: InstitutionId
    body: Any  # SnapshotTS for CD/STM/CMP, a trace set for SD
    signature: Any = None

    def __post_init__(self):
        from .interaction import is_trace_set

        if self.institution is InstitutionId.SD:
            if not is_trace_set(self.body):
                raise TypingError("SD realizations are trace sets")
        elif not isinstance(self.body, SnapshotTS):
            raise TypingError(f"{self.institution} realizations are snapshot transition systems")


# -- signature morphisms -------------------------------------------------

@dataclass(frozen=True)
class SignatureMorphism:
    institution: InstitutionId
    source: Any
    target: Any
    mapping: Tuple[Tuple[Symbol, Symbol], ...]

    def __post_init__(self):
        src = self.source.symbols()
        tgt = self.target.symbols()
        m = dict(self.mapping)
        missing = src - set(m)
        if missing:
            raise UnresolvedSymbol(f"morphism not total, unmapped: {', '.join(sorted(map(str, missing)))}")
        images = list(m.values())
        if len(set(images)) != len(images):
            raise TypingError("signature morphism is not injective")
        for a, b in m.items():
            if a.kind != b.kind:
                raise TypingError(f"morphism maps {a} to {b}: kinds differ")
            if b not in tgt:
                raise UnresolvedSymbol(f"morphism image {b} not in target signature")
            if a.kind in ("attribute", "reception"):
                ca = a.name.split(".", 1)[0]
                cb = b.name.split(".", 1)[0]
                if m.get(Symbol("class", ca)) != Symbol("class", cb):
                    raise TypingError(f"morphism maps {a} to {b} but not class {ca} to {cb}")

    @property
    def map(self) -> Dict[Symbol, Symbol]:
        return dict(self.mapping)

    @staticmethod
    def make(institution, source, target, mapping: Mapping[Symbol, Symbol]) -> "SignatureMorphism":
        return SignatureMorphism(institution, source, target, tuple(sorted(mapping.items(), key=_symkey)))

    @staticmethod
    def identity(institution, sig) -> "SignatureMorphism":
        return SignatureMorphism.make(institution, sig, sig, {s: s for s in sig.symbols()})

    @staticmethod
    def inclusion(institution, sub, sig) -> "SignatureMorphism":
        return SignatureMorphism.make(institution, sub, sig, {s: s for s in sub.symbols()})

    def compose(self, then: "SignatureMorphism") -> "SignatureMorphism":
        """``then ∘ self``: first self, then ``then``."""
        if then.source.symbols() != self.target.symbols():
            raise TypingError("cannot compose: middle signatures differ")
        m, n = self.map, then.map
        return SignatureMorphism.make(self.institution, self.source, then.target, {a: n[b] for a, b in m.items()})


def _symkey(item):
    return (item[0].kind, item[0].name)


def renaming(institution, cd: ClassDiagram, names: Mapping[str, str]) -> SignatureMorphism:
    """Rename classes / associations (by name) and members (``C.x`` keys) of a CD signature."""
    mapping = {}
    for s in cd.symbols():
        if s.kind in ("class", "association"):
            mapping[s] = Symbol(s.kind, names.get(s.name, s.name))
        else:
            cls, member = s.name.split(".", 1)
            new_cls = names.get(cls, cls)
            new_member = names.get(s.name, member)
            mapping[s] = Symbol(s.kind, f"{new_cls}.{new_member}")
    target = rename_cd(cd, mapping)
    return SignatureMorphism.make(institution, cd, target, mapping)


def rename_cd(cd: ClassDiagram, mapping: Mapping[Symbol, Symbol]) -> ClassDiagram:
    """Image of a class diagram (signature and sentences) under a symbol map."""

    def cname(c):
        return mapping[Symbol("class", c)].name

    def member(kind, cls, m):
        return mapping[Symbol(kind, f"{cls}.{m}")].name.split(".", 1)[1]

    classes = []
    for c in cd.classes:
        classes.append(
            ClassDecl(
                cname(c.name),
                tuple((member("attribute", c.name, a), t) for a, t in c.attributes),
                tuple(Reception(member("reception", c.name, r.name), r.params) for r in c.receptions),
                cname(c.parent) if c.parent else None,
                c.count,
            )
        )
    assocs = tuple(
        Association(
            mapping[Symbol("association", a.name)].name,
            replace(a.end_a, cls=cname(a.end_a.cls)),
            replace(a.end_b, cls=cname(a.end_b.cls)),
        )
        for a in cd.associations
    )
    sig = ClassDiagram(cd.name, tuple(classes), assocs)
    sentences = [_translate_cd_sentence(s, cd, mapping) for s in cd.sentences()]
    return sig.with_sentences(sentences)


# -- sentence translation --------------------------------------------------

def translate_sentence(phi, sigma: SignatureMorphism):
    if sigma.institution is InstitutionId.SD:
        from .interaction import rename_term

        return rename_term(phi, sigma.map)
    return _translate_cd_sentence(phi, _cd_of(sigma.source), sigma.map)


def _translate_cd_sentence(phi, cd: ClassDiagram, mapping: Mapping[Symbol, Symbol]):
    def cname(c):
        s = Symbol("class", c)
        if s not in mapping:
            raise UnresolvedSymbol(f"class {c!r} is not mapped")
        return mapping[s].name

    if isinstance(phi, Invariant):
        owners = {a: o for a, _, o in cd.attributes(phi.cls)}
        amap = {}
        for a, o in owners.items():
            s = Symbol("attribute", f"{o}.{a}")
            if s in mapping:
                amap[a] = mapping[s].name.split(".", 1)[1]
        return Invariant(cname(phi.cls), rename_attrs(phi.expr, amap))
    if isinstance(phi, Multiplicity):
        s = Symbol("association", phi.assoc)
        if s not in mapping:
            raise UnresolvedSymbol(f"association {phi.assoc!r} is not mapped")
        return Multiplicity(mapping[s].name, phi.end, phi.lo, phi.hi)
    if isinstance(phi, ClassCount):
        return ClassCount(cname(phi.cls), phi.lo, phi.hi)
    if isinstance(phi, InitialContains):
        inv = _Forward(cd, mapping)
        return InitialContains(inv.snapshot(phi.snapshot), phi.source)
    raise TypingError(f"cannot translate {phi!r}")


class _Forward:
    """Rename snapshot contents along a (total) symbol map."""

    def __init__(self, cd: ClassDiagram, mapping):
        self.cd = cd
        self.m = mapping

    def snapshot(self, s: Snapshot) -> Snapshot:
        objs = []
        for o in s.objects:
            owners = {a: ow for a, _, ow in self.cd.attributes(o.cls)}
            vals = tuple((self.m[Symbol("attribute", f"{owners[a]}.{a}")].name.split(".", 1)[1], v) for a, v in o.values)
            objs.append(Obj(o.id, self.m[Symbol("class", o.cls)].name, vals))
        links = [(self.m[Symbol("association", n)].name, a, b) for n, a, b in s.links]
        return Snapshot.make(objs, links)


def _cd_of(sig) -> ClassDiagram:
    if isinstance(sig, ClassDiagram):
        return sig
    cd = getattr(sig, "cd", None)
    if isinstance(cd, ClassDiagram):
        return cd
    raise TypingError(f"no class-diagram signature in {type(sig).__name__}")


# -- reducts -------------------------------------------------------------

def reduct(r: Realization, sigma: SignatureMorphism) -> Realization:
    """Restrict ``r`` (over sigma's target) to sigma's source signature."""
    if r.institution is not sigma.institution:
        raise TypingError(f"realization is {r.institution}, morphism is {sigma.institution}")
    if r.signature is not None and r.signature.symbols() != sigma.target.symbols():
        raise TypingError("morphism target does not match the realization's signature")
    if r.institution is InstitutionId.SD:
        from .interaction import reduct_traces

        return Realization(r.institution, reduct_traces(r.body, sigma.map), sigma.source)
    back = _Backward(_cd_of(sigma.target), sigma.map)
    ts = r.body
    states = [back.state(s) for s in ts.states]
    trans = [(states[a], back.label(l, ts.states[a]), states[b]) for a, l, b in ts.transitions]
    body = SnapshotTS.build(states, [states[i] for i in ts.initial], trans, ts.explored_completely, ts.stats)
    return Realization(r.institution, body, sigma.source)


class _Backward:
    """Inverse image of target-level snapshots along an injective symbol map."""

    def __init__(self, target: ClassDiagram, mapping: Mapping[Symbol, Symbol]):
        self.t = target
        self.inv = {b: a for a, b in mapping.items()}

    def _cls(self, c) -> Optional[str]:
        # an object of a hidden subclass survives as its nearest visible ancestor
        chain = self.t.ancestors(c) if self.t.has_class(c) else [c]
        for a in chain:
            s = self.inv.get(Symbol("class", a))
            if s is not None:
                return s.name
        return None

    def snapshot(self, s: Snapshot) -> Snapshot:
        objs = []
        kept = set()
        for o in s.objects:
            c = self._cls(o.cls)
            if c is None:
                continue
            owners = {a: ow for a, _, ow in self.t.attributes(o.cls)} if self.t.has_class(o.cls) else {}
            vals = []
            for a, v in o.values:
                src = self.inv.get(Symbol("attribute", f"{owners.get(a, o.cls)}.{a}"))
                if src is not None:
                    vals.append((src.name.split(".", 1)[1], v))
            objs.append(Obj(o.id, c, tuple(vals)))
            kept.add(o.id)
        links = []
        for n, a, b in s.links:
            src = self.inv.get(Symbol("association", n))
            if src is not None and a in kept and b in kept:
                links.append((src.name, a, b))
        return Snapshot.make(objs, links)

    def message(self, snap: Snapshot, receiver: str, message: str) -> Optional[str]:
        try:
            o = snap.obj(receiver)
        except UnresolvedSymbol:
            return None
        if not self.t.has_class(o.cls):
            return None
        owner = self.t.reception_owner(o.cls, message)
        if owner is None:
            return None
        src = self.inv.get(Symbol("reception", f"{owner}.{message}"))
        return src.name.split(".", 1)[1] if src else None

    def label(self, l: EventLabel, pre: TSState) -> EventLabel:
        if l.kind == "tau":
            return l
        snap = pre.snapshot
        kept = {o.id for o in self.snapshot(snap).objects}
        if l.receiver not in kept or (l.sender != "env" and l.sender not in kept):
            return TAU
        m = self.message(snap, l.receiver, l.message)
        if m is None:
            return TAU
        return replace(l, message=m)

    def state(self, s: TSState) -> TSState:
        snap = self.snapshot(s.snapshot)
        kept = set(snap.ids())
        control = tuple((o, st) for o, st in s.control if o in kept)
        queues = []
        for o, q in s.queues:
            if o not in kept:
                continue
            events = []
            for e in q:
                m = self.message(s.snapshot, o, e.message)
                if m is not None and (e.sender == "env" or e.sender in kept):
                    events.append(Event(e.sender, m, e.args))
            queues.append((o, tuple(events)))
        return TSState(snap, control, tuple(queues))


# -- satisfaction --------------------------------------------------------

def satisfies(r: Realization, phi, institution: Optional[InstitutionId] = None) -> bool:
    """Does realization ``r`` satisfy sentence ``phi``?"""
    if institution is not None and institution is not r.institution:
        raise TypingError(f"sentence of {institution} against a {r.institution} realization")
    if r.institution is InstitutionId.SD:
        from .interaction import Interaction, sd_satisfies

        if not isinstance(phi, Interaction):
            raise TypingError(f"{type(phi).__name__} is not an interaction sentence")
        return sd_satisfies(r.body, phi, "exists")
    from .behavioral import CompositeStructure, StateMachine, composite_satisfied, machine_satisfied

    if isinstance(phi, StateMachine):
        if r.institution not in (InstitutionId.STM, InstitutionId.CMP):
            raise TypingError("machine sentences belong to STM/CMP")
        return machine_satisfied(r.body, phi, _cd_of(r.signature))
    if isinstance(phi, CompositeStructure):
        if r.institution is not InstitutionId.CMP:
            raise TypingError("composite sentences belong to CMP")
        return composite_satisfied(r.body, phi, r.signature)
    if not isinstance(phi, (Invariant, Multiplicity, ClassCount, InitialContains)):
        raise TypingError(f"{type(phi).__name__} is not a class-diagram sentence")
    if r.signature is not None:
        cd = _cd_of(r.signature)
        missing = sentence_symbols(cd, phi) - cd.symbols()
        if missing:
            raise UnresolvedSymbol(f"sentence uses undeclared {', '.join(sorted(map(str, missing)))}")
    else:
        cd = None
    ts = r.body
    if isinstance(phi, InitialContains):
        return any(holds_in_state(phi, ts.states[i].snapshot, cd) for i in ts.initial)
    if cd is None:
        raise TypingError("class-diagram realization without signature")
    return all(holds_in_state(phi, s.snapshot, cd) for s in ts.states)


def check_satisfaction_condition(sigma: SignatureMorphism, r: Realization, phi) -> bool:
    """The institution law: M|σ ⊨ φ  iff  M ⊨ σ(φ)."""
    return satisfies(reduct(r, sigma), phi) == satisfies(r, translate_sentence(phi, sigma))


# -- institution (co)morphisms -------------------------------------------

@dataclass(frozen=True)
class InstitutionMorphism:
    """Projection to a poorer institution (used by ``hide along``)."""

    name: str
    source: InstitutionId
    target: InstitutionId
    sig_project: Callable[[Any], Any] = field(compare=False)
    real_translate: Callable[..., Realization] = field(compare=False)


@dataclass(frozen=True)
class Comorphism:
    """Encoding into a richer institution (used by ``with translation``)."""

    name: str
    source: InstitutionId
    target: InstitutionId
    theory_embed: Callable[[Theory], Theory] = field(compare=False)
    real_reduce: Callable[..., Realization] = field(compare=False)
