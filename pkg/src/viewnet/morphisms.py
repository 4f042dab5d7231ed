"""The four built-in translations and the derived-model constructs using them.

``sd2cd`` and ``cmp2sd`` are institution morphisms (``hide along``);
``cd2stm`` and ``stm2cmp`` are comorphisms (``with translation``).
"""

from __future__ import annotations

from dataclasses import replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

from .behavioral import (
    CompositeSignature,
    CompositeStructure,
    MachineSignature,
    Part,
    StateMachine,
)
from .errors import AmbiguityError, TypingError, UnresolvedSymbol
from .interaction import (
    Interaction,
    SDSignature,
    SystemTraces,
    TraceSet,
    sd_signature,
)
from .kernel import (
    Comorphism,
    InstitutionId,
    InstitutionMorphism,
    Realization,
    SignatureMorphism,
    Theory,
    reduct,
    renaming,
)
from .structural import (
    ClassDecl,
    ClassDiagram,
    Obj,
    Reception,
    Snapshot,
    SnapshotTS,
    Symbol,
    TSState,
)

DEFAULT_DEPTH = 60


# -- theory helpers --------------------------------------------------------

def cd_of_theory(th: Theory) -> ClassDiagram:
    """The class-diagram part (signature and CD sentences) of any TS-level theory."""
    sig = th.signature if isinstance(th.signature, ClassDiagram) else getattr(th.signature, "cd", None)
    if sig is None:
        raise TypingError(f"{th.institution} theory has no class-diagram part")
    return sig.with_sentences([s for s in th.sentences if _is_cd_sentence(s)])


def _is_cd_sentence(s) -> bool:
    return not isinstance(s, (StateMachine, CompositeStructure, Interaction))


def machines_of(th: Theory) -> List[StateMachine]:
    return [s for s in th.sentences if isinstance(s, StateMachine)]


def composite_of(th: Theory) -> Optional[CompositeStructure]:
    for s in th.sentences:
        if isinstance(s, CompositeStructure):
            return s
    return None


def cd_theory(cd: ClassDiagram) -> Theory:
    return Theory(InstitutionId.CD, cd.signature(), cd.sentences())


def sd_theory(th: Interaction, cd: Optional[ClassDiagram] = None) -> Theory:
    return Theory(InstitutionId.SD, sd_signature(th, cd), (th,))


def _dedupe(items: Iterable) -> tuple:
    out = []
    for x in items:
        if x not in out:
            out.append(x)
    return tuple(out)


def amalgamate_cd(a: ClassDiagram, b: ClassDiagram, name: Optional[str] = None) -> ClassDiagram:
    """Union of two diagrams that agree on their shared classes and associations."""
    classes = list(a.signature().classes)
    for c in b.signature().classes:
        mine = next((x for x in classes if x.name == c.name), None)
        if mine is None:
            classes.append(c)
        elif mine != c:
            raise TypingError(f"class {c.name} is declared differently in {a.name} and {b.name}")
    assocs = list(a.signature().associations)
    for x in b.signature().associations:
        mine = next((y for y in assocs if y.name == x.name), None)
        if mine is None:
            assocs.append(x)
        elif mine != x:
            raise TypingError(f"association {x.name} is declared differently in {a.name} and {b.name}")
    sig = ClassDiagram(name or a.name, tuple(classes), tuple(assocs))
    return sig.with_sentences(_dedupe(a.sentences() + b.sentences()))


def amalgamate(x: Theory, y: Theory) -> Theory:
    """Theory union for ``and``; shared symbols must agree."""
    if x.institution is not y.institution:
        raise TypingError(f"cannot combine a {x.institution} model with a {y.institution} model")
    inst = x.institution
    if inst is InstitutionId.SD:
        raise TypingError("interactions cannot be combined with 'and'")
    cd = amalgamate_cd(cd_of_theory(x), cd_of_theory(y))
    machines = _merge_machines(machines_of(x), machines_of(y))
    if inst is InstitutionId.CD:
        return cd_theory(cd)
    if inst is InstitutionId.STM:
        return Theory(inst, MachineSignature(cd.signature(), tuple(m.name for m in machines)), cd.sentences() + tuple(machines))
    comp = merge_composites(composite_of(x), composite_of(y), machines)
    return _cmp_theory(cd, machines, comp)


def _merge_machines(a: Sequence[StateMachine], b: Sequence[StateMachine]) -> List[StateMachine]:
    out = list(a)
    for m in b:
        mine = next((x for x in out if x.name == m.name), None)
        if mine is None:
            out.append(m)
        elif mine != m:
            raise TypingError(f"machine {m.name} is defined twice with different bodies")
    return out


def merge_composites(a: Optional[CompositeStructure], b: Optional[CompositeStructure], machines) -> CompositeStructure:
    if a is None and b is None:
        return CompositeStructure("", (), (), (), tuple(machines))
    if a is None or b is None:
        c = a or b
        return replace(c, bound=tuple(machines))
    parts = list(a.parts)
    for p in b.parts:
        mine = next((x for x in parts if x.name == p.name), None)
        if mine is None:
            parts.append(p)
        elif (mine.cls, mine.machine) != (p.cls, p.machine):
            if mine.name == "cid":
                raise AmbiguityError("generic part 'cid' occurs twice; rename it with 'with cid |-> NAME'")
            raise TypingError(f"part {p.name} is declared differently in the combined components")
    name = b.name or a.name
    return CompositeStructure(name, tuple(parts), _dedupe(a.connectors + b.connectors), _dedupe(a.gates + b.gates), tuple(machines))


def _cmp_theory(cd: ClassDiagram, machines: Sequence[StateMachine], comp: CompositeStructure) -> Theory:
    sig = CompositeSignature(cd.signature(), tuple(m.name for m in machines), tuple((p.name, p.cls) for p in comp.parts))
    return Theory(InstitutionId.CMP, sig, cd.sentences() + tuple(machines) + (comp,))


def extend(th: Theory, block) -> Theory:
    """``th then block``: add a native view (class diagram, machine or component)."""
    inst = th.institution
    if isinstance(block, ClassDiagram):
        cd = amalgamate_cd(cd_of_theory(th), block)
        if inst is InstitutionId.CD:
            return cd_theory(cd)
        return replace(th, signature=replace(th.signature, cd=cd.signature()), sentences=cd.sentences() + tuple(s for s in th.sentences if not _is_cd_sentence(s)))
    if isinstance(block, StateMachine):
        if inst is not InstitutionId.STM:
            raise TypingError(f"a machine definition extends an STM model, not {inst}")
        cd = cd_of_theory(th)
        if not cd.has_class(block.context):
            raise UnresolvedSymbol(f"machine {block.name} is for unknown class {block.context!r}")
        machines = _merge_machines(machines_of(th), [block])
        return Theory(inst, MachineSignature(cd.signature(), tuple(m.name for m in machines)), cd.sentences() + tuple(machines))
    if isinstance(block, CompositeStructure):
        if inst is not InstitutionId.CMP:
            raise TypingError(f"a component extends a CMP model, not {inst}")
        cd = cd_of_theory(th)
        machines = machines_of(th)
        comp = merge_composites(composite_of(th), block, machines)
        return _cmp_theory(cd, machines, comp)
    if isinstance(block, Interaction):
        raise TypingError("interactions cannot extend a model with 'then'")
    raise TypingError(f"cannot extend with {type(block).__name__}")


def rename_theory(th: Theory, names: Mapping[str, str]) -> Theory:
    """Apply a ``with a |-> b`` symbol map: part names for CMP, CD names otherwise."""
    if not names:
        return th
    if th.institution is InstitutionId.CMP:
        comp = composite_of(th)
        known = {p.name for p in comp.parts}
        unknown = sorted(set(names) - known)
        if unknown:
            raise UnresolvedSymbol(f"symbol map mentions unknown part(s) {', '.join(unknown)}")
        targets = [names.get(p, p) for p in known]
        if len(set(targets)) != len(targets):
            raise TypingError("symbol map is not injective on parts")

        def pn(n):
            return names.get(n, n)

        parts = tuple(replace(p, name=pn(p.name)) for p in comp.parts)
        conns = tuple(replace(c, a=pn(c.a), b=pn(c.b)) for c in comp.connectors)
        gates = tuple(replace(g, part=pn(g.part)) for g in comp.gates)
        comp = CompositeStructure(comp.name, parts, conns, gates, comp.bound)
        return _cmp_theory(cd_of_theory(th), machines_of(th), comp)
    if th.institution is InstitutionId.CD:
        cd = cd_of_theory(th)
        known = {s.name for s in cd.symbols()}
        unknown = sorted(set(names) - known)
        if unknown:
            raise UnresolvedSymbol(f"symbol map mentions unknown symbol(s) {', '.join(unknown)}")
        sigma = renaming(InstitutionId.CD, cd, names)
        return cd_theory(sigma.target)
    raise TypingError(f"symbol maps on {th.institution} models are not supported")


# -- sd2cd -----------------------------------------------------------------

def sd2cd_project(sig: Union[SDSignature, Interaction], cd: Optional[ClassDiagram] = None, name: str = "") -> ClassDiagram:
    """Class diagram of the lifeline classes with the received messages as receptions."""
    if isinstance(sig, Interaction):
        name = name or f"{sig.name}_cd"
        sig = sd_signature(sig, cd)
    classes: Dict[str, List[Reception]] = {}
    for _, cls in sig.lifelines:
        classes.setdefault(cls, [])
    for cls, m, params in sig.messages:
        recs = classes.setdefault(cls, [])
        if not any(r.name == m for r in recs):
            recs.append(Reception(m, tuple(params)))
    decls = tuple(ClassDecl(c, (), tuple(rs)) for c, rs in classes.items())
    return ClassDiagram(name or "sd2cd", decls)


def typing_snapshot(sig: SDSignature) -> Snapshot:
    """One attribute-free object per lifeline, named after the lifeline."""
    return Snapshot.make([Obj(n, c, ()) for n, c in sig.lifelines])


def sd2cd_translate(r: Realization) -> Realization:
    """A trace set as the prefix tree of typing-only snapshots it organises into."""
    if r.institution is not InstitutionId.SD:
        raise TypingError("sd2cd translates SD realizations")
    sig: SDSignature = r.signature
    if sig is None:
        raise TypingError("sd2cd needs the SD signature of the realization")
    T = r.body.materialize() if isinstance(r.body, SystemTraces) else r.body
    snap = typing_snapshot(sig)
    prefixes = sorted({t[:i] for t in T.traces for i in range(len(t) + 1)} | {()}, key=lambda t: (len(t), t))
    index = {p: k for k, p in enumerate(prefixes)}
    states = [TSState(snap, (("#", f"n{k}"),), ()) for k in range(len(prefixes))]
    trans = [(states[index[p[:-1]]], p[-1], states[index[p]]) for p in prefixes if p]
    body = SnapshotTS.build(states, [states[0]], trans, True, (("states", len(states)),))
    return Realization(InstitutionId.CD, body, sd2cd_project(sig))


# -- cmp2sd ----------------------------------------------------------------

def cmp2sd_project(sig: CompositeSignature) -> SDSignature:
    """Parts become lifelines; every reception of a part class becomes a message."""
    msgs = []
    seen = set()
    for _, cls in sig.parts:
        if cls in seen or not sig.cd.has_class(cls):
            continue
        seen.add(cls)
        for rec in sig.cd.receptions(cls).values():
            msgs.append((cls, rec.name, rec.params))
    return SDSignature(tuple(sig.parts), tuple(msgs))


def cmp2sd_translate(r: Realization, depth: Optional[int] = None) -> Realization:
    if r.institution is not InstitutionId.CMP:
        raise TypingError("cmp2sd translates CMP realizations")
    sig = cmp2sd_project(r.signature) if r.signature is not None else None
    return Realization(InstitutionId.SD, SystemTraces(r.body, depth or DEFAULT_DEPTH), sig)


# -- cd2stm ----------------------------------------------------------------

def cd2stm_embed(th: Theory) -> Theory:
    if th.institution is not InstitutionId.CD:
        raise TypingError(f"cd2stm embeds CD theories, not {th.institution}")
    return Theory(InstitutionId.STM, MachineSignature(th.signature, ()), th.sentences)


def cd2stm_reduce(r: Realization) -> Realization:
    """Forget control states and event pools."""
    if r.institution is not InstitutionId.STM:
        raise TypingError("cd2stm reduces STM realizations")
    ts = r.body
    states = [s.plain() for s in ts.states]
    trans = [(states[a], l, states[b]) for a, l, b in ts.transitions]
    body = SnapshotTS.build(states, [states[i] for i in ts.initial], trans, ts.explored_completely, ts.stats)
    cd = r.signature.cd if r.signature is not None else None
    return Realization(InstitutionId.CD, body, cd)


# -- stm2cmp ---------------------------------------------------------------

GENERIC_PART = "cid"


def stm2cmp_embed(th: Theory) -> Theory:
    """Wrap the machine as a one-part component whose part is called ``cid``."""
    if th.institution is not InstitutionId.STM:
        raise TypingError(f"stm2cmp embeds STM theories, not {th.institution}")
    machines = machines_of(th)
    if len(machines) > 1:
        raise AmbiguityError("stm2cmp wraps a single machine; this model defines several")
    parts = tuple(Part(GENERIC_PART, m.context, m.name) for m in machines)
    comp = CompositeStructure("", parts, (), (), tuple(machines))
    return _cmp_theory(cd_of_theory(th), machines, comp)


def stm2cmp_reduce(r: Realization) -> Realization:
    if r.institution is not InstitutionId.CMP:
        raise TypingError("stm2cmp reduces CMP realizations")
    sig = r.signature
    msig = MachineSignature(sig.cd, sig.machines) if sig is not None else None
    return Realization(InstitutionId.STM, r.body, msig)


REGISTRY: Dict[str, Union[InstitutionMorphism, Comorphism]] = {
    "sd2cd": InstitutionMorphism("sd2cd", InstitutionId.SD, InstitutionId.CD, sd2cd_project, sd2cd_translate),
    "cmp2sd": InstitutionMorphism("cmp2sd", InstitutionId.CMP, InstitutionId.SD, cmp2sd_project, cmp2sd_translate),
    "cd2stm": Comorphism("cd2stm", InstitutionId.CD, InstitutionId.STM, cd2stm_embed, cd2stm_reduce),
    "stm2cmp": Comorphism("stm2cmp", InstitutionId.STM, InstitutionId.CMP, stm2cmp_embed, stm2cmp_reduce),
}


def lookup(name: str, kind=None):
    m = REGISTRY.get(name)
    if m is None:
        raise UnresolvedSymbol(f"unknown translation {name!r}; built-ins are {', '.join(sorted(REGISTRY))}")
    if kind is not None and not isinstance(m, kind):
        what = "institution morphism" if kind is InstitutionMorphism else "comorphism"
        raise TypingError(f"{name} is not an {what}")
    return m


# -- derived-model evaluators ---------------------------------------------

def with_translation_eval(th: Theory, rho: Comorphism, symmap: Optional[Mapping[str, str]] = None) -> Theory:
    if th.institution is not rho.source:
        raise TypingError(f"{rho.name} translates {rho.source} models, got {th.institution}")
    return rename_theory(rho.theory_embed(th), symmap or {})


def hide_along_eval(reals: Iterable[Realization], mu: InstitutionMorphism, **kw) -> List[Realization]:
    out = []
    for r in reals:
        if r.institution is not mu.source:
            raise TypingError(f"{mu.name} applies to {mu.source} realizations, got {r.institution}")
        out.append(mu.real_translate(r, **kw))
    return out


def restrict_signature(institution: InstitutionId, sig, symbols) -> object:
    syms = frozenset(symbols)
    unknown = syms - sig.symbols()
    if unknown:
        raise UnresolvedSymbol(f"cannot reveal undeclared {', '.join(sorted(map(str, unknown)))}")
    if institution is InstitutionId.SD:
        return sig.restrict(syms)
    if institution is InstitutionId.CD:
        return sig.restrict(syms).signature()
    cd = sig.cd.restrict(syms).signature()
    if isinstance(sig, MachineSignature):
        return MachineSignature(cd, tuple(m for m in sig.machines if Symbol("machine", m) in syms))
    return CompositeSignature(
        cd,
        tuple(m for m in sig.machines if Symbol("machine", m) in syms),
        tuple(p for p in sig.parts if Symbol("part", p[0]) in syms),
    )


def reveal_eval(reals: Iterable[Realization], symbols, signature=None) -> List[Realization]:
    out = []
    for r in reals:
        sig = r.signature if signature is None else signature
        sub = restrict_signature(r.institution, sig, symbols)
        out.append(reduct(r, SignatureMorphism.inclusion(r.institution, sub, sig)))
    return out
