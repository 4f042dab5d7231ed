"""Consistency engines for single models, refinement links and networks.

Compatibility of a realization family is operational here: every
refinement link holds (the concrete side's realization is a realization of
the abstract side), and TS-level nodes that share class-diagram symbols have
equal reducts on the shared part.
"""

from __future__ import annotations

import enum
import itertools
import json
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .behavioral import CompositeStructure, StateMachine, System, generate_ts
from .errors import TypingError, UnresolvedSymbol, ViewNetError
from .interaction import (
    ENV,
    Interaction,
    SDSignature,
    SystemTraces,
    TraceSet,
    _Runner,
    accepted_language,
    cd_domain,
    iter_msgs,
    project,
    reduct_traces,
    sd_satisfies,
    sd_to_nfa,
    search_product,
    shortest_accepted,
)
from .kernel import (
    InstitutionId,
    Realization,
    SignatureMorphism,
    Theory,
    TS_INSTITUTIONS,
    reduct,
    satisfies,
)
from .morphisms import (
    amalgamate,
    amalgamate_cd,
    cd_of_theory,
    cmp2sd_project,
    cmp2sd_translate,
    composite_of,
    machines_of,
    restrict_signature,
    sd2cd_translate,
    typing_snapshot,
)
from .netlang import Model, Network, Node, ResolvedGraph
from .structural import (
    Bounds,
    ClassDiagram,
    EventLabel,
    InitialContains,
    Obj,
    Snapshot,
    SnapshotTS,
    TSState,
    embeds,
    enumerate_snapshots,
    format_snapshot,
    holds_in_state,
    labels_well_typed,
)
from .witness import load_realization, ts_digest, write_bundle

COMPATIBILITY = (
    "a family of realizations is compatible when every refinement link holds "
    "(the concrete realization is a realization of the abstract side) and "
    "TS-level nodes sharing class-diagram symbols have equal reducts on them"
)

STRATEGIES = ("incremental", "monolithic", "decentralized")


class Verdict(str, enum.Enum):
    CONSISTENT = "CONSISTENT"
    INCONSISTENT = "INCONSISTENT"
    UNKNOWN = "UNKNOWN"

    def __str__(self) -> str:
        return self.value


@dataclass
class CheckResult:
    """Verdict of one check, with a witness, a certificate or the cap that was hit."""

    name: str
    verdict: Verdict
    witness: Optional[str] = None
    certificate: Tuple[str, ...] = ()
    cap: Optional[str] = None
    taxonomy: Tuple[str, str] = ("semantic", "structural")

    def to_dict(self) -> dict:
        d = {"name": self.name, "verdict": str(self.verdict), "taxonomy": list(self.taxonomy)}
        if self.witness is not None:
            d["witness"] = self.witness
        if self.certificate:
            d["certificate"] = list(self.certificate)
        if self.cap:
            d["cap"] = self.cap
        return d


@dataclass
class Witness:
    """A realization family: initial state, filmstrip and per-node realizations."""

    network: str
    context: str
    initial: TSState
    steps: List[Tuple[EventLabel, TSState]]
    realizations: Dict[str, Realization]

    def events(self) -> List[str]:
        return [str(l) for l, _ in self.steps if l.observable]

    def digests(self) -> Dict[str, dict]:
        out = {}
        for name, r in sorted(self.realizations.items()):
            if r.institution is InstitutionId.SD:
                out[name] = {"traces": len(r.body.traces)}
            else:
                out[name] = {
                    "states": len(r.body.states),
                    "transitions": len(r.body.transitions),
                    "hash": ts_digest(r.body),
                }
        return out

    def write(self, directory: str) -> None:
        write_bundle(directory, self.network, self.context, self.initial, self.steps, self.realizations)

    def to_dict(self) -> dict:
        return {
            "initial": format_snapshot(self.initial.snapshot),
            "filmstrip": self.events(),
            "digests": self.digests(),
        }


@dataclass
class ConsistencyReport:
    network: str
    strategy: str
    verdict: Verdict
    models: List[CheckResult]
    links: List[CheckResult]
    bounds: Bounds
    stats: Dict[str, int] = field(default_factory=dict)
    witness: Optional[Witness] = None
    certificate: Tuple[str, ...] = ()
    cap: Optional[str] = None
    wall_time: float = 0.0

    @property
    def taxonomy(self) -> Dict[str, List[str]]:
        tags = {"resolution": ["syntactic", "structural"]}
        for r in self.models:
            tags[f"model:{r.name}"] = list(r.taxonomy)
        for r in self.links:
            tags[f"link:{r.name}"] = list(r.taxonomy)
        behavioural = any(r.taxonomy[1] == "behavioural" for r in self.models + self.links)
        tags["network"] = ["semantic", "behavioural" if behavioural else "structural"]
        return tags

    def to_dict(self, include_time: bool = False) -> dict:
        d = {
            "network": self.network,
            "strategy": self.strategy,
            "compatibility": COMPATIBILITY,
            "verdict": str(self.verdict),
            "models": [r.to_dict() for r in self.models],
            "links": [r.to_dict() for r in self.links],
            "bounds": {
                "max_objects": self.bounds.max_objects,
                "depth": self.bounds.depth,
                "queue_depth": self.bounds.queue_depth,
                "max_states": self.bounds.max_states,
            },
            "stats": dict(self.stats),
            "taxonomy": self.taxonomy,
        }
        if self.certificate:
            d["certificate"] = list(self.certificate)
        if self.cap:
            d["cap"] = self.cap
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        if include_time:
            d["wall_time"] = round(self.wall_time, 3)
        return d

    def to_json(self, include_time: bool = False) -> str:
        return json.dumps(self.to_dict(include_time), sort_keys=True, indent=2) + "\n"

    def to_text(self, include_time: bool = False) -> str:
        b = self.bounds
        out = [
            f"network {self.network}: {self.verdict}",
            f"strategy {self.strategy}; bounds max-objects {b.max_objects}, depth {b.depth}, "
            f"queue-depth {b.queue_depth}, max-states {b.max_states}",
            f"compatibility: {COMPATIBILITY}",
        ]
        for title, rows in (("models", self.models), ("links", self.links)):
            if rows:
                out.append(f"{title}:")
            for r in rows:
                out.append(f"  {r.name}: {r.verdict} [{'/'.join(r.taxonomy)}]")
                if r.witness:
                    out.append(f"    witness: {r.witness}")
                for c in r.certificate:
                    out.append(f"    - {c}")
                if r.cap:
                    out.append(f"    cap: {r.cap}")
        if self.certificate:
            out.append("certificate:")
            out.extend(f"  - {c}" for c in self.certificate)
        if self.cap:
            out.append(f"cap: {self.cap}")
        if self.witness is not None:
            out.append("witness:")
            out.append("  initial:")
            out.extend(format_snapshot(self.witness.initial.snapshot, "    ") or ["    (empty)"])
            if self.witness.steps:
                out.append("  filmstrip:")
                out.extend(f"    {e}" for e in self.witness.events())
        out.append("stats: " + ", ".join(f"{k} {v}" for k, v in sorted(self.stats.items())))
        if include_time:
            out.append(f"wall time {self.wall_time:.3f} s")
        return "\n".join(out) + "\n"


class _Undecided(Exception):
    """A question the bounded engines cannot answer."""


@dataclass(frozen=True)
class _LazyCD:
    """The sd2cd image of an implicit trace set, kept as its snapshot and labels."""

    snapshots: frozenset
    labels: frozenset
    signature: ClassDiagram
    institution: InstitutionId = InstitutionId.CD


def _taxonomy(inst: InstitutionId) -> Tuple[str, str]:
    return ("semantic", "structural" if inst is InstitutionId.CD else "behavioural")


def _cd_sig(sig) -> ClassDiagram:
    return sig if isinstance(sig, ClassDiagram) else sig.cd


def _fname(key: str) -> str:
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in key)


def _describe(s: Snapshot) -> str:
    lines = format_snapshot(s)
    return "; ".join(lines) if lines else "empty snapshot"


# -- static candidates -------------------------------------------------------

def _rename(s: Snapshot, ren: Dict[str, str]) -> Snapshot:
    objs = [Obj(ren.get(o.id, o.id), o.cls, o.values) for o in s.objects]
    links = [(n, ren.get(a, a), ren.get(b, b)) for n, a, b in s.links]
    return Snapshot.make(objs, links)


def _part_assignments(s: Snapshot, parts: Sequence[Tuple[str, str]]) -> List[Snapshot]:
    """Rename objects after the parts; part classes must match the parts one to one."""
    by_cls: Dict[str, List[str]] = {}
    for p, c in parts:
        by_cls.setdefault(c, []).append(p)
    objs = {c: [o.id for o in s.objects if o.cls == c] for c in by_cls}
    if any(len(objs[c]) != len(by_cls[c]) for c in by_cls):
        return []
    names = {p for p, _ in parts}
    if any(o.cls not in by_cls and o.id in names for o in s.objects):
        return []
    classes = sorted(by_cls)
    out: List[Snapshot] = []
    for perm in itertools.product(*(itertools.permutations(by_cls[c]) for c in classes)):
        ren = {}
        for c, chosen in zip(classes, perm):
            ren.update(zip(objs[c], chosen))
        r = _rename(s, ren)
        if r not in out:
            out.append(r)
    return out


def _static_candidates(cd: ClassDiagram, b: Bounds, parts=()) -> Iterator[Snapshot]:
    """Initial snapshots within bounds satisfying every sentence of ``cd``, in canonical order."""
    initials = [s for s in cd.extra if isinstance(s, InitialContains)]
    others = [s for s in cd.sentences() if not isinstance(s, InitialContains)]
    for snap in enumerate_snapshots(cd, b):
        if not all(holds_in_state(s, snap, cd) for s in others):
            continue
        if not all(embeds(od.snapshot, snap, cd) for od in initials):
            continue
        if parts:
            yield from _part_assignments(snap, parts)
        else:
            yield snap


def _state_violation(ts: SnapshotTS, cd: ClassDiagram) -> Optional[str]:
    sentences = [s for s in cd.sentences() if not isinstance(s, InitialContains)]
    for k, st in enumerate(ts.states):
        for s in sentences:
            if not holds_in_state(s, st.snapshot, cd):
                return f"{s} fails in reachable state {k} ({_describe(st.snapshot)})"
    return None


def _system(cd: ClassDiagram, comp: Optional[CompositeStructure], machines, snap: Snapshot) -> System:
    if comp is not None:
        return System.from_composite(comp, cd)
    return System.from_machines(machines, cd, snap)


def _sd_domain(th: Interaction, sig: Optional[SDSignature]):
    fallback = cd_domain(th, None)
    types = {(c, m): ps for c, m, ps in sig.messages} if sig is not None else {}

    def domain(m, i):
        ps = types.get((th.lifeline_class(m.receiver), m.message))
        if ps and i < len(ps):
            try:
                return list(ps[i][1].domain())
            except (TypingError, TypeError, ValueError):
                pass
        return fallback(m, i)

    return domain


def _covered(th: Interaction, sig: SDSignature, comp_sig) -> bool:
    """Whether the composed system speaks every lifeline and message of ``th``."""
    if comp_sig is None:
        return False
    own = cmp2sd_project(comp_sig)
    lifelines = set(own.lifelines)
    msgs = {(c, m) for c, m, _ in own.messages}
    return all(l in lifelines for l in sig.lifelines) and all((c, m) in msgs for c, m, _ in sig.messages)


# -- membership of a realization in a model's class ------------------------

class _Ctx:
    """Caches shared by the checks of one run."""

    def __init__(self, b: Bounds):
        self.b = b
        self._products: Dict[tuple, tuple] = {}
        self._pools: Dict[tuple, tuple] = {}
        self.explored = 0
        self.matched = 0

    def product(self, ts: SnapshotTS, th: Interaction):
        key = (id(ts), th)
        hit = self._products.get(key)
        if hit is None:
            res = search_product(ts, sd_to_nfa(th), self.b.max_states)
            self.explored += res.explored
            hit = self._products[key] = (ts, res)
        return hit[1]

    def preset(self, ts: SnapshotTS, th: Interaction, res) -> None:
        self._products[(id(ts), th)] = (ts, res)

    def pool(self, base: Model, sub: ClassDiagram):
        """Reducts of the base's bounded snapshots: (all, initial-compatible)."""
        key = (base.label, base.theory, sub)
        if key not in self._pools:
            cd = cd_of_theory(base.theory)
            sigma = SignatureMorphism.inclusion(InstitutionId.CD, sub, cd.signature())
            initials = [s for s in cd.extra if isinstance(s, InitialContains)]
            plain = ClassDiagram(cd.name, cd.classes, cd.associations, cd.invariants)
            every, init = [], []
            for s in enumerate_snapshots(plain, self.b):
                r = reduct(Realization(InstitutionId.CD, SnapshotTS.single(TSState(s)), cd.signature()), sigma)
                small = r.body.states[0].snapshot
                every.append(small)
                if all(embeds(od.snapshot, s, cd) for od in initials):
                    init.append(small)
            self._pools[key] = (every, init)
        return self._pools[key]


def _summary(R) -> Tuple[list, list, list]:
    """(initial snapshots, all snapshots, (snapshot, label) pairs) of a CD-level realization."""
    if isinstance(R, _LazyCD):
        snaps = sorted(R.snapshots, key=repr)
        return snaps, snaps, [(s, l) for s in snaps for l in sorted(R.labels)]
    ts = R.body
    return (
        [ts.states[i].snapshot for i in ts.initial],
        [s.snapshot for s in ts.states],
        [(ts.states[a].snapshot, l) for a, l, _ in ts.transitions],
    )


def _iso(a: Snapshot, b: Snapshot) -> bool:
    return len(a.objects) == len(b.objects) and len(a.links) == len(b.links) and embeds(a, b)


def _reveal_member(R, base: Model, sub: ClassDiagram, ctx: _Ctx):
    if R.institution is not InstitutionId.CD:
        return None, "reveal membership is only decided for class-diagram realizations"
    every, init = ctx.pool(base, sub)
    initial, states, pairs = _summary(R)
    for s in dict.fromkeys(states):
        counts: Dict[str, int] = {}
        for o in s.objects:
            counts[o.cls] = counts.get(o.cls, 0) + 1
        if any(n > ctx.b.max_objects for n in counts.values()):
            return None, f"snapshot with {max(counts.values())} objects of one class exceeds max-objects"
    for s in dict.fromkeys(initial):
        if not any(_iso(s, p) for p in init):
            return False, f"initial snapshot ({_describe(s)}) is not the reduct of any {base.label} snapshot"
    for s in dict.fromkeys(states):
        if not any(_iso(s, p) for p in every):
            return False, f"snapshot ({_describe(s)}) is not the reduct of any {base.label} snapshot"
    snaps = {}
    trans = []
    for s, l in pairs:
        st = snaps.setdefault(s, TSState(s))
        trans.append((st, l, st))
    problems = labels_well_typed(SnapshotTS.build(list(snaps.values()), [], trans), sub)
    if problems:
        return False, problems[0]
    return True, ""


def _sd_member(R, th: Interaction, ctx: _Ctx):
    if R.institution is not InstitutionId.SD:
        raise TypingError(f"interaction {th.name} against a {R.institution} realization")
    body = R.body
    if isinstance(body, SystemTraces):
        from .interaction import product_applies

        if product_applies(body, th):
            res = ctx.product(body.ts, th)
            if res.path is not None:
                ctx.matched += 1
                return True, ""
            if res.complete:
                return False, f"no system trace is accepted by {th.name} (space exhausted)"
            return None, f"no accepted trace for {th.name} within the explored product"
        body = body.materialize()
    if sd_satisfies(body, th, "exists"):
        ctx.matched += 1
        return True, ""
    return False, f"no trace of the realization is accepted by {th.name}"


def _member(R, A: Model, ctx: _Ctx, construction: bool = False):
    """Is ``R`` a realization of ``A``? True, False, or None when undecided; plus a reason."""
    if A.theory is not None:
        if A.institution is InstitutionId.SD:
            return _sd_member(R, A.theory.sentences[0], ctx)
        if isinstance(R, _LazyCD):
            initial, states, _ = _summary(R)
            cd = R.signature
            for s in A.theory.sentences:
                where = initial if isinstance(s, InitialContains) else states
                if isinstance(s, InitialContains):
                    ok = any(holds_in_state(s, x, cd) for x in where)
                else:
                    ok = all(holds_in_state(s, x, cd) for x in where)
                if not ok:
                    return False, f"{s} fails"
            return True, ""
        if R.institution is not A.institution:
            raise TypingError(f"{A.label} is {A.institution}, the realization is {R.institution}")
        for s in A.theory.sentences:
            if construction and isinstance(s, (StateMachine, CompositeStructure)):
                continue
            if not satisfies(R, s):
                return False, f"{s if not isinstance(s, (StateMachine, CompositeStructure)) else type(s).__name__ + ' ' + s.name} fails"
        return True, ""
    kind, base, _ = A.op
    if kind == "reveal" and base.theory is not None and base.institution is InstitutionId.CD:
        return _reveal_member(R, base, A.signature, ctx)
    return None, f"membership in {A.label} is not decided by the bounded engines"


def _derive(model: Model, family: Dict[str, object], b: Bounds):
    """Realization of a model, from the family entries of its flat bases."""
    if model.theory is not None:
        if model.label not in family:
            raise _Undecided(f"no realization for {model.label}")
        return family[model.label]
    kind, base, arg = model.op
    r = _derive(base, family, b)
    if isinstance(r, _LazyCD):
        raise _Undecided(f"cannot derive {model.label} from an implicit realization")
    if kind == "hide":
        if arg == "sd2cd":
            if isinstance(r.body, SystemTraces):
                return _LazyCD(frozenset({typing_snapshot(r.signature)}), r.body.labels(), model.signature)
            return sd2cd_translate(r)
        if arg == "cmp2sd":
            return cmp2sd_translate(r, depth=b.depth)
        raise _Undecided(f"unknown translation {arg}")
    sub = restrict_signature(r.institution, r.signature, arg)
    return reduct(r, SignatureMorphism.inclusion(r.institution, sub, r.signature))


# -- network plans -----------------------------------------------------------

@dataclass
class _Plan:
    network: Network
    links: list
    abstract: Dict[str, Model]  # link name -> abstract model
    concrete: Dict[str, Model]
    flat: Dict[str, Model]  # family key -> flat model needing a realization
    cd: ClassDiagram  # amalgamated class-diagram part, with sentences
    composite: Optional[Theory]
    machines: list

    @property
    def context(self) -> str:
        """Name of the class diagram an initial object diagram refers to."""
        for m in self.flat.values():
            if m.institution is InstitutionId.CD and m.theory is not None:
                if not any(isinstance(x, InitialContains) for x in m.theory.sentences):
                    return m.label
        return self.cd.name

    @property
    def parts(self):
        return self.composite.signature.parts if self.composite is not None else ()

    def interactions(self) -> List[Interaction]:
        out = []
        models = list(self.flat.values()) + list(self.abstract.values())
        for m in models:
            if m.theory is not None and m.institution is InstitutionId.SD:
                th = m.theory.sentences[0]
                if th not in out:
                    out.append(th)
        return out


def _plan(graph: ResolvedGraph, net: Network) -> _Plan:
    flat: Dict[str, Model] = {}

    def bases(m: Model) -> None:
        if m.theory is not None:
            flat.setdefault(m.label, m)
        else:
            bases(m.op[1])

    for n in net.nodes:
        bases(graph.node(n).model)
    links = [graph.links[l] for l in net.links]
    abstract = {k.name: graph.node(k.abstract).model for k in links}
    concrete = {k.name: graph.node(k.concrete).model for k in links}
    for m in concrete.values():
        bases(m)
    ts_models = [m for m in flat.values() if m.institution in TS_INSTITUTIONS]
    cd = ClassDiagram(net.name)
    for m in ts_models:
        cd = amalgamate_cd(cd, cd_of_theory(m.theory), net.name)
    cmps = [m.theory for m in ts_models if m.institution is InstitutionId.CMP]
    composite = None
    for th in cmps:
        composite = th if composite is None else amalgamate(composite, th)
    machines: List[StateMachine] = []
    for m in ts_models:
        for sm in machines_of(m.theory):
            if sm not in machines:
                machines.append(sm)
    return _Plan(net, links, abstract, concrete, flat, cd, composite, machines)


def _project_real(ts: SnapshotTS, cd: ClassDiagram, model: Model) -> Realization:
    """The node's view of the composed TS: forget everything outside its signature."""
    full = cd.signature()
    sub = _cd_sig(model.signature).signature()
    r = reduct(Realization(InstitutionId.CD, ts, full), SignatureMorphism.inclusion(InstitutionId.CD, sub, full))
    body = r.body
    if model.institution is InstitutionId.CD:
        states = [s.plain() for s in body.states]
        body = SnapshotTS.build(
            states,
            [states[i] for i in body.initial],
            [(states[a], l, states[c]) for a, l, c in body.transitions],
            body.explored_completely,
            body.stats,
        )
    return Realization(model.institution, body, model.signature)


@dataclass
class _Attempt:
    ok: bool
    definite: bool
    reasons: List[str]
    links: Dict[str, Tuple[Optional[bool], str]]
    family: Dict[str, object]
    ts: SnapshotTS
    steps: List[Tuple[EventLabel, TSState]]


def _joint_product(system: System, start: TSState, b: Bounds, ths: Sequence[Interaction]):
    """On-the-fly product of the system with every interaction automaton at once.

    Returns the system TS seen by the product and one search result per interaction.
    """
    from .interaction import ProductResult

    system.queue_depth = b.queue_depth
    autos = [sd_to_nfa(th) for th in ths]
    runners = [_Runner(a) for a in autos]
    index = {start: 0}
    states = [start]
    level = [0]
    trans = set()
    moves_cache: Dict[int, list] = {}
    root = (0, tuple(frozenset(r.start()) for r in runners))
    parent: Dict[tuple, Optional[tuple]] = {root: None}
    queue = deque([root])
    found: Dict[int, tuple] = {}
    complete, capped = True, False
    cap = b.max_states * max(1, len(ths))

    def accept(node):
        for k, r in enumerate(runners):
            if k not in found and r.accepting(node[1][k]):
                found[k] = node

    def moves(i):
        if i not in moves_cache:
            moves_cache[i] = system.moves(states[i])
        return moves_cache[i]

    accept(root)
    while queue:
        node = queue.popleft()
        i, cfg = node
        if level[i] >= b.depth:
            if moves(i):
                complete = False
            continue
        for label, succ in moves(i):
            j = index.get(succ)
            if j is None:
                if len(states) >= b.max_states:
                    capped = True
                    continue
                j = index[succ] = len(states)
                states.append(succ)
                level.append(level[i] + 1)
            trans.add((i, label, j))
            ncfg = tuple(
                frozenset(runners[k].step(cfg[k], label))
                if label.observable and label.message in autos[k].alphabet
                else cfg[k]
                for k in range(len(runners))
            )
            nxt = (j, ncfg)
            if nxt not in parent:
                if len(parent) >= cap:
                    capped = True
                    continue
                parent[nxt] = (node, (i, label, j))
                queue.append(nxt)
                accept(nxt)
    done = complete and not capped
    stats = (
        ("states", len(states)),
        ("transitions", len(trans)),
        ("pruned_overflow", system.stats.pruned_overflow),
        ("state_cap_hit", int(capped)),
    )
    ts = SnapshotTS(tuple(states), (0,), tuple(sorted(trans)), done, stats)
    results = []
    for k in range(len(ths)):
        path = None
        if k in found:
            path, n = [], found[k]
            while parent[n] is not None:
                n, edge = parent[n]
                path.append(edge)
            path.reverse()
        results.append(ProductResult(path, done, len(parent)))
    return ts, results, len(parent)


def _attempt(plan: _Plan, snap: Snapshot, b: Bounds, ctx: _Ctx, monolithic: bool) -> _Attempt:
    comp = composite_of(plan.composite) if plan.composite is not None else None
    system = _system(plan.cd, comp, plan.machines, snap)
    if monolithic:
        ths = plan.interactions()
        ts, results, explored = _joint_product(system, system.initial_state(snap), b, ths)
        ctx.explored += explored
        for th, res in zip(ths, results):
            ctx.preset(ts, th, res)
    else:
        ts = generate_ts(system, snap, b)
    reasons: List[str] = []
    definite = True
    bad = _state_violation(ts, plan.cd)
    if bad:
        reasons.append(bad)
    comp_sig = plan.composite.signature if plan.composite is not None else None
    family: Dict[str, object] = {}
    primary_sd = None
    for key, m in plan.flat.items():
        if m.institution in TS_INSTITUTIONS:
            family[key] = _project_real(ts, plan.cd, m)
            continue
        th = m.theory.sentences[0]
        if _covered(th, m.signature, comp_sig):
            lifelines = [n for n, _ in m.signature.lifelines]
            family[key] = Realization(InstitutionId.SD, SystemTraces(ts, b.depth).restrict(th.messages(), lifelines), m.signature)
            primary_sd = primary_sd or (key, th)
        else:
            w = shortest_accepted(th, _sd_domain(th, m.signature))
            if w is None:
                reasons.append(f"{key}: the interaction accepts no trace")
                continue
            family[key] = Realization(InstitutionId.SD, TraceSet.of(w), m.signature)
    for key, m in plan.flat.items():
        if key not in family or m.institution in TS_INSTITUTIONS:
            continue  # TS-level sentences hold by construction or were checked per state
        ok, why = _member(family[key], m, ctx, construction=True)
        if ok is not True:
            reasons.append(f"{key}: {why}")
            definite = definite and ok is False
    links: Dict[str, Tuple[Optional[bool], str]] = {}
    for k in plan.links:
        try:
            R = _derive(plan.concrete[k.name], family, b)
            links[k.name] = _member(R, plan.abstract[k.name], ctx)
        except _Undecided as e:
            links[k.name] = (None, str(e))
        ok, why = links[k.name]
        if ok is not True:
            reasons.append(f"link {k.name}: {why}")
            definite = definite and ok is False
    steps: List[Tuple[EventLabel, TSState]] = []
    if primary_sd is not None:
        res = ctx.product(ts, primary_sd[1])
        if res.path:
            steps = [(l, ts.states[j]) for _, l, j in res.path]
    return _Attempt(not reasons, definite, reasons, links, family, ts, steps)


def _bundle_realizations(plan: _Plan, att: _Attempt, ctx: _Ctx) -> Dict[str, Realization]:
    """Explicit realizations for the witness files; implicit trace sets become the witness trace."""
    out = {}
    for key, r in att.family.items():
        if isinstance(r.body, SystemTraces):
            th = plan.flat[key].theory.sentences[0]
            res = ctx.product(att.ts, th)
            trace = project([l for _, l, _ in res.path or []], th.messages())
            r = Realization(InstitutionId.SD, TraceSet.of(trace), r.signature)
        out[_fname(key)] = r
    return out


def _cap(ts: SnapshotTS) -> Optional[str]:
    if ts.explored_completely:
        return None
    return "max-states" if ts.stat("state_cap_hit") else "depth"


def _search(graph: ResolvedGraph, net: Network, b: Bounds, monolithic: bool):
    plan = _plan(graph, net)
    ctx = _Ctx(b)
    stats = {"candidates": 0, "states": 0, "transitions": 0, "pruned_overflow": 0, "incomplete_searches": 0}
    link_seen: Dict[str, List[Tuple[Optional[bool], str]]] = {k.name: [] for k in plan.links}
    certificate: List[str] = []
    definite = True
    cap = None
    for snap in _static_candidates(plan.cd, b, plan.parts):
        stats["candidates"] += 1
        att = _attempt(plan, snap, b, ctx, monolithic)
        stats["states"] += len(att.ts.states)
        stats["transitions"] += len(att.ts.transitions)
        stats["pruned_overflow"] += att.ts.stat("pruned_overflow")
        cap = cap or _cap(att.ts)
        for name, res in att.links.items():
            link_seen[name].append(res)
        if att.ok:
            witness = Witness(net.name, plan.context, att.ts.states[att.ts.initial[0]], att.steps, _bundle_realizations(plan, att, ctx))
            return Verdict.CONSISTENT, witness, link_seen, (), None, stats, ctx
        definite = definite and att.definite
        stats["incomplete_searches"] += not att.definite
        if len(certificate) < 5:
            certificate.append(f"initial snapshot {_describe(snap)}: {att.reasons[0]}")
    if stats["candidates"] == 0:
        certificate.append("no initial snapshot satisfies the static views within the bounds (enumeration exhausted)")
        return Verdict.INCONSISTENT, None, link_seen, tuple(certificate), None, stats, ctx
    verdict = Verdict.INCONSISTENT if definite else Verdict.UNKNOWN
    return verdict, None, link_seen, tuple(certificate), (cap if not definite else None), stats, ctx


def _link_result(name: str, inst: InstitutionId, seen: List[Tuple[Optional[bool], str]], held: bool) -> CheckResult:
    tax = _taxonomy(inst)
    if held or any(ok is True for ok, _ in seen):
        return CheckResult(name, Verdict.CONSISTENT, witness="holds in the witness family" if held else "holds for some candidate family", taxonomy=tax)
    reasons = tuple(dict.fromkeys(why for _, why in seen))[:5]
    if seen and all(ok is False for ok, _ in seen):
        return CheckResult(name, Verdict.INCONSISTENT, certificate=reasons, taxonomy=tax)
    return CheckResult(name, Verdict.UNKNOWN, certificate=reasons or ("no candidate family to test",), taxonomy=tax)


# -- decentralized -------------------------------------------------------------

def check_decentralized_compat(rA: Realization, rB: Realization, shared) -> bool:
    """Equal reducts on the shared signature, up to state naming (TS) or as sets (traces)."""
    shared = frozenset(shared)
    for r in (rA, rB):
        if r.signature is None or not shared <= r.signature.symbols():
            raise TypingError("the shared signature is not part of both realizations")
    sd = [r.institution is InstitutionId.SD for r in (rA, rB)]
    if any(sd) and not all(sd):
        raise TypingError("cannot compare a trace set with a transition system")
    if all(sd):
        def traces(r):
            ident = {s: s for s in shared if s.kind in ("lifeline", "message")}
            body = r.body.materialize() if isinstance(r.body, SystemTraces) else r.body
            return reduct_traces(body, ident).traces
        return traces(rA) == traces(rB)
    cd_kinds = ("class", "attribute", "reception", "association")
    syms = frozenset(s for s in shared if s.kind in cd_kinds)
    if not syms:
        return True
    plain = rA.institution is not rB.institution

    def cut(r: Realization) -> SnapshotTS:
        full = _cd_sig(r.signature).signature()
        sub = restrict_signature(InstitutionId.CD, full, syms)
        body = reduct(Realization(InstitutionId.CD, r.body, full), SignatureMorphism.inclusion(InstitutionId.CD, sub, full)).body
        if plain or r.institution is InstitutionId.CD:
            states = [s.plain() for s in body.states]
            body = SnapshotTS.build(states, [states[i] for i in body.initial], [(states[a], l, states[c]) for a, l, c in body.transitions])
        return body

    return cut(rA).same_as(cut(rB))


def _decentralized(graph: ResolvedGraph, net: Network, b: Bounds, directory: Optional[str]):
    if not directory:
        raise ViewNetError("the decentralized strategy needs a witness directory")
    plan = _plan(graph, net)
    ctx = _Ctx(b)
    family: Dict[str, object] = {}
    failures: List[str] = []
    for key, m in plan.flat.items():
        inst, body = load_realization(directory, _fname(key))
        if inst is not m.institution:
            failures.append(f"{key}: witness file holds a {inst} realization, the node is {m.institution}")
            continue
        family[key] = Realization(inst, body, m.signature)
    undecided = False
    for key, m in plan.flat.items():
        if key in family:
            ok, why = _member(family[key], m, ctx)
            if ok is not True:
                failures.append(f"{key}: {why}")
                undecided = undecided or ok is None
    ts_keys = [k for k, m in plan.flat.items() if k in family and m.institution in TS_INSTITUTIONS]
    for x, y in itertools.combinations(ts_keys, 2):
        shared = family[x].signature.symbols() & family[y].signature.symbols()
        if not check_decentralized_compat(family[x], family[y], shared):
            failures.append(f"{x} and {y} disagree on their shared symbols")
    link_seen: Dict[str, List[Tuple[Optional[bool], str]]] = {}
    for k in plan.links:
        try:
            res = _member(_derive(plan.concrete[k.name], family, b), plan.abstract[k.name], ctx)
        except _Undecided as e:
            res = (None, str(e))
        link_seen[k.name] = [res]
        if res[0] is not True:
            failures.append(f"link {k.name}: {res[1]}")
    stats = {"nodes": len(family), "states": sum(len(r.body.states) for r in family.values() if r.institution in TS_INSTITUTIONS)}
    if failures:
        # a rejected family says nothing about other families
        return Verdict.UNKNOWN, None, link_seen, tuple(failures[:5]), "supplied family only", stats, ctx
    first = next((family[k] for k in ts_keys if family[k].institution is InstitutionId.CMP), None)
    first = first or (family[ts_keys[0]] if ts_keys else None)
    initial = first.body.states[first.body.initial[0]] if first is not None else TSState(Snapshot())
    witness = Witness(net.name, plan.context, initial, [], {_fname(k): r for k, r in family.items()})
    return Verdict.CONSISTENT, witness, link_seen, (), None, stats, ctx


# -- public operations ---------------------------------------------------------

def check_model(node, b: Bounds = Bounds()) -> CheckResult:
    """Single-model consistency: search for one realization within the bounds."""
    model = node.model if isinstance(node, Node) else node
    name = node.name if isinstance(node, Node) else model.label
    tax = _taxonomy(model.institution)
    if model.theory is None:
        base = model.op[1]
        r = check_model(base, b)
        why = f"realization of {base.label} mapped along {model.op[2] if model.op[0] == 'hide' else 'reveal'}"
        return replace(r, name=name, witness=why if r.verdict is Verdict.CONSISTENT else None, taxonomy=tax)
    th = model.theory
    if model.institution is InstitutionId.SD:
        inter = th.sentences[0]
        w = shortest_accepted(inter, _sd_domain(inter, model.signature))
        if w is None:
            return CheckResult(name, Verdict.INCONSISTENT, certificate=("the interaction accepts no trace",), taxonomy=tax)
        return CheckResult(name, Verdict.CONSISTENT, witness="trace " + " ; ".join(map(str, w)) if w else "empty trace", taxonomy=tax)
    cd = cd_of_theory(th)
    if model.institution is InstitutionId.CD:
        for snap in _static_candidates(cd, b):
            return CheckResult(name, Verdict.CONSISTENT, witness=_describe(snap), taxonomy=tax)
        return CheckResult(name, Verdict.INCONSISTENT, certificate=("no snapshot within the bounds satisfies every sentence (enumeration exhausted)",), taxonomy=tax)
    comp = composite_of(th) if model.institution is InstitutionId.CMP else None
    parts = th.signature.parts if comp is not None else ()
    certificate = []
    for snap in _static_candidates(cd, b, parts):
        ts = generate_ts(_system(cd, comp, machines_of(th), snap), snap, b)
        bad = _state_violation(ts, cd)
        if bad is None:
            return CheckResult(name, Verdict.CONSISTENT, witness=f"generated TS with {len(ts.states)} states from {_describe(snap)}", taxonomy=tax)
        if len(certificate) < 5:
            certificate.append(bad)
    if not certificate:
        certificate.append("no initial snapshot within the bounds fits the model (enumeration exhausted)")
    return CheckResult(name, Verdict.INCONSISTENT, certificate=tuple(certificate), taxonomy=tax)


def _realizations(model: Model, b: Bounds) -> Iterator[Tuple[object, bool]]:
    """Every bounded realization of ``model`` with its exploration flag; None marks a gap."""
    if model.theory is None:
        kind, base, arg = model.op
        for r, done in _realizations(base, b):
            if r is None:
                yield None, False
                continue
            try:
                yield _derive_one(model, r, b), done
            except _Undecided:
                yield None, False
        return
    th = model.theory
    if model.institution is InstitutionId.SD:
        inter = th.sentences[0]
        try:
            T = accepted_language(inter, _sd_domain(inter, model.signature))
        except OverflowError:
            yield None, False
            return
        yield Realization(InstitutionId.SD, T, model.signature), True
        return
    cd = cd_of_theory(th)
    if model.institution is InstitutionId.CD:
        for snap in _static_candidates(cd, b):
            yield Realization(InstitutionId.CD, SnapshotTS.single(TSState(snap)), model.signature), True
        return
    comp = composite_of(th) if model.institution is InstitutionId.CMP else None
    parts = th.signature.parts if comp is not None else ()
    for snap in _static_candidates(cd, b, parts):
        ts = generate_ts(_system(cd, comp, machines_of(th), snap), snap, b)
        if _state_violation(ts, cd) is None:
            yield Realization(model.institution, ts, model.signature), ts.explored_completely


def _derive_one(model: Model, r, b: Bounds):
    """Apply the outermost operation of a derived model to a realization of its operand."""
    kind, base, arg = model.op
    return _derive(replace(model, op=(kind, Model(base.institution, base.signature, Theory(base.institution, base.signature), label="#"), arg)), {"#": r}, b)


def check_refinement(graph: ResolvedGraph, link: str, b: Bounds = Bounds()) -> CheckResult:
    """Realization inclusion: every bounded concrete realization is an abstract one."""
    k = graph.links.get(link)
    if k is None:
        raise UnresolvedSymbol(f"unknown refinement {link!r}")
    A, C = graph.node(k.abstract).model, graph.node(k.concrete).model
    tax = _taxonomy(A.institution)
    ctx = _Ctx(b)
    complete, undecided, n = True, [], 0
    for R, done in _realizations(C, b):
        if R is None:
            complete = False
            continue
        n += 1
        complete = complete and done
        ok, why = _member(R, A, ctx)
        if ok is False:
            return CheckResult(link, Verdict.INCONSISTENT, certificate=(f"counterexample realization {n}: {why}",), taxonomy=tax)
        if ok is None:
            undecided.append(why)
    if undecided:
        return CheckResult(link, Verdict.UNKNOWN, certificate=tuple(dict.fromkeys(undecided))[:5], taxonomy=tax)
    if not complete:
        return CheckResult(link, Verdict.UNKNOWN, cap="depth or max-states", taxonomy=tax)
    return CheckResult(link, Verdict.CONSISTENT, witness=f"all {n} bounded concrete realizations are abstract ones", taxonomy=tax)


def check_network(
    graph: ResolvedGraph,
    name: str,
    strategy: str = "incremental",
    b: Bounds = Bounds(),
    witnesses: Optional[str] = None,
) -> ConsistencyReport:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose one of {', '.join(STRATEGIES)}")
    net = graph.network(name)
    start = time.perf_counter()
    if strategy == "decentralized":
        verdict, witness, link_seen, cert, cap, stats, ctx = _decentralized(graph, net, b, witnesses)
    else:
        verdict, witness, link_seen, cert, cap, stats, ctx = _search(graph, net, b, strategy == "monolithic")
    stats["product_states"] = ctx.explored
    stats["traces_matched"] = ctx.matched
    models = [check_model(graph.node(n), b) for n in net.nodes]
    links = []
    for l in net.links:
        k = graph.links[l]
        held = verdict is Verdict.CONSISTENT
        links.append(_link_result(l, graph.node(k.abstract).institution, link_seen.get(l, []), held))
    return ConsistencyReport(
        net.name, strategy, verdict, models, links, b, stats, witness, cert, cap, time.perf_counter() - start
    )
