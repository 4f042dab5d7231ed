"""Random generators shared by the property tests and the acceptance suite.

Everything is driven by an explicit ``random.Random`` so a failing case can
be replayed from its seed.
"""

import itertools
import random

from viewnet.expr import BoolType, Binary, Const, IntType, SelfAttr, Unary
from viewnet.interaction import Alt, Loop, Msg, Opt, Seq
from viewnet.kernel import InstitutionId, Realization, SignatureMorphism, renaming
from viewnet.structural import (
    STAR,
    AssocEnd,
    Association,
    Bounds,
    ClassCount,
    ClassDecl,
    ClassDiagram,
    EventLabel,
    InitialContains,
    Invariant,
    Multiplicity,
    Reception,
    SnapshotTS,
    Symbol,
    TAU,
    TSState,
    enumerate_snapshots,
)

CD = InstitutionId.CD


# -- class diagrams ----------------------------------------------------------

def random_cd(rng):
    names = ["A", "B"][: rng.randint(1, 2)]
    classes = []
    for i, c in enumerate(names):
        attrs = []
        for a in rng.sample(["p", "q"], rng.randint(0, 2)):
            attrs.append((a + c.lower(), rng.choice([BoolType(), IntType(0, 1)])))
        parent = names[0] if i == 1 and rng.random() < 0.3 else None
        classes.append(ClassDecl(c, tuple(attrs), (Reception("go" + c.lower()),), parent))
    assocs = ()
    if rng.random() < 0.6:
        a, b = rng.choice(names), rng.choice(names)
        assocs = (Association("R", AssocEnd(a, "ra"), AssocEnd(b, "rb")),)
    return ClassDiagram("Rand", tuple(classes), assocs)


def closed_subset(cd, rng):
    """A random symbol subset closed under 'member needs its class'."""
    keep = set()
    for c in cd.classes:
        if rng.random() < 0.75:
            keep.add(Symbol("class", c.name))
    for c in cd.classes:
        if Symbol("class", c.name) in keep:
            for a, _ in c.attributes:
                if rng.random() < 0.7:
                    keep.add(Symbol("attribute", f"{c.name}.{a}"))
            for r in c.receptions:
                if rng.random() < 0.7:
                    keep.add(Symbol("reception", f"{c.name}.{r.name}"))
    for a in cd.associations:
        ends = {Symbol("class", a.end_a.cls), Symbol("class", a.end_b.cls)}
        if ends <= keep and rng.random() < 0.7:
            keep.add(Symbol("association", a.name))
    return keep


def random_morphism(rng, cd):
    """A renaming out of ``cd`` or an inclusion into it."""
    if rng.random() < 0.5:
        names = {}
        classes = [c.name for c in cd.classes]
        if len(classes) == 2 and rng.random() < 0.5:
            names.update({classes[0]: classes[1], classes[1]: classes[0]})  # swap
        else:
            for c in classes:
                if rng.random() < 0.5:
                    names[c] = c + "X"
        for c in cd.classes:
            for a, _ in c.attributes:
                if rng.random() < 0.5:
                    names[f"{c.name}.{a}"] = a + "_r"
            for r in c.receptions:
                if rng.random() < 0.5:
                    names[f"{c.name}.{r.name}"] = r.name + "_r"
        if cd.associations and rng.random() < 0.5:
            names["R"] = "S"
        return renaming(CD, cd, names)
    sub = cd.restrict(closed_subset(cd, rng)).signature()
    return SignatureMorphism.inclusion(CD, sub, cd)


def random_snapshots(cd, rng, k):
    pool = list(itertools.islice(enumerate_snapshots(cd.signature(), Bounds(max_objects=2)), 300))
    return [rng.choice(pool) for _ in range(k)]


def random_ts(rng, cd):
    snaps = random_snapshots(cd, rng, rng.randint(1, 4))
    states = [TSState(s) for s in snaps]
    trans = []
    for _ in range(rng.randint(0, 4)):
        a, b = rng.choice(states), rng.choice(states)
        label = TAU
        if a.snapshot.objects and rng.random() < 0.7:
            o = rng.choice(a.snapshot.objects)
            go = sorted(cd.receptions(o.cls))
            label = EventLabel("env", o.id, rng.choice(go)) if go else TAU
        trans.append((a, label, b))
    init = rng.sample(states, rng.randint(1, len(states)))
    return SnapshotTS.build(states, init, trans)


def _attrs(cd, cls):
    return [(a, t) for a, t, _ in cd.attributes(cls)]


def random_expr(rng, attrs, depth=2):
    bools = [a for a, t in attrs if isinstance(t, BoolType)]
    ints = [a for a, t in attrs if isinstance(t, IntType)]
    r = rng.random()
    if depth == 0 or r < 0.3:
        if bools and rng.random() < 0.5:
            return SelfAttr(rng.choice(bools))
        if ints:
            op = rng.choice(["==", "!=", "<", "<="])
            return Binary(op, SelfAttr(rng.choice(ints)), Const(rng.randint(0, 1)))
        return Const(rng.random() < 0.5)
    if r < 0.45:
        return Unary("not", random_expr(rng, attrs, depth - 1))
    return Binary(rng.choice(["and", "or"]), random_expr(rng, attrs, depth - 1), random_expr(rng, attrs, depth - 1))


def random_sentence(rng, cd):
    kinds = ["inv", "count", "initial"] + (["mult"] if cd.associations else [])
    kind = rng.choice(kinds) if cd.classes else "initial"
    if kind == "inv":
        c = rng.choice(cd.classes).name
        return Invariant(c, random_expr(rng, _attrs(cd, c)))
    if kind == "count":
        lo = rng.randint(0, 2)
        return ClassCount(rng.choice(cd.classes).name, lo, rng.choice([lo, lo + 1, STAR]))
    if kind == "mult":
        lo = rng.randint(0, 1)
        return Multiplicity(cd.associations[0].name, rng.choice("ab"), lo, rng.choice([lo, 1, STAR]))
    small = random_snapshots(cd, rng, 1)[0]
    return InitialContains(small, "rand")


def random_triple(rng):
    """(sigma, realization over sigma's target, sentence over sigma's source)."""
    cd = random_cd(rng)
    sigma = random_morphism(rng, cd)
    target = sigma.target.signature()
    r = Realization(CD, random_ts(rng, target), target)
    phi = random_sentence(rng, sigma.source)
    return sigma, r, phi


# -- interaction terms -------------------------------------------------------

ALPHABET = ("a", "b", "c")


def msg(m):
    return Msg("x", "y", m)


def random_term(rng, depth=3):
    r = rng.random()
    if depth == 0 or r < 0.3:
        return msg(rng.choice(ALPHABET))
    sub = lambda: random_term(rng, depth - 1)  # noqa: E731
    if r < 0.5:
        return Seq(tuple(sub() for _ in range(rng.randint(0, 3))))
    if r < 0.7:
        return Alt(tuple(sub() for _ in range(rng.randint(1, 3))))
    if r < 0.85:
        return Opt(sub())
    lo = rng.randint(0, 2)
    return Loop(lo, lo + rng.randint(0, 2), sub())
