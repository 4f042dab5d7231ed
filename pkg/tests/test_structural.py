"""Class and object diagrams, conformance and snapshot enumeration."""

import itertools
import random

import pytest
from hypothesis import given, strategies as st

from _gen import random_cd, random_expr
from viewnet.errors import DiagnosticError, ParseError
from viewnet.expr import BoolType, IntType
from viewnet.structural import (
    AssocEnd,
    Association,
    Bounds,
    ClassDecl,
    ClassDiagram,
    Invariant,
    Obj,
    Snapshot,
    conforms,
    enumerate_snapshots,
    format_cd,
    parse_cd,
    parse_od,
    wellformed_cd,
)


# -- brute-force oracle ------------------------------------------------------

def labeled(cd, n):
    """Every labeled snapshot with at most ``n`` objects per class, no sentences."""
    classes = [c.name for c in cd.classes]
    doms = {}
    for c in classes:
        attrs = cd.attributes(c)
        doms[c] = [tuple(zip([a for a, _, _ in attrs], v)) for v in itertools.product(*(t.domain() for _, t, _ in attrs))]
    for counts in itertools.product(range(n + 1), repeat=len(classes)):
        ids = [(c, i) for c, k in zip(classes, counts) for i in range(k)]
        for vals in itertools.product(*(doms[c] for c, _ in ids)):
            pairs = [
                (a.name, x, y)
                for a in cd.associations
                for x in ids if cd.is_a(x[0], a.end_a.cls)
                for y in ids if cd.is_a(y[0], a.end_b.cls)
            ]
            for k in range(len(pairs) + 1):
                for links in itertools.combinations(pairs, k):
                    yield dict(zip(ids, vals)), links


def canonical(vals, links):
    """Minimum relabeling over per-class permutations."""
    by_class = {}
    for c, i in vals:
        by_class.setdefault(c, []).append(i)
    best = None
    for perms in itertools.product(*(itertools.permutations(v) for v in by_class.values())):
        ren = {}
        for (c, olds), new in zip(by_class.items(), perms):
            for o, p in zip(olds, new):
                ren[(c, o)] = (c, p)
        form = (
            tuple(sorted((ren[k], v) for k, v in vals.items())),
            tuple(sorted((n, ren[x], ren[y]) for n, x, y in links)),
        )
        if best is None or form < best:
            best = form
    return best


def orbit_count(cd, n):
    return len({canonical(v, l) for v, l in labeled(cd, n)})


def snapshot_form(s):
    vals = {(o.cls, o.id): o.values for o in s.objects}
    links = [(n, (s.obj(a).cls, a), (s.obj(b).cls, b)) for n, a, b in s.links]
    return canonical(vals, links)


ONE_BOOL = ClassDiagram("O", (ClassDecl("C", (("b", BoolType()),)),))

SHAPES = [
    ONE_BOOL,
    ClassDiagram("Z", (ClassDecl("C"),)),
    ClassDiagram("T", (ClassDecl("C", (("b", BoolType()), ("d", BoolType()))),)),
    ClassDiagram("U", (ClassDecl("A", (("b", BoolType()),)), ClassDecl("B", (("d", BoolType()),)))),
    ClassDiagram("S", (ClassDecl("C", (("b", BoolType()),)),), (Association("R", AssocEnd("C", "x"), AssocEnd("C", "y")),)),
    ClassDiagram(
        "P",
        (ClassDecl("A", (("b", BoolType()),)), ClassDecl("B")),
        (Association("R", AssocEnd("A", "a"), AssocEnd("B", "b")),),
    ),
]


def test_one_bool_class_has_six_snapshots():
    # {}, {T}, {F}, {T,T}, {T,F}, {F,F}
    assert len(list(enumerate_snapshots(ONE_BOOL, Bounds(max_objects=2)))) == 6
    assert orbit_count(ONE_BOOL, 2) == 6


@pytest.mark.parametrize("cd", SHAPES, ids=lambda cd: cd.name)
@pytest.mark.parametrize("n", [1, 2])
def test_enumeration_matches_brute_force(cd, n):
    got = list(enumerate_snapshots(cd, Bounds(max_objects=n)))
    forms = [snapshot_form(s) for s in got]
    assert len(set(forms)) == len(forms)  # no two isomorphic
    assert len(got) == orbit_count(cd, n)


@pytest.mark.parametrize("cd", SHAPES, ids=lambda cd: cd.name)
def test_enumerated_snapshots_conform(cd):
    for s in enumerate_snapshots(cd, Bounds(max_objects=2)):
        assert conforms(s, cd)


def test_enumeration_respects_sentences():
    # exactly one C, linked to itself or not: b free -> 2 valuations x 2 link sets
    cd = parse_cd("classdiagram K\nclass C [1..1] { attr b: Bool }\nassoc R : C [0..1] x -- y [0..1] C\n")
    got = list(enumerate_snapshots(cd, Bounds(max_objects=2)))
    assert len(got) == 4
    cd2 = parse_cd("classdiagram K\nclass C [1..1] { attr b: Bool }\ninv C : self.b\n")
    assert [s.objects[0].values for s in enumerate_snapshots(cd2, Bounds())] == [(("b", True),)]


@given(st.integers(0, 10**9))
def test_enumeration_is_deterministic(seed):
    cd = random_cd(random.Random(seed))
    # one object per class: two would make self-associations explode
    b = Bounds(max_objects=1)
    assert list(enumerate_snapshots(cd, b)) == list(enumerate_snapshots(cd, b))


@given(st.integers(0, 10**9))
def test_conformance_monotone_under_invariant_removal(seed):
    rng = random.Random(seed)
    cd = random_cd(rng).signature()
    invs = tuple(Invariant(c.name, random_expr(rng, [(a, t) for a, t, _ in cd.attributes(c.name)])) for c in cd.classes)
    full = ClassDiagram(cd.name, cd.classes, cd.associations, invs)
    fewer = ClassDiagram(cd.name, cd.classes, cd.associations, invs[1:])
    for s in enumerate_snapshots(cd, Bounds(max_objects=1)):
        if conforms(s, full):
            assert conforms(s, fewer)


# -- parsing -----------------------------------------------------------------

CD_TEXT = """\
classdiagram Shop
// a comment
class Item [0..*] {
  attr price: Int 0..3
  attr kind: Enum(food, tool)
  reception buy(n: Int 1..2)
}
class Gift extends Item { attr wrapped: Bool }
assoc Holds : Item [0..1] item -- gift [0..*] Gift
inv Item : self.price >= 1 or self.kind == tool
"""


def test_parse_cd():
    cd = parse_cd(CD_TEXT)
    assert [c.name for c in cd.classes] == ["Item", "Gift"]
    assert cd.cls("Gift").parent == "Item"
    assert [a for a, _, _ in cd.attributes("Gift")] == ["price", "kind", "wrapped"]
    assert cd.attr_types("Item")["price"] == IntType(0, 3)
    assert list(cd.receptions("Gift")) == ["buy"]
    assert not wellformed_cd(cd)


def test_format_cd_round_trip():
    cd = parse_cd(CD_TEXT)
    assert parse_cd(format_cd(cd)) == cd


def test_parse_cd_error_has_location():
    with pytest.raises(ParseError) as e:
        parse_cd("classdiagram X\nclass C {\n  attr : Bool\n}\n", "bad.cd")
    assert "bad.cd:3" in str(e.value)


def test_ill_typed_invariant_is_diagnosed():
    cd = parse_cd("classdiagram X\nclass C { attr b: Bool }\ninv C : self.b + 1\n")
    assert [d.code for d in wellformed_cd(cd)] == ["type-error"]
    with pytest.raises(DiagnosticError):
        parse_cd("classdiagram X\nclass C { }\nclass C { }\n")


def test_parse_od_against_cd():
    cd = parse_cd(CD_TEXT)
    od = parse_od("objectdiagram O for Shop {\n  i: Item { price = 2 kind = food }\n}\n", cd=cd)
    assert od.snapshot == Snapshot.make([Obj("i", "Item", (("price", 2), ("kind", "food")))])
    with pytest.raises(ParseError):
        parse_od("objectdiagram O for Other { }", cd=cd)


def test_conformance_checks_range_and_links():
    cd = parse_cd(CD_TEXT)
    ok = Snapshot.make([Obj("i", "Item", (("price", 2), ("kind", "food")))])
    assert conforms(ok, cd)
    assert not conforms(Snapshot.make([Obj("i", "Item", (("price", 9), ("kind", "food")))]), cd)
    assert not conforms(Snapshot.make([Obj("i", "Item", (("price", 0), ("kind", "food")))]), cd)  # invariant
