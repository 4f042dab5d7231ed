"""DOL parsing, resolution and development-graph export."""

import os
import random
import time

import pytest

from conftest import CORPUS, corpus, dol_listings
from viewnet.errors import ParseError, ResolveError
from viewnet.kernel import InstitutionId
from viewnet.netlang import (
    HideAlong,
    Library,
    ModelDecl,
    NetworkDecl,
    NetSpec,
    RefinementDecl,
    export_dot,
    format_spec,
    load,
    parse_dol,
    resolve,
)

DOLS = sorted(
    os.path.join(d, f) for d, _, fs in os.walk(CORPUS) for f in fs if f.endswith(".dol")
)


def test_dol_listings_parse_and_resolve():
    t0 = time.perf_counter()
    blocks = dol_listings()
    names = []
    for b in blocks:
        (d,) = parse_dol(b).decls
        names.append(d.name)
    assert names == ["ATM_Bank_Interaction_cd", "r1", "ATM_stm", "Bank_stm", "System", "r2", "N"]
    g = resolve(parse_dol("\n".join(blocks)), corpus("atm"))
    assert time.perf_counter() - t0 < 1.0
    n = g.network("N")
    assert n.consistent
    assert set(n.nodes) >= {"User_Interface", "ATM_stm", "Bank_stm", "System", "ATM_Bank_Interaction"}
    assert set(n.links) == {"r1", "r2"}


def test_dol_listings_match_the_corpus():
    spec = parse_dol("\n".join(dol_listings()))
    _, g = load(corpus("atm", "atm.dol"))
    assert spec == load(corpus("atm", "atm.dol"))[0]
    assert sorted(g.nodes) == sorted(resolve(spec, corpus("atm")).nodes)


def test_r1_without_end_is_rejected():
    with pytest.raises(ParseError):
        parse_dol("refinement r1 =\n  { A reveal B }\n  refined to B\n")


def test_institutions_of_resolved_nodes(atm_graph):
    g = atm_graph
    assert g.node("User_Interface").institution is InstitutionId.CD
    assert g.node("ATM_Bank_Interaction").institution is InstitutionId.SD
    assert g.node("ATM_Bank_Interaction_cd").institution is InstitutionId.CD
    assert g.node("ATM_stm").institution is InstitutionId.STM
    assert g.node("System").institution is InstitutionId.CMP
    r1, r2 = g.links["r1"], g.links["r2"]
    assert r1.concrete == "ATM_Bank_Interaction_cd"
    assert r2.abstract == "ATM_Bank_Interaction"
    assert g.node(r2.concrete).institution is InstitutionId.SD


def test_parse_shapes():
    (m,) = parse_dol("model X = A hide along sd2cd end").decls
    assert isinstance(m, ModelDecl) and isinstance(m.expr, HideAlong) and m.expr.morphism == "sd2cd"
    (r,) = parse_dol("refinement r = A refined to B end").decls
    assert isinstance(r, RefinementDecl)
    for text in ("network N = %consistent A, B end", "%consistent network N = A, B end"):
        (n,) = parse_dol(text).decls
        assert isinstance(n, NetworkDecl) and n.consistent and n.elements == ("A", "B")


@pytest.mark.parametrize("path", DOLS, ids=lambda p: os.path.relpath(p, CORPUS))
def test_format_round_trip(path):
    with open(path) as fh:
        spec = parse_dol(fh.read())
    assert parse_dol(format_spec(spec)) == spec
    assert format_spec(parse_dol(format_spec(spec))) == format_spec(spec)


@pytest.mark.parametrize("path", DOLS, ids=lambda p: os.path.relpath(p, CORPUS))
def test_resolution_is_deterministic(path):
    _, a = load(path)
    _, b = load(path)
    assert export_dot(a) == export_dot(b)
    assert a.edges == b.edges


def test_resolution_ignores_declaration_order():
    spec, g = load(corpus("atm", "atm.dol"))
    decls = list(spec.decls)
    random.Random(3).shuffle(decls)
    h = resolve(NetSpec(tuple(decls)), corpus("atm"))
    assert export_dot(h) == export_dot(g)


def test_dot_export(atm_graph):
    dot = export_dot(atm_graph)
    assert dot.startswith("digraph development {")
    assert '"ATM_Bank_Interaction" -> "ATM_Bank_Interaction_cd" [label="hide along sd2cd"];' in dot
    assert 'style=dashed, label="r1"' in dot
    assert export_dot(resolve(NetSpec())) == ""


def test_syntax_error_has_location():
    with pytest.raises(ParseError) as e:
        parse_dol("model X =\n  A hide sd2cd\nend\n", "x.dol")
    assert "x.dol:2" in str(e.value)


def test_duplicate_declaration():
    with pytest.raises(ParseError) as e:
        parse_dol("model X = A end\nmodel X = B end\n", "d.dol")
    assert "d.dol:2" in str(e.value)


def test_unknown_view_and_morphism():
    with pytest.raises(ResolveError):
        resolve(parse_dol("network N = Nope end"), corpus("atm"))
    with pytest.raises(ResolveError):
        resolve(parse_dol("model X = User_Interface with translation cd2fol end"), corpus("atm"))


def test_library_texts_stand_in_for_files():
    lib = Library(texts={"K.cd": "classdiagram K\nclass C { attr b: Bool }\n"})
    g = resolve(parse_dol("network N = K end"), lib)
    assert g.node("K").institution is InstitutionId.CD
