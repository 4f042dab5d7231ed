"""Single-model, refinement and network checks, reports and witnesses."""

import json
import os

import pytest

from conftest import corpus
from viewnet.checker import (
    STRATEGIES,
    Verdict,
    check_decentralized_compat,
    check_model,
    check_network,
    check_refinement,
)
from viewnet.errors import ParseError, TypingError, UnresolvedSymbol, ViewNetError
from viewnet.expr import BoolType
from viewnet.interaction import TraceSet
from viewnet.kernel import InstitutionId, Realization
from viewnet.netlang import Library, load, parse_dol, resolve
from viewnet.structural import (
    Bounds,
    ClassDecl,
    ClassDiagram,
    EventLabel,
    Obj,
    Snapshot,
    SnapshotTS,
    TSState,
)
from viewnet.witness import filmstrip_events, load_realization, ts_from_json, ts_to_json

CD = InstitutionId.CD
K = "classdiagram K\nclass C { attr b: Bool }\n"


def graph(dol, **views):
    return resolve(parse_dol(dol), Library(texts=views))


# -- single models -------------------------------------------------------------

def test_unsatisfiable_cd_is_inconsistent(atm_graph):
    _, g = load(corpus("static", "static.dol"))
    r = check_model(g.node("Bad"))
    assert r.verdict is Verdict.INCONSISTENT
    assert "exhausted" in r.certificate[0]


def test_empty_cd_is_consistent_with_empty_snapshot():
    g = graph("network N = E end", **{"E.cd": "classdiagram E\n"})
    r = check_model(g.node("E"))
    assert r.verdict is Verdict.CONSISTENT and r.witness == "empty snapshot"


def test_interaction_witness_is_its_shortest_trace(atm_graph):
    r = check_model(atm_graph.node("ATM_Bank_Interaction"))
    assert r.verdict is Verdict.CONSISTENT
    names = [part.split(" : ")[1].split("(")[0] for part in r.witness[len("trace "):].split(" ; ")]
    assert names == ["insertCard", "enterPIN", "verify", "verified", "ejectCard"]


def test_derived_model_inherits_its_operand(atm_graph):
    r = check_model(atm_graph.node("ATM_Bank_Interaction_cd"))
    assert r.verdict is Verdict.CONSISTENT
    assert r.name == "ATM_Bank_Interaction_cd"


# -- refinement ------------------------------------------------------------

def test_refinement_corpus_links(atm_graph):
    b = Bounds()
    assert check_refinement(atm_graph, "r1", b).verdict is Verdict.CONSISTENT
    assert check_refinement(atm_graph, "r2", b).verdict is Verdict.CONSISTENT
    with pytest.raises(UnresolvedSymbol):
        check_refinement(atm_graph, "r9", b)


def test_identity_refinement():
    g = graph("refinement r = K refined to K end", **{"K.cd": K})
    assert check_refinement(g, "r").verdict is Verdict.CONSISTENT


def test_refinement_to_a_theory_extension():
    g = graph(
        'refinement r = K refined to { K then """classdiagram X\ninv C : self.b\n""" } end',
        **{"K.cd": K},
    )
    assert check_refinement(g, "r").verdict is Verdict.CONSISTENT


def test_refinement_that_drops_a_sentence_fails():
    g = graph(
        'refinement r = { K then """classdiagram X\ninv C : self.b\n""" } refined to K end',
        **{"K.cd": K},
    )
    r = check_refinement(g, "r")
    assert r.verdict is Verdict.INCONSISTENT
    assert r.certificate


# -- networks --------------------------------------------------------------

ATM_BOUNDS = Bounds(max_objects=2, depth=60, queue_depth=2)


@pytest.fixture(scope="module")
def atm_report(atm_graph):
    return check_network(atm_graph, "N", "incremental", ATM_BOUNDS)


def test_atm_network_is_consistent(atm_report):
    assert atm_report.verdict is Verdict.CONSISTENT
    names = [e.split(" : ")[1].split("(")[0] for e in atm_report.witness.events()]
    assert names == ["insertCard", "enterPIN", "verify", "verified", "ejectCard"]


def test_network_consistency_implies_member_consistency(atm_report):
    assert all(r.verdict is Verdict.CONSISTENT for r in atm_report.models + atm_report.links)


def test_report_shape_and_determinism(atm_graph, atm_report):
    d = atm_report.to_dict()
    assert {"verdict", "models", "links", "bounds", "stats", "taxonomy"} <= set(d)
    assert d["bounds"] == {"max_objects": 2, "depth": 60, "queue_depth": 2, "max_states": 100000}
    assert "wall_time" not in d
    again = check_network(atm_graph, "N", "incremental", ATM_BOUNDS)
    assert again.to_json() == atm_report.to_json()
    assert again.to_text() == atm_report.to_text()
    assert json.loads(atm_report.to_json(include_time=True))["wall_time"] >= 0
    tags = d["taxonomy"]
    assert tags["model:User_Interface"] == ["semantic", "structural"]
    assert tags["link:r2"] == ["semantic", "behavioural"]


def test_witness_round_trips_through_decentralized(atm_graph, atm_report, tmp_path):
    atm_report.witness.write(str(tmp_path))
    assert os.path.isfile(tmp_path / "init.od")
    with open(tmp_path / "trace.txt") as fh:
        assert filmstrip_events(fh.read()) == atm_report.witness.events()
    r = check_network(atm_graph, "N", "decentralized", ATM_BOUNDS, str(tmp_path))
    assert r.verdict is Verdict.CONSISTENT


def test_tampered_witness_is_not_accepted(atm_graph, atm_report, tmp_path):
    atm_report.witness.write(str(tmp_path))
    name = next(f for f in os.listdir(tmp_path / "realizations") if f.startswith("System"))
    path = tmp_path / "realizations" / name
    doc = json.loads(path.read_text())
    # drop every transition: the system no longer produces the interaction
    doc["transitions"] = []
    path.write_text(json.dumps(doc))
    r = check_network(atm_graph, "N", "decentralized", ATM_BOUNDS, str(tmp_path))
    assert r.verdict is not Verdict.CONSISTENT


def test_decentralized_needs_a_directory(atm_graph):
    with pytest.raises(ViewNetError):
        check_network(atm_graph, "N", "decentralized", ATM_BOUNDS)


def test_unknown_network_and_strategy(atm_graph):
    with pytest.raises(UnresolvedSymbol):
        check_network(atm_graph, "M")
    with pytest.raises(ValueError):
        check_network(atm_graph, "N", "psychic")
    assert STRATEGIES == ("incremental", "monolithic", "decentralized")


@pytest.mark.parametrize("net,expected", [("P12", "CONSISTENT"), ("P13", "CONSISTENT"), ("P23", "CONSISTENT"), ("N", "INCONSISTENT")])
def test_pairwise_versus_network(net, expected):
    _, g = load(corpus("pairwise", "pairwise.dol"))
    for s in ("incremental", "monolithic"):
        assert str(check_network(g, net, s).verdict) == expected


@pytest.mark.parametrize("net,expected", [("S", "INCONSISTENT"), ("D", "CONSISTENT"), ("DB", "INCONSISTENT")])
def test_static_networks(net, expected):
    _, g = load(corpus("static", "static.dol"))
    for s in ("incremental", "monolithic"):
        assert str(check_network(g, net, s).verdict) == expected


def test_cap_gives_unknown_not_inconsistent():
    _, g = load(corpus("atm_mutant", "atm.dol"))
    r = check_network(g, "N", "incremental", Bounds(max_states=50))
    assert r.verdict is Verdict.UNKNOWN
    assert r.cap == "max-states"
    assert r.stats["incomplete_searches"] > 0


def test_enlarging_bounds_keeps_consistency():
    _, g = load(corpus("static", "static.dol"))
    for n in (1, 2, 3):
        assert check_network(g, "D", b=Bounds(max_objects=n)).verdict is Verdict.CONSISTENT


# -- compatibility -----------------------------------------------------------

KD = ClassDiagram("K", (ClassDecl("C", (("b", BoolType()),)),))


def ts(*vals):
    states = [TSState(Snapshot.make([Obj("c", "C", (("b", v),))])) for v in vals]
    flip = EventLabel("env", "c", "go")
    return SnapshotTS.build(states, states[:1], [(a, flip, b) for a, b in zip(states, states[1:])])


def test_compat_identical():
    r = Realization(CD, ts(True, False), KD)
    assert check_decentralized_compat(r, r, KD.symbols())


def test_compat_vacuous_on_empty_signature():
    a = Realization(CD, ts(True), KD)
    b = Realization(CD, ts(True, False), KD)
    assert check_decentralized_compat(a, b, ())


def test_compat_one_state_vs_two():
    a = Realization(CD, ts(True), KD)
    b = Realization(CD, ts(True, False), KD)
    assert not check_decentralized_compat(a, b, KD.symbols())


def test_compat_rejects_mixed_and_foreign_signatures():
    a = Realization(CD, ts(True), KD)
    s = Realization(InstitutionId.SD, TraceSet.of(()))
    with pytest.raises(TypingError):
        check_decentralized_compat(a, s, ())
    other = ClassDiagram("O", (ClassDecl("D"),))
    with pytest.raises(TypingError):
        check_decentralized_compat(a, a, other.symbols())


# -- transition-system files ---------------------------------------------------

def test_ts_json_round_trip():
    t = ts(True, False, True)
    inst, back = ts_from_json(ts_to_json(t, CD, "n"))
    assert inst is CD and back.same_as(t)
    assert back.explored_completely == t.explored_completely


@pytest.mark.parametrize("text", ["", "{}", "[1, 2]", '{"states": [], "initial": [3], "transitions": [], "institution": "CD"}'])
def test_ts_json_malformed(text):
    with pytest.raises(ParseError):
        ts_from_json(text, "bad.ts")


def test_missing_witness_file(tmp_path):
    with pytest.raises(ViewNetError):
        load_realization(str(tmp_path), "X")
