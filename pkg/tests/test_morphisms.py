"""The built-in translations and the derived-model evaluators."""

import random

import pytest
from hypothesis import given, strategies as st

from _gen import random_cd, random_ts
from test_behavioral import atm_init, atm_system
from test_interaction import atm_sd
from viewnet.behavioral import MachineSignature, System, generate_ts
from viewnet.errors import TypingError, UnresolvedSymbol
from viewnet.expr import IntType
from viewnet.interaction import SystemTraces, TraceSet, accepted_language, cd_domain, sd_signature
from viewnet.kernel import Comorphism, InstitutionId, InstitutionMorphism, Realization, Theory
from viewnet.morphisms import (
    GENERIC_PART,
    amalgamate,
    cd2stm_reduce,
    cd_theory,
    cmp2sd_project,
    cmp2sd_translate,
    composite_of,
    hide_along_eval,
    lookup,
    rename_theory,
    reveal_eval,
    sd2cd_project,
    sd2cd_translate,
    stm2cmp_embed,
    with_translation_eval,
)
from viewnet.structural import Bounds, ClassDecl, ClassDiagram, conforms, labels_well_typed

PIN = (("p", IntType(0, 4)),)


def test_sd2cd_projects_lifeline_classes_and_received_messages():
    cd, *_ = atm_system()
    got = sd2cd_project(atm_sd(), cd)
    assert got.name == "ATM_Bank_Interaction_cd"
    assert {c.name for c in got.classes} == {"ATM", "Bank"}
    assert {(r.name, r.params) for r in got.cls("ATM").receptions} == {
        ("insertCard", ()), ("enterPIN", PIN), ("verified", ()), ("rejected", ()), ("ejectCard", ()), ("keepCard", ()),
    }
    assert [(r.name, r.params) for r in got.cls("Bank").receptions] == [("verify", PIN)]
    assert all(not c.attributes for c in got.classes)


def test_sd2cd_translation_is_well_typed():
    cd, *_ = atm_system()
    th = atm_sd()
    sig = sd_signature(th, cd)
    words = accepted_language(th, cd_domain(th, cd))
    r = sd2cd_translate(Realization(InstitutionId.SD, words, sig))
    assert r.institution is InstitutionId.CD
    assert labels_well_typed(r.body, r.signature) == []
    # one state per distinct prefix
    prefixes = {t[:i] for t in words.traces for i in range(len(t) + 1)}
    assert len(r.body.states) == len(prefixes)


def test_cmp2sd():
    cd, atm, bank, c = atm_system()
    th = amalgamate(
        rename_theory(stm2cmp_embed(Theory(InstitutionId.STM, MachineSignature(cd, ("ATM_stm",)), (atm,))), {GENERIC_PART: "atm"}),
        rename_theory(stm2cmp_embed(Theory(InstitutionId.STM, MachineSignature(cd, ("Bank_stm",)), (bank,))), {GENERIC_PART: "bank"}),
    )
    sig = cmp2sd_project(th.signature)
    assert sig.lifelines == (("atm", "ATM"), ("bank", "Bank"))
    assert {m for _, m, _ in sig.messages} == {"insertCard", "enterPIN", "verified", "rejected", "ejectCard", "keepCard", "verify"}
    ts = generate_ts(System.from_composite(c, cd), atm_init(), Bounds())
    r = cmp2sd_translate(Realization(InstitutionId.CMP, ts, th.signature), depth=7)
    assert isinstance(r.body, SystemTraces) and r.body.depth == 7


def test_stm2cmp_wraps_one_part_named_cid():
    cd, atm, _, _ = atm_system()
    th = stm2cmp_embed(Theory(InstitutionId.STM, MachineSignature(cd, ("ATM_stm",)), (atm,)))
    comp = composite_of(th)
    assert [(p.name, p.cls, p.machine) for p in comp.parts] == [("cid", "ATM", "ATM_stm")]
    renamed = composite_of(rename_theory(th, {"cid": "atm"}))
    assert [p.name for p in renamed.parts] == ["atm"]
    with pytest.raises(UnresolvedSymbol):
        rename_theory(th, {"nope": "atm"})


def test_cd2stm_embed_and_reduce_conform():
    cd, _, _, c = atm_system()
    th = with_translation_eval(cd_theory(cd), lookup("cd2stm", Comorphism))
    assert th.institution is InstitutionId.STM
    assert th.sentences == cd.sentences()
    ts = generate_ts(System.from_composite(c, cd), atm_init(), Bounds())
    back = cd2stm_reduce(Realization(InstitutionId.STM, ts, MachineSignature(cd)))
    assert back.institution is InstitutionId.CD
    assert all(not s.control and not s.queues for s in back.body.states)
    assert all(conforms(s.snapshot, cd) for s in back.body.states)
    # distinct configurations collapse onto fewer snapshots
    assert len(back.body.states) < len(ts.states)


@given(st.integers(0, 10**9))
def test_reveal_of_everything_is_identity(seed):
    rng = random.Random(seed)
    cd = random_cd(rng)
    r = Realization(InstitutionId.CD, random_ts(rng, cd), cd)
    (same,) = reveal_eval([r], cd.symbols())
    assert same.body.same_as(r.body)


def test_reveal_on_traces():
    cd, *_ = atm_system()
    th = atm_sd()
    sig = sd_signature(th, cd)
    words = TraceSet.of(*list(accepted_language(th, cd_domain(th, cd)).traces)[:20])
    (same,) = reveal_eval([Realization(InstitutionId.SD, words, sig)], sig.symbols())
    assert same.body.traces == words.traces
    keep = {s for s in sig.symbols() if s.name in ("atm", "insertCard")}
    (small,) = reveal_eval([Realization(InstitutionId.SD, words, sig)], keep)
    assert {tuple(e.message for e in t) for t in small.body.traces} == {("insertCard",)}


def test_registry():
    assert isinstance(lookup("sd2cd"), InstitutionMorphism)
    assert isinstance(lookup("cd2stm"), Comorphism)
    with pytest.raises(UnresolvedSymbol):
        lookup("cd2fol")
    with pytest.raises(TypingError):
        lookup("sd2cd", Comorphism)


def test_wrong_source_institution():
    cd, *_ = atm_system()
    with pytest.raises(TypingError):
        with_translation_eval(cd_theory(cd), lookup("stm2cmp"))
    r = Realization(InstitutionId.CD, random_ts(random.Random(1), cd), cd)
    with pytest.raises(TypingError):
        hide_along_eval([r], lookup("sd2cd"))


def test_amalgamation_requires_agreement():
    a = cd_theory(ClassDiagram("A", (ClassDecl("C", (("x", IntType(0, 1)),)),)))
    b = cd_theory(ClassDiagram("B", (ClassDecl("C", (("x", IntType(0, 2)),)),)))
    with pytest.raises(TypingError):
        amalgamate(a, b)
    c = cd_theory(ClassDiagram("B", (ClassDecl("D"),)))
    assert {x.name for x in amalgamate(a, c).signature.classes} == {"C", "D"}
