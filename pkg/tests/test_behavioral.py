"""State machines, composite structures and run-to-completion generation."""

from dataclasses import replace

import pytest

from conftest import corpus
from viewnet.behavioral import (
    System,
    composite_satisfied,
    format_machine,
    generate_ts,
    machine_satisfied,
    parse_cmp,
    parse_stm,
    state_counts,
    traces,
    wellformed_cmp,
    wellformed_stm,
)
from viewnet.errors import DiagnosticError, ParseError
from viewnet.structural import Bounds, EventLabel, Obj, Snapshot, conforms, parse_cd

TOGGLE_CD = parse_cd("classdiagram T\nclass Toggle { attr b: Bool\n reception flip() }\n")
TOGGLE_STM = parse_stm("statemachine Flipper for Toggle {\n init S\n state S\n S -> S on flip / b := not self.b\n}\n")
TOGGLE_CMP = replace(
    parse_cmp("component Box {\n part t: Toggle machine Flipper\n gate user -> t carries flip\n}\n"),
    bound=(TOGGLE_STM,),
)


def toggle_ts(**kw):
    sys = System.from_composite(TOGGLE_CMP, TOGGLE_CD)
    init = Snapshot.make([Obj("t", "Toggle", (("b", False),))])
    return generate_ts(sys, init, Bounds(**kw))


def read(*parts):
    with open(corpus(*parts)) as fh:
        return fh.read()


def atm_system():
    cd = parse_cd(read("atm", "User_Interface.cd"))
    atm = parse_stm(read("atm", "ATM_stm_definition.stm"))
    bank = parse_stm(read("atm", "Bank_stm_definition.stm"))
    c = parse_cmp(read("atm", "cmp.cmp"))
    c = replace(c, bound=(atm, bank))
    return cd, atm, bank, c


def atm_init(pin=0):
    return Snapshot.make(
        [Obj("atm", "ATM", (("trials", 0),)), Obj("bank", "Bank", (("pin", pin),))],
        [("Connection", "atm", "bank")],
    )


def test_toggle_ts_by_hand():
    # (b, pool): (F,[]) -> (F,[flip]) -> (T,[]) -> (T,[flip]) -> (F,[])
    ts = toggle_ts(queue_depth=1, depth=10)
    assert len(ts.states) == 4
    assert len(ts.transitions) == 4
    assert state_counts(ts) == {"inject": 2, "dispatch": 2}
    assert ts.explored_completely
    flip = EventLabel("env", "t", "flip")
    assert traces(ts, 2).traces == {(), (flip,), (flip, flip)}


def test_depth_cut_marks_incomplete():
    ts = toggle_ts(queue_depth=1, depth=2)
    assert not ts.explored_completely


def test_out_of_range_assignment_disables_transition():
    cd = parse_cd("classdiagram C\nclass K { attr n: Int 0..1\n reception inc() }\n")
    m = parse_stm("statemachine Cnt for K {\n init S\n state S\n S -> S on inc / n := self.n + 1\n}\n")
    c = replace(parse_cmp("component X {\n part k: K machine Cnt\n gate g -> k carries inc\n}\n"), bound=(m,))
    ts = generate_ts(System.from_composite(c, cd), Snapshot.make([Obj("k", "K", (("n", 0),))]), Bounds(queue_depth=1))
    # the second inc cannot fire, so it is discarded and n stays at 1
    assert {s.snapshot.obj("k").value("n") for s in ts.states} == {0, 1}
    assert state_counts(ts)["discard"] == 1
    assert all(conforms(s.snapshot, cd) for s in ts.states)


def test_atm_generation_conforms_and_is_deterministic():
    cd, atm, bank, c = atm_system()
    b = Bounds(max_objects=2, depth=60, queue_depth=2)
    ts = generate_ts(System.from_composite(c, cd), atm_init(), b)
    again = generate_ts(System.from_composite(c, cd), atm_init(), b)
    assert ts == again  # state order included
    assert ts.explored_completely
    assert all(conforms(s.snapshot, cd) for s in ts.states)
    # dropping control and pools gives CD-level states that still conform
    assert all(conforms(s.plain().snapshot, cd) for s in ts.states)
    assert machine_satisfied(ts, atm, cd)
    assert machine_satisfied(ts, bank, cd)
    assert composite_satisfied(ts, c, cd, b.queue_depth)


def test_trials_never_exceed_three():
    cd, _, _, c = atm_system()
    ts = generate_ts(System.from_composite(c, cd), atm_init(pin=4), Bounds())
    trials = {s.snapshot.obj("atm").value("trials") for s in ts.states}
    assert max(trials) == 3


@pytest.mark.parametrize("d", [1, 3, 6])
def test_traces_monotone_in_depth(d):
    cd, _, _, c = atm_system()
    ts = generate_ts(System.from_composite(c, cd), atm_init(), Bounds())
    assert traces(ts, d).traces <= traces(ts, d + 1).traces


def test_more_states_allowed_gives_superset():
    cd, _, _, c = atm_system()
    small = generate_ts(System.from_composite(c, cd), atm_init(), Bounds(max_states=50))
    big = generate_ts(System.from_composite(c, cd), atm_init(), Bounds(max_states=400))
    assert not small.explored_completely
    assert set(small.states) <= set(big.states)
    assert len(small.states) == 50


def test_wrong_machine_is_not_satisfied():
    cd, atm, bank, c = atm_system()
    ts = generate_ts(System.from_composite(c, cd), atm_init(), Bounds())
    # the bank's moves do not follow the ATM machine's shape
    other = replace(bank, context="ATM")
    assert not machine_satisfied(ts, other, cd)


def test_door_bad_breaks_the_invariant():
    cd = parse_cd(read("static", "Door.cd"))
    bad = parse_stm(read("static", "Door_bad.stm"))
    c = replace(parse_cmp(read("static", "House.cmp").replace("Door_stm", "Door_bad")), bound=(bad,))
    init = Snapshot.make([Obj("door", "Door", (("open", False), ("locked", False)))])
    ts = generate_ts(System.from_composite(c, cd), init, Bounds())
    # lock, then push: open and locked at once
    assert any(not conforms(s.snapshot, cd) for s in ts.states)


def test_wellformedness():
    cd, atm, bank, c = atm_system()
    assert not wellformed_stm(atm, cd)
    assert not wellformed_cmp(c, {"ATM_stm": atm, "Bank_stm": bank}, cd)
    with pytest.raises(DiagnosticError):
        parse_stm("statemachine M for ATM {\n init Idle\n state Idle\n Idle -> Nowhere on insertCard\n}\n")
    unknown = parse_stm("statemachine M for ATM {\n init Idle\n state Idle\n Idle -> Idle on dance\n}\n")
    assert wellformed_stm(unknown, cd)
    typo = parse_stm("statemachine M for ATM {\n init Idle\n state Idle\n Idle -> Idle on insertCard / trials := true\n}\n")
    assert wellformed_stm(typo, cd)


def test_format_machine_round_trip():
    _, atm, _, _ = atm_system()
    assert parse_stm(format_machine(atm)) == atm


def test_parse_errors_carry_location():
    with pytest.raises(ParseError) as e:
        parse_stm("statemachine M for C {\n init S\n S -> on x\n}\n", "m.stm")
    assert "m.stm:3" in str(e.value)
    with pytest.raises(ParseError):
        parse_cmp("component X { part : C }")


def test_zero_part_component_has_one_state():
    ts = generate_ts(System.from_composite(parse_cmp("component Z {\n}\n"), TOGGLE_CD), Snapshot(), Bounds())
    assert len(ts.states) == 1 and ts.explored_completely


def test_self_loop_at_depth_two():
    cd = parse_cd("classdiagram L\nclass K { reception e() }\n")
    m = parse_stm("statemachine Loop for K {\n init S\n state S\n S -> S on e\n}\n")
    c = replace(parse_cmp("component X {\n part k: K machine Loop\n gate g -> k carries e\n}\n"), bound=(m,))
    ts = generate_ts(System.from_composite(c, cd), Snapshot.make([Obj("k", "K")]), Bounds(depth=2))
    # pools holding zero, one and two e's
    assert sorted(len(dict(s.queues)["k"]) for s in ts.states) == [0, 1, 2]
    assert not ts.explored_completely
