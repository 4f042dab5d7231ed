"""Interaction terms, their automata and trace-set satisfaction."""

import itertools
import random

import pytest
from hypothesis import given, strategies as st

from _gen import ALPHABET, msg, random_term
from conftest import corpus
from viewnet.errors import DiagnosticError, ParseError
from viewnet.interaction import (
    Alt,
    Interaction,
    Lifeline,
    Loop,
    Msg,
    Opt,
    PLit,
    PVar,
    PWild,
    Seq,
    TraceSet,
    accepted_language,
    format_sd,
    format_traces,
    matches,
    parse_event,
    parse_sd,
    parse_traces,
    sd_satisfies,
    sd_to_nfa,
    shortest_accepted,
)
from viewnet.structural import EventLabel


# -- brute-force oracle ------------------------------------------------------

def ends(t, word, i):
    """Positions where a match of ``t`` starting at ``i`` can end."""
    if isinstance(t, Msg):
        return {i + 1} if i < len(word) and word[i] == t.message else set()
    if isinstance(t, Seq):
        cur = {i}
        for x in t.terms:
            cur = {k for j in cur for k in ends(x, word, j)}
        return cur
    if isinstance(t, Alt):
        return {k for x in t.terms for k in ends(x, word, i)}
    if isinstance(t, Opt):
        return {i} | ends(t.term, word, i)
    # Loop
    out = set()
    cur = {i}
    for n in range(t.hi + 1):
        if n >= t.lo:
            out |= cur
        cur = {k for j in cur for k in ends(t.term, word, j)}
    return out


def oracle(t, word):
    return len(word) in ends(t, word, 0)


def events(word):
    return tuple(EventLabel("x", "y", m) for m in word)


WORDS = [w for n in range(7) for w in itertools.product(ALPHABET, repeat=n)]


def agree(t):
    a = sd_to_nfa(t)
    return all(matches(events(w), a) == oracle(t, w) for w in WORDS)


def test_nfa_agrees_with_oracle_on_fixed_terms():
    terms = [
        Seq(()),
        msg("a"),
        Seq((msg("a"), Opt(msg("b")), msg("c"))),
        Alt((msg("a"), Seq((msg("b"), msg("b"))))),
        Loop(1, 3, Alt((msg("a"), msg("b")))),
        Loop(0, 2, Opt(msg("a"))),
        Loop(2, 2, Seq(())),
    ]
    for t in terms:
        assert agree(t), t


@given(st.integers(0, 10**9))
def test_nfa_agrees_with_oracle(seed):
    assert agree(random_term(random.Random(seed)))


def test_empty_trace_vs_empty_seq():
    assert matches((), sd_to_nfa(Seq(())))


def test_loop_0_3_accepts_exactly_four_words():
    th = Interaction("L", (), Loop(0, 3, msg("a")))
    words = accepted_language(th, lambda m, i: [0]).traces
    assert len(words) == 4
    assert sorted(len(w) for w in words) == [0, 1, 2, 3]


@given(st.integers(0, 4), st.integers(0, 3))
def test_loop_language_size(lo, extra):
    th = Interaction("L", (), Loop(lo, lo + extra, msg("a")))
    assert len(accepted_language(th, lambda m, i: [0]).traces) == extra + 1


def test_event_outside_alphabet_rejects():
    a = sd_to_nfa(msg("a"))
    assert not matches(events("z"), a)


@given(st.integers(0, 10**9), st.lists(st.sampled_from(ALPHABET), max_size=5), st.lists(st.integers(0, 5), max_size=3))
def test_satisfaction_ignores_foreign_events(seed, word, spots):
    th = Interaction("I", (), random_term(random.Random(seed)))
    base = list(events(word))
    noisy = list(base)
    for k in spots:
        noisy.insert(min(k, len(noisy)), EventLabel("x", "y", "zzz"))
    assert sd_satisfies(TraceSet.of(base), th) == sd_satisfies(TraceSet.of(noisy), th)


def test_variables_bind_across_messages():
    body = Seq((Msg("u", "a", "enter", (PVar("p"),)), Msg("a", "b", "verify", (PVar("p"),))))
    a = sd_to_nfa(body)
    good = (EventLabel("u", "a", "enter", (2,)), EventLabel("a", "b", "verify", (2,)))
    bad = (EventLabel("u", "a", "enter", (2,)), EventLabel("a", "b", "verify", (3,)))
    assert matches(good, a)
    assert not matches(bad, a)


def test_literal_and_wildcard_patterns():
    a = sd_to_nfa(Seq((Msg("u", "a", "m", (PLit(1), PWild())),)))
    assert matches((EventLabel("u", "a", "m", (1, 7)),), a)
    assert not matches((EventLabel("u", "a", "m", (2, 7)),), a)
    # True is not the integer 1
    assert not matches((EventLabel("u", "a", "m", (True, 7)),), a)


def test_exists_and_all_modes():
    th = Interaction("I", (), Seq((msg("a"), msg("b"))))
    T = TraceSet.of(events("ab"), events("ac"))
    assert sd_satisfies(T, th, "exists")
    assert not sd_satisfies(T, th, "all")
    with pytest.raises(ValueError):
        sd_satisfies(T, th, "some")


# -- the corpus interaction --------------------------------------------------

def atm_sd():
    with open(corpus("atm", "ATM_Bank_Interaction.sd")) as fh:
        return parse_sd(fh.read())


def E(s, r, m, *args):
    return EventLabel(s, r, m, args)


def test_corpus_interaction_runs():
    a = sd_to_nfa(atm_sd())
    ok = (E("env", "atm", "insertCard"), E("env", "atm", "enterPIN", 1), E("atm", "bank", "verify", 1),
          E("bank", "atm", "verified"), E("atm", "atm", "ejectCard"))
    assert matches(ok, a)
    # the bank must check the PIN that was entered
    assert not matches(ok[:2] + (E("atm", "bank", "verify", 2),) + ok[3:], a)
    four = ok[:1] + (E("env", "atm", "enterPIN", 1), E("atm", "bank", "verify", 1), E("bank", "atm", "rejected")) * 4
    assert not matches(four + (E("atm", "atm", "keepCard"),), a)
    three = ok[:1] + (E("env", "atm", "enterPIN", 1), E("atm", "bank", "verify", 1), E("bank", "atm", "rejected")) * 3
    assert matches(three + (E("atm", "atm", "keepCard"),), a)


def test_shortest_accepted_is_the_one_round_success():
    w = shortest_accepted(atm_sd(), lambda m, i: [0, 1])
    assert [e.message for e in w] == ["insertCard", "enterPIN", "verify", "verified", "ejectCard"]


def test_format_sd_round_trip():
    th = atm_sd()
    assert parse_sd(format_sd(th)) == th


def test_sd_parse_errors():
    with pytest.raises(ParseError):
        parse_sd("interaction I { lifeline a: A\n msg a -> : m }", "x.sd")
    with pytest.raises(DiagnosticError):
        parse_sd("interaction I { lifeline a: A\n lifeline a: B\n msg a -> a : m }")


def test_trace_file_round_trip():
    T = TraceSet.of((E("env", "atm", "enterPIN", 3), E("bank", "atm", "verified")), ())
    assert parse_traces(format_traces(T)).traces == T.traces
    assert parse_event("a -> b : m(1, true, red)") == EventLabel("a", "b", "m", (1, True, "red"))


def test_corpus_lifelines():
    assert atm_sd().lifelines == (Lifeline("atm", "ATM"), Lifeline("bank", "Bank"))
    assert atm_sd().context == "User_Interface"
