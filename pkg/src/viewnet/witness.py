"""Witness files: explicit transition systems, trace sets and filmstrips.

An explicit TS is stored as JSON (sorted keys, one file per node) so a
realization family can be re-checked without any search.
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ParseError, ResolveError
from .expr import format_value
from .interaction import SystemTraces, TraceSet, format_traces, parse_traces
from .kernel import InstitutionId, Realization
from .structural import Event, EventLabel, Obj, Snapshot, SnapshotTS, TSState, format_od, format_snapshot


# -- explicit transition systems -------------------------------------------

def _label_json(l: EventLabel) -> dict:
    return {"sender": l.sender, "receiver": l.receiver, "message": l.message, "args": list(l.args), "kind": l.kind}


def _state_json(s: TSState) -> dict:
    return {
        "objects": [[o.id, o.cls, [[a, v] for a, v in o.values]] for o in s.snapshot.objects],
        "links": [list(l) for l in s.snapshot.links],
        "control": [list(c) for c in s.control],
        "queues": [[o, [[e.sender, e.message, list(e.args)] for e in q]] for o, q in s.queues],
    }


def ts_to_json(ts: SnapshotTS, institution: InstitutionId, node: str = "") -> str:
    doc = {
        "format": "viewnet-ts/1",
        "node": node,
        "institution": str(institution),
        "explored_completely": ts.explored_completely,
        "states": [_state_json(s) for s in ts.states],
        "initial": list(ts.initial),
        "transitions": [[a, _label_json(l), b] for a, l, b in ts.transitions],
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _state_from(d: dict) -> TSState:
    objs = [Obj(i, c, tuple((a, v) for a, v in vals)) for i, c, vals in d["objects"]]
    snap = Snapshot(tuple(objs), tuple(sorted(tuple(l) for l in d["links"])))
    control = tuple(tuple(c) for c in d.get("control", []))
    queues = tuple((o, tuple(Event(s, m, tuple(a)) for s, m, a in q)) for o, q in d.get("queues", []))
    return TSState(snap, control, queues)


def ts_from_json(text: str, source: str = "") -> Tuple[InstitutionId, SnapshotTS]:
    try:
        doc = json.loads(text)
        states = tuple(_state_from(s) for s in doc["states"])
        trans = tuple(
            (a, EventLabel(l["sender"], l["receiver"], l["message"], tuple(l["args"]), l["kind"]), b)
            for a, l, b in doc["transitions"]
        )
        inst = InstitutionId(doc["institution"])
        n = len(states)
        if any(not 0 <= i < n for i in doc["initial"]) or any(not (0 <= a < n and 0 <= b < n) for a, _, b in trans):
            raise ParseError("state index out of range", source=source)
        return inst, SnapshotTS(states, tuple(doc["initial"]), trans, bool(doc.get("explored_completely", True)))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed transition-system file: {e}", source=source) from None


def ts_digest(ts: SnapshotTS) -> str:
    return hashlib.sha256(ts_to_json(ts, InstitutionId.CD).encode()).hexdigest()[:16]


# -- filmstrips ------------------------------------------------------------

def format_state(s: TSState, indent: str = "    ") -> List[str]:
    lines = format_snapshot(s.snapshot, indent)
    if s.control:
        lines.append(indent + "control " + ", ".join(f"{o} = {st}" for o, st in s.control))
    for o, q in s.queues:
        if q:
            events = ", ".join(f"{e.message}({', '.join(format_value(a) for a in e.args)}) from {e.sender}" for e in q)
            lines.append(f"{indent}pool {o} = [{events}]")
    return lines


def format_filmstrip(initial: TSState, steps: Sequence[Tuple[EventLabel, TSState]]) -> str:
    """Every move with the configuration it leads to; hidden moves are marked."""
    out = ["initial", *format_state(initial)]
    for label, state in steps:
        tag = "" if label.observable else f"  [{label.kind}, hidden]"
        out.append(f"{label}{tag}")
        out.extend(format_state(state))
    return "\n".join(out) + "\n"


def filmstrip_events(text: str) -> List[str]:
    """The observable event lines of a filmstrip file."""
    return [
        line.strip()
        for line in text.splitlines()
        if line and not line.startswith(" ") and line != "initial" and not line.endswith(", hidden]")
    ]


# -- bundles ---------------------------------------------------------------

REALIZATIONS = "realizations"


def write_bundle(
    directory: str,
    network: str,
    context: str,
    initial: Optional[TSState],
    steps: Sequence[Tuple[EventLabel, TSState]],
    realizations: Dict[str, Realization],
) -> None:
    os.makedirs(os.path.join(directory, REALIZATIONS), exist_ok=True)
    snap = initial.snapshot if initial is not None else Snapshot()
    with open(os.path.join(directory, "init.od"), "w", encoding="utf-8") as fh:
        fh.write(format_od(f"{network}_init", context, snap))
    with open(os.path.join(directory, "trace.txt"), "w", encoding="utf-8") as fh:
        fh.write(format_filmstrip(initial or TSState(snap), steps))
    digest_lines = []
    for name in sorted(realizations):
        r = realizations[name]
        base = os.path.join(directory, REALIZATIONS, name)
        if r.institution is InstitutionId.SD:
            body = r.body.materialize() if isinstance(r.body, SystemTraces) else r.body
            with open(base + ".traces", "w", encoding="utf-8") as fh:
                fh.write(format_traces(body))
            digest_lines.append(f"{name} SD traces={len(body.traces)}")
        else:
            text = ts_to_json(r.body, r.institution, name)
            with open(base + ".ts", "w", encoding="utf-8") as fh:
                fh.write(text)
            digest_lines.append(
                f"{name} {r.institution} states={len(r.body.states)} transitions={len(r.body.transitions)} "
                f"hash={hashlib.sha256(text.encode()).hexdigest()[:16]}"
            )
    with open(os.path.join(directory, "ts.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(digest_lines) + "\n")


def load_realization(directory: str, node: str) -> Tuple[InstitutionId, object]:
    """Body of a node's stored realization (SnapshotTS or TraceSet)."""
    base = os.path.join(directory, REALIZATIONS, node)
    if os.path.isfile(base + ".ts"):
        with open(base + ".ts", encoding="utf-8") as fh:
            return ts_from_json(fh.read(), base + ".ts")
    if os.path.isfile(base + ".traces"):
        with open(base + ".traces", encoding="utf-8") as fh:
            return InstitutionId.SD, parse_traces(fh.read())
    raise ResolveError(f"missing witness file for node {node!r} in {directory}")
