"""Dialog-act frames and the frame DSL parser/serializer.

A dialog act is an intent plus inform slots (slot=value) and request slots
(slot with unknown value). The text form follows the grammar

    act    := intent '(' [param (';' param)*] ')'
    param  := slot ['=' value]
    value  := atom | '{' atom ('#' atom)* '}'

Whitespace around tokens is ignored; intent and slot names are case-folded;
values keep their original case. A bare param and ``slot=UNK`` both mean the
slot is requested.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .errors import ParseError, ValidationError

# A slot value: non-empty ordered tuple of strings, singleton in the common case.
SlotValue = tuple[str, ...]

UNK = "UNK"
ANYTHING = "anything"

_NAME_RE = re.compile(r"[a-z0-9_]+\Z")
_VALUE_FORBIDDEN = set(";(){}#=")


def slot_value(value: Union[str, Iterable[str]]) -> SlotValue:
    """Normalize a raw value (string or iterable of strings) to a SlotValue."""
    if isinstance(value, str):
        value = (value,)
    out = tuple(v.strip() for v in value)
    if not out or any(not v for v in out):
        raise ValueError("slot values must be non-empty after trimming")
    for v in out:
        bad = _VALUE_FORBIDDEN.intersection(v)
        if bad:
            raise ValueError(f"slot value {v!r} contains reserved character {sorted(bad)[0]!r}")
    return out


def is_anything(value: SlotValue) -> bool:
    return len(value) == 1 and value[0].casefold() == ANYTHING


def format_value(value: SlotValue) -> str:
    if len(value) == 1:
        return value[0]
    return "{" + "#".join(value) + "}"


@dataclass(frozen=True)
class DialogAct:
    """An intent plus inform-slot map and request-slot set.

    Construction normalizes intent/slot names (trim + lowercase), coerces
    inform values to SlotValue tuples, moves ``UNK``-valued informs to the
    request set, and rejects acts with a slot on both sides.
    """

    intent: str
    inform_slots: Mapping[str, SlotValue] = field(default_factory=dict)
    request_slots: tuple[str, ...] = ()

    def __post_init__(self):
        intent = self.intent.strip().lower()
        if not _NAME_RE.match(intent):
            raise ValueError(f"bad intent name {self.intent!r}")
        requests: list[str] = []
        for s in self.request_slots:
            name = s.strip().lower()
            if not _NAME_RE.match(name):
                raise ValueError(f"bad slot name {s!r}")
            if name not in requests:
                requests.append(name)
        informs: dict[str, SlotValue] = {}
        for s, v in self.inform_slots.items():
            name = s.strip().lower()
            if not _NAME_RE.match(name):
                raise ValueError(f"bad slot name {s!r}")
            value = slot_value(v)
            if value == (UNK,):
                if name not in requests:
                    requests.append(name)
                continue
            informs[name] = value
        overlap = set(informs).intersection(requests)
        if overlap:
            raise ValueError(f"slots in both inform and request sets: {sorted(overlap)}")
        object.__setattr__(self, "intent", intent)
        object.__setattr__(self, "inform_slots", informs)
        object.__setattr__(self, "request_slots", tuple(requests))

    def __str__(self):
        return serialize_frame(self)


@dataclass(frozen=True)
class Violation:
    """A single act-vs-schema mismatch; data, not an error."""

    kind: str  # unknown_intent | unknown_request_slot | unknown_inform_slot
    name: str

    def __str__(self):
        return f"{self.kind}:{self.name}"


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, message: str, offset: Optional[int] = None):
        raise ParseError(message, offset=self.pos if offset is None else offset)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.fail(f"expected {ch!r}")
        self.pos += 1

    def read_name(self, what: str) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in "();={}#":
            self.pos += 1
        name = self.text[start:self.pos].strip().lower()
        if not _NAME_RE.match(name):
            self.fail(f"expected {what} name", offset=start)
        return name

    def read_atom(self, stops: str) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in stops:
            if self.text[self.pos] in "(){}#=":
                self.fail(f"unexpected {self.text[self.pos]!r} in value")
            self.pos += 1
        atom = self.text[start:self.pos].strip()
        if not atom:
            self.fail("empty value", offset=start)
        return atom

    def read_value(self) -> SlotValue:
        self.skip_ws()
        if self.peek() == "{":
            self.pos += 1
            atoms = [self.read_atom("#}")]
            while self.peek() == "#":
                self.pos += 1
                atoms.append(self.read_atom("#}"))
            self.expect("}")
            self.skip_ws()
            return tuple(atoms)
        return (self.read_atom(";)"),)


def parse_frame(text: str, schema=None, *, lenient: bool = False) -> DialogAct:
    """Parse frame-DSL text into a DialogAct.

    With a schema, unknown intents/slots raise ValidationError unless
    ``lenient``. Malformed syntax raises ParseError with a byte offset.
    A slot repeated across params keeps only its last occurrence.
    """
    sc = _Scanner(text)
    intent = sc.read_name("intent")
    sc.skip_ws()
    sc.expect("(")
    params: list[tuple[str, Optional[SlotValue]]] = []
    sc.skip_ws()
    if sc.peek() != ")":
        while True:
            slot = sc.read_name("slot")
            sc.skip_ws()
            if sc.peek() == "=":
                sc.pos += 1
                value: Optional[SlotValue] = sc.read_value()
                if value == (UNK,):
                    value = None
            else:
                value = None
            params.append((slot, value))
            sc.skip_ws()
            if sc.peek() == ";":
                sc.pos += 1
                continue
            break
    sc.expect(")")
    sc.skip_ws()
    if sc.pos != len(sc.text):
        sc.fail("trailing text after ')'")

    requests: list[str] = []
    informs: dict[str, SlotValue] = {}
    for slot, value in params:  # later params win over earlier ones
        informs.pop(slot, None)
        if slot in requests:
            requests.remove(slot)
        if value is None:
            requests.append(slot)
        else:
            informs[slot] = value

    act = DialogAct(intent=intent, inform_slots=informs, request_slots=tuple(requests))
    if schema is not None and not lenient:
        violations = validate_act(act, schema)
        if violations:
            raise ValidationError(violations)
    return act


def _ordered(names: Iterable[str], reference: Optional[tuple[str, ...]]) -> list[str]:
    names = list(names)
    if reference is None:
        return names
    known = [n for n in reference if n in names]
    return known + [n for n in names if n not in reference]


def serialize_frame(act: DialogAct, schema=None) -> str:
    """Serialize an act: intent, request slots, then inform slots.

    With a schema the slot order is canonical (schema order); otherwise
    insertion order is kept. ``parse_frame(serialize_frame(a))`` equals ``a``.
    """
    req_ref = schema.requestable_slots if schema is not None else None
    inf_ref = schema.all_slots if schema is not None else None
    parts = _ordered(act.request_slots, req_ref)
    parts += [f"{s}={format_value(act.inform_slots[s])}" for s in _ordered(act.inform_slots, inf_ref)]
    return f"{act.intent}({';'.join(parts)})"


def validate_act(act: DialogAct, schema) -> list[Violation]:
    """Check act membership against a schema; empty list means valid."""
    violations = []
    if act.intent not in schema.intents:
        violations.append(Violation("unknown_intent", act.intent))
    requestable = set(schema.requestable_slots)
    informable = set(schema.informable_slots) | requestable
    for s in act.request_slots:
        if s not in requestable:
            violations.append(Violation("unknown_request_slot", s))
    for s in act.inform_slots:
        if s not in informable:
            violations.append(Violation("unknown_inform_slot", s))
    return violations
