"""User goals: the simulator's hidden objective, and the goal-database files.

A goal is request slots (values unknown to the user) plus inform constraints.
The file format is a JSON array of ``{"request_slots": {slot: "UNK"},
"inform_slots": {slot: value}}`` objects; multi-valued constraints use the
brace form ``"{a#b}"``. An optional ``"diaact"`` key is accepted and ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Mapping, Union

from .errors import GoalError
from .frames import UNK, SlotValue, format_value, slot_value
from .jsonio import JsonSource, dump_json, read_json


@dataclass(frozen=True)
class UserGoal:
    request_slots: tuple[str, ...] = ()
    inform_slots: Mapping[str, SlotValue] = field(default_factory=dict)

    def __post_init__(self):
        requests = []
        for s in self.request_slots:
            name = s.strip().lower()
            if name and name not in requests:
                requests.append(name)
        informs = {s.strip().lower(): slot_value(v) for s, v in self.inform_slots.items()}
        overlap = set(informs).intersection(requests)
        if overlap:
            raise GoalError(f"slots both requested and informed: {sorted(overlap)}")
        object.__setattr__(self, "request_slots", tuple(requests))
        object.__setattr__(self, "inform_slots", informs)

    def canonical_key(self):
        return (tuple(sorted(self.request_slots)),
                tuple(sorted((s, v) for s, v in self.inform_slots.items())))


def _value_from_json(raw: str) -> SlotValue:
    raw = raw.strip()
    if raw.startswith("{") and raw.endswith("}"):
        return slot_value(raw[1:-1].split("#"))
    return slot_value(raw)


def goal_to_json(goal: UserGoal) -> dict:
    return {
        "request_slots": {s: UNK for s in goal.request_slots},
        "inform_slots": {s: format_value(v) for s, v in goal.inform_slots.items()},
    }


def goal_from_json(doc: Mapping) -> UserGoal:
    if not isinstance(doc, Mapping):
        raise GoalError(f"goal entry must be a JSON object, got {type(doc).__name__}")
    requests = doc.get("request_slots", {})
    informs = doc.get("inform_slots", {})
    if not isinstance(requests, Mapping) or not isinstance(informs, Mapping):
        raise GoalError("request_slots and inform_slots must be JSON objects")
    return UserGoal(
        request_slots=tuple(requests),
        inform_slots={s: _value_from_json(v) for s, v in informs.items()},
    )


def load_goal_db(source: JsonSource) -> list[UserGoal]:
    doc = read_json(source)
    if not isinstance(doc, list):
        raise GoalError("goal database root must be a JSON array")
    return [goal_from_json(entry) for entry in doc]


def write_goal_db(goals: list[UserGoal], sink: Union[str, IO[str]]) -> int:
    """Write goals as a JSON array, structurally deduplicated. Returns count written."""
    seen = set()
    out = []
    for g in goals:
        key = g.canonical_key()
        if key in seen:
            continue
        seen.add(key)
        out.append(goal_to_json(g))
    dump_json(out, sink)
    return len(out)
