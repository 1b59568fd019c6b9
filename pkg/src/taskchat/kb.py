"""Knowledge bases: flat slot->value records with constraint queries.

The file format is a JSON array of flat string-valued objects. Record ids are
assigned 1-based from file order. A record missing a constrained slot MATCHES
by default (flip with ``missing_slot_matches=False``); value comparison is
case-insensitive; multi-valued constraints are disjunctive.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import KbFormatError
from .frames import SlotValue, is_anything, slot_value
from .jsonio import JsonSource, read_json
from .schema import DomainSchema

Constraints = Mapping[str, SlotValue]


@dataclass(frozen=True)
class KbRecord:
    id: int
    slots: Mapping[str, str]


@dataclass
class KnowledgeBase:
    domain: str
    records: list[KbRecord]
    missing_slot_matches: bool = True
    warnings: list[str] = field(default_factory=list)
    # slot -> casefolded value -> record-id set, plus ids lacking each slot
    _index: dict = field(default_factory=dict, repr=False)
    _missing: dict = field(default_factory=dict, repr=False)
    _all_ids: frozenset = field(default_factory=frozenset, repr=False)

    def __post_init__(self):
        self._all_ids = frozenset(r.id for r in self.records)
        for r in self.records:
            for s, v in r.slots.items():
                self._index.setdefault(s, {}).setdefault(v.casefold(), set()).add(r.id)
        for s in self._index:
            have = set()
            for ids in self._index[s].values():
                have |= ids
            self._missing[s] = self._all_ids - have

    def __len__(self):
        return len(self.records)

    def ids_for(self, slot: str, value: SlotValue) -> frozenset:
        """Record ids matching one constraint, under the missing-slot policy."""
        by_value = self._index.get(slot, {})
        ids = set()
        for member in value:
            ids |= by_value.get(member.casefold(), set())
        if self.missing_slot_matches:
            ids |= self._missing.get(slot, self._all_ids)
        return frozenset(ids)


def _normalize_constraints(constraints: Mapping) -> dict[str, SlotValue]:
    out = {}
    for s, v in constraints.items():
        value = slot_value(v)
        if is_anything(value):
            continue
        out[s.strip().lower()] = value
    return out


def load_kb(source: JsonSource, schema: Optional[DomainSchema] = None, *,
            missing_slot_matches: bool = True) -> KnowledgeBase:
    """Load a KB from a JSON array of flat string-valued objects.

    Slots unknown to the schema produce warnings, not failures; a non-array
    root or a non-string value raises KbFormatError with the record index.
    """
    doc = read_json(source)
    if not isinstance(doc, list):
        raise KbFormatError("knowledge base root must be a JSON array")
    known = set(schema.all_slots) if schema is not None else None
    records = []
    warnings = []
    for k, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise KbFormatError("record must be a JSON object", record=k)
        slots = {}
        for s, v in entry.items():
            if not isinstance(v, str):
                raise KbFormatError(f"value for slot {s!r} must be a string", record=k)
            if not v.strip():
                raise KbFormatError(f"value for slot {s!r} is empty", record=k)
            name = s.strip().lower()
            if known is not None and name not in known:
                warnings.append(f"record {k}: slot {name!r} not in schema {schema.domain_name!r}")
            slots[name] = v.strip()
        records.append(KbRecord(id=k + 1, slots=slots))
    domain = schema.domain_name if schema is not None else "unknown"
    return KnowledgeBase(domain=domain, records=records, warnings=warnings,
                         missing_slot_matches=missing_slot_matches)


def satisfies(record: KbRecord, constraints: Mapping, *, missing_slot_matches: bool = True) -> bool:
    """True when the record matches every constraint (query's filter predicate)."""
    for s, v in _normalize_constraints(constraints).items():
        held = record.slots.get(s)
        if held is None:
            if missing_slot_matches:
                continue
            return False
        if not any(held.casefold() == member.casefold() for member in v):
            return False
    return True


def query(kb: KnowledgeBase, constraints: Mapping) -> list[KbRecord]:
    """Records matching all constraints, in file order."""
    wanted = _normalize_constraints(constraints)
    if not wanted:
        return list(kb.records)
    ids = None
    for s, v in wanted.items():
        matching = kb.ids_for(s, v)
        ids = matching if ids is None else ids & matching
        if not ids:
            return []
    return [r for r in kb.records if r.id in ids]


def available_values(kb: KnowledgeBase, slot: str, constraints: Mapping) -> dict[str, int]:
    """Histogram of ``slot`` values over the query result (records lacking it excluded)."""
    slot = slot.strip().lower()
    counts = Counter()
    for r in query(kb, constraints):
        if slot in r.slots:
            counts[r.slots[slot]] += 1
    return dict(counts)


def top_value(kb: KnowledgeBase, slot: str, constraints: Mapping) -> Optional[str]:
    """Modal value of ``slot`` under the constraints; ties break lexicographically."""
    hist = available_values(kb, slot, constraints)
    if not hist:
        return None
    return min(hist, key=lambda v: (-hist[v], v))
