"""Domain schemas: intents, slots, and per-domain configuration.

Schemas are shipped as JSON resources (movie, restaurant, taxi) with keys
``domain, intents, informable_slots, requestable_slots, primary_request_slot,
max_turns``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from .errors import SchemaError
from .jsonio import JsonSource, read_json

BUILTIN_DOMAINS = ("movie", "restaurant", "taxi")


@dataclass(frozen=True)
class DomainSchema:
    domain_name: str
    intents: tuple[str, ...]
    informable_slots: tuple[str, ...]
    requestable_slots: tuple[str, ...]
    primary_request_slot: str
    max_turns: int
    # informable order first, then requestable-only slots; the canonical slot order
    all_slots: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        extra = tuple(s for s in self.requestable_slots if s not in self.informable_slots)
        object.__setattr__(self, "all_slots", self.informable_slots + extra)
        _check(self)


def _unique(name: str, values) -> tuple[str, ...]:
    if not isinstance(values, (list, tuple)) or not all(isinstance(v, str) for v in values):
        raise SchemaError(name, "must be a list of strings")
    if len(set(values)) != len(values):
        raise SchemaError(name, "entries must be unique")
    return tuple(values)


def _check(schema: DomainSchema):
    if not schema.intents:
        raise SchemaError("intents", "must be non-empty")
    if schema.primary_request_slot not in schema.requestable_slots:
        raise SchemaError("primary_request_slot", f"{schema.primary_request_slot!r} not in requestable_slots")
    slot_names = set(schema.informable_slots) | set(schema.requestable_slots)
    clash = slot_names.intersection(schema.intents)
    if clash:
        raise SchemaError("intents", f"slot names collide with intent names: {sorted(clash)}")
    if schema.max_turns < 2:
        raise SchemaError("max_turns", "must be >= 2")


def load_schema(source: JsonSource) -> DomainSchema:
    """Load and validate a schema from a JSON document (path, file, text, or dict)."""
    doc = read_json(source)
    if not isinstance(doc, dict):
        raise SchemaError("<root>", "schema document must be a JSON object")
    for key in ("domain", "intents", "informable_slots", "requestable_slots",
                "primary_request_slot", "max_turns"):
        if key not in doc:
            raise SchemaError(key, "missing")
    if not isinstance(doc["max_turns"], int) or isinstance(doc["max_turns"], bool):
        raise SchemaError("max_turns", "must be an integer")
    return DomainSchema(
        domain_name=str(doc["domain"]),
        intents=_unique("intents", doc["intents"]),
        informable_slots=_unique("informable_slots", doc["informable_slots"]),
        requestable_slots=_unique("requestable_slots", doc["requestable_slots"]),
        primary_request_slot=str(doc["primary_request_slot"]),
        max_turns=doc["max_turns"],
    )


def resource_text(name: str) -> str:
    return resources.files("taskchat.resources").joinpath(name).read_text(encoding="utf-8")


def builtin_schema(domain: str) -> DomainSchema:
    """Load one of the shipped schemas by domain name."""
    if domain not in BUILTIN_DOMAINS:
        raise SchemaError("domain", f"no built-in schema for {domain!r} (have {BUILTIN_DOMAINS})")
    return load_schema(resource_text(f"{domain}.schema.json"))
