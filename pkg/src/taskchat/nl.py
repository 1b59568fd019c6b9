"""Template NLG and rule NLU: the natural-language channel over dialog acts.

Templates are keyed by act signature ``intent|request slots|inform slots``
(each group comma-joined, sorted) with ``{slot}`` placeholders for inform
values. Rendering falls back to an invertible canonical form
(``"I <intent>: slot, slot=value."``) for acts without a template, so
``nlu_parse(nlg_render(act))`` recovers every act the platform can emit.
Free-typed human input degrades to lexicon matching and finally to a
``not_sure()`` act; parsing never fails.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .frames import ANYTHING, DialogAct, SlotValue, is_anything
from .jsonio import JsonSource, read_json
from .kb import KnowledgeBase
from .schema import DomainSchema, resource_text

_PLACEHOLDER_RE = re.compile(r"\{([a-z0-9_]+)\}")
_NAME = r"[a-z_][a-z0-9_]*"
_FALLBACK_BARE_RE = re.compile(rf"I ({_NAME})\.")
_FALLBACK_PARTS_RE = re.compile(rf"I ({_NAME}): (.+)\.")
_CARE_CITY = "I do not care."
_CARE_SLOT_RE = re.compile(r"I do not care about the ([a-z0-9_]+)\.")
_VALUE_JOIN = " or "

Signature = tuple[str, tuple[str, ...], tuple[str, ...]]


def act_signature(act: DialogAct) -> Signature:
    return (act.intent, tuple(sorted(act.request_slots)), tuple(sorted(act.inform_slots)))


def _key_to_signature(key: str) -> Signature:
    parts = key.split("|")
    if len(parts) != 3:
        raise ValueError(f"template key {key!r} must look like 'intent|req,slots|inf,slots'")
    intent, req, inf = parts
    split = lambda s: tuple(sorted(x for x in s.split(",") if x))
    return intent.strip().lower(), split(req), split(inf)


@dataclass
class _Pattern:
    regex: re.Pattern
    signature: Signature
    literal_len: int


@dataclass
class TemplateTable:
    """Compiled act<->utterance templates with an inverse index."""

    entries: dict = field(default_factory=dict)  # Signature -> template string
    _exact: dict = field(default_factory=dict, repr=False)  # utterance -> Signature
    _patterns: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        for signature, template in self.entries.items():
            placeholders = _PLACEHOLDER_RE.findall(template)
            if sorted(placeholders) != sorted(set(placeholders)):
                raise ValueError(f"template {template!r} repeats a placeholder")
            if tuple(sorted(placeholders)) != signature[2]:
                raise ValueError(
                    f"template {template!r} placeholders {placeholders} do not cover "
                    f"inform slots {signature[2]}")
            if not placeholders:
                if template in self._exact:
                    raise ValueError(f"duplicate template utterance {template!r}")
                self._exact[template] = signature
                continue
            pieces = _PLACEHOLDER_RE.split(template)
            regex = ""
            literal_len = 0
            for i, piece in enumerate(pieces):
                if i % 2 == 0:
                    regex += re.escape(piece)
                    literal_len += len(piece)
                else:
                    regex += f"(?P<{piece}>.+?)"
            self._patterns.append(_Pattern(re.compile(regex), signature, literal_len))
        self._patterns.sort(key=lambda p: -p.literal_len)

    def lookup(self, act: DialogAct) -> Optional[str]:
        return self.entries.get(act_signature(act))


def load_templates(source: JsonSource) -> TemplateTable:
    doc = read_json(source)
    if not isinstance(doc, dict):
        raise ValueError("template file root must be a JSON object")
    return TemplateTable(entries={_key_to_signature(k): v for k, v in doc.items()})


def builtin_templates() -> TemplateTable:
    return load_templates(resource_text("templates.json"))


def _render_value(value: SlotValue) -> str:
    return _VALUE_JOIN.join(value)


def _split_value(text: str) -> SlotValue:
    return tuple(p.strip() for p in text.split(_VALUE_JOIN))


def _fallback_render(act: DialogAct) -> str:
    parts = list(act.request_slots)
    parts += [f"{s}={_render_value(v)}" for s, v in act.inform_slots.items()]
    if not parts:
        return f"I {act.intent}."
    return f"I {act.intent}: {', '.join(parts)}."


def nlg_render(act: DialogAct, table: TemplateTable) -> str:
    """Act to utterance: exact-signature template, else the canonical fallback."""
    if act.intent == "inform" and not act.request_slots and len(act.inform_slots) == 1:
        (slot, value), = act.inform_slots.items()
        if is_anything(value):
            return _CARE_CITY if slot == "city" else f"I do not care about the {slot}."
    template = table.lookup(act)
    if template is None:
        return _fallback_render(act)
    return template.format(**{s: _render_value(v) for s, v in act.inform_slots.items()})


def _act_from_signature(signature: Signature, informs: dict) -> DialogAct:
    intent, req, _ = signature
    return DialogAct(intent, inform_slots=informs, request_slots=req)


def build_lexicon(kb: KnowledgeBase, schema: DomainSchema) -> dict[str, list[str]]:
    """slot -> KB vocabulary, longest values first (for greedy matching)."""
    vocab: dict[str, set] = {}
    for record in kb.records:
        for s, v in record.slots.items():
            if s in schema.all_slots:
                vocab.setdefault(s, set()).add(v)
    return {s: sorted(values, key=lambda v: (-len(v), v)) for s, values in vocab.items()}


_INTENT_KEYWORDS = [
    ("thank", "thanks"),
    ("goodbye", "closing"),
    ("bye", "closing"),
    ("hello", "greeting"),
    ("hi ", "greeting"),
]
_AFFIRM = {"yes", "yeah", "yep", "sure", "ok", "okay", "yes please"}
_NEGATE = {"no", "nope", "wrong", "no thanks"}
_REQUEST_CUES = [
    ("what time", "starttime"),
    ("when ", "starttime"),
    ("which theater", "theater"),
    ("what theater", "theater"),
    ("where ", "theater"),
    ("what movie", "moviename"),
    ("which movie", "moviename"),
    ("what date", "date"),
    ("which day", "date"),
    ("how much", "price"),
    ("book", "ticket"),
    ("ticket", "ticket"),
]
_N_TICKETS_RE = re.compile(r"\b(\d+)\s+(?:tickets?|people|seats?)\b")


def _lexicon_parse(text: str, schema: Optional[DomainSchema],
                   lexicon: Optional[dict]) -> Optional[DialogAct]:
    lowered = text.casefold().strip()
    bare = lowered.rstrip("!?. ")
    if bare in _AFFIRM:
        return DialogAct("confirm_answer")
    if bare in _NEGATE:
        return DialogAct("deny")
    for keyword, intent in _INTENT_KEYWORDS:
        if keyword in lowered:
            return DialogAct(intent)
    informs: dict = {}
    m = _N_TICKETS_RE.search(lowered)
    if m:
        informs["numberofpeople"] = (m.group(1),)
    if lexicon:
        consumed = lowered
        for slot, values in lexicon.items():
            if slot in informs:
                continue
            for v in values:
                at = consumed.find(v.casefold())
                if at >= 0:
                    informs[slot] = (v,)
                    consumed = consumed[:at] + " " * len(v) + consumed[at + len(v):]
                    break
    requests = []
    if "?" in text:
        primary = schema.primary_request_slot if schema else "ticket"
        known = set(schema.requestable_slots) if schema else None
        for cue, slot in _REQUEST_CUES:
            slot = primary if slot == "ticket" else slot
            if cue in lowered and slot not in requests and slot not in informs:
                if known is None or slot in known:
                    requests.append(slot)
    if requests:
        return DialogAct("request", inform_slots=informs, request_slots=tuple(requests))
    if informs:
        return DialogAct("inform", inform_slots=informs)
    return None


def nlu_parse(utterance: str, table: TemplateTable, schema: Optional[DomainSchema] = None,
              lexicon: Optional[dict] = None) -> DialogAct:
    """Utterance to act. Template inversion first, then the canonical fallback
    form, then lexicon matching; any other input becomes ``not_sure()``."""
    text = utterance.strip()
    signature = table._exact.get(text)
    if signature is not None:
        return _act_from_signature(signature, {})
    if text == _CARE_CITY:
        return DialogAct("inform", inform_slots={"city": (ANYTHING,)})
    m = _CARE_SLOT_RE.fullmatch(text)
    if m:
        try:
            return DialogAct("inform", inform_slots={m.group(1): (ANYTHING,)})
        except ValueError:
            pass
    for pattern in table._patterns:
        m = pattern.regex.fullmatch(text)
        if not m:
            continue
        try:
            informs = {s: _split_value(v) for s, v in m.groupdict().items()}
            return _act_from_signature(pattern.signature, informs)
        except ValueError:
            continue
    m = _FALLBACK_BARE_RE.fullmatch(text)
    if m:
        try:
            return DialogAct(m.group(1))
        except ValueError:
            pass
    m = _FALLBACK_PARTS_RE.fullmatch(text)
    if m:
        try:
            informs = {}
            requests = []
            for part in m.group(2).split(", "):
                if "=" in part:
                    s, v = part.split("=", 1)
                    informs[s.strip()] = _split_value(v)
                else:
                    requests.append(part.strip())
            return DialogAct(m.group(1), inform_slots=informs, request_slots=tuple(requests))
        except ValueError:
            pass
    try:
        act = _lexicon_parse(text, schema, lexicon)
    except ValueError:
        act = None
    return act if act is not None else DialogAct("not_sure")
