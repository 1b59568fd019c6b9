"""Annotated dialogue corpora: loading, statistics, and goal extraction.

Corpus files are JSON arrays of ``{"id", "domain", "turns": [{"speaker",
"utterance", "act"}]}`` with the act in the frame DSL. Two goal-extraction
methods are provided: first non-greeting user turn, and aggregation over all
user turns (last write wins; a slot informed anywhere ends up inform-only).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import ParseError
from .frames import DialogAct, Violation, parse_frame, validate_act
from .goals import UserGoal
from .jsonio import JsonSource, read_json
from .schema import DomainSchema

USER = "user"
AGENT = "agent"


@dataclass(frozen=True)
class AnnotatedTurn:
    speaker: str  # "user" | "agent"
    utterance: str
    act: DialogAct


@dataclass(frozen=True)
class AnnotatedDialogue:
    id: str
    domain: str
    turns: tuple[AnnotatedTurn, ...]

    def user_turns(self):
        return [t for t in self.turns if t.speaker == USER]


@dataclass(frozen=True)
class CorpusStats:
    n_dialogues: int
    n_intents_observed: int
    n_slots_observed: int
    avg_turns: Fraction
    avg_turns_defined: bool


@dataclass
class ValidationReport:
    # (dialogue id, turn index, violation)
    violations: list[tuple[str, int, Violation]]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_text(self) -> str:
        if self.ok:
            return "corpus valid: no violations\n"
        lines = [f"{len(self.violations)} violation(s):"]
        for did, turn, v in self.violations:
            lines.append(f"  dialogue {did} turn {turn}: {v}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"dialogue": did, "turn": turn, "kind": v.kind, "name": v.name}
                for did, turn, v in self.violations
            ],
        }


def load_corpus(source: JsonSource, schema: Optional[DomainSchema] = None) -> list[AnnotatedDialogue]:
    """Parse a corpus file; malformed act syntax raises ParseError with location.

    Schema membership is NOT enforced here; run validate_corpus for that.
    """
    doc = read_json(source)
    if not isinstance(doc, list):
        raise ParseError("corpus root must be a JSON array")
    dialogues = []
    for d_idx, entry in enumerate(doc):
        did = str(entry.get("id", d_idx))
        turns = []
        for t_idx, raw in enumerate(entry.get("turns", [])):
            speaker = raw.get("speaker", "")
            if speaker not in (USER, AGENT):
                raise ParseError(f"bad speaker {speaker!r}", dialogue_id=did, turn=t_idx)
            try:
                act = parse_frame(raw.get("act", ""), schema, lenient=True)
            except ParseError as e:
                raise ParseError(str(e), offset=e.offset, dialogue_id=did, turn=t_idx) from e
            turns.append(AnnotatedTurn(speaker=speaker, utterance=raw.get("utterance", ""), act=act))
        dialogues.append(AnnotatedDialogue(id=did, domain=str(entry.get("domain", "")), turns=tuple(turns)))
    return dialogues


def validate_corpus(corpus: list[AnnotatedDialogue], schema: DomainSchema) -> ValidationReport:
    violations = []
    for d in corpus:
        for i, t in enumerate(d.turns):
            for v in validate_act(t.act, schema):
                violations.append((d.id, i, v))
    return ValidationReport(violations)


def corpus_stats(corpus: list[AnnotatedDialogue]) -> CorpusStats:
    """Exact counts over the corpus; avg_turns is 0 (flagged) when empty."""
    intents = set()
    slots = set()
    total_turns = 0
    for d in corpus:
        total_turns += len(d.turns)
        for t in d.turns:
            intents.add(t.act.intent)
            slots.update(t.act.inform_slots)
            slots.update(t.act.request_slots)
    n = len(corpus)
    return CorpusStats(
        n_dialogues=n,
        n_intents_observed=len(intents),
        n_slots_observed=len(slots),
        avg_turns=Fraction(total_turns, n) if n else Fraction(0),
        avg_turns_defined=n > 0,
    )


def extract_goals_first_turn(corpus: list[AnnotatedDialogue]) -> tuple[list[UserGoal], list[str]]:
    """Goal per dialogue from the first non-greeting user turn.

    Returns (goals, skipped dialogue ids).
    """
    goals = []
    skipped = []
    for d in corpus:
        turn = next((t for t in d.user_turns() if t.act.intent != "greeting"), None)
        if turn is None:
            skipped.append(d.id)
            continue
        goals.append(UserGoal(request_slots=turn.act.request_slots,
                              inform_slots=dict(turn.act.inform_slots)))
    return goals, skipped


def extract_goals_aggregate(corpus: list[AnnotatedDialogue]) -> tuple[list[UserGoal], list[str]]:
    """Goal per dialogue aggregating every user turn.

    Inform slots accumulate with last-write-wins; request slots accumulate;
    a slot that is ever informed by the user ends up inform-only.
    """
    goals = []
    skipped = []
    for d in corpus:
        user_turns = [t for t in d.user_turns() if t.act.intent != "greeting"]
        if not user_turns:
            skipped.append(d.id)
            continue
        requests: list[str] = []
        informs: dict = {}
        for t in user_turns:
            for s in t.act.request_slots:
                if s not in requests:
                    requests.append(s)
            for s, v in t.act.inform_slots.items():
                informs[s] = v
        requests = [s for s in requests if s not in informs]
        goals.append(UserGoal(request_slots=tuple(requests), inform_slots=informs))
    return goals, skipped
