"""Agent-side machinery: state tracking, the feasible-action table, the
rule-based baseline, the RL agent wrapper, and the reward signal.

The rule agent asks its fixed slot list once each (skipping slots the user
answered or refused), then books with whatever it heard; it never answers the
user's own questions. That contrast with the trained agent is the point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .frames import DialogAct, is_anything
from .kb import KnowledgeBase, query, top_value
from .qnet import QFunction, select_action
from .schema import DomainSchema
from .simulator import BOOKING_FAILED_VALUE, FAILURE, ONGOING, SUCCESS, TASKCOMPLETE

MOVIE_RULE_REQUEST_ORDER = ("moviename", "starttime", "city", "date", "theater", "numberofpeople")


@dataclass(frozen=True)
class DialogueState:
    constraints_heard: dict = field(default_factory=dict)  # slot -> SlotValue (user informs)
    user_requests_open: tuple[str, ...] = ()
    slots_agent_requested: tuple[str, ...] = ()
    kb_match_count: int = 0
    last_user_act: Optional[DialogAct] = None
    turn: int = 0

    def concrete_constraints(self) -> dict:
        return {s: v for s, v in self.constraints_heard.items() if not is_anything(v)}


def track(state: DialogueState, act: DialogAct, speaker: str, kb: KnowledgeBase) -> DialogueState:
    """Fold one act into the tracker; returns a new state with a fresh KB count."""
    heard = dict(state.constraints_heard)
    open_req = list(state.user_requests_open)
    asked = list(state.slots_agent_requested)
    last_user = state.last_user_act
    if speaker == "user":
        for s, v in act.inform_slots.items():
            heard[s] = v
        for s in act.request_slots:
            if s not in open_req:
                open_req.append(s)
        last_user = act
    else:
        closed = set(act.inform_slots)
        if TASKCOMPLETE in act.inform_slots or TASKCOMPLETE in act.request_slots:
            closed.update(open_req)  # a booking answers the primary request
        open_req = [s for s in open_req if s not in closed]
        for s in act.request_slots:
            if s not in asked:
                asked.append(s)
    concrete = {s: v for s, v in heard.items() if not is_anything(v)}
    return DialogueState(
        constraints_heard=heard,
        user_requests_open=tuple(open_req),
        slots_agent_requested=tuple(asked),
        kb_match_count=len(query(kb, concrete)),
        last_user_act=last_user,
        turn=state.turn + 1,
    )


# -- feasible actions -------------------------------------------------------

@dataclass(frozen=True)
class AgentAction:
    index: int
    kind: str  # request | inform | taskcomplete | confirm_question | closing | thanks
    slot: Optional[str] = None

    @property
    def template_act(self) -> DialogAct:
        """The unbound act shape (inform values shown as UNK placeholders)."""
        if self.kind == "request":
            return DialogAct("request", request_slots=(self.slot,))
        if self.kind == "inform":
            return DialogAct("inform", request_slots=(self.slot,))
        if self.kind == "taskcomplete":
            return DialogAct("inform", request_slots=(TASKCOMPLETE,))
        return DialogAct(self.kind)

    def describe(self) -> str:
        return f"{self.kind}({self.slot})" if self.slot else f"{self.kind}()"


def feasible_actions(schema: DomainSchema) -> list[AgentAction]:
    """Deterministic action table: request each informable, inform each
    requestable (KB-groundable ones), book, confirm, close, thanks."""
    actions = []
    for s in schema.informable_slots:
        actions.append(AgentAction(len(actions), "request", s))
    skip = {schema.primary_request_slot, TASKCOMPLETE}
    for s in schema.requestable_slots:
        if s not in skip:
            actions.append(AgentAction(len(actions), "inform", s))
    actions.append(AgentAction(len(actions), "taskcomplete"))
    actions.append(AgentAction(len(actions), "confirm_question"))
    actions.append(AgentAction(len(actions), "closing"))
    actions.append(AgentAction(len(actions), "thanks"))
    return actions


def bind_action(action: AgentAction, state: DialogueState, kb: KnowledgeBase,
                schema: DomainSchema) -> DialogAct:
    """Fill an action template with values; total on every state."""
    if action.kind == "request":
        return DialogAct("request", request_slots=(action.slot,))
    if action.kind == "inform":
        constraints = state.concrete_constraints()
        value = top_value(kb, action.slot, constraints)
        if value is None and action.slot in constraints:
            value = constraints[action.slot][0]
        if value is None:
            value = top_value(kb, action.slot, {})
        if value is None:
            value = "not available"
        return DialogAct("inform", inform_slots={action.slot: value})
    if action.kind == "taskcomplete":
        if state.kb_match_count <= 0:
            return DialogAct("inform", inform_slots={TASKCOMPLETE: BOOKING_FAILED_VALUE})
        echo = state.concrete_constraints()
        ordered = {s: echo[s] for s in schema.all_slots if s in echo}
        ordered.update({s: echo[s] for s in echo if s not in ordered})
        return DialogAct("inform", inform_slots=ordered, request_slots=(TASKCOMPLETE,))
    return DialogAct(action.kind)


# -- reward ------------------------------------------------------------------

@dataclass(frozen=True)
class RewardConfig:
    step_penalty: float = -1.0
    success_bonus: float = 80.0
    failure_penalty: float = -40.0

    def __post_init__(self):
        if not (self.success_bonus > 0 > self.failure_penalty):
            raise ValueError("need success_bonus > 0 > failure_penalty")

    @classmethod
    def for_max_turns(cls, max_turns: int) -> "RewardConfig":
        return cls(step_penalty=-1.0, success_bonus=2.0 * max_turns,
                   failure_penalty=-float(max_turns))


def reward(status: str, config: RewardConfig) -> float:
    if status == ONGOING:
        return config.step_penalty
    if status == SUCCESS:
        return config.success_bonus
    if status == FAILURE:
        return config.failure_penalty
    raise ValueError(f"unknown status {status!r}")


# -- featurization -----------------------------------------------------------

def feature_size(schema: DomainSchema) -> int:
    return len(schema.intents) + 3 * len(schema.all_slots) + 6


def featurize(state: DialogueState, schema: DomainSchema) -> np.ndarray:
    """Fixed-length vector: last-user-intent one-hot, three slot bags,
    bucketed KB match count, and normalized turn."""
    intents = schema.intents
    slots = schema.all_slots
    vec = np.zeros(feature_size(schema))
    if state.last_user_act is not None and state.last_user_act.intent in intents:
        vec[intents.index(state.last_user_act.intent)] = 1.0
    base = len(intents)
    idx = {s: i for i, s in enumerate(slots)}
    for s in state.constraints_heard:
        if s in idx:
            vec[base + idx[s]] = 1.0
    for s in state.user_requests_open:
        if s in idx:
            vec[base + len(slots) + idx[s]] = 1.0
    for s in state.slots_agent_requested:
        if s in idx:
            vec[base + 2 * len(slots) + idx[s]] = 1.0
    n = state.kb_match_count
    bucket = 0 if n == 0 else 1 if n == 1 else 2 if n <= 5 else 3 if n <= 20 else 4
    vec[base + 3 * len(slots) + bucket] = 1.0
    vec[base + 3 * len(slots) + 5] = min(state.turn / (2.0 * schema.max_turns), 1.0)
    return vec


# -- agents -------------------------------------------------------------------

class DialogueAgent:
    """Shared tracker plumbing; subclasses implement choose()."""

    def __init__(self, schema: DomainSchema, kb: KnowledgeBase):
        self.schema = schema
        self.kb = kb
        self.state = DialogueState()

    def reset(self):
        self.state = DialogueState()

    def choose(self) -> DialogAct:
        raise NotImplementedError

    def respond(self, user_act: DialogAct) -> DialogAct:
        self.state = track(self.state, user_act, "user", self.kb)
        act = self.choose()
        self.state = track(self.state, act, "agent", self.kb)
        return act


class RuleAgent(DialogueAgent):
    """Fixed-order slot collector; books once every slot was asked or heard.

    Deliberately never answers the user's open requests.
    """

    def __init__(self, schema: DomainSchema, kb: KnowledgeBase,
                 request_order: Optional[Sequence[str]] = None):
        super().__init__(schema, kb)
        if request_order is None:
            if schema.domain_name == "movie":
                request_order = MOVIE_RULE_REQUEST_ORDER
            else:
                request_order = schema.informable_slots[:6]
        self.request_order = tuple(request_order)

    def choose(self) -> DialogAct:
        last = self.state.last_user_act
        if last is not None and last.intent in ("thanks", "closing"):
            return DialogAct("thanks")
        for s in self.request_order:
            if s not in self.state.constraints_heard and s not in self.state.slots_agent_requested:
                return DialogAct("request", request_slots=(s,))
        return bind_action(AgentAction(-1, "taskcomplete"), self.state, self.kb, self.schema)


class RLAgent(DialogueAgent):
    """Q-function policy over the feasible-action table (epsilon-greedy)."""

    def __init__(self, schema: DomainSchema, kb: KnowledgeBase, q: QFunction,
                 epsilon: float = 0.0, rng: Optional[np.random.Generator] = None):
        super().__init__(schema, kb)
        self.q = q
        self.epsilon = epsilon
        self.rng = rng or np.random.default_rng(0)
        self.actions = feasible_actions(schema)
        self.last_features: Optional[np.ndarray] = None
        self.last_action: Optional[int] = None

    def choose(self) -> DialogAct:
        feats = featurize(self.state, self.schema)
        idx = select_action(self.q, feats, self.epsilon, self.rng)
        self.last_features = feats
        self.last_action = idx
        return bind_action(self.actions[idx], self.state, self.kb, self.schema)
