"""Agenda-based user simulator.

The simulator samples a goal, opens with a request for the goal's unknown
slots, reacts deterministically to agent acts (answer requests with goal
values, say "anything" for unconstrained slots, deny wrong offers, re-request
unanswered questions), and decides the binary episode outcome when the agent
books (``inform(taskcomplete;...)``) or the turn cap is hit.

The act-level reaction rules, in priority order:

  (a) agent requests a constrained slot        -> inform goal value
  (b) agent requests an unconstrained slot     -> inform "anything"
  (c) agent informs a requested slot           -> record answer; confirm or
                                                  re-request the remaining unknowns
  (d) agent informs a value conflicting with a
      goal constraint                          -> deny, then correct via agenda
  (e) agent books (inform taskcomplete)        -> thanks; outcome decided
  (f) agent closing/thanks after the booking   -> thanks, status kept
  (g) turn cap reached                         -> closing, failure
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import EmptyGoalSet, GoalError, ProtocolError
from .frames import ANYTHING, DialogAct, SlotValue, is_anything
from .goals import UserGoal
from .kb import KnowledgeBase, query
from .schema import DomainSchema

ONGOING = "ongoing"
SUCCESS = "success"
FAILURE = "failure"

TASKCOMPLETE = "taskcomplete"
BOOKING_FAILED_VALUE = "failure"  # payload marking inform(taskcomplete=failure)
BOOKED = "booked"  # sentinel answer for the primary request slot


@dataclass
class SimConfig:
    max_turns: int = 40
    first_turn_inform_count: Union[int, str] = "all"
    seed: int = 0
    slot_error_prob: float = 0.0  # noise channel hook; not wired up

    def __post_init__(self):
        if self.max_turns < 2:
            raise ValueError("max_turns must be >= 2")
        if self.first_turn_inform_count != "all" and int(self.first_turn_inform_count) < 0:
            raise ValueError("first_turn_inform_count must be 'all' or a non-negative int")


@dataclass
class SimState:
    goal: UserGoal
    agenda: list[DialogAct] = field(default_factory=list)  # stack; pop from the end
    constraints_issued: set = field(default_factory=set)
    requests_answered: dict = field(default_factory=dict)  # slot -> SlotValue heard
    agent_offer: dict = field(default_factory=dict)  # slot -> SlotValue informed by agent
    turn: int = 1  # total acts exchanged so far
    status: str = ONGOING
    taskcomplete_received: bool = False
    booking_failed: bool = False
    failure_reason: Optional[str] = None


def sample_goal(goal_db: Sequence[UserGoal], rng: np.random.Generator) -> UserGoal:
    """Uniform draw from the goal database; deterministic under a fixed seed."""
    if not goal_db:
        raise EmptyGoalSet("goal database is empty")
    return goal_db[int(rng.integers(len(goal_db)))]


def _values_match(a: SlotValue, b: SlotValue) -> bool:
    folded = {x.casefold() for x in a}
    return any(y.casefold() in folded for y in b)


@dataclass
class AgentActEffects:
    taskcomplete: bool = False
    conflicts: list = field(default_factory=list)
    answered_now: bool = False


def record_agent_act(state: SimState, agent_act: DialogAct, primary: str) -> AgentActEffects:
    """Fold an agent act into the episode bookkeeping (offers, answers, booking).

    Shared by the simulator and the judging service (where a human plays the
    user role but the outcome rule is the same).
    """
    goal = state.goal
    effects = AgentActEffects()
    effects.taskcomplete = agent_act.intent == "inform" and (
        TASKCOMPLETE in agent_act.request_slots or TASKCOMPLETE in agent_act.inform_slots)
    for s, v in agent_act.inform_slots.items():
        if s == TASKCOMPLETE:
            continue
        state.agent_offer[s] = v
        if s in goal.request_slots and not is_anything(v):
            state.requests_answered[s] = v
            effects.answered_now = True
        if s in goal.inform_slots and not is_anything(v) and not _values_match(v, goal.inform_slots[s]):
            effects.conflicts.append(s)
    if effects.taskcomplete:
        payload = agent_act.inform_slots.get(TASKCOMPLETE)
        state.taskcomplete_received = True
        state.booking_failed = payload is not None and payload[0].casefold() == BOOKING_FAILED_VALUE
        if not state.booking_failed and primary in goal.request_slots:
            state.requests_answered[primary] = (BOOKED,)
    return effects


class UserSimulator:
    """Deterministic agenda-based user model for one domain.

    Holds schema, KB, and config; episode state lives in SimState so many
    episodes can run in parallel on distinct states.
    """

    def __init__(self, schema: DomainSchema, kb: KnowledgeBase, config: Optional[SimConfig] = None):
        self.schema = schema
        self.kb = kb
        self.config = config or SimConfig(max_turns=schema.max_turns)

    # -- episode lifecycle -------------------------------------------------

    def reset(self, goal: UserGoal) -> tuple[SimState, DialogAct]:
        """Start an episode: the opening act requests the goal's unknown slots."""
        if not goal.request_slots:
            raise GoalError("goal has no request slots; nothing to ask for")
        inform_order = [s for s in self.schema.all_slots if s in goal.inform_slots]
        inform_order += [s for s in goal.inform_slots if s not in self.schema.all_slots]
        k = self.config.first_turn_inform_count
        k = len(inform_order) if k == "all" else min(int(k), len(inform_order))
        first_informs = {s: goal.inform_slots[s] for s in inform_order[:k]}
        state = SimState(goal=goal)
        state.constraints_issued.update(first_informs)
        for s in reversed(inform_order[k:]):  # stack: earliest schema-order slot pops first
            state.agenda.append(DialogAct("inform", inform_slots={s: goal.inform_slots[s]}))
        first = DialogAct("request", inform_slots=first_informs,
                          request_slots=self._request_order(goal.request_slots))
        return state, first

    def step(self, state: SimState, agent_act: DialogAct) -> tuple[DialogAct, str]:
        """React to one agent act; returns (user act, status)."""
        if state.status != ONGOING:
            if agent_act.intent in ("closing", "thanks"):  # rule (f): polite close
                return DialogAct("thanks"), state.status
            raise ProtocolError(f"episode already ended with status {state.status!r}")
        state.turn += 2
        goal = state.goal
        effects = record_agent_act(state, agent_act, self.schema.primary_request_slot)

        if effects.taskcomplete:  # rule (e)
            status, reason = self.episode_outcome(state)
            state.status = status
            state.failure_reason = reason
            return DialogAct("thanks"), state.status

        if state.turn >= 2 * self.config.max_turns - 1:  # rule (g)
            state.status = FAILURE
            state.failure_reason = "turn_cap"
            return DialogAct("closing"), state.status

        if effects.conflicts:  # rule (d): deny now, push corrections
            for s in reversed(self._inform_order(effects.conflicts)):
                state.agenda.append(DialogAct("inform", inform_slots={s: goal.inform_slots[s]}))
            return DialogAct("deny"), state.status

        requests = [s for s in agent_act.request_slots if s != TASKCOMPLETE]
        if requests:
            answerable = [s for s in requests if s in goal.inform_slots]
            unconstrained = [s for s in requests
                             if s not in goal.inform_slots and s not in goal.request_slots]
            if answerable or unconstrained:  # rules (a) + (b)
                informs = {s: goal.inform_slots[s] for s in answerable}
                informs.update({s: (ANYTHING,) for s in unconstrained})
                state.constraints_issued.update(answerable)
                ordered = {s: informs[s] for s in self._inform_order(informs)}
                return DialogAct("inform", inform_slots=ordered), state.status
            wanted = [s for s in requests if s in goal.request_slots and s not in state.requests_answered]
            if wanted:  # the agent asked about something the user itself wants to know
                return self._re_request(state), state.status

        if effects.answered_now:  # rule (c)
            return self._after_answer(state), state.status

        if agent_act.intent == "closing":  # agent hung up without booking
            state.status = FAILURE
            state.failure_reason = "agent_closed"
            return DialogAct("closing"), state.status

        # default: push the agenda along (pending informs, then open questions)
        if state.agenda:
            act = state.agenda.pop()
            state.constraints_issued.update(act.inform_slots)
            return act, state.status
        return self._after_answer(state), state.status

    # -- outcome -----------------------------------------------------------

    def episode_outcome(self, state: SimState) -> tuple[str, Optional[str]]:
        """Binary outcome: booked, constraints satisfied, questions answered."""
        goal = state.goal
        if not state.taskcomplete_received:
            return FAILURE, state.failure_reason or "no_booking"
        if state.booking_failed:
            return FAILURE, "booking_failed"
        mismatched = [s for s, gv in goal.inform_slots.items()
                      if not is_anything(gv) and s in state.agent_offer
                      and not _values_match(state.agent_offer[s], gv)]
        if mismatched:
            return FAILURE, "constraint_mismatch:" + ",".join(sorted(mismatched))
        unanswered = [s for s in goal.request_slots if s not in state.requests_answered]
        if unanswered:
            return FAILURE, "unanswered_requests:" + ",".join(sorted(unanswered))
        constraints = {s: v for s, v in goal.inform_slots.items() if not is_anything(v)}
        for s in goal.request_slots:
            if s == self.schema.primary_request_slot:
                continue
            probe = dict(constraints)
            probe[s] = state.requests_answered[s]
            if not query(self.kb, probe):
                return FAILURE, f"inconsistent_answer:{s}"
        return SUCCESS, None

    # -- helpers -----------------------------------------------------------

    def _request_order(self, slots) -> tuple[str, ...]:
        ordered = [s for s in self.schema.requestable_slots if s in slots]
        return tuple(ordered + [s for s in slots if s not in ordered])

    def _inform_order(self, slots) -> list[str]:
        ordered = [s for s in self.schema.all_slots if s in slots]
        return ordered + [s for s in slots if s not in ordered]

    def _re_request(self, state: SimState) -> DialogAct:
        goal = state.goal
        primary = self.schema.primary_request_slot
        targets = [s for s in goal.request_slots
                   if s != primary and s not in state.requests_answered]
        if not targets:
            targets = [primary] if primary in goal.request_slots else []
        informs = {}
        if state.agenda:  # volunteer one pending constraint alongside the question
            pending = state.agenda.pop()
            informs = dict(pending.inform_slots)
            state.constraints_issued.update(informs)
        return DialogAct("request", inform_slots=informs,
                         request_slots=self._request_order(targets))

    def _after_answer(self, state: SimState) -> DialogAct:
        goal = state.goal
        primary = self.schema.primary_request_slot
        remaining = [s for s in goal.request_slots
                     if s != primary and s not in state.requests_answered]
        if remaining:
            return DialogAct("request", request_slots=self._request_order(remaining))
        if primary in goal.request_slots and primary not in state.requests_answered:
            return DialogAct("request", request_slots=(primary,))
        return DialogAct("confirm_answer")


def clone_state(state: SimState) -> SimState:
    """Deep copy for lookahead or bookkeeping without disturbing the episode."""
    return copy.deepcopy(state)
