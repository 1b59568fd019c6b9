"""HTTP judging service: live chat sessions against configured agents,
1-5 ratings, and append-only JSONL transcript persistence.

The human judge plays the user role against a sampled goal (shown as a goal
card); the episode outcome uses the same booking/constraint/answer rule as
simulation. Sessions are serialized per-id; the JSONL log is replayed on
startup to rebuild the session index.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .agents import DialogueAgent, RLAgent, RuleAgent
from .errors import ParseError, ServiceError, ValidationError
from .frames import DialogAct, parse_frame, serialize_frame
from .goals import UserGoal, goal_from_json, goal_to_json
from .kb import KnowledgeBase
from .nl import TemplateTable, build_lexicon, nlg_render, nlu_parse
from .qnet import QFunction, load_checkpoint
from .schema import DomainSchema
from .simulator import (FAILURE, SimConfig, SimState, UserSimulator,
                        record_agent_act, sample_goal)

import numpy as np

OPEN = "open"
ENDED = "ended"


@dataclass
class DomainRuntime:
    """Everything the service needs to run one domain."""

    schema: DomainSchema
    kb: KnowledgeBase
    goals: list[UserGoal]
    templates: TemplateTable
    checkpoint_path: Optional[str] = None
    lexicon: dict = field(default_factory=dict)
    _q: Optional[QFunction] = None

    def __post_init__(self):
        if not self.lexicon:
            self.lexicon = build_lexicon(self.kb, self.schema)

    def q_function(self) -> QFunction:
        if self._q is None:
            if not self.checkpoint_path:
                raise ServiceError("BadCheckpoint", 422,
                                   f"no RL checkpoint configured for domain {self.schema.domain_name!r}")
            self._q = load_checkpoint(self.checkpoint_path, self.schema)
        return self._q


@dataclass
class Session:
    id: str
    domain: str
    agent_kind: str
    goal: UserGoal
    agent: DialogueAgent
    sim: UserSimulator
    state: SimState
    created_at: float
    last_activity: float
    transcript: list = field(default_factory=list)  # {speaker, utterance, frame, ts}
    status: str = OPEN
    outcome: Optional[str] = None
    failure_reason: Optional[str] = None
    rating: Optional[int] = None
    nlu_fallbacks: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def view(self) -> dict:
        return {
            "session_id": self.id,
            "domain": self.domain,
            "agent_kind": self.agent_kind,
            "status": self.status,
            "outcome": self.outcome,
            "failure_reason": self.failure_reason,
            "rating": self.rating,
            "goal": goal_to_json(self.goal),
            "transcript": [dict(t) for t in self.transcript],
        }


class DialogService:
    """Session store + dialogue plumbing behind the HTTP API."""

    def __init__(self, domains: dict[str, DomainRuntime], data_dir: str,
                 idle_timeout: float = 1800.0, seed: int = 0, clock=time.time):
        self.domains = domains
        self.data_dir = data_dir
        self.idle_timeout = idle_timeout
        self.seed = seed
        self.clock = clock
        self.sessions: dict[str, Session] = {}
        self._order: list[str] = []
        self._counter = 0
        self._log_lock = threading.Lock()
        os.makedirs(data_dir, exist_ok=True)
        self.log_path = os.path.join(data_dir, "sessions.jsonl")
        self._replay_log()

    # -- persistence ---------------------------------------------------------

    def _append_event(self, event: dict):
        line = json.dumps(event, ensure_ascii=False)
        with self._log_lock:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def _replay_log(self):
        if not os.path.exists(self.log_path):
            return
        with open(self.log_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                kind = event.get("event")
                try:
                    if kind == "create":
                        self._replay_create(event)
                    elif kind == "message":
                        self._replay_message(event)
                    elif kind == "end":
                        session = self.sessions.get(event["session_id"])
                        if session:
                            session.status = ENDED
                            session.outcome = event.get("outcome")
                            session.failure_reason = event.get("failure_reason")
                    elif kind == "rating":
                        session = self.sessions.get(event["session_id"])
                        if session:
                            session.rating = event.get("rating")
                except ServiceError:
                    continue  # e.g. checkpoint gone; skip that session

    def _replay_create(self, event: dict):
        domain = event["domain"]
        if domain not in self.domains:
            return
        session = self._build_session(domain, event["agent_kind"],
                                      goal=goal_from_json(event["goal"]),
                                      session_id=event["session_id"],
                                      created_at=event.get("ts", self.clock()))
        greeting = event.get("greeting", {})
        session.transcript.append({"speaker": "agent",
                                   "utterance": greeting.get("utterance", ""),
                                   "frame": greeting.get("frame", "greeting()"),
                                   "ts": event.get("ts", session.created_at)})
        self.sessions[session.id] = session
        self._order.append(session.id)

    def _replay_message(self, event: dict):
        session = self.sessions.get(event["session_id"])
        if session is None or session.status == ENDED:
            return
        runtime = self.domains[session.domain]
        user_act = parse_frame(event["user_frame"], runtime.schema, lenient=True)
        agent_act = session.agent.respond(user_act)
        record_agent_act(session.state, agent_act, runtime.schema.primary_request_slot)
        session.state.turn += 2
        session.transcript.append({"speaker": "user", "utterance": event.get("user_utterance", ""),
                                   "frame": event["user_frame"], "ts": event.get("ts", 0)})
        session.transcript.append({"speaker": "agent", "utterance": event.get("agent_utterance", ""),
                                   "frame": serialize_frame(agent_act, runtime.schema),
                                   "ts": event.get("ts", 0)})
        session.last_activity = event.get("ts", session.last_activity)

    # -- session lifecycle -----------------------------------------------------

    def _runtime(self, domain: str) -> DomainRuntime:
        runtime = self.domains.get(domain)
        if runtime is None:
            raise ServiceError("UnknownDomain", 404, f"unknown domain {domain!r}")
        return runtime

    def _build_session(self, domain: str, agent_kind: str, goal: Optional[UserGoal] = None,
                       session_id: Optional[str] = None, created_at: Optional[float] = None) -> Session:
        runtime = self._runtime(domain)
        if agent_kind == "rule":
            agent = RuleAgent(runtime.schema, runtime.kb)
        elif agent_kind == "rl":
            agent = RLAgent(runtime.schema, runtime.kb, runtime.q_function(), epsilon=0.0)
        else:
            raise ServiceError("BadAgentKind", 422,
                               f"agent_kind must be 'rule' or 'rl', got {agent_kind!r}")
        if goal is None:
            rng = np.random.default_rng([self.seed, self._counter])
            goal = sample_goal(runtime.goals, rng)
        self._counter += 1
        now = self.clock() if created_at is None else created_at
        sim = UserSimulator(runtime.schema, runtime.kb,
                            SimConfig(max_turns=runtime.schema.max_turns))
        return Session(
            id=session_id or uuid.uuid4().hex,
            domain=domain,
            agent_kind=agent_kind,
            goal=goal,
            agent=agent,
            sim=sim,
            state=SimState(goal=goal),
            created_at=now,
            last_activity=now,
        )

    def _get_session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise ServiceError("UnknownSession", 404, f"unknown session {session_id!r}")
        self._expire_if_idle(session)
        return session

    def _expire_if_idle(self, session: Session):
        if session.status == OPEN and self.clock() - session.last_activity > self.idle_timeout:
            self._end_session(session, FAILURE, "idle_timeout")

    def _end_session(self, session: Session, outcome: str, reason: Optional[str]):
        session.status = ENDED
        session.outcome = outcome
        session.failure_reason = reason
        self._append_event({"event": "end", "session_id": session.id, "ts": self.clock(),
                            "outcome": outcome, "failure_reason": reason})

    # -- operations -------------------------------------------------------------

    def create_session(self, domain: str, agent_kind: str) -> dict:
        session = self._build_session(domain, agent_kind)
        runtime = self.domains[domain]
        greeting_act = DialogAct("greeting")
        greeting = nlg_render(greeting_act, runtime.templates)
        session.transcript.append({"speaker": "agent", "utterance": greeting,
                                   "frame": serialize_frame(greeting_act, runtime.schema),
                                   "ts": session.created_at})
        self.sessions[session.id] = session
        self._order.append(session.id)
        self._append_event({
            "event": "create", "session_id": session.id, "ts": session.created_at,
            "domain": domain, "agent_kind": agent_kind, "goal": goal_to_json(session.goal),
            "greeting": {"utterance": greeting, "frame": serialize_frame(greeting_act, runtime.schema)},
        })
        return {"session_id": session.id, "greeting": greeting,
                "greeting_frame": serialize_frame(greeting_act, runtime.schema),
                "goal": goal_to_json(session.goal),
                "domain": domain, "agent_kind": agent_kind}

    def post_message(self, session_id: str, body: dict) -> dict:
        session = self._get_session(session_id)
        with session.lock:
            if session.status == ENDED:
                raise ServiceError("SessionEnded", 409, "session already ended")
            runtime = self.domains[session.domain]
            text = body.get("text")
            frame = body.get("frame")
            if (text is None) == (frame is None):
                raise ServiceError("BadMessage", 400, "body must carry exactly one of 'text' or 'frame'")
            if frame is not None:
                try:
                    user_act = parse_frame(frame, runtime.schema)
                except ParseError as e:
                    raise ServiceError("ParseError", 400, str(e))
                except ValidationError as e:
                    raise ServiceError("ValidationError", 400, str(e))
                utterance = frame
            else:
                user_act = nlu_parse(text, runtime.templates, runtime.schema, runtime.lexicon)
                if user_act.intent == "not_sure" and not user_act.inform_slots:
                    session.nlu_fallbacks += 1
                utterance = text

            agent_act = session.agent.respond(user_act)
            agent_utterance = nlg_render(agent_act, runtime.templates)
            effects = record_agent_act(session.state, agent_act, runtime.schema.primary_request_slot)
            session.state.turn += 2
            now = self.clock()
            session.last_activity = now
            user_frame = serialize_frame(user_act, runtime.schema)
            agent_frame = serialize_frame(agent_act, runtime.schema)
            session.transcript.append({"speaker": "user", "utterance": utterance,
                                       "frame": user_frame, "ts": now})
            session.transcript.append({"speaker": "agent", "utterance": agent_utterance,
                                       "frame": agent_frame, "ts": now})
            self._append_event({"event": "message", "session_id": session.id, "ts": now,
                                "user_utterance": utterance, "user_frame": user_frame,
                                "agent_utterance": agent_utterance, "agent_frame": agent_frame})
            if effects.taskcomplete:
                outcome, reason = session.sim.episode_outcome(session.state)
                self._end_session(session, outcome, reason)
            elif session.state.turn >= 2 * session.sim.config.max_turns - 1:
                self._end_session(session, FAILURE, "turn_cap")
            return {"user_frame": user_frame, "agent_utterance": agent_utterance,
                    "agent_frame": agent_frame, "session_status": session.status,
                    "outcome": session.outcome, "failure_reason": session.failure_reason}

    def post_rating(self, session_id: str, rating) -> dict:
        session = self._get_session(session_id)
        with session.lock:
            if not isinstance(rating, int) or isinstance(rating, bool) or not 1 <= rating <= 5:
                raise ServiceError("ValidationError", 400, "rating must be an integer in [1, 5]")
            if session.status != ENDED:
                raise ServiceError("NotEnded", 409, "session must end before rating")
            if session.rating is not None:
                raise ServiceError("AlreadyRated", 409, f"session already rated {session.rating}")
            session.rating = rating
            self._append_event({"event": "rating", "session_id": session.id,
                                "ts": self.clock(), "rating": rating})
            return {"ok": True, "rating": rating}

    def get_session(self, session_id: str) -> dict:
        return self._get_session(session_id).view()

    def report(self) -> dict:
        for sid in self._order:
            self._expire_if_idle(self.sessions[sid])
        sessions = [self.sessions[sid] for sid in self._order]
        rated = [s.rating for s in sessions if s.rating is not None]
        mean = Fraction(sum(rated), len(rated)) if rated else None
        by_kind: dict[str, dict] = {}
        for s in sessions:
            bucket = by_kind.setdefault(s.agent_kind, {"n_sessions": 0, "n_rated": 0, "rating_sum": 0,
                                                       "n_success": 0, "n_ended": 0})
            bucket["n_sessions"] += 1
            if s.status == ENDED:
                bucket["n_ended"] += 1
                if s.outcome == "success":
                    bucket["n_success"] += 1
            if s.rating is not None:
                bucket["n_rated"] += 1
                bucket["rating_sum"] += s.rating
        for bucket in by_kind.values():
            bucket["mean_rating"] = (bucket["rating_sum"] / bucket["n_rated"]
                                     if bucket["n_rated"] else None)
        return {
            "n_sessions": len(sessions),
            "n_open": sum(1 for s in sessions if s.status == OPEN),
            "n_ended": sum(1 for s in sessions if s.status == ENDED),
            "n_rated": len(rated),
            "mean_rating": float(mean) if mean is not None else None,
            "mean_rating_exact": str(mean) if mean is not None else None,
            "nlu_fallbacks": sum(s.nlu_fallbacks for s in sessions),
            "by_agent_kind": by_kind,
        }

    def export_transcripts(self, agent_kind: Optional[str] = None,
                           domain: Optional[str] = None) -> Iterable[str]:
        """JSONL lines, one per session, stable field order."""
        for sid in self._order:
            session = self.sessions[sid]
            if agent_kind is not None and session.agent_kind != agent_kind:
                continue
            if domain is not None and session.domain != domain:
                continue
            doc = {
                "id": session.id,
                "domain": session.domain,
                "agent_kind": session.agent_kind,
                "created_at": session.created_at,
                "status": session.status,
                "outcome": session.outcome,
                "failure_reason": session.failure_reason,
                "rating": session.rating,
                "goal": goal_to_json(session.goal),
                "transcript": [
                    {"speaker": t["speaker"], "utterance": t["utterance"],
                     "frame": t["frame"], "ts": t["ts"]}
                    for t in session.transcript
                ],
            }
            yield json.dumps(doc, ensure_ascii=False)


def create_app(service: DialogService, ui_dist: Optional[str] = None):
    """FastAPI wrapper exposing the service; static judge UI served at /."""
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse, PlainTextResponse

    app = FastAPI(title="taskchat judging service")
    app.state.service = service

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status,
                            content={"error": {"code": exc.code, "message": str(exc)}})

    @app.post("/api/sessions")
    async def create_session(body: dict):
        return service.create_session(str(body.get("domain", "")), str(body.get("agent_kind", "rule")))

    @app.post("/api/sessions/{session_id}/messages")
    async def post_message(session_id: str, body: dict):
        return service.post_message(session_id, body)

    @app.post("/api/sessions/{session_id}/rating")
    async def post_rating(session_id: str, body: dict):
        return service.post_rating(session_id, body.get("rating"))

    @app.get("/api/sessions/{session_id}")
    async def get_session(session_id: str):
        return service.get_session(session_id)

    @app.get("/api/report")
    async def report():
        return service.report()

    @app.get("/api/export")
    async def export(agent_kind: Optional[str] = None, domain: Optional[str] = None):
        lines = "\n".join(service.export_transcripts(agent_kind=agent_kind, domain=domain))
        return PlainTextResponse(lines + ("\n" if lines else ""),
                                 media_type="application/x-ndjson")

    if ui_dist and os.path.isdir(ui_dist):
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dist, html=True), name="ui")

    return app
