"""Episode runner, simulation metrics, and the RL training loop.

Metrics are exact rationals (success rate, average turns, average reward).
A "turn" is one act by either party; per-turn rewards attach to agent acts,
with the terminal bonus folded into the final exchange.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .agents import (DialogueAgent, DialogueState, RewardConfig, RLAgent, bind_action,
                     feasible_actions, featurize, reward, track)
from .errors import EmptyReport, ProtocolError, TrainingDiverged
from .frames import DialogAct, validate_act
from .goals import UserGoal
from .nl import TemplateTable, nlg_render, nlu_parse
from .qnet import ReplayBuffer, select_action
from .simulator import ONGOING, SUCCESS, UserSimulator, sample_goal

FRAME = "frame"
NATURAL_LANGUAGE = "natural_language"


@dataclass
class EpisodeRecord:
    goal: UserGoal
    # (user act, agent act, reward for that agent turn); terminal bonus folded into the last
    exchanges: list[tuple[DialogAct, DialogAct, float]]
    final_user_act: DialogAct
    outcome: str
    failure_reason: Optional[str]
    n_turns: int
    cumulative_reward: float
    mode: str

    def act_sequence(self) -> list[tuple[str, DialogAct]]:
        seq = []
        for user_act, agent_act, _ in self.exchanges:
            seq.append(("user", user_act))
            seq.append(("agent", agent_act))
        seq.append(("user", self.final_user_act))
        return seq


@dataclass(frozen=True)
class Metrics:
    success_rate: Fraction
    avg_turns: Fraction
    avg_reward: Fraction
    n_episodes: int

    def to_json_dict(self) -> dict:
        return {
            "n_episodes": self.n_episodes,
            "success_rate": float(self.success_rate),
            "success_rate_exact": str(self.success_rate),
            "avg_turns": float(self.avg_turns),
            "avg_turns_exact": str(self.avg_turns),
            "avg_reward": float(self.avg_reward),
            "avg_reward_exact": str(self.avg_reward),
        }


def run_episode(agent: DialogueAgent, sim: UserSimulator, goal: UserGoal,
                mode: str = FRAME, table: Optional[TemplateTable] = None) -> EpisodeRecord:
    """One full dialogue between agent and simulator.

    In natural_language mode every act crosses the NLG->NLU channel in both
    directions; the record keeps the acts as emitted.
    """
    if mode not in (FRAME, NATURAL_LANGUAGE):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == NATURAL_LANGUAGE and table is None:
        raise ValueError("natural_language mode needs a template table")

    def channel(act: DialogAct) -> DialogAct:
        if mode == FRAME:
            return act
        return nlu_parse(nlg_render(act, table), table, agent.schema)

    reward_cfg = RewardConfig.for_max_turns(sim.config.max_turns)
    agent.reset()
    state, user_act = sim.reset(goal)
    exchanges = []
    while True:
        agent_act = agent.respond(channel(user_act))
        bad = validate_act(agent_act, agent.schema)
        if bad:
            raise ProtocolError(f"agent emitted invalid act {agent_act}: {bad}")
        reply, status = sim.step(state, channel(agent_act))
        r = reward_cfg.step_penalty
        if status != ONGOING:
            r += reward(status, reward_cfg)
        exchanges.append((user_act, agent_act, r))
        if status != ONGOING:
            return EpisodeRecord(
                goal=goal,
                exchanges=exchanges,
                final_user_act=reply,
                outcome=status,
                failure_reason=state.failure_reason,
                n_turns=2 * len(exchanges) + 1,
                cumulative_reward=float(sum(x[2] for x in exchanges)),
                mode=mode,
            )
        user_act = reply


def summarize(records: Sequence[EpisodeRecord]) -> Metrics:
    """Exact aggregate metrics over episode records."""
    n = len(records)
    if n == 0:
        raise ValueError("no records to summarize")
    successes = sum(1 for r in records if r.outcome == SUCCESS)
    total_turns = sum(r.n_turns for r in records)
    total_reward = sum(Fraction(r.cumulative_reward) for r in records)
    return Metrics(
        success_rate=Fraction(successes, n),
        avg_turns=Fraction(total_turns, n),
        avg_reward=total_reward / n,
        n_episodes=n,
    )


def evaluate(agent: DialogueAgent, sim: UserSimulator, goal_db: Sequence[UserGoal],
             n_episodes: int, seed: int, mode: str = FRAME,
             table: Optional[TemplateTable] = None) -> tuple[Metrics, list[EpisodeRecord]]:
    """Greedy evaluation: epsilon forced to 0, goals sampled per-episode from the seed."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    saved_eps = getattr(agent, "epsilon", None)
    if saved_eps is not None:
        agent.epsilon = 0.0
    try:
        records = []
        for i in range(n_episodes):
            rng = np.random.default_rng([seed, i])
            goal = sample_goal(goal_db, rng)
            records.append(run_episode(agent, sim, goal, mode=mode, table=table))
    finally:
        if saved_eps is not None:
            agent.epsilon = saved_eps
    return summarize(records), records


# -- training -------------------------------------------------------------------

@dataclass
class TrainSchedule:
    n_epochs: int
    episodes_per_epoch: int
    buffer_size: int = 10000
    batch_size: int = 16
    eval_every: int = 1  # epochs between greedy evaluations
    eval_episodes: int = 100
    train_steps_per_episode: int = 2
    warm_start_episodes: int = 0  # rule-policy rollouts pushed into the buffer first
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05

    def __post_init__(self):
        if self.n_epochs < 0 or self.episodes_per_epoch <= 0 or self.buffer_size <= 0 \
                or self.batch_size <= 0 or self.eval_every <= 0 or self.eval_episodes <= 0:
            raise ValueError("schedule fields must be positive")


@dataclass
class CurvePoint:
    episodes: int
    metrics: Metrics


def _rollout(sim: UserSimulator, schema, kb, goal: UserGoal,
             choose: Callable[[DialogueState, np.ndarray], int],
             actions, reward_cfg: RewardConfig):
    """Index-level episode rollout collecting (s, a, r, s', done) transitions."""
    state, user_act = sim.reset(goal)
    dstate = track(DialogueState(), user_act, "user", kb)
    transitions = []
    while True:
        feats = featurize(dstate, schema)
        idx = choose(dstate, feats)
        act = bind_action(actions[idx], dstate, kb, schema)
        dstate = track(dstate, act, "agent", kb)
        reply, status = sim.step(state, act)
        done = status != ONGOING
        r = reward_cfg.step_penalty + (reward(status, reward_cfg) if done else 0.0)
        if not done:
            dstate = track(dstate, reply, "user", kb)
        transitions.append((feats, idx, r, featurize(dstate, schema), done))
        if done:
            return transitions, status


def _rule_chooser(agent_rule, actions):
    index_of = {(a.kind, a.slot): a.index for a in actions}

    def choose(dstate: DialogueState, feats) -> int:
        for s in agent_rule.request_order:
            if s not in dstate.constraints_heard and s not in dstate.slots_agent_requested:
                return index_of[("request", s)]
        return index_of[("taskcomplete", None)]

    return choose


def train(agent: RLAgent, sim: UserSimulator, goal_db: Sequence[UserGoal],
          schedule: TrainSchedule, seed: int = 0,
          rule_agent=None) -> tuple[RLAgent, list[CurvePoint]]:
    """Epsilon-greedy rollouts + replay training; returns the best greedy checkpoint.

    Epsilon decays linearly from epsilon_start to epsilon_end over the first
    half of the episode budget. On divergence the error carries the last good
    Q-function in ``last_good``.
    """
    schema, kb = agent.schema, agent.kb
    actions = feasible_actions(schema)
    reward_cfg = RewardConfig.for_max_turns(sim.config.max_turns)
    buffer = ReplayBuffer(schedule.buffer_size)
    rng = np.random.default_rng([seed, 0xC0FFEE])
    q = agent.q
    curve: list[CurvePoint] = []
    best_q = q.copy()
    best_key = None  # (success_rate, -avg_turns), lexicographic

    if schedule.warm_start_episodes and rule_agent is not None:
        choose = _rule_chooser(rule_agent, actions)
        for i in range(schedule.warm_start_episodes):
            goal = sample_goal(goal_db, np.random.default_rng([seed, 1, i]))
            for t in _rollout(sim, schema, kb, goal, choose, actions, reward_cfg)[0]:
                buffer.push(t)

    total = schedule.n_epochs * schedule.episodes_per_epoch
    half = max(total // 2, 1)
    episodes_done = 0
    try:
        for epoch in range(schedule.n_epochs):
            for _ in range(schedule.episodes_per_epoch):
                frac = min(episodes_done / half, 1.0)
                epsilon = schedule.epsilon_start + frac * (schedule.epsilon_end - schedule.epsilon_start)

                def choose(dstate, feats, _eps=epsilon):
                    return select_action(q, feats, _eps, rng)

                goal = sample_goal(goal_db, np.random.default_rng([seed, 2, episodes_done]))
                transitions, _ = _rollout(sim, schema, kb, goal, choose, actions, reward_cfg)
                for t in transitions:
                    buffer.push(t)
                if len(buffer) >= schedule.batch_size:
                    for _ in range(schedule.train_steps_per_episode):
                        q.train_on_batch(buffer.sample(schedule.batch_size, rng))
                episodes_done += 1
            if (epoch + 1) % schedule.eval_every == 0:
                eval_agent = RLAgent(schema, kb, q, epsilon=0.0)
                metrics, _ = evaluate(eval_agent, sim, goal_db, schedule.eval_episodes,
                                      seed=seed + 7919 + epoch)
                curve.append(CurvePoint(episodes=episodes_done, metrics=metrics))
                key = (metrics.success_rate, -metrics.avg_turns)
                if best_key is None or key > best_key:
                    best_key = key
                    best_q = q.copy()
    except TrainingDiverged as e:
        raise TrainingDiverged(str(e), last_good=best_q) from e

    final_q = best_q if best_key is not None else q
    return RLAgent(schema, kb, final_q, epsilon=0.0), curve


# -- reporting --------------------------------------------------------------------

@dataclass
class Report:
    labels: list[str]
    metrics: list[Metrics]

    def to_text(self) -> str:
        widths = (max(len(l) for l in self.labels + ["agent"]), 12, 10, 12)
        header = f"{'agent':<{widths[0]}}  {'success_rate':>12}  {'avg_turns':>10}  {'avg_reward':>12}"
        lines = [header, "-" * len(header)]
        for label, m in zip(self.labels, self.metrics):
            lines.append(f"{label:<{widths[0]}}  {float(m.success_rate):>12.4f}  "
                         f"{float(m.avg_turns):>10.2f}  {float(m.avg_reward):>12.2f}")
        if len(self.metrics) == 2:
            d = self.metrics[1].success_rate - self.metrics[0].success_rate
            lines.append(f"{'delta':<{widths[0]}}  {float(d):>+12.4f}")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        doc = {"agents": [
            {"label": label, **m.to_json_dict()}
            for label, m in zip(self.labels, self.metrics)
        ]}
        if len(self.metrics) == 2:
            doc["success_rate_delta"] = float(self.metrics[1].success_rate - self.metrics[0].success_rate)
        return doc


def report(metrics: Sequence[Metrics], labels: Sequence[str]) -> Report:
    if not metrics:
        raise EmptyReport("no metrics to report")
    if len(metrics) != len(labels):
        raise ValueError("metrics and labels must have equal length")
    return Report(labels=list(labels), metrics=list(metrics))


def curve_to_csv(curve: Sequence[CurvePoint]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["episode", "success_rate", "avg_turns", "avg_reward"])
    for point in curve:
        m = point.metrics
        writer.writerow([point.episodes, float(m.success_rate),
                         float(m.avg_turns), float(m.avg_reward)])
    return out.getvalue()
