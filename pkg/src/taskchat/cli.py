"""Command-line entry point: validate, extract-goals, stats, simulate, train,
evaluate, serve.

Every subcommand prints a human-readable summary by default and deterministic
JSON with --json (byte-identical across runs at a fixed seed). A --config
JSON file may supply any flag (command-line flags win). Distinct error classes
map to distinct exit codes (see EXIT_CODES).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from . import errors
from .agents import RLAgent, RuleAgent, feasible_actions, feature_size
from .corpus import corpus_stats, extract_goals_aggregate, extract_goals_first_turn, \
    load_corpus, validate_corpus
from .goals import load_goal_db, write_goal_db
from .harness import (FRAME, NATURAL_LANGUAGE, TrainSchedule, curve_to_csv, evaluate,
                      report, train)
from .kb import load_kb
from .nl import builtin_templates, load_templates
from .qnet import QFunction, load_checkpoint, save_checkpoint
from .schema import BUILTIN_DOMAINS, builtin_schema, load_schema, resource_text
from .simulator import SimConfig, UserSimulator
from .worldgen import gen_goal_db, gen_movie_kb

EXIT_CODES = {
    "ok": 0,
    "violations": 1,
    "usage": 2,
    errors.ParseError: 3,
    errors.SchemaError: 4,
    errors.KbFormatError: 5,
    errors.GoalError: 6,
    errors.EmptyGoalSet: 6,
    errors.CheckpointError: 7,
    errors.TrainingDiverged: 8,
    errors.ServiceError: 9,
    OSError: 10,
    errors.EmptyReport: 11,
    errors.ValidationError: 12,
    errors.ProtocolError: 13,
}

BUILTIN_PREFIX = "builtin:"
_DEFAULT_KB = BUILTIN_PREFIX + "movie.sample.kb.json"
_DEFAULT_GOALS = BUILTIN_PREFIX + "goals.movie.json"


def _read_source(path: str) -> str:
    if path.startswith(BUILTIN_PREFIX):
        return resource_text(path[len(BUILTIN_PREFIX):])
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_schema_arg(value: str):
    if value in BUILTIN_DOMAINS:
        return builtin_schema(value)
    return load_schema(_read_source(value))


def _load_templates_arg(value: Optional[str]):
    if value is None:
        return builtin_templates()
    return load_templates(_read_source(value))


def _emit(args, human: str, machine: dict):
    if args.json:
        print(json.dumps(machine, indent=2, sort_keys=True))
    else:
        print(human, end="" if human.endswith("\n") else "\n")


def _load_world(args):
    schema = _load_schema_arg(args.schema)
    kb = load_kb(_read_source(args.kb), schema)
    goals = load_goal_db(_read_source(args.goals))
    return schema, kb, goals


def _make_agent(kind: str, schema, kb, checkpoint: Optional[str]):
    if kind == "rule":
        return RuleAgent(schema, kb)
    if kind == "rl":
        if not checkpoint:
            raise errors.CheckpointError("--checkpoint is required for the rl agent")
        return RLAgent(schema, kb, load_checkpoint(checkpoint, schema), epsilon=0.0)
    raise errors.CheckpointError(f"unknown agent kind {kind!r}")


# -- subcommands ----------------------------------------------------------------

def cmd_validate(args) -> int:
    schema = _load_schema_arg(args.schema)
    corpus = load_corpus(_read_source(args.corpus), schema)
    rep = validate_corpus(corpus, schema)
    _emit(args, rep.to_text(), rep.to_json_dict())
    return EXIT_CODES["ok"] if rep.ok else EXIT_CODES["violations"]


def cmd_stats(args) -> int:
    schema = _load_schema_arg(args.schema)
    stats = corpus_stats(load_corpus(_read_source(args.corpus), schema))
    human = (f"dialogues:        {stats.n_dialogues}\n"
             f"intents observed: {stats.n_intents_observed}\n"
             f"slots observed:   {stats.n_slots_observed}\n"
             f"avg turns:        {float(stats.avg_turns):.4g}"
             f"{'' if stats.avg_turns_defined else ' (undefined: empty corpus)'}\n")
    machine = {
        "n_dialogues": stats.n_dialogues,
        "n_intents_observed": stats.n_intents_observed,
        "n_slots_observed": stats.n_slots_observed,
        "avg_turns": float(stats.avg_turns),
        "avg_turns_exact": str(stats.avg_turns),
        "avg_turns_defined": stats.avg_turns_defined,
    }
    _emit(args, human, machine)
    return EXIT_CODES["ok"]


def cmd_extract_goals(args) -> int:
    schema = _load_schema_arg(args.schema)
    corpus = load_corpus(_read_source(args.corpus), schema)
    extract = extract_goals_first_turn if args.method == "first" else extract_goals_aggregate
    goals, skipped = extract(corpus)
    written = write_goal_db(goals, args.out)
    human = (f"extracted {len(goals)} goal(s) via method={args.method}; "
             f"wrote {written} deduplicated to {args.out}"
             + (f"; skipped dialogues: {', '.join(skipped)}" if skipped else "") + "\n")
    _emit(args, human, {"method": args.method, "extracted": len(goals),
                        "written": written, "skipped": skipped, "out": args.out})
    return EXIT_CODES["ok"]


def cmd_simulate(args) -> int:
    schema, kb, goals = _load_world(args)
    agent = _make_agent(args.agent, schema, kb, args.checkpoint)
    sim = UserSimulator(schema, kb, SimConfig(max_turns=args.max_turns))
    mode = FRAME if args.mode == "frame" else NATURAL_LANGUAGE
    table = _load_templates_arg(args.templates) if mode == NATURAL_LANGUAGE else None
    metrics, records = evaluate(agent, sim, goals, args.episodes, args.seed,
                                mode=mode, table=table)
    episodes = [{"outcome": r.outcome, "failure_reason": r.failure_reason,
                 "n_turns": r.n_turns, "reward": r.cumulative_reward} for r in records]
    machine = {"agent": args.agent, "seed": args.seed, "mode": args.mode,
               "metrics": metrics.to_json_dict(), "episodes": episodes}
    human = (f"agent={args.agent} episodes={metrics.n_episodes} mode={args.mode}\n"
             f"success_rate: {float(metrics.success_rate):.4f}\n"
             f"avg_turns:    {float(metrics.avg_turns):.2f}\n"
             f"avg_reward:   {float(metrics.avg_reward):.2f}\n")
    _emit(args, human, machine)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(machine, fh, indent=2, sort_keys=True)
    return EXIT_CODES["ok"]


def cmd_train(args) -> int:
    schema, kb, goals = _load_world(args)
    sim = UserSimulator(schema, kb, SimConfig(max_turns=args.max_turns))
    q = QFunction(feature_size(schema), len(feasible_actions(schema)), hidden=args.hidden,
                  lr=args.lr, gamma=args.gamma, target_sync_period=args.target_sync,
                  seed=args.seed)
    agent = RLAgent(schema, kb, q, epsilon=1.0, rng=np.random.default_rng(args.seed))
    schedule = TrainSchedule(
        n_epochs=args.epochs, episodes_per_epoch=args.episodes_per_epoch,
        buffer_size=args.buffer_size, batch_size=args.batch_size,
        eval_every=args.eval_every, eval_episodes=args.eval_episodes,
        train_steps_per_episode=args.train_steps, warm_start_episodes=args.warm_start)
    trained, curve = train(agent, sim, goals, schedule, seed=args.seed,
                           rule_agent=RuleAgent(schema, kb))
    save_checkpoint(args.out, trained.q, schema)
    if args.curve:
        with open(args.curve, "w", encoding="utf-8") as fh:
            fh.write(curve_to_csv(curve))
    final = curve[-1].metrics.to_json_dict() if curve else None
    human = (f"trained {args.epochs * args.episodes_per_epoch} episodes; "
             f"checkpoint -> {args.out}"
             + (f"; curve -> {args.curve}" if args.curve else "") + "\n"
             + (f"best greedy success_rate: {final['success_rate']:.4f}\n" if final else ""))
    _emit(args, human, {"checkpoint": args.out, "curve": args.curve,
                        "episodes": args.epochs * args.episodes_per_epoch,
                        "final_metrics": final})
    return EXIT_CODES["ok"]


def cmd_evaluate(args) -> int:
    schema, kb, goals = _load_world(args)
    sim = UserSimulator(schema, kb, SimConfig(max_turns=args.max_turns))
    labels = [a.strip() for a in args.agents.split(",") if a.strip()]
    metrics = []
    for kind in labels:
        agent = _make_agent(kind, schema, kb, args.checkpoint)
        m, _ = evaluate(agent, sim, goals, args.episodes, args.seed)
        metrics.append(m)
    rep = report(metrics, labels)
    _emit(args, rep.to_text(), {"seed": args.seed, "episodes": args.episodes,
                                **rep.to_json_dict()})
    return EXIT_CODES["ok"]


def cmd_gen_world(args) -> int:
    schema = _load_schema_arg(args.schema)
    records = gen_movie_kb(args.kb_records, seed=args.seed)
    with open(args.kb_out, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2, sort_keys=True)
    kb = load_kb(records, schema)
    goals = gen_goal_db(kb, args.n_goals, seed=args.seed,
                        request_fraction=args.request_fraction)
    written = write_goal_db(goals, args.goals_out)
    human = (f"wrote {len(records)} KB records -> {args.kb_out}; "
             f"{written} goals -> {args.goals_out}\n")
    _emit(args, human, {"kb_records": len(records), "kb_out": args.kb_out,
                        "goals": written, "goals_out": args.goals_out})
    return EXIT_CODES["ok"]


def cmd_serve(args) -> int:
    import uvicorn

    from .service import DialogService, DomainRuntime, create_app

    schema, kb, goals = _load_world(args)
    runtime = DomainRuntime(schema=schema, kb=kb, goals=goals,
                            templates=_load_templates_arg(args.templates),
                            checkpoint_path=args.checkpoint)
    service = DialogService({schema.domain_name: runtime}, data_dir=args.data_dir,
                            idle_timeout=args.idle_timeout, seed=args.seed)
    app = create_app(service, ui_dist=args.ui_dist)
    print(f"serving domain {schema.domain_name!r} on {args.host}:{args.port} "
          f"(data dir {args.data_dir})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_CODES["ok"]


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taskchat",
        description="Task-completion dialogue platform: corpora, simulation, RL training, "
                    "evaluation, and the human-judging service.",
        epilog="Exit codes: 0 ok, 1 validation violations, 2 usage, 3 parse, 4 schema, "
               "5 kb-format, 6 goals, 7 checkpoint, 8 training-diverged, 9 service, 10 io.")
    parser.add_argument("--config", help="JSON file supplying defaults for any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    def world_flags(p):
        p.add_argument("--schema", default="movie",
                       help="domain name (movie|restaurant|taxi) or schema JSON path")
        p.add_argument("--kb", default=_DEFAULT_KB, help="knowledge base JSON path")
        p.add_argument("--goals", default=_DEFAULT_GOALS, help="goal database JSON path")
        p.add_argument("--max-turns", type=int, default=40, dest="max_turns")

    def json_flag(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("validate", help="validate a corpus against a schema")
    p.add_argument("--corpus", required=True)
    p.add_argument("--schema", default="movie")
    json_flag(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--schema", default="movie")
    json_flag(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("extract-goals", help="build a goal database from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--schema", default="movie")
    p.add_argument("--method", choices=("first", "aggregate"), required=True)
    p.add_argument("--out", required=True)
    json_flag(p)
    p.set_defaults(func=cmd_extract_goals)

    p = sub.add_parser("simulate", help="run simulated episodes and report metrics")
    world_flags(p)
    p.add_argument("--agent", choices=("rule", "rl"), default="rule")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("frame", "nl"), default="frame")
    p.add_argument("--checkpoint")
    p.add_argument("--templates")
    p.add_argument("--out", help="also write the JSON report to this path")
    json_flag(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train the RL agent against the simulator")
    world_flags(p)
    p.add_argument("--epochs", type=int, default=8)
    p.add_argument("--episodes-per-epoch", type=int, default=500, dest="episodes_per_epoch")
    p.add_argument("--eval-every", type=int, default=1, dest="eval_every")
    p.add_argument("--eval-episodes", type=int, default=100, dest="eval_episodes")
    p.add_argument("--train-steps", type=int, default=4, dest="train_steps")
    p.add_argument("--warm-start", type=int, default=300, dest="warm_start")
    p.add_argument("--buffer-size", type=int, default=10000, dest="buffer_size")
    p.add_argument("--batch-size", type=int, default=16, dest="batch_size")
    p.add_argument("--hidden", type=int, default=80)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--gamma", type=float, default=0.95)
    p.add_argument("--target-sync", type=int, default=150, dest="target_sync")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="checkpoint path to write")
    p.add_argument("--curve", help="learning-curve CSV path")
    json_flag(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="compare agents on the same goal set")
    world_flags(p)
    p.add_argument("--agents", default="rule,rl", help="comma-separated agent kinds")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint")
    json_flag(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gen-world", help="generate a synthetic KB and goal database")
    p.add_argument("--schema", default="movie")
    p.add_argument("--kb-records", type=int, default=1200, dest="kb_records")
    p.add_argument("--n-goals", type=int, default=200, dest="n_goals")
    p.add_argument("--request-fraction", type=float, default=0.6, dest="request_fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kb-out", required=True, dest="kb_out")
    p.add_argument("--goals-out", required=True, dest="goals_out")
    json_flag(p)
    p.set_defaults(func=cmd_gen_world)

    p = sub.add_parser("serve", help="run the judging service")
    world_flags(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.environ.get("TASKCHAT_PORT", "8080")))
    p.add_argument("--data-dir", default=os.environ.get("TASKCHAT_DATA_DIR", "./taskchat-data"),
                   dest="data_dir")
    p.add_argument("--checkpoint")
    p.add_argument("--templates")
    p.add_argument("--idle-timeout", type=float, default=1800.0, dest="idle_timeout")
    p.add_argument("--ui-dist", default=os.environ.get("TASKCHAT_UI_DIST"), dest="ui_dist")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_serve)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold --config file values in as defaults; explicit flags win."""
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        parser.error("--config needs a path")
    with open(argv[at + 1], "r", encoding="utf-8") as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        parser.error("--config must hold a JSON object")
    remaining = argv[:at] + argv[at + 2:]
    known = set()
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            known.update(a.dest for a in sp._actions)
    bad = [k for k in config if k.replace("-", "_") not in known]
    if bad:
        parser.error(f"unknown config keys: {bad}")
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**{k.replace("-", "_"): v for k, v in config.items()
                               if k.replace("-", "_") in {a.dest for a in sp._actions}})
    return remaining


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        return args.func(args)
    except tuple(k for k in EXIT_CODES if isinstance(k, type)) as e:
        print(f"error: {e}", file=sys.stderr)
        for cls in type(e).__mro__:
            if cls in EXIT_CODES:
                return EXIT_CODES[cls]
        return 1


if __name__ == "__main__":
    sys.exit(main())
