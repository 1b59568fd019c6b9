"""Rule agent vs RL agent on the two sample booking goals.

The rule agent collects its six slots and books; it never answers the user's
own questions, so it fails any goal that also asks for theater/starttime.
A small Q-network trained against the simulator learns to answer first and
then book, succeeding on both goals.

Run with:  python3 demos/demo_03_rule_vs_rl.py   (~20 seconds)
"""

import numpy as np

import taskchat as tc

schema = tc.builtin_schema("movie")
kb = tc.load_kb(tc.resource_text("movie.sample.kb.json"), schema)
goals = tc.load_goal_db(tc.resource_text("goals.movie.json"))
plain, curious = goals[1], goals[2]  # curious also requests theater + starttime

sim = tc.UserSimulator(schema, kb, tc.SimConfig(max_turns=40))
rule = tc.RuleAgent(schema, kb)


def show(name, record):
    print(f"--- {name}: {record.outcome}"
          + (f" ({record.failure_reason})" if record.failure_reason else ""))
    for user_act, agent_act, _ in record.exchanges:
        print("  usr:", tc.serialize_frame(user_act, schema))
        print("  agt:", tc.serialize_frame(agent_act, schema))
    print()


show("rule agent, plain goal", tc.run_episode(rule, sim, plain))
show("rule agent, curious goal", tc.run_episode(rule, sim, curious))

print("training a Q-network against the simulator (1500 episodes)...")
q = tc.QFunction(tc.feature_size(schema), len(tc.feasible_actions(schema)),
                 hidden=60, lr=1e-2, gamma=0.95, target_sync_period=100, seed=7)
agent = tc.RLAgent(schema, kb, q, epsilon=1.0, rng=np.random.default_rng(7))
schedule = tc.TrainSchedule(n_epochs=10, episodes_per_epoch=150, eval_episodes=40,
                            warm_start_episodes=100, train_steps_per_episode=4)
trained, curve = tc.train(agent, sim, [plain, curious], schedule, seed=7, rule_agent=rule)
print("learning curve (episodes -> greedy success rate):",
      {p.episodes: float(p.metrics.success_rate) for p in curve}, "\n")

show("RL agent, plain goal", tc.run_episode(trained, sim, plain))
show("RL agent, curious goal", tc.run_episode(trained, sim, curious))

rule_metrics, _ = tc.evaluate(rule, sim, goals, n_episodes=60, seed=1)
rl_metrics, _ = tc.evaluate(trained, sim, goals, n_episodes=60, seed=1)
print(tc.report([rule_metrics, rl_metrics], ["rule", "rl"]).to_text())
