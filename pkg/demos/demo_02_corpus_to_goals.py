"""From an annotated corpus to a user-goal database.

Loads the shipped annotated movie dialogue, prints its statistics, then
extracts user goals by both methods (first non-greeting user turn, and
aggregation over all user turns) and writes a goal DB file.

Run with:  python3 demos/demo_02_corpus_to_goals.py
"""

import tempfile

import taskchat as tc

schema = tc.builtin_schema("movie")
corpus = tc.load_corpus(tc.resource_text("corpus.movie.json"), schema)

stats = tc.corpus_stats(corpus)
print(f"{stats.n_dialogues} dialogue(s), avg {float(stats.avg_turns):g} turns,"
      f" {stats.n_intents_observed} intents and {stats.n_slots_observed} slots observed\n")

for turn in corpus[0].turns[:4]:
    print(f"  {turn.speaker:5s} {turn.utterance}")
    print(f"        {tc.serialize_frame(turn.act, schema)}")
print("  ...\n")

first, _ = tc.extract_goals_first_turn(corpus)
aggregate, _ = tc.extract_goals_aggregate(corpus)
print("first-turn goal:", tc.goal_to_json(first[0]))
print("aggregate goal: ", tc.goal_to_json(aggregate[0]))
print("(note the date refined from 'this weekend' to 'this week' by aggregation)\n")

with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
    n = tc.write_goal_db(aggregate, fh)
print(f"wrote {n} deduplicated goal(s) to {fh.name}")
print("reloaded equals written:", tc.load_goal_db(fh.name) == aggregate)
