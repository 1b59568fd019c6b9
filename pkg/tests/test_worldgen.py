import json

import taskchat as tc


def test_kb_generation_deterministic():
    assert tc.gen_movie_kb(50, seed=4) == tc.gen_movie_kb(50, seed=4)
    assert tc.gen_movie_kb(50, seed=4) != tc.gen_movie_kb(50, seed=5)


def test_kb_records_validate_against_schema(movie_schema):
    kb = tc.load_kb(json.dumps(tc.gen_movie_kb(300, seed=1)), movie_schema)
    assert len(kb) == 300
    assert kb.warnings == []


def test_goals_satisfiable_and_disjoint(movie_schema):
    kb = tc.load_kb(json.dumps(tc.gen_movie_kb(500, seed=2)), movie_schema)
    goals = tc.gen_goal_db(kb, 120, seed=2)
    assert len(goals) == 120
    for g in goals:
        assert "ticket" in g.request_slots
        assert not set(g.request_slots) & set(g.inform_slots)
        constraints = {s: v for s, v in g.inform_slots.items() if s != "numberofpeople"}
        assert tc.query(kb, constraints), g


def test_goal_request_fraction(movie_schema):
    kb = tc.load_kb(json.dumps(tc.gen_movie_kb(800, seed=3)), movie_schema)
    goals = tc.gen_goal_db(kb, 200, seed=3, request_fraction=0.6)
    extra = sum(1 for g in goals if len(g.request_slots) > 1)
    assert extra / len(goals) >= 0.5


def test_goal_db_unique(movie_schema):
    kb = tc.load_kb(json.dumps(tc.gen_movie_kb(500, seed=2)), movie_schema)
    goals = tc.gen_goal_db(kb, 100, seed=9)
    keys = {g.canonical_key() for g in goals}
    assert len(keys) == len(goals)
