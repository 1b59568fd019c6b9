import json
import os

import pytest

import taskchat as tc
from taskchat import (ParseError, UserGoal, corpus_stats, extract_goals_aggregate,
                      extract_goals_first_turn, load_corpus, load_goal_db,
                      validate_corpus, write_goal_db)

ORACLE_PATH = os.path.join(os.path.dirname(__file__), "data", "goal_oracle.json")


def oracle(domain, method):
    with open(ORACLE_PATH, "r", encoding="utf-8") as fh:
        return tc.goal_from_json(json.load(fh)[domain][method])


def test_movie_fixture_loads(movie_corpus):
    assert len(movie_corpus) == 1
    # the annotated movie dialogue runs 13 turns (usr/agt alternating)
    assert len(movie_corpus[0].turns) == 13
    assert movie_corpus[0].turns[0].utterance == "Find me a good action movie this weekend."


def test_restaurant_fixture_loads(restaurant_corpus):
    assert len(restaurant_corpus) == 1
    assert len(restaurant_corpus[0].turns) == 10


def test_fixtures_validate_cleanly(movie_corpus, movie_schema, restaurant_corpus,
                                   restaurant_schema):
    assert validate_corpus(movie_corpus, movie_schema).ok
    assert validate_corpus(restaurant_corpus, restaurant_schema).ok


def test_validation_report_collects(movie_schema):
    corpus = load_corpus(json.dumps([{
        "id": "d0", "domain": "movie",
        "turns": [{"speaker": "user", "utterance": "", "act": "request(spaceship)"}],
    }]), movie_schema)
    rep = validate_corpus(corpus, movie_schema)
    assert not rep.ok
    assert rep.violations[0][0] == "d0"
    assert "spaceship" in rep.to_text()
    assert rep.to_json_dict()["violations"][0]["turn"] == 0


def test_malformed_act_raises_with_location():
    doc = json.dumps([{"id": "d7", "domain": "movie",
                       "turns": [{"speaker": "user", "utterance": "", "act": "foo("}]}])
    with pytest.raises(ParseError) as exc:
        load_corpus(doc)
    assert exc.value.dialogue_id == "d7"
    assert exc.value.turn == 0


def test_stats_movie(movie_corpus):
    stats = corpus_stats(movie_corpus)
    assert stats.n_dialogues == 1
    assert stats.avg_turns == 13
    assert stats.avg_turns_defined


def test_stats_empty():
    stats = corpus_stats([])
    assert stats.n_dialogues == 0
    assert stats.avg_turns == 0
    assert not stats.avg_turns_defined


def test_stats_average_of_seven_and_eight(movie_schema):
    def dlg(i, n):
        return {"id": f"d{i}", "domain": "movie",
                "turns": [{"speaker": "user" if t % 2 == 0 else "agent",
                           "utterance": "", "act": "thanks()"} for t in range(n)]}
    corpus = load_corpus(json.dumps([dlg(0, 7), dlg(1, 8)]), movie_schema)
    assert float(corpus_stats(corpus).avg_turns) == 7.5


def test_first_turn_goal_movie(movie_corpus):
    goals, skipped = extract_goals_first_turn(movie_corpus)
    assert skipped == []
    assert goals == [oracle("movie", "first")]


def test_aggregate_goal_movie(movie_corpus):
    goals, skipped = extract_goals_aggregate(movie_corpus)
    assert skipped == []
    assert goals == [oracle("movie", "aggregate")]
    # last-write-wins: "this weekend" -> "this week"
    assert goals[0].inform_slots["date"] == ("this week",)


def test_first_turn_goal_restaurant(restaurant_corpus):
    goals, _ = extract_goals_first_turn(restaurant_corpus)
    assert goals == [oracle("restaurant", "first")]


def test_aggregate_goal_restaurant(restaurant_corpus):
    goals, _ = extract_goals_aggregate(restaurant_corpus)
    assert goals == [oracle("restaurant", "aggregate")]


def test_greeting_turn_excluded(movie_schema):
    corpus = load_corpus(json.dumps([{
        "id": "g", "domain": "movie",
        "turns": [
            {"speaker": "user", "utterance": "hi", "act": "greeting()"},
            {"speaker": "user", "utterance": "", "act": "request(ticket;city=seattle)"},
        ],
    }]), movie_schema)
    goals, _ = extract_goals_first_turn(corpus)
    assert goals[0].request_slots == ("ticket",)
    assert goals[0].inform_slots == {"city": ("seattle",)}


def test_agent_only_dialogue_skipped(movie_schema):
    corpus = load_corpus(json.dumps([{
        "id": "lonely", "domain": "movie",
        "turns": [{"speaker": "agent", "utterance": "", "act": "greeting()"}],
    }]), movie_schema)
    goals, skipped = extract_goals_first_turn(corpus)
    assert goals == [] and skipped == ["lonely"]
    goals, skipped = extract_goals_aggregate(corpus)
    assert goals == [] and skipped == ["lonely"]


def test_single_turn_dialogue_methods_agree(movie_schema):
    corpus = load_corpus(json.dumps([{
        "id": "one", "domain": "movie",
        "turns": [{"speaker": "user", "utterance": "",
                   "act": "request(ticket;moviename=deadpool)"}],
    }]), movie_schema)
    first, _ = extract_goals_first_turn(corpus)
    agg, _ = extract_goals_aggregate(corpus)
    assert first == agg


def test_requested_then_informed_ends_inform_only(movie_schema):
    corpus = load_corpus(json.dumps([{
        "id": "ri", "domain": "movie",
        "turns": [
            {"speaker": "user", "utterance": "", "act": "request(moviename;ticket)"},
            {"speaker": "user", "utterance": "", "act": "inform(moviename=zootopia)"},
        ],
    }]), movie_schema)
    goals, _ = extract_goals_aggregate(corpus)
    assert goals[0].request_slots == ("ticket",)
    assert goals[0].inform_slots == {"moviename": ("zootopia",)}


def test_first_turn_slots_subset_of_aggregate(movie_corpus, restaurant_corpus):
    for corpus in (movie_corpus, restaurant_corpus):
        first, _ = extract_goals_first_turn(corpus)
        agg, _ = extract_goals_aggregate(corpus)
        for f, a in zip(first, agg):
            f_slots = set(f.request_slots) | set(f.inform_slots)
            a_slots = set(a.request_slots) | set(a.inform_slots)
            assert f_slots <= a_slots


def test_goal_db_roundtrip(tmp_path, movie_corpus):
    goals, _ = extract_goals_aggregate(movie_corpus)
    path = tmp_path / "goals.json"
    n = write_goal_db(goals, str(path))
    assert n == 1
    assert load_goal_db(str(path)) == goals


def test_goal_db_dedup(tmp_path):
    g = UserGoal(request_slots=("ticket",), inform_slots={"city": "seattle"})
    same = UserGoal(request_slots=("ticket",), inform_slots={"city": "seattle"})
    path = tmp_path / "goals.json"
    assert write_goal_db([g, same], str(path)) == 1


def test_goal_db_empty(tmp_path):
    path = tmp_path / "goals.json"
    assert write_goal_db([], str(path)) == 0
    assert path.read_text().strip() == "[]"
    assert load_goal_db(str(path)) == []


def test_sample_goal_roundtrip(tmp_path, sample_goals):
    sample = sample_goals[0]
    assert sample.request_slots == ("ticket",)
    assert sample.inform_slots["moviename"] == ("deadpool",)
    path = tmp_path / "sample.json"
    write_goal_db([sample], str(path))
    assert load_goal_db(str(path)) == [sample]


def test_goal_db_accepts_diaact_key():
    goals = load_goal_db(json.dumps([{
        "request_slots": {"ticket": "UNK"},
        "diaact": "request",
        "inform_slots": {"moviename": "10 cloverfield lane"},
    }]))
    assert goals[0].request_slots == ("ticket",)
