import json

import pytest

import taskchat as tc


@pytest.fixture(scope="session")
def movie_schema():
    return tc.builtin_schema("movie")


@pytest.fixture(scope="session")
def restaurant_schema():
    return tc.builtin_schema("restaurant")


@pytest.fixture(scope="session")
def taxi_schema():
    return tc.builtin_schema("taxi")


@pytest.fixture(scope="session")
def golden_kb(movie_schema):
    """The two knowledge-base records shipped as golden fixtures."""
    return tc.load_kb(tc.resource_text("movie.kb.json"), movie_schema)


@pytest.fixture(scope="session")
def sample_kb(movie_schema):
    """Small demo KB: the golden records plus the sample-dialogue movies."""
    return tc.load_kb(tc.resource_text("movie.sample.kb.json"), movie_schema)


@pytest.fixture(scope="session")
def movie_corpus(movie_schema):
    return tc.load_corpus(tc.resource_text("corpus.movie.json"), movie_schema)


@pytest.fixture(scope="session")
def restaurant_corpus(restaurant_schema):
    return tc.load_corpus(tc.resource_text("corpus.restaurant.json"), restaurant_schema)


@pytest.fixture(scope="session")
def sample_goals():
    return tc.load_goal_db(tc.resource_text("goals.movie.json"))


@pytest.fixture(scope="session")
def goal_left(sample_goals):
    """Booking goal with no extra questions (both agent kinds succeed)."""
    return sample_goals[1]


@pytest.fixture(scope="session")
def goal_right(sample_goals):
    """Goal that also asks for theater and starttime (rule agent fails)."""
    return sample_goals[2]


@pytest.fixture(scope="session")
def templates():
    return tc.builtin_templates()


@pytest.fixture()
def sim(movie_schema, sample_kb):
    return tc.UserSimulator(movie_schema, sample_kb, tc.SimConfig(max_turns=40))


@pytest.fixture(scope="session")
def big_world(movie_schema):
    """Synthetic world for learning tests: >=1000 records, 200 goals."""
    kb = tc.load_kb(json.dumps(tc.gen_movie_kb(1200, seed=3)), movie_schema)
    goals = tc.gen_goal_db(kb, 200, seed=3, request_fraction=0.6)
    return kb, goals


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    acceptance = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            if "test_acceptance" in rep.nodeid:
                acceptance[rep.nodeid.split("::")[-1]] = status.upper()
    if acceptance:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(acceptance.items()):
            terminalreporter.write_line(f"{status:6s}  {name}")
