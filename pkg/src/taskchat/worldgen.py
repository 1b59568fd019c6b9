"""Synthetic movie worlds: desk-scale knowledge bases and goal databases.

Generated values stay clear of the frame-DSL delimiters, commas, and the
literal " or " so every record/goal round-trips through the NL channel.
"""

from __future__ import annotations

import numpy as np

from .goals import UserGoal
from .kb import KnowledgeBase

_ADJECTIVES = [
    "silver", "crimson", "golden", "midnight", "electric", "howling", "frozen",
    "scarlet", "iron", "lucky", "broken", "savage", "gentle", "neon", "shadow",
    "velvet", "rusty", "hollow", "distant", "burning",
]
_NOUNS = [
    "comet", "harvest", "empire", "garden", "voyage", "signal", "horizon",
    "canyon", "lantern", "mirage", "cascade", "fortress", "reckoning",
    "paradox", "monsoon", "pilgrim", "satellite", "labyrinth", "ember", "tide",
]
_CITIES = {
    "seattle": ("wa", "98101"), "portland": ("or", "97201"), "boston": ("ma", "02108"),
    "denver": ("co", "80202"), "austin": ("tx", "78701"), "chicago": ("il", "60601"),
    "atlanta": ("ga", "30301"), "phoenix": ("az", "85001"), "oakland": ("ca", "94601"),
    "madison": ("wi", "53701"), "tulsa": ("ok", "74101"), "omaha": ("ne", "68101"),
    "reno": ("nv", "89501"), "tacoma": ("wa", "98401"), "fresno": ("ca", "93701"),
    "albany": ("ny", "12201"), "toledo": ("oh", "43601"), "mobile": ("al", "36601"),
    "salem": ("or", "97301"), "laredo": ("tx", "78040"),
}
_THEATER_PATTERNS = ["{city} grand 12", "{city} plaza 16", "{city} vista 8", "{city} royale 6"]
_CHAINS = ["grand cinemas", "plaza group", "vista theaters", "royale pictures"]
_STARTTIMES = [
    "10:00 am", "11:30 am", "1:00 pm", "2:30 pm", "4:00 pm", "5:15 pm",
    "6:30 pm", "7:45 pm", "8:20 pm", "9:25 pm", "10:10 pm", "11:45 pm",
]
_DATES = ["today", "tonight", "tomorrow", "friday", "saturday", "sunday", "this week", "next week"]
_GENRES = ["action", "comedy", "drama", "thriller", "romance", "horror", "family", "documentary"]
_RATINGS = ["excellent", "great", "good", "fair"]


def movie_titles(n: int = 60) -> list[str]:
    titles = []
    for noun in _NOUNS:
        for adj in _ADJECTIVES:
            titles.append(f"the {adj} {noun}")
            if len(titles) == n:
                return titles
    return titles


def gen_movie_kb(n_records: int, seed: int = 0) -> list[dict]:
    """Random movie showings as KB-file-shaped dicts (stable under the seed)."""
    rng = np.random.default_rng([seed, 11])
    titles = movie_titles()
    genre_of = {t: _GENRES[i % len(_GENRES)] for i, t in enumerate(titles)}
    rating_of = {t: _RATINGS[i % len(_RATINGS)] for i, t in enumerate(titles)}
    cities = list(_CITIES)
    records = []
    for _ in range(n_records):
        title = titles[int(rng.integers(len(titles)))]
        city = cities[int(rng.integers(len(cities)))]
        state, zip_code = _CITIES[city]
        pattern_idx = int(rng.integers(len(_THEATER_PATTERNS)))
        records.append({
            "moviename": title,
            "genre": genre_of[title],
            "critic_rating": rating_of[title],
            "city": city,
            "state": state,
            "zip": zip_code,
            "theater": _THEATER_PATTERNS[pattern_idx].format(city=city),
            "theater_chain": _CHAINS[pattern_idx],
            "starttime": _STARTTIMES[int(rng.integers(len(_STARTTIMES)))],
            "date": _DATES[int(rng.integers(len(_DATES)))],
        })
    return records


def gen_goal_db(kb: KnowledgeBase, n_goals: int, seed: int = 0,
                request_fraction: float = 0.6,
                primary: str = "ticket") -> list[UserGoal]:
    """Goals drawn from actual KB records so every constraint is satisfiable.

    Each goal informs the movie name, a random subset of the record's other
    slots, and a party size; ``request_fraction`` of them additionally request
    theater and/or starttime (removed from the informs).
    """
    rng = np.random.default_rng([seed, 13])
    optional = ["city", "date", "starttime", "theater"]
    goals: list[UserGoal] = []
    seen = set()
    attempts = 0
    while len(goals) < n_goals and attempts < n_goals * 50:
        attempts += 1
        record = kb.records[int(rng.integers(len(kb.records)))]
        informs = {"moviename": (record.slots["moviename"],)}
        for s in optional:
            if s in record.slots and rng.random() < 0.6:
                informs[s] = (record.slots[s],)
        informs["numberofpeople"] = (str(int(rng.integers(1, 10))),)
        requests = [primary]
        if rng.random() < request_fraction:
            extras = ["theater", "starttime"] if rng.random() < 0.4 else \
                ["theater"] if rng.random() < 0.5 else ["starttime"]
            for s in extras:
                informs.pop(s, None)
                requests.append(s)
        goal = UserGoal(request_slots=tuple(requests), inform_slots=informs)
        key = goal.canonical_key()
        if key in seen:
            continue
        seen.add(key)
        goals.append(goal)
    return goals
