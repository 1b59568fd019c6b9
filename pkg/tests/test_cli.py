import json

import pytest

import taskchat as tc
from taskchat.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_stats_movie_fixture(capsys):
    code, out, _ = run_cli(capsys, "stats", "--corpus", "builtin:corpus.movie.json",
                           "--schema", "movie", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["n_dialogues"] == 1
    assert doc["avg_turns"] == 13.0


def test_validate_clean_corpus(capsys):
    code, out, _ = run_cli(capsys, "validate", "--corpus", "builtin:corpus.movie.json",
                           "--schema", "movie")
    assert code == 0
    assert "no violations" in out


def test_validate_violations_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{
        "id": "x", "domain": "movie",
        "turns": [{"speaker": "user", "utterance": "", "act": "request(spaceship)"}],
    }]), encoding="utf-8")
    code, out, _ = run_cli(capsys, "validate", "--corpus", str(bad), "--schema", "movie")
    assert code == 1
    assert "spaceship" in out


def test_extract_goals_aggregate(capsys, tmp_path):
    out_path = str(tmp_path / "goals.json")
    code, out, _ = run_cli(capsys, "extract-goals", "--corpus", "builtin:corpus.movie.json",
                           "--schema", "movie", "--method", "aggregate", "--out", out_path)
    assert code == 0
    goals = tc.load_goal_db(out_path)
    assert goals[0].request_slots == ("moviename",)
    assert goals[0].inform_slots["date"] == ("this week",)
    assert goals[0].inform_slots["theater_chain"] == ("amc", "regency")


def test_simulate_deterministic_json(capsys):
    args = ("simulate", "--agent", "rule", "--episodes", "25", "--seed", "1", "--json")
    code_a, out_a, _ = run_cli(capsys, *args)
    code_b, out_b, _ = run_cli(capsys, *args)
    assert code_a == code_b == 0
    assert out_a == out_b
    doc = json.loads(out_a)
    assert doc["metrics"]["n_episodes"] == 25


def test_simulate_nl_mode_matches_frame(capsys):
    _, frame_out, _ = run_cli(capsys, "simulate", "--agent", "rule", "--episodes", "10",
                              "--seed", "2", "--mode", "frame", "--json")
    _, nl_out, _ = run_cli(capsys, "simulate", "--agent", "rule", "--episodes", "10",
                           "--seed", "2", "--mode", "nl", "--json")
    frame_doc, nl_doc = json.loads(frame_out), json.loads(nl_out)
    assert frame_doc["episodes"] == nl_doc["episodes"]


def test_unknown_subcommand_usage_exit():
    assert main(["frobnicate"]) == 2


def test_missing_required_flag_usage_exit():
    assert main(["extract-goals", "--corpus", "x.json"]) == 2


def test_domain_error_exit_codes(capsys, tmp_path):
    missing = str(tmp_path / "nope.json")
    code, _, err = run_cli(capsys, "stats", "--corpus", missing, "--schema", "movie")
    assert code == 10  # OSError
    bad = tmp_path / "bad.json"
    bad.write_text("[{]", encoding="utf-8")
    code, _, err = run_cli(capsys, "stats", "--corpus", str(bad), "--schema", "movie")
    assert code == 3  # ParseError


def test_checkpoint_required_for_rl(capsys):
    code, _, err = run_cli(capsys, "simulate", "--agent", "rl", "--episodes", "1",
                           "--seed", "0")
    assert code == 7
    assert "checkpoint" in err


def test_config_file_supplies_defaults(capsys, tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"episodes": 5, "seed": 3}), encoding="utf-8")
    code, out, _ = run_cli(capsys, "--config", str(config), "simulate", "--agent", "rule",
                           "--json")
    assert code == 0
    assert json.loads(out)["metrics"]["n_episodes"] == 5
    # explicit flags beat the config
    code, out, _ = run_cli(capsys, "--config", str(config), "simulate", "--agent", "rule",
                           "--episodes", "2", "--json")
    assert json.loads(out)["metrics"]["n_episodes"] == 2


def test_config_unknown_keys_rejected(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"warp_speed": 9}), encoding="utf-8")
    assert main(["--config", str(config), "simulate"]) == 2


def test_gen_world_and_train_and_evaluate(capsys, tmp_path):
    kb_path = str(tmp_path / "kb.json")
    goals_path = str(tmp_path / "goals.json")
    code, _, _ = run_cli(capsys, "gen-world", "--kb-records", "80", "--n-goals", "12",
                         "--seed", "1", "--kb-out", kb_path, "--goals-out", goals_path)
    assert code == 0
    ckpt = str(tmp_path / "ck.json")
    curve = str(tmp_path / "curve.csv")
    code, _, _ = run_cli(capsys, "train", "--kb", kb_path, "--goals", goals_path,
                         "--epochs", "2", "--episodes-per-epoch", "30",
                         "--eval-episodes", "8", "--warm-start", "10",
                         "--hidden", "16", "--seed", "5", "--out", ckpt, "--curve", curve)
    assert code == 0
    with open(curve, encoding="utf-8") as fh:
        assert fh.readline().strip() == "episode,success_rate,avg_turns,avg_reward"
    code, out, _ = run_cli(capsys, "evaluate", "--kb", kb_path, "--goals", goals_path,
                           "--agents", "rule,rl", "--checkpoint", ckpt,
                           "--episodes", "10", "--seed", "2", "--json")
    assert code == 0
    doc = json.loads(out)
    assert [a["label"] for a in doc["agents"]] == ["rule", "rl"]
    assert "success_rate_delta" in doc
