"""End-to-end checks for the command-line interface.

Every test drives ``main`` in process with an argv list, so exit codes
and artifacts are observed exactly as a shell user would see them.
"""

import pytest

from scengen.cli import main

TINY_CONFIG = """\
env.kind = deceleration
env.t_max = 5
agent.batch = 8
agent.gru_hidden = 16
agent.mlp_hidden = 32
agent.warmup_steps = 20
agent.eval_every = 30
agent.eval_episodes = 2
agent.encoder_stride = 10
agent.dropout = 0.0
run.seeds = 0
run.budget = 0
run.out = {out}
"""


def _write_config(tmp_path, out_dir):
    path = tmp_path / "run.cfg"
    path.write_text(TINY_CONFIG.format(out=out_dir))
    return path


def _trained_checkpoint(tmp_path):
    out = tmp_path / "trained"
    config = _write_config(tmp_path, out)
    assert main(["train", "--config", str(config)]) == 0
    return out / "checkpoint_seed0.ckpt"


def test_train_budget_zero_writes_artifacts_and_exits_zero(tmp_path):
    out = tmp_path / "out"
    config = _write_config(tmp_path, out)
    assert main(["train", "--config", str(config)]) == 0
    assert (out / "checkpoint_seed0.ckpt").exists()
    metrics = (out / "metrics_seed0.csv").read_text()
    assert metrics.splitlines() == [
        "step,eval_success_rate,mean_episode_length,critic_loss,actor_loss,alpha"
    ]
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == "seed,final_success_rate"
    assert summary[1] == "0,nan"


def test_train_missing_config_exits_two_and_names_path(tmp_path, capsys):
    missing = tmp_path / "nope.cfg"
    assert main(["train", "--config", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_train_bad_config_value_exits_two(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text("env.kind = teleport\nrun.seeds = 0\nrun.budget = 0\n")
    assert main(["train", "--config", str(path)]) == 2
    assert "teleport" in capsys.readouterr().err


def test_generate_writes_scenarios_and_results(tmp_path, monkeypatch):
    checkpoint = _trained_checkpoint(tmp_path)
    out = tmp_path / "gen"
    monkeypatch.setenv("GOOSE_OUT", str(out))
    code = main(["generate", "--checkpoint", str(checkpoint),
                 "--env", "deceleration", "--count", "2", "--seed", "7"])
    assert code == 0
    assert (out / "scenario_000.scn").exists()
    assert (out / "scenario_001.scn").exists()
    lines = (out / "results.csv").read_text().splitlines()
    assert lines[0] == ("index,file,success,steps,ego_adv_min_distance,"
                        "adv_max_abs_accel,adv_max_abs_steer")
    assert len(lines) == 3
    assert lines[1].startswith("0,scenario_000.scn,")


def test_generate_is_deterministic_for_a_fixed_seed(tmp_path, monkeypatch):
    checkpoint = _trained_checkpoint(tmp_path)
    blobs = []
    for name in ("first", "second"):
        out = tmp_path / name
        monkeypatch.setenv("GOOSE_OUT", str(out))
        assert main(["generate", "--checkpoint", str(checkpoint),
                     "--env", "deceleration", "--count", "1",
                     "--seed", "3"]) == 0
        blobs.append(((out / "scenario_000.scn").read_bytes(),
                      (out / "results.csv").read_bytes()))
    assert blobs[0] == blobs[1]


def test_generate_count_zero_writes_empty_results(tmp_path, monkeypatch):
    checkpoint = _trained_checkpoint(tmp_path)
    out = tmp_path / "empty"
    monkeypatch.setenv("GOOSE_OUT", str(out))
    assert main(["generate", "--checkpoint", str(checkpoint),
                 "--env", "deceleration", "--count", "0"]) == 0
    assert (out / "results.csv").read_text() == "index,file,success,steps\n"
    assert not list(out.glob("*.scn"))


def test_generate_env_mismatch_exits_two(tmp_path, monkeypatch, capsys):
    checkpoint = _trained_checkpoint(tmp_path)
    monkeypatch.setenv("GOOSE_OUT", str(tmp_path / "mismatch"))
    code = main(["generate", "--checkpoint", str(checkpoint),
                 "--env", "cut_in", "--count", "1"])
    assert code == 2
    assert "configuration" in capsys.readouterr().err


def test_generate_rejects_non_checkpoint_file(tmp_path, capsys):
    impostor = tmp_path / "weights.ckpt"
    impostor.write_bytes(b"not a checkpoint at all")
    code = main(["generate", "--checkpoint", str(impostor),
                 "--env", "deceleration", "--count", "1"])
    assert code == 2
    assert "checkpoint" in capsys.readouterr().err


def test_render_roundtrips_generated_scenario(tmp_path, monkeypatch):
    checkpoint = _trained_checkpoint(tmp_path)
    out = tmp_path / "gen"
    monkeypatch.setenv("GOOSE_OUT", str(out))
    assert main(["generate", "--checkpoint", str(checkpoint),
                 "--env", "deceleration", "--count", "1", "--seed", "1"]) == 0
    monkeypatch.delenv("GOOSE_OUT")
    scenario = out / "scenario_000.scn"
    first = tmp_path / "a.svg"
    second = tmp_path / "b.svg"
    assert main(["render", "--scenario", str(scenario),
                 "--out", str(first)]) == 0
    assert main(["render", "--scenario", str(scenario),
                 "--out", str(second)]) == 0
    payload = first.read_bytes()
    assert payload.startswith(b"<?xml")
    assert payload == second.read_bytes()


def test_render_relative_out_lands_under_goose_out(tmp_path, monkeypatch):
    checkpoint = _trained_checkpoint(tmp_path)
    gen = tmp_path / "gen"
    monkeypatch.setenv("GOOSE_OUT", str(gen))
    assert main(["generate", "--checkpoint", str(checkpoint),
                 "--env", "deceleration", "--count", "1"]) == 0
    assert main(["render", "--scenario", str(gen / "scenario_000.scn"),
                 "--out", "picture.svg"]) == 0
    assert (gen / "picture.svg").exists()


def test_render_malformed_scenario_exits_two(tmp_path, capsys):
    bogus = tmp_path / "broken.scn"
    bogus.write_text("this is not a scenario")
    assert main(["render", "--scenario", str(bogus),
                 "--out", str(tmp_path / "x.svg")]) == 2
    assert "error" in capsys.readouterr().err


def test_render_missing_scenario_exits_two(tmp_path, capsys):
    assert main(["render", "--scenario", str(tmp_path / "absent.scn"),
                 "--out", str(tmp_path / "x.svg")]) == 2
    assert "absent.scn" in capsys.readouterr().err


def test_validate_single_simulation_fails_but_reports(tmp_path, monkeypatch):
    out = tmp_path / "audit"
    monkeypatch.setenv("GOOSE_OUT", str(out))
    code = main(["validate", "--env", "deceleration", "--method", "random",
                 "--budget", "1", "--seed", "0"])
    assert code == 1
    report = (out / "validate_deceleration_random_seed0.txt").read_text()
    assert "success: False" in report
    assert "simulations: 1" in report
    assert "ego_adv_min_distance" in report


def test_validate_solvable_case_exits_zero(tmp_path, monkeypatch):
    out = tmp_path / "audit"
    monkeypatch.setenv("GOOSE_OUT", str(out))
    code = main(["validate", "--env", "deceleration", "--method", "cem",
                 "--budget", "2000", "--seed", "0"])
    assert code == 0
    report = (out / "validate_deceleration_cem_seed0.txt").read_text()
    assert "success: True" in report


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as info:
        main(["generate", "--env", "deceleration", "--count", "1"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["validate", "--env", "hyperspace", "--budget", "5"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
