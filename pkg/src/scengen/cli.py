"""Command-line entry point: train, generate, render, validate.

Each subcommand wires the library modules together and maps failures
onto the documented exit codes: 0 for success, 1 for runtime failures
(including an unsolved validation search), 2 for usage and
configuration problems.  The ``GOOSE_OUT`` environment variable
overrides every output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from .agent import Agent, cem_search, train
from .agent.checkpoint import load_checkpoint
from .config import (
    agent_config_from_mapping,
    env_config_from_mapping,
    idm_params_from_mapping,
    load_run_config,
    mapping_from_config,
)
from .env import EnvConfig, GenerationEnv
from .errors import CheckpointError, ConfigurationError, ScengenError
from .goals import ENV_KINDS
from .render import render_scenario
from .scenario_io import load_scenario, save_scenario

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _output_dir(configured):
    """The configured directory, unless GOOSE_OUT overrides it."""
    return os.environ.get("GOOSE_OUT") or str(configured)


def _ensure_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_train(args):
    cfg = load_run_config(args.config)
    out = _ensure_dir(_output_dir(cfg.out))
    env = GenerationEnv(cfg.env, idm=cfg.sut)
    meta = {
        "env": mapping_from_config(cfg.env),
        "agent": mapping_from_config(cfg.agent),
        "sut": mapping_from_config(cfg.sut),
        "variant": cfg.variant,
    }
    curves = train(env, cfg.agent, seeds=list(cfg.seeds), budget=cfg.budget,
                   out_dir=str(out), meta=meta)
    summary = out / "summary.csv"
    with open(summary, "w", encoding="utf-8") as fh:
        fh.write("seed,final_success_rate\n")
        for seed in cfg.seeds:
            curve = curves[seed]
            final = curve[-1][1] if curve else float("nan")
            fh.write(f"{seed},{final:.4f}\n")
            print(f"seed {seed}: final success rate "
                  f"{final:.4f}" if curve else f"seed {seed}: no evaluations")
    print(f"artifacts written to {out}")
    return EXIT_OK


def _rebuild_agent(checkpoint_path, env_kind):
    """Environment and agent exactly as the checkpoint describes them."""
    manifest, _ = load_checkpoint(checkpoint_path)
    meta = manifest.get("meta", {})
    for key in ("env", "agent", "sut"):
        if key not in meta:
            raise CheckpointError(
                f"checkpoint lacks the '{key}' section needed to rebuild the run"
            )
    env_cfg = env_config_from_mapping({**meta["env"], "kind": env_kind})
    agent_cfg, _ = agent_config_from_mapping(meta["agent"])
    idm = idm_params_from_mapping(meta["sut"])
    env = GenerationEnv(env_cfg, idm=idm)
    agent = Agent(env, agent_cfg, seed=0)
    agent.load(checkpoint_path)
    return env, agent


def cmd_generate(args):
    if args.count < 0:
        raise ConfigurationError("--count must be non-negative")
    env, agent = _rebuild_agent(args.checkpoint, args.env)
    out = _ensure_dir(_output_dir("runs"))
    rng = np.random.default_rng(args.seed)
    goal_names = None
    rows = []
    for index in range(args.count):
        state = env.reset(rng)
        if goal_names is None:
            goal_names = [c.quantity for c in state.goal.eq + state.goal.ieq]
        obs = env.observation(state)
        done = False
        while not done:
            action = agent.select_action(obs, state.achieved, state.goal,
                                         deterministic=True)
            state, _, done, info = env.step(state, action)
            obs = env.observation(state)
        name = f"scenario_{index:03d}.scn"
        save_scenario(state.scenario, out / name)
        achieved = list(state.achieved.eq) + list(state.achieved.ieq)
        rows.append((index, name, info["success"], info["steps"], achieved))
        print(f"{name}: success={info['success']} steps={info['steps']}")
    results = out / "results.csv"
    with open(results, "w", encoding="utf-8") as fh:
        names = goal_names or []
        fh.write(",".join(["index", "file", "success", "steps"] + names) + "\n")
        for index, name, success, steps, achieved in rows:
            values = ",".join(f"{v:.9g}" for v in achieved)
            tail = f",{values}" if values else ""
            fh.write(f"{index},{name},{int(success)},{steps}{tail}\n")
    print(f"wrote {len(rows)} scenarios and {results}")
    return EXIT_OK


def cmd_render(args):
    scenario = load_scenario(args.scenario)
    out = Path(args.out)
    if not out.is_absolute() and os.environ.get("GOOSE_OUT"):
        out = _ensure_dir(os.environ["GOOSE_OUT"]) / out
    render_scenario(scenario, out)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_validate(args):
    env = GenerationEnv(EnvConfig(kind=args.env, fixed_goal=True))
    rng = np.random.default_rng(args.seed)
    state = env.reset(rng)
    elite_frac = 1.0 if args.method == "random" else 0.1
    result = cem_search(env, state, rng, budget=args.budget,
                        elite_frac=elite_frac)
    out = _ensure_dir(_output_dir("runs"))
    report = out / f"validate_{args.env}_{args.method}_seed{args.seed}.txt"
    achieved = list(result.best_achieved.eq) + list(result.best_achieved.ieq)
    targets = [c.target for c in state.goal.eq + state.goal.ieq]
    names = [c.quantity for c in state.goal.eq + state.goal.ieq]
    with open(report, "w", encoding="utf-8") as fh:
        fh.write(f"env: {args.env}\nmethod: {args.method}\n")
        fh.write(f"seed: {args.seed}\nbudget: {args.budget}\n")
        fh.write(f"success: {result.success}\n")
        fh.write(f"simulations: {result.simulations}\n")
        fh.write(f"best_score: {result.best_score:.9g}\n")
        for name, value, target in zip(names, achieved, targets):
            fh.write(f"{name}: achieved {value:.9g} target {target:.9g}\n")
    print(f"{'solved' if result.success else 'unsolved'} "
          f"after {result.simulations} simulations; report at {report}")
    return EXIT_OK if result.success else EXIT_RUNTIME


def build_parser():
    parser = argparse.ArgumentParser(
        prog="scengen",
        description="Goal-conditioned generation of safety-critical "
                    "driving scenarios",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train agents per the run config")
    p_train.add_argument("--config", required=True, help="run config path")

    p_gen = sub.add_parser("generate", help="roll out a trained policy")
    p_gen.add_argument("--checkpoint", required=True)
    p_gen.add_argument("--env", required=True, choices=ENV_KINDS)
    p_gen.add_argument("--count", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)

    p_render = sub.add_parser("render", help="draw a scenario file as SVG")
    p_render.add_argument("--scenario", required=True)
    p_render.add_argument("--out", required=True)

    p_val = sub.add_parser("validate", help="audit environment solvability")
    p_val.add_argument("--env", required=True, choices=ENV_KINDS)
    p_val.add_argument("--method", choices=("cem", "random"), default="cem")
    p_val.add_argument("--budget", type=int, required=True)
    p_val.add_argument("--seed", type=int, default=0)

    return parser


_COMMANDS = {
    "train": cmd_train,
    "generate": cmd_generate,
    "render": cmd_render,
    "validate": cmd_validate,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigurationError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScengenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
