"""Command-line entry points: train, eval, replay, report.

Exit codes: 0 success, 2 usage error, 3 runtime failure.  A flat key=value
config file can seed any option; explicit flags override file values.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..agents import (
    AGENT_KINDS,
    Hyperparameters,
    derive_seed,
    load_agent,
    run_episode,
    save_agent,
    train_loop,
)
from ..envs import KINDS, JunctionEnv, ScenarioConfig, parse_kv_file, \
    scenario_config_from_entries
from ..errors import CheckpointError, ContractError, JunctionLabError
from ..metrics import EpisodeRecord, aggregate, compute_rates
from .reports import (
    discover_runs,
    final_window_stats,
    write_eval_report,
    write_tables,
    write_training_curves,
    write_training_log,
)
from .scene import frames_from_trace
from .traces import read_trace, write_trace

SMOOTH_WINDOW = 500


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="junctionlab",
        description="Train and evaluate junction-driving agents on the "
                    "intersection and roundabout scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train agents, one run per seed")
    train.add_argument("--scenario", choices=KINDS)
    train.add_argument("--agent", choices=AGENT_KINDS)
    train.add_argument("--episodes", type=int)
    train.add_argument("--runs", type=int)
    train.add_argument("--seed", type=int)
    train.add_argument("--config", type=Path)
    train.add_argument("--out", type=Path)
    train.add_argument("--quiet", action="store_true")

    ev = sub.add_parser("eval", help="evaluate a checkpoint greedily")
    ev.add_argument("--checkpoint", type=Path, required=True)
    ev.add_argument("--trials", type=int)
    ev.add_argument("--episodes", type=int, help="episodes per trial")
    ev.add_argument("--seed", type=int)
    ev.add_argument("--config", type=Path)
    ev.add_argument("--out", type=Path)

    rp = sub.add_parser("replay", help="trace one greedy episode (optionally "
                                       "render SVG frames)")
    rp.add_argument("--checkpoint", type=Path, required=True)
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--out", type=Path)
    rp.add_argument("--render", action="store_true")

    rep = sub.add_parser("report", help="tables and training curves from logs")
    rep.add_argument("--logs", type=Path, required=True)
    rep.add_argument("--out", type=Path)
    rep.add_argument("--window", type=int, default=SMOOTH_WINDOW)
    return parser


def _entries(args) -> dict[str, str]:
    return parse_kv_file(args.config) if getattr(args, "config", None) else {}


def _resolve(args, entries, key, default, cast=int):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in entries:
        return cast(entries[key])
    return default


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

_HYPER_KEYS = {
    "gamma": float, "learning_rate": float, "replay_capacity": int,
    "batch_size": int, "target_sync_period": int, "epsilon_start": float,
    "epsilon_end": float, "epsilon_decay_fraction": float, "t_max": int,
    "clip_epsilon": float, "ppo_epochs": int, "rollout_length": int,
    "entropy_coef": float,
}


def _hyper_from_entries(entries: dict[str, str]) -> Hyperparameters:
    values = {}
    for key, cast in _HYPER_KEYS.items():
        if key in entries:
            values[key] = cast(entries[key])
    return Hyperparameters(**values)


def cmd_train(args) -> int:
    entries = _entries(args)
    scenario = _resolve(args, entries, "scenario", None, str)
    agent_kind = _resolve(args, entries, "agent", None, str)
    if scenario not in KINDS:
        raise ContractError(f"--scenario must be one of {KINDS}")
    if agent_kind not in AGENT_KINDS:
        raise ContractError(f"--agent must be one of {AGENT_KINDS}")
    episodes = _resolve(args, entries, "episodes", 5000)
    if episodes < 0:
        raise ContractError("--episodes must be >= 0")
    runs = _resolve(args, entries, "runs", 1)
    if runs < 1:
        raise ContractError("--runs must be >= 1")
    seed = _resolve(args, entries, "seed", 0)
    out = Path(_resolve(args, entries, "out", "runs", str))
    config = scenario_config_from_entries(entries, kind=scenario)
    hyper = _hyper_from_entries(entries)

    for run_index in range(runs):
        run_seed = seed + run_index
        run_dir = out / f"run_seed{run_seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        checkpoint = run_dir / "checkpoint.jlck"

        def progress(record, _seed=run_seed):
            if not args.quiet and (record.episode + 1) % 500 == 0:
                print(f"[seed {_seed}] episode {record.episode + 1}/{episodes}",
                      file=sys.stderr)

        agent, records = train_loop(agent_kind, config, episodes, run_seed,
                                    hyper=hyper, checkpoint_path=checkpoint,
                                    progress=progress)
        write_training_log(run_dir / "training_log.csv", records)
        if episodes == 0 and checkpoint.exists():
            checkpoint.unlink()
        summary = {
            "schema": "junctionlab-run/v1",
            "scenario": scenario,
            "agent": agent_kind,
            "episodes": episodes,
            "seed": run_seed,
            "final_window": final_window_stats(records, SMOOTH_WINDOW)
            if records else None,
        }
        (run_dir / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n")
        if not args.quiet:
            print(f"run seed {run_seed}: {len(records)} episodes -> {run_dir}")
    return 0


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    entries = _entries(args)
    trials = _resolve(args, entries, "trials", 20)
    episodes = _resolve(args, entries, "episodes", 100)
    seed = _resolve(args, entries, "seed", 1000)
    out = Path(_resolve(args, entries, "out", "eval", str))
    if trials < 1 or episodes < 1:
        raise ContractError("--trials and --episodes must be >= 1")

    agent, meta = load_agent(args.checkpoint)
    scen_meta = meta["scenario"]
    config = ScenarioConfig.defaults(scen_meta["kind"])
    config = replace(config, observed_vehicle_limit=scen_meta.get("V", 15))
    probe = JunctionEnv(config)
    if probe.action_count != meta["agent"]["action_count"]:
        raise CheckpointError(
            f"checkpoint has {meta['agent']['action_count']} actions but "
            f"scenario {scen_meta['kind']!r} has {probe.action_count}")

    trial_summaries = []
    for trial in range(trials):
        episode_records = []
        for episode in range(episodes):
            ep_seed = derive_seed(seed, trial, episode)
            env = JunctionEnv(replace(config, seed=ep_seed))
            outcome, total, _ = run_episode(env, agent, train=False)
            episode_records.append(EpisodeRecord(outcome, total,
                                                 env.time_substeps, ep_seed))
        trial_summaries.append(compute_rates(episode_records))
    report = aggregate(trial_summaries)
    protocol = {"trials": trials, "episodes_per_trial": episodes, "seed": seed,
                "policy": "greedy"}
    write_eval_report(out, scen_meta["kind"], meta["agent"]["kind"], report,
                      protocol)
    for metric, stats in report.as_rows():
        print(f"{metric}: {stats.mean:.2f}"
              + (f" (std {stats.std:.2f})" if stats.std is not None else ""))
    return 0


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

def cmd_replay(args) -> int:
    out = args.out or Path("replay")
    out.mkdir(parents=True, exist_ok=True)
    agent, meta = load_agent(args.checkpoint)
    scen_meta = meta["scenario"]
    config = ScenarioConfig.defaults(scen_meta["kind"], seed=args.seed)
    config = replace(config, observed_vehicle_limit=scen_meta.get("V", 15))
    env = JunctionEnv(config)
    env.tracing = True
    obs = env.reset()
    records: list[dict] = []
    pending = env.drain_trace()
    for row in pending:
        row.update(reward=None, event="")
    records.extend(pending)
    while not env.terminal:
        weights = agent.attention_weights(obs)
        if weights is not None:
            ids = env.observed_vehicle_ids()
            records.append({
                "type": "attention",
                "t": round(env.time_seconds, 6),
                "vehicle_ids": ids,
                "heads": [[round(float(w), 6) for w in head[: len(ids)]]
                          for head in weights],
            })
        action = agent.act_greedy(obs)
        result = env.step(action)
        rows = env.drain_trace()
        event = result.outcome.value if result.terminated else ""
        final_t = rows[-1]["t"] if rows else None
        for row in rows:
            row["reward"] = result.reward
            row["event"] = event if row["t"] == final_t else ""
        records.extend(rows)
        obs = result.observation
    header = {
        "scenario": scen_meta["kind"],
        "agent": meta["agent"]["kind"],
        "seed": args.seed,
        "outcome": env.outcome.value,
    }
    trace_path = out / "trace.jsonl"
    write_trace(trace_path, header, records)
    # lane-geometry debug dump for external plotting
    (out / "lanes.json").write_text(
        json.dumps(env.network.polyline_dump(), sort_keys=True) + "\n")
    print(f"trace: {trace_path} ({env.outcome.value})")
    if args.render:
        header, records = read_trace(trace_path)
        frame_dir = out / "frames"
        frame_dir.mkdir(exist_ok=True)
        for name, svg in frames_from_trace(header, records):
            (frame_dir / name).write_text(svg)
        print(f"frames: {frame_dir}")
    return 0


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def cmd_report(args) -> int:
    out = args.out or Path("report")
    out.mkdir(parents=True, exist_ok=True)
    runs = discover_runs(args.logs)
    if not runs:
        raise ContractError(f"no training runs under {args.logs}")
    write_tables(out / "tables.csv", runs, args.window)
    for scenario in sorted({r.scenario for r in runs}):
        write_training_curves(out / f"curves_{scenario}.svg", scenario, runs,
                              args.window)
    print(f"report: {out}")
    return 0


# ---------------------------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"train": cmd_train, "eval": cmd_eval, "replay": cmd_replay,
                "report": cmd_report}
    try:
        return handlers[args.command](args)
    except ContractError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (JunctionLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
