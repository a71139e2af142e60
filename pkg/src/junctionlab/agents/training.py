"""Agent construction, the training loop, and checkpoint persistence."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..envs import INTERSECTION, JunctionEnv, ScenarioConfig
from ..errors import CheckpointError, ContractError
from ..nn import load_checkpoint, save_checkpoint
from .actor_critic import A2CAgent
from .dqn import DQNAgent
from .exploration import linear_epsilon
from .ppo import PPOAgent

AGENT_KINDS = ("dqn", "attn-dqn-single", "attn-dqn-multi", "a2c", "ppo")


@dataclass(frozen=True)
class Hyperparameters:
    """Training knobs; gamma defaults per scenario when left None."""

    gamma: float | None = None
    learning_rate: float = 5e-4
    replay_capacity: int = 15_000
    batch_size: int = 64
    target_sync_period: int = 512
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.5
    t_max: int = 8
    clip_epsilon: float = 0.2
    ppo_epochs: int = 4
    rollout_length: int = 256
    entropy_coef: float = 0.01

    def resolved_gamma(self, scenario_kind: str) -> float:
        if self.gamma is not None:
            return self.gamma
        return 0.95 if scenario_kind == INTERSECTION else 0.99


def derive_seed(*path: int) -> int:
    """Deterministic child seed from a path of integers."""
    return int(np.random.SeedSequence(list(path)).generate_state(1, np.uint64)[0])


def create_agent(kind: str, config: ScenarioConfig, seed: int,
                 hyper: Hyperparameters = Hyperparameters()):
    obs_shape = (config.observed_vehicle_limit, 7)
    env = JunctionEnv(config)
    action_count = env.action_count
    gamma = hyper.resolved_gamma(config.kind)
    if kind in ("dqn", "attn-dqn-single", "attn-dqn-multi"):
        return DQNAgent(kind, obs_shape, action_count, seed, gamma,
                        learning_rate=hyper.learning_rate,
                        replay_capacity=hyper.replay_capacity,
                        batch_size=hyper.batch_size,
                        target_sync_period=hyper.target_sync_period)
    if kind == "a2c":
        return A2CAgent(obs_shape, action_count, seed, gamma,
                        learning_rate=hyper.learning_rate,
                        t_max=hyper.t_max, entropy_coef=hyper.entropy_coef)
    if kind == "ppo":
        return PPOAgent(obs_shape, action_count, seed, gamma,
                        learning_rate=hyper.learning_rate,
                        clip_epsilon=hyper.clip_epsilon,
                        epochs=hyper.ppo_epochs,
                        rollout_length=hyper.rollout_length,
                        entropy_coef=hyper.entropy_coef)
    raise ContractError(f"unknown agent kind {kind!r}; expected {AGENT_KINDS}")


@dataclass(frozen=True)
class TrainingRecord:
    episode: int
    outcome: str
    total_reward: float
    epsilon: float
    loss: float | None


def run_episode(env: JunctionEnv, agent, train: bool = True,
                ) -> tuple[str, float, list[float]]:
    obs = env.reset()
    total = 0.0
    losses: list[float] = []
    while not env.terminal:
        action = agent.act_train(obs) if train else agent.act_greedy(obs)
        result = env.step(action)
        total += result.reward
        if train:
            loss = agent.observe(obs, action, result.reward,
                                 result.observation, result.terminated)
            if loss is not None:
                losses.append(loss)
        obs = result.observation
    if train:
        agent.finish_episode()
    return env.classify_outcome(), total, losses


def train_loop(kind: str, config: ScenarioConfig, episodes: int, seed: int,
               hyper: Hyperparameters = Hyperparameters(),
               checkpoint_path: str | Path | None = None,
               checkpoint_every: int = 0,
               progress: "callable | None" = None) -> tuple[object, list[TrainingRecord]]:
    """Train one agent for ``episodes`` episodes, one fresh seeded environment
    per episode; returns the agent and the per-episode log."""
    if episodes < 0:
        raise ContractError("episodes must be >= 0")
    agent = create_agent(kind, config, seed, hyper)
    records: list[TrainingRecord] = []
    try:
        for episode in range(episodes):
            epsilon = linear_epsilon(episode, episodes,
                                     start=hyper.epsilon_start,
                                     end=hyper.epsilon_end,
                                     decay_fraction=hyper.epsilon_decay_fraction)
            agent.set_epsilon(epsilon)
            env = JunctionEnv(replace(config, seed=derive_seed(seed, episode)))
            outcome, total, losses = run_episode(env, agent, train=True)
            records.append(TrainingRecord(
                episode=episode, outcome=outcome, total_reward=total,
                epsilon=epsilon,
                loss=float(np.mean(losses)) if losses else None))
            if checkpoint_path and checkpoint_every and \
                    (episode + 1) % checkpoint_every == 0:
                save_agent(checkpoint_path, agent, config)
            if progress is not None:
                progress(records[-1])
    except Exception:
        if checkpoint_path and records:
            save_agent(checkpoint_path, agent, config)
        raise
    if checkpoint_path and episodes > 0:
        save_agent(checkpoint_path, agent, config)
    return agent, records


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def _network_meta(agent) -> dict:
    if isinstance(agent, DQNAgent) and agent.kind.startswith("attn"):
        net = agent.q_network
        return {"width": net.width, "heads": net.attention.head_count,
                "d_k": net.attention.d_k, "query_mode": net.query_mode}
    return {}


def agent_tensors(agent) -> dict[str, np.ndarray]:
    if isinstance(agent, DQNAgent):
        out = {f"q.{k}": v for k, v in agent.q_network.parameters().items()}
        out.update({f"target.{k}": v
                    for k, v in agent.target_network.parameters().items()})
        out.update({f"opt.{k}": v for k, v in agent.optimizer.state_tensors().items()})
        return out
    if isinstance(agent, A2CAgent):
        out = {f"policy.{k}": v for k, v in agent.policy_net.parameters().items()}
        out.update({f"value.{k}": v for k, v in agent.value_net.parameters().items()})
        out.update({f"popt.{k}": v
                    for k, v in agent.policy_optimizer.state_tensors().items()})
        out.update({f"vopt.{k}": v
                    for k, v in agent.value_optimizer.state_tensors().items()})
        return out
    if isinstance(agent, PPOAgent):
        out = {f"actor.{k}": v for k, v in agent.actor.parameters().items()}
        out.update({f"critic.{k}": v for k, v in agent.critic.parameters().items()})
        out.update({f"aopt.{k}": v
                    for k, v in agent.actor_optimizer.state_tensors().items()})
        out.update({f"copt.{k}": v
                    for k, v in agent.critic_optimizer.state_tensors().items()})
        return out
    raise ContractError(f"cannot serialize agent {agent!r}")


def save_agent(path: str | Path, agent, config: ScenarioConfig) -> None:
    meta = {
        "agent": {
            "kind": agent.kind,
            "gamma": agent.gamma,
            "action_count": agent.action_count,
            "epsilon": getattr(agent, "epsilon", 0.0),
            "update_count": getattr(agent, "update_count", 0),
        },
        "scenario": {
            "kind": config.kind,
            "V": config.observed_vehicle_limit,
            "v_max": config.v_max,
            "spawn_count": config.spawn_count,
        },
        "network": _network_meta(agent),
    }
    save_checkpoint(path, meta, agent_tensors(agent))


def _to_float64(tensors: dict[str, np.ndarray], prefix: str) -> dict[str, np.ndarray]:
    plen = len(prefix)
    return {k[plen:]: v.astype(np.float64) for k, v in tensors.items()
            if k.startswith(prefix)}


def load_agent(path: str | Path) -> tuple[object, dict]:
    meta, tensors = load_checkpoint(path)
    info = meta.get("agent", {})
    scen = meta.get("scenario", {})
    kind = info.get("kind")
    if kind not in AGENT_KINDS:
        raise CheckpointError(f"{path}: unknown agent kind {kind!r}")
    config = ScenarioConfig.defaults(scen["kind"])
    config = replace(config, observed_vehicle_limit=scen.get("V", 15))
    agent = create_agent(kind, config, seed=0,
                         hyper=Hyperparameters(gamma=info.get("gamma")))
    if isinstance(agent, DQNAgent):
        agent.q_network.load_parameters(_to_float64(tensors, "q."))
        agent.target_network.load_parameters(_to_float64(tensors, "target."))
        agent.epsilon = info.get("epsilon", 0.0)
        agent.update_count = info.get("update_count", 0)
    elif isinstance(agent, A2CAgent):
        agent.policy_net.load_parameters(_to_float64(tensors, "policy."))
        agent.value_net.load_parameters(_to_float64(tensors, "value."))
    elif isinstance(agent, PPOAgent):
        agent.actor.load_parameters(_to_float64(tensors, "actor."))
        agent.snapshot.copy_parameters_from(agent.actor)
        agent.critic.load_parameters(_to_float64(tensors, "critic."))
    return agent, meta
