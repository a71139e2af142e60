"""DQN and attention-DQN: replay-driven TD learning with a frozen target
network synced every 512 update steps."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError
from ..nn import Adam, AttentionQNetwork, MlpNetwork
from .exploration import select_action
from .replay import ReplayMemory, Transition

TARGET_SYNC_PERIOD = 512


def q_forward(network, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    """Uniform view over the two network families: (qvalues, attention|None)."""
    out = network.forward(obs)
    if isinstance(out, tuple):
        return out
    return out, None


def make_q_network(kind: str, observation_shape: tuple[int, int],
                   action_count: int, rng: np.random.Generator):
    if kind == "dqn":
        return MlpNetwork(observation_shape, action_count, rng)
    if kind == "attn-dqn-single":
        return AttentionQNetwork(observation_shape, action_count, rng,
                                 query_mode="single")
    if kind == "attn-dqn-multi":
        return AttentionQNetwork(observation_shape, action_count, rng,
                                 query_mode="multi")
    raise ContractError(f"unknown DQN network kind {kind!r}")


def td_targets(batch: list[Transition], target_network, gamma: float) -> np.ndarray:
    """r + gamma * max_a' Q(s', a'; frozen), with the bootstrap dropped on
    terminal transitions."""
    if not batch:
        raise ContractError("empty batch")
    rewards = np.array([t.reward for t in batch])
    dones = np.array([t.done for t in batch])
    next_states = np.stack([t.next_state for t in batch])
    next_q, _ = q_forward(target_network, next_states)
    targets = rewards.copy()
    live = ~dones
    targets[live] += gamma * next_q.max(axis=1)[live]
    return targets


def sync_target(agent: "DQNAgent") -> None:
    agent.target_network.copy_parameters_from(agent.q_network)


def dqn_update(agent: "DQNAgent", batch: list[Transition]) -> float | None:
    """Mean squared TD error on the taken actions, one optimizer step.

    Gradients flow only through Q(s, a); the targets come from the frozen
    network.  A non-finite loss aborts the update and raises the flag.
    """
    targets = td_targets(batch, agent.target_network, agent.gamma)
    states = np.stack([t.state for t in batch])
    actions = np.array([t.action for t in batch])
    qvalues, _ = q_forward(agent.q_network, states)
    taken = qvalues[np.arange(len(batch)), actions]
    errors = taken - targets
    loss = float(np.mean(errors ** 2))
    if not np.isfinite(loss):
        agent.aborted_updates += 1
        return None
    d_q = np.zeros_like(qvalues)
    d_q[np.arange(len(batch)), actions] = 2.0 * errors / len(batch)
    agent.q_network.zero_gradients()
    agent.q_network.backward(d_q)
    agent.optimizer.step(agent.q_network.gradients())
    return loss


class DQNAgent:
    """Epsilon-greedy TD learner over either Q-network family."""

    def __init__(self, kind: str, observation_shape: tuple[int, int],
                 action_count: int, seed: int, gamma: float,
                 learning_rate: float = 5e-4, replay_capacity: int = 15_000,
                 batch_size: int = 64,
                 target_sync_period: int = TARGET_SYNC_PERIOD):
        if not 0.0 <= gamma < 1.0:
            raise ContractError(f"gamma must be in [0, 1), got {gamma}")
        self.kind = kind
        self.action_count = action_count
        self.gamma = gamma
        self.batch_size = batch_size
        self.target_sync_period = target_sync_period
        init_rng = np.random.default_rng([seed, 0])
        self.q_network = make_q_network(kind, observation_shape, action_count,
                                        init_rng)
        self.target_network = make_q_network(kind, observation_shape,
                                             action_count,
                                             np.random.default_rng([seed, 0]))
        sync_target(self)
        self.optimizer = Adam(self.q_network.parameters(), lr=learning_rate)
        self.replay = ReplayMemory(replay_capacity)
        self.rng = np.random.default_rng([seed, 1])
        self.epsilon = 1.0
        self.update_count = 0
        self.aborted_updates = 0

    # -- acting ----------------------------------------------------------------

    def set_epsilon(self, epsilon: float) -> None:
        self.epsilon = epsilon

    def act_train(self, obs: np.ndarray) -> int:
        if self.epsilon > 0.0 and self.rng.random() < self.epsilon:
            return int(self.rng.integers(self.action_count))
        qvalues, _ = q_forward(self.q_network, obs)
        return select_action(qvalues[0], 0.0, self.rng)

    def act_greedy(self, obs: np.ndarray) -> int:
        qvalues, _ = q_forward(self.q_network, obs)
        return select_action(qvalues[0], 0.0, self.rng)

    def attention_weights(self, obs: np.ndarray) -> np.ndarray | None:
        _, weights = q_forward(self.q_network, obs)
        return None if weights is None else weights[0]

    # -- learning ----------------------------------------------------------------

    def observe(self, obs, action, reward, next_obs, done) -> float | None:
        self.replay.push(Transition(obs, int(action), float(reward), next_obs,
                                    bool(done)))
        if len(self.replay) < self.batch_size:
            return None
        batch = self.replay.sample(self.batch_size, self.rng)
        loss = dqn_update(self, batch)
        self.update_count += 1
        if self.update_count % self.target_sync_period == 0:
            sync_target(self)
        return loss

    def finish_episode(self) -> None:
        pass
