"""Synchronous advantage actor-critic with n-step returns."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError
from ..nn import Adam, MlpNetwork
from .policy import (
    LOG_FLOOR,
    entropy_grad_logits,
    log_prob_of,
    policy_probs,
    sample_action,
)


@dataclass
class Rollout:
    """A short on-policy segment: at most t_max steps or up to a terminal."""

    states: list[np.ndarray] = field(default_factory=list)
    actions: list[int] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    terminal: bool = False
    bootstrap_state: np.ndarray | None = None   # s_{t+k} when not terminal

    def __len__(self) -> int:
        return len(self.states)


def td_error(reward: float, value: float, next_value: float,
             gamma: float, done: bool) -> float:
    """One-step TD error r + gamma*V(s') - V(s); the k=1 advantage."""
    bootstrap = 0.0 if done else gamma * next_value
    return reward + bootstrap - value


def a2c_advantage(rollout: Rollout, gamma: float, value_net) -> np.ndarray:
    """n-step advantages: sum_i gamma^i r_{t+i} + gamma^k V(s_{t+k}) - V(s_t).

    k runs to the rollout end; a terminal tail bootstraps with zero."""
    k = len(rollout)
    if k == 0:
        raise ContractError("empty rollout")
    values = value_net.forward(np.stack(rollout.states))[:, 0]
    if rollout.terminal or rollout.bootstrap_state is None:
        tail = 0.0
    else:
        tail = float(value_net.forward(rollout.bootstrap_state[None])[0, 0])
    returns = np.empty(k)
    acc = tail
    for i in reversed(range(k)):
        acc = rollout.rewards[i] + gamma * acc
        returns[i] = acc
    return returns - values


def a2c_update(agent: "A2CAgent", rollout: Rollout) -> tuple[float, float]:
    """Policy step on -log pi * advantage (advantage held constant), value
    regression on the n-step returns, entropy bonus added."""
    advantages = a2c_advantage(rollout, agent.gamma, agent.value_net)
    states = np.stack(rollout.states)
    actions = np.array(rollout.actions)
    values = agent.value_net.forward(states)[:, 0]
    returns = advantages + values
    n = len(rollout)

    logits = agent.policy_net.forward(states)
    probs = policy_probs(logits)
    log_probs = log_prob_of(probs, actions)
    policy_loss = float(-np.mean(log_probs * advantages))

    one_hot = np.zeros_like(probs)
    one_hot[np.arange(n), actions] = 1.0
    d_logits = (probs - one_hot) * advantages[:, None] / n
    d_logits -= agent.entropy_coef * entropy_grad_logits(probs) / n
    agent.policy_net.zero_gradients()
    agent.policy_net.backward(d_logits)
    agent.policy_optimizer.step(agent.policy_net.gradients())

    errors = values - returns
    value_loss = float(np.mean(errors ** 2))
    agent.value_net.zero_gradients()
    agent.value_net.backward((2.0 * errors / n)[:, None])
    agent.value_optimizer.step(agent.value_net.gradients())
    return policy_loss, value_loss


class A2CAgent:
    """Separate policy and value MLPs updated every t_max actions or at
    episode end."""

    kind = "a2c"

    def __init__(self, observation_shape: tuple[int, int], action_count: int,
                 seed: int, gamma: float, learning_rate: float = 5e-4,
                 t_max: int = 8, entropy_coef: float = 0.01):
        self.action_count = action_count
        self.gamma = gamma
        self.t_max = t_max
        self.entropy_coef = entropy_coef
        self.policy_net = MlpNetwork(observation_shape, action_count,
                                     np.random.default_rng([seed, 0]))
        self.value_net = MlpNetwork(observation_shape, 1,
                                    np.random.default_rng([seed, 2]))
        self.policy_optimizer = Adam(self.policy_net.parameters(),
                                     lr=learning_rate)
        self.value_optimizer = Adam(self.value_net.parameters(),
                                    lr=learning_rate)
        self.rng = np.random.default_rng([seed, 1])
        self._rollout = Rollout()

    def set_epsilon(self, epsilon: float) -> None:
        pass  # stochastic policy, no epsilon schedule

    def act_train(self, obs: np.ndarray) -> int:
        probs = policy_probs(self.policy_net.forward(obs)[0])
        return sample_action(probs, self.rng)

    def act_greedy(self, obs: np.ndarray) -> int:
        probs = policy_probs(self.policy_net.forward(obs)[0])
        return int(np.argmax(probs))

    def attention_weights(self, obs: np.ndarray) -> None:
        return None

    def observe(self, obs, action, reward, next_obs, done) -> float | None:
        self._rollout.states.append(obs)
        self._rollout.actions.append(int(action))
        self._rollout.rewards.append(float(reward))
        if done:
            self._rollout.terminal = True
        else:
            self._rollout.bootstrap_state = next_obs
        if done or len(self._rollout) >= self.t_max:
            policy_loss, value_loss = a2c_update(self, self._rollout)
            self._rollout = Rollout()
            return policy_loss + value_loss
        return None

    def finish_episode(self) -> None:
        if len(self._rollout):
            a2c_update(self, self._rollout)
            self._rollout = Rollout()
