"""Proximal policy optimization with the clipped surrogate objective."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError
from ..nn import Adam, MlpNetwork
from .policy import entropy_grad_logits, log_prob_of, policy_probs, sample_action


@dataclass
class PpoBatch:
    """One collected rollout: observations, taken actions, n-step returns and
    advantages, and the behaviour policy's log-probabilities."""

    states: np.ndarray
    actions: np.ndarray
    returns: np.ndarray
    advantages: np.ndarray
    log_probs_old: np.ndarray


def ppo_ratio(actor, snapshot, states: np.ndarray,
              actions: np.ndarray) -> np.ndarray:
    """Elementwise probability ratio pi_theta(a|s) / pi_theta_old(a|s)."""
    new_logp = log_prob_of(policy_probs(actor.forward(states)), actions)
    old_probs = policy_probs(snapshot.forward(states))
    old_picked = old_probs[np.arange(len(actions)), actions]
    if np.any(old_picked <= 0.0):
        raise ContractError("snapshot assigns zero probability to a taken action")
    return np.exp(new_logp - np.log(old_picked))


def ppo_loss(ratios: np.ndarray, advantages: np.ndarray,
             clip_epsilon: float) -> float:
    """Negative mean clipped surrogate: -E[min(r*A, clip(r, 1±eps)*A)]."""
    clipped = np.clip(ratios, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    return float(-np.mean(np.minimum(ratios * advantages,
                                     clipped * advantages)))


def clipped_surrogate_grad(ratios: np.ndarray, advantages: np.ndarray,
                           clip_epsilon: float) -> np.ndarray:
    """d(loss)/d(ratio) per item: -A/n where the unclipped branch is active
    (or the clip is inactive), 0 where the clip saturates the min."""
    n = len(ratios)
    clipped = np.clip(ratios, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    unclipped_term = ratios * advantages
    clipped_term = clipped * advantages
    take_unclipped = unclipped_term <= clipped_term
    inside_band = (ratios > 1.0 - clip_epsilon) & (ratios < 1.0 + clip_epsilon)
    active = take_unclipped | inside_band
    return np.where(active, -advantages / n, 0.0)


class PPOAgent:
    """Actor/critic MLPs; collects a fixed-size rollout, then runs several
    epochs of clipped-surrogate updates against the frozen snapshot."""

    kind = "ppo"

    def __init__(self, observation_shape: tuple[int, int], action_count: int,
                 seed: int, gamma: float, learning_rate: float = 5e-4,
                 clip_epsilon: float = 0.2, epochs: int = 4,
                 rollout_length: int = 256, entropy_coef: float = 0.01):
        self.action_count = action_count
        self.gamma = gamma
        self.clip_epsilon = clip_epsilon
        self.epochs = epochs
        self.rollout_length = rollout_length
        self.entropy_coef = entropy_coef
        self.actor = MlpNetwork(observation_shape, action_count,
                                np.random.default_rng([seed, 0]))
        self.snapshot = MlpNetwork(observation_shape, action_count,
                                   np.random.default_rng([seed, 0]))
        self.snapshot.copy_parameters_from(self.actor)
        self.critic = MlpNetwork(observation_shape, 1,
                                 np.random.default_rng([seed, 2]))
        self.actor_optimizer = Adam(self.actor.parameters(), lr=learning_rate)
        self.critic_optimizer = Adam(self.critic.parameters(), lr=learning_rate)
        self.rng = np.random.default_rng([seed, 1])
        self._states: list[np.ndarray] = []
        self._actions: list[int] = []
        self._rewards: list[float] = []
        self._dones: list[bool] = []
        self._log_probs: list[float] = []
        self._last_next: np.ndarray | None = None

    def set_epsilon(self, epsilon: float) -> None:
        pass

    def act_train(self, obs: np.ndarray) -> int:
        probs = policy_probs(self.actor.forward(obs)[0])
        action = sample_action(probs, self.rng)
        self._pending_log_prob = float(np.log(max(probs[action], 1e-12)))
        return action

    def act_greedy(self, obs: np.ndarray) -> int:
        probs = policy_probs(self.actor.forward(obs)[0])
        return int(np.argmax(probs))

    def attention_weights(self, obs: np.ndarray) -> None:
        return None

    # -- rollout collection ------------------------------------------------------

    def observe(self, obs, action, reward, next_obs, done) -> float | None:
        self._states.append(obs)
        self._actions.append(int(action))
        self._rewards.append(float(reward))
        self._dones.append(bool(done))
        self._log_probs.append(self._pending_log_prob)
        self._last_next = next_obs
        if len(self._states) >= self.rollout_length:
            return self._update()
        return None

    def finish_episode(self) -> None:
        pass  # rollouts span episodes; nothing to flush per episode

    def _compute_returns(self) -> np.ndarray:
        """Per-segment n-step returns; truncation bootstraps with the critic."""
        n = len(self._states)
        returns = np.empty(n)
        if self._dones[-1] or self._last_next is None:
            acc = 0.0
        else:
            acc = float(self.critic.forward(self._last_next[None])[0, 0])
        for i in reversed(range(n)):
            if self._dones[i]:
                acc = 0.0
            acc = self._rewards[i] + self.gamma * acc
            returns[i] = acc
        return returns

    def collect_batch(self) -> PpoBatch:
        states = np.stack(self._states)
        actions = np.array(self._actions)
        returns = self._compute_returns()
        values = self.critic.forward(states)[:, 0]
        advantages = returns - values
        return PpoBatch(states, actions, returns, advantages,
                        np.array(self._log_probs))

    def _update(self) -> float:
        batch = self.collect_batch()
        self.snapshot.copy_parameters_from(self.actor)
        n = len(batch.actions)
        last_loss = 0.0
        for _ in range(self.epochs):
            logits = self.actor.forward(batch.states)
            probs = policy_probs(logits)
            new_logp = log_prob_of(probs, batch.actions)
            ratios = np.exp(new_logp - batch.log_probs_old)
            last_loss = ppo_loss(ratios, batch.advantages, self.clip_epsilon)
            d_ratio = clipped_surrogate_grad(ratios, batch.advantages,
                                             self.clip_epsilon)
            # d(ratio)/d(logp_new) = ratio; d(logp)/d(logits) = onehot - probs
            d_logp = d_ratio * ratios
            one_hot = np.zeros_like(probs)
            one_hot[np.arange(n), batch.actions] = 1.0
            d_logits = d_logp[:, None] * (one_hot - probs)
            d_logits -= self.entropy_coef * entropy_grad_logits(probs) / n
            self.actor.zero_gradients()
            self.actor.backward(d_logits)
            self.actor_optimizer.step(self.actor.gradients())

            values = self.critic.forward(batch.states)[:, 0]
            errors = values - batch.returns
            self.critic.zero_gradients()
            self.critic.backward((2.0 * errors / n)[:, None])
            self.critic_optimizer.step(self.critic.gradients())
        self._states.clear()
        self._actions.clear()
        self._rewards.clear()
        self._dones.clear()
        self._log_probs.clear()
        self._last_next = None
        return last_loss
