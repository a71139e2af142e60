"""Epsilon-greedy action selection and the linear decay schedule."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError

EPSILON_START = 1.0
EPSILON_END = 0.05
EPSILON_DECAY_FRACTION = 0.5   # anneal over the first half of training


def select_action(qvalues: np.ndarray, epsilon: float,
                  rng: np.random.Generator) -> int:
    """Uniform with probability epsilon, else argmax (lowest index on ties).

    At epsilon 0 the generator is never consumed, so greedy evaluation stays
    byte-deterministic.
    """
    qvalues = np.asarray(qvalues).reshape(-1)
    if qvalues.size == 0:
        raise ContractError("empty action-value vector")
    if not 0.0 <= epsilon <= 1.0:
        raise ContractError(f"epsilon must be in [0, 1], got {epsilon}")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(qvalues.size))
    return int(np.argmax(qvalues))


def linear_epsilon(episode: int, total_episodes: int,
                   start: float = EPSILON_START, end: float = EPSILON_END,
                   decay_fraction: float = EPSILON_DECAY_FRACTION) -> float:
    """Linear anneal from start to end over the first decay_fraction of
    training, constant afterwards."""
    if total_episodes <= 0:
        return end
    horizon = max(1.0, decay_fraction * total_episodes)
    frac = min(episode / horizon, 1.0)
    return start + (end - start) * frac
