"""Shared categorical-policy math for the actor-critic agents."""

from __future__ import annotations

import numpy as np

from ..nn import softmax

LOG_FLOOR = 1e-12   # probability clamp inside logs


def policy_probs(logits: np.ndarray) -> np.ndarray:
    return softmax(logits, axis=-1)


def log_prob_of(probs: np.ndarray, actions: np.ndarray) -> np.ndarray:
    picked = probs[np.arange(len(actions)), actions]
    return np.log(np.maximum(picked, LOG_FLOOR))


def sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    return int(min(np.searchsorted(np.cumsum(probs), u), probs.size - 1))


def entropy(probs: np.ndarray) -> np.ndarray:
    logp = np.log(np.maximum(probs, LOG_FLOOR))
    return -(probs * logp).sum(axis=-1)


def entropy_grad_logits(probs: np.ndarray) -> np.ndarray:
    """d(entropy)/d(logits): -p * (log p + H), elementwise per row."""
    logp = np.log(np.maximum(probs, LOG_FLOOR))
    h = -(probs * logp).sum(axis=-1, keepdims=True)
    return -probs * (logp + h)
