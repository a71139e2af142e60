"""Finite-difference validation of hand-written backward passes.

Works on anything exposing forward / backward / parameters / gradients /
zero_gradients.  The scalar objective is a fixed random weighting of the
network output, so every output component contributes.
"""

from __future__ import annotations

import numpy as np


def _first_output(result):
    return result[0] if isinstance(result, tuple) else result


def grad_check(network, obs: np.ndarray, epsilon: float = 1e-5,
               max_entries_per_tensor: int = 32, seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients.

    Every parameter tensor is checked; within large tensors a seeded random
    subset of ``max_entries_per_tensor`` positions keeps the runtime bounded.
    Run in 64-bit mode only.
    """
    rng = np.random.default_rng(seed)
    out = _first_output(network.forward(obs))
    weights = rng.normal(size=out.shape)

    network.zero_gradients()
    network.forward(obs)
    if hasattr(network, "_loss_backward"):
        network._loss_backward(weights)
    else:
        network.backward(weights)
    analytic = {k: v.copy() for k, v in network.gradients().items()}

    def loss() -> float:
        return float(np.sum(_first_output(network.forward(obs)) * weights))

    worst = 0.0
    for name, param in network.parameters().items():
        flat = param.reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        if flat.size <= max_entries_per_tensor:
            indices = np.arange(flat.size)
        else:
            indices = rng.choice(flat.size, size=max_entries_per_tensor,
                                 replace=False)
        for idx in indices:
            original = flat[idx]
            flat[idx] = original + epsilon
            up = loss()
            flat[idx] = original - epsilon
            down = loss()
            flat[idx] = original
            numeric = (up - down) / (2.0 * epsilon)
            denom = max(abs(numeric), abs(grad_flat[idx]), 1e-8)
            worst = max(worst, abs(numeric - grad_flat[idx]) / denom)
    return worst
