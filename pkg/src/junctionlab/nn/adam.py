"""Bias-corrected adaptive-moment optimizer over named parameter dicts."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError


class Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float = 5e-4,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self.skipped_updates = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads: dict[str, np.ndarray]) -> bool:
        """One update; returns False (and skips, counting it) when any
        gradient is non-finite."""
        if set(grads) != set(self.params):
            raise ContractError("gradient names do not match parameters")
        for g in grads.values():
            if not np.all(np.isfinite(g)):
                self.skipped_updates += 1
                return False
        self.step_count += 1
        t = self.step_count
        correct1 = 1.0 - self.beta1 ** t
        correct2 = 1.0 - self.beta2 ** t
        for name, param in self.params.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * np.square(g)
            m_hat = m / correct1
            v_hat = v / correct2
            param -= self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)
        return True

    def state_tensors(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for name in self.params:
            out[f"adam.m.{name}"] = self.m[name]
            out[f"adam.v.{name}"] = self.v[name]
        return out

    def load_state(self, tensors: dict[str, np.ndarray], step_count: int) -> None:
        for name in self.params:
            self.m[name][...] = tensors[f"adam.m.{name}"]
            self.v[name][...] = tensors[f"adam.v.{name}"]
        self.step_count = int(step_count)
