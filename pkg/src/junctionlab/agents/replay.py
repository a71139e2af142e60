"""Experience transitions and the uniform replay memory."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


class ReplayMemory:
    """Fixed-capacity ring buffer with uniform random sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ContractError("replay capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._cursor = 0

    def push(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._cursor] = transition
        self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self._items):
            raise ContractError(
                f"cannot sample {batch_size} of {len(self._items)} items")
        indices = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[int(i)] for i in indices]

    def __len__(self) -> int:
        return len(self._items)
