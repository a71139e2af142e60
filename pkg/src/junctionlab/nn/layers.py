"""Dense layers with explicit forward/backward passes (float64 numpy).

Each layer caches what its backward pass needs, accumulates parameter
gradients into ``grads``, and returns the input gradient.  No autodiff graph:
networks compose these by hand and are validated with finite differences.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError


def fan_in_uniform(rng: np.random.Generator, shape: tuple[int, ...],
                   fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear:
    """Affine map y = x W^T + b with weight shaped (out, in)."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator,
                 bias: bool = True):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = fan_in_uniform(rng, (out_dim, in_dim), in_dim)
        self.bias = fan_in_uniform(rng, (out_dim,), in_dim) if bias else None
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias) if bias else None
        self._x: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.in_dim:
            raise ContractError(
                f"linear expects last dim {self.in_dim}, got {x.shape}")
        self._x = x
        y = x @ self.weight.T
        if self.bias is not None:
            y = y + self.bias
        return y

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x = self._x
        if x is None or dy.shape[-1] != self.out_dim:
            raise ContractError("backward called before forward or with bad shape")
        x2 = x.reshape(-1, self.in_dim)
        dy2 = dy.reshape(-1, self.out_dim)
        self.grad_weight += dy2.T @ x2
        if self.grad_bias is not None:
            self.grad_bias += dy2.sum(axis=0)
        return dy @ self.weight

    def parameters(self) -> dict[str, np.ndarray]:
        out = {"weight": self.weight}
        if self.bias is not None:
            out["bias"] = self.bias
        return out

    def gradients(self) -> dict[str, np.ndarray]:
        out = {"weight": self.grad_weight}
        if self.grad_bias is not None:
            out["bias"] = self.grad_bias
        return out


class ReLU:
    """Elementwise max(0, x); subgradient 0 at exactly 0."""

    def __init__(self) -> None:
        self._mask: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0.0
        return np.where(self._mask, x, 0.0)

    def backward(self, dy: np.ndarray) -> np.ndarray:
        return np.where(self._mask, dy, 0.0)

    def parameters(self) -> dict[str, np.ndarray]:
        return {}

    def gradients(self) -> dict[str, np.ndarray]:
        return {}


class LayerNorm:
    """Per-row normalization to zero mean / unit variance, then gain+offset."""

    def __init__(self, dim: int, epsilon: float = 1e-5):
        if epsilon <= 0.0:
            raise ContractError("layer-norm epsilon must be positive")
        self.dim = dim
        self.epsilon = epsilon
        self.gain = np.ones(dim)
        self.offset = np.zeros(dim)
        self.grad_gain = np.zeros(dim)
        self.grad_offset = np.zeros(dim)
        self._cache: tuple | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.dim:
            raise ContractError(f"layer-norm expects width {self.dim}, got {x.shape}")
        mean = x.mean(axis=-1, keepdims=True)
        var = x.var(axis=-1, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + self.epsilon)
        x_hat = (x - mean) * inv_std
        self._cache = (x_hat, inv_std)
        return x_hat * self.gain + self.offset

    def backward(self, dy: np.ndarray) -> np.ndarray:
        x_hat, inv_std = self._cache
        flat_hat = x_hat.reshape(-1, self.dim)
        flat_dy = dy.reshape(-1, self.dim)
        self.grad_gain += (flat_dy * flat_hat).sum(axis=0)
        self.grad_offset += flat_dy.sum(axis=0)
        d_hat = dy * self.gain
        # d/dx of (x - mean) * inv_std, all per row
        n = self.dim
        term = d_hat - d_hat.mean(axis=-1, keepdims=True) \
            - x_hat * (d_hat * x_hat).mean(axis=-1, keepdims=True)
        return term * inv_std

    def parameters(self) -> dict[str, np.ndarray]:
        return {"gain": self.gain, "offset": self.offset}

    def gradients(self) -> dict[str, np.ndarray]:
        return {"gain": self.grad_gain, "offset": self.grad_offset}


class Mlp:
    """Linear/ReLU stack: hidden layers ReLU-activated, linear output."""

    def __init__(self, in_dim: int, hidden: tuple[int, ...], out_dim: int,
                 rng: np.random.Generator):
        dims = (in_dim,) + tuple(hidden) + (out_dim,)
        self.layers: list[Linear | ReLU] = []
        for i in range(len(dims) - 1):
            self.layers.append(Linear(dims[i], dims[i + 1], rng))
            if i < len(dims) - 2:
                self.layers.append(ReLU())

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, dy: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            dy = layer.backward(dy)
        return dy

    def named_modules(self) -> list[tuple[str, Linear | ReLU]]:
        return [(f"l{i}", layer) for i, layer in enumerate(self.layers)
                if isinstance(layer, Linear)]
