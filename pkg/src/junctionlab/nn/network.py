"""Value / policy networks over the V x 7 junction observation.

AttentionQNetwork follows the ego/others encoder + two-head attention +
residual + LayerNorm + output MLP pipeline; MlpNetwork flattens the
observation through a plain MLP of matched parameter budget and serves as
the baseline Q-network and the actor/critic trunk.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError
from .attention import MultiHeadAttention
from .layers import LayerNorm, Mlp

DEFAULT_WIDTH = 64
DEFAULT_HEADS = 2
DEFAULT_D_K = 32
BASELINE_HIDDEN = (128, 128)


class _ParamMixin:
    """Walks named submodules to expose flat parameter/gradient dicts."""

    def _modules(self) -> list[tuple[str, object]]:
        raise NotImplementedError

    def parameters(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for prefix, module in self._modules():
            for name, arr in module.parameters().items():
                out[f"{prefix}.{name}"] = arr
        return out

    def gradients(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for prefix, module in self._modules():
            for name, arr in module.gradients().items():
                out[f"{prefix}.{name}"] = arr
        return out

    def zero_gradients(self) -> None:
        for grad in self.gradients().values():
            grad[...] = 0.0

    def load_parameters(self, tensors: dict[str, np.ndarray]) -> None:
        params = self.parameters()
        missing = set(params) ^ set(tensors)
        if missing:
            raise ContractError(f"parameter names mismatch: {sorted(missing)}")
        for name, arr in params.items():
            if tensors[name].shape != arr.shape:
                raise ContractError(
                    f"shape mismatch for {name}: {tensors[name].shape} vs {arr.shape}")
            arr[...] = tensors[name]

    def copy_parameters_from(self, other: "_ParamMixin") -> None:
        self.load_parameters(other.parameters())


class MlpNetwork(_ParamMixin):
    """Flattened-observation MLP: (B, V, F) or (B, D) -> (B, out)."""

    def __init__(self, observation_shape: tuple[int, int], out_dim: int,
                 rng: np.random.Generator,
                 hidden: tuple[int, ...] = BASELINE_HIDDEN):
        self.observation_shape = tuple(observation_shape)
        in_dim = observation_shape[0] * observation_shape[1]
        self.out_dim = out_dim
        self.mlp = Mlp(in_dim, hidden, out_dim, rng)
        self._batch_shape: tuple[int, ...] | None = None

    def forward(self, obs: np.ndarray) -> np.ndarray:
        v, f = self.observation_shape
        if obs.ndim == 2 and obs.shape == (v, f):
            obs = obs[None]
        if obs.ndim != 3 or obs.shape[1:] != (v, f):
            raise ContractError(f"expected (B, {v}, {f}) observations, got {obs.shape}")
        self._batch_shape = obs.shape[:1]
        return self.mlp.forward(obs.reshape(obs.shape[0], -1))

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        dx = self.mlp.backward(d_out)
        v, f = self.observation_shape
        return dx.reshape(self._batch_shape[0], v, f)

    def _modules(self) -> list[tuple[str, object]]:
        return [(f"mlp.{name}", mod) for name, mod in self.mlp.named_modules()]


class AttentionQNetwork(_ParamMixin):
    """Ego/others encoders, two-head attention, residual + LayerNorm, Q head.

    forward returns (action values (B, A), ego-query attention weights
    (B, heads, V)); rows of absent vehicles are masked out of keys/values.
    """

    def __init__(self, observation_shape: tuple[int, int], action_count: int,
                 rng: np.random.Generator, width: int = DEFAULT_WIDTH,
                 head_count: int = DEFAULT_HEADS, d_k: int = DEFAULT_D_K,
                 query_mode: str = "single",
                 encoder_hidden: tuple[int, ...] = (64,),
                 head_hidden: tuple[int, ...] = (64,)):
        self.observation_shape = tuple(observation_shape)
        feature_count = observation_shape[1]
        self.action_count = action_count
        self.width = width
        self.query_mode = query_mode
        self.ego_encoder = Mlp(feature_count, encoder_hidden, width, rng)
        self.others_encoder = Mlp(feature_count, encoder_hidden, width, rng)
        self.attention = MultiHeadAttention(width, head_count, d_k, rng,
                                            query_mode=query_mode)
        self.norm = LayerNorm(width)
        self.head = Mlp(width, head_hidden, action_count, rng)
        self._cache: dict | None = None

    def forward(self, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        v, f = self.observation_shape
        if obs.ndim == 2 and obs.shape == (v, f):
            obs = obs[None]
        if obs.ndim != 3 or obs.shape[1:] != (v, f):
            raise ContractError(f"expected (B, {v}, {f}) observations, got {obs.shape}")
        batch = obs.shape[0]
        presence = (obs[:, :, 0] > 0.0).astype(np.float64)
        ego_emb = self.ego_encoder.forward(obs[:, 0, :])
        others = obs[:, 1:, :].reshape(batch * (v - 1), f)
        others_emb = self.others_encoder.forward(others).reshape(batch, v - 1,
                                                                 self.width)
        embeddings = np.concatenate([ego_emb[:, None, :], others_emb], axis=1)
        att_out, weights = self.attention.forward(embeddings, presence)
        combined = att_out + ego_emb
        normed = self.norm.forward(combined)
        qvalues = self.head.forward(normed)
        self._cache = {"batch": batch}
        return qvalues, weights

    def backward(self, d_qvalues: np.ndarray) -> None:
        if self._cache is None:
            raise ContractError("backward called before forward")
        batch = self._cache["batch"]
        v, _ = self.observation_shape
        d_combined = self.norm.backward(self.head.backward(d_qvalues))
        d_emb = self.attention.backward(d_combined)
        d_ego = d_combined + d_emb[:, 0, :]   # residual path + ego row
        d_others = d_emb[:, 1:, :].reshape(batch * (v - 1), self.width)
        self.others_encoder.backward(d_others)
        self.ego_encoder.backward(d_ego)

    def _modules(self) -> list[tuple[str, object]]:
        mods: list[tuple[str, object]] = []
        for name, mod in self.ego_encoder.named_modules():
            mods.append((f"ego.{name}", mod))
        for name, mod in self.others_encoder.named_modules():
            mods.append((f"others.{name}", mod))
        mods.append(("attention", self.attention))
        mods.append(("norm", self.norm))
        for name, mod in self.head.named_modules():
            mods.append((f"head.{name}", mod))
        return mods
