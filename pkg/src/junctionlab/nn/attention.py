"""Scaled dot-product attention and the two-head block, forward and backward.

`attention_forward`/`attention_backward` work on plain matrices (and on
leading batch dimensions via broadcasting matmul); `MultiHeadAttention` is
the network block: per-head query/key/value projections over vehicle
embeddings, presence masking, head concatenation, and an output projection.
All contractions are reshaped matrix products so BLAS does the work.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError
from .layers import fan_in_uniform

MASK_LOGIT = -1e30  # exp underflows to exactly 0 after max-shift


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def attention_forward(q: np.ndarray, k: np.ndarray, v: np.ndarray,
                      mask: np.ndarray | None = None,
                      ) -> tuple[np.ndarray, np.ndarray, tuple]:
    """softmax(q k^T / sqrt(d_k)) v.

    Shapes: q (..., Nq, d_k), k (..., Nk, d_k), v (..., Nk, d_v); an optional
    additive mask broadcastable to the logits (..., Nq, Nk).  Returns
    (output, weights, cache); weights rows sum to 1.
    """
    d_k = q.shape[-1]
    if d_k == 0:
        raise ContractError("d_k must be positive")
    if k.shape[-1] != d_k or k.shape[-2] != v.shape[-2]:
        raise ContractError(
            f"incompatible attention shapes q{q.shape} k{k.shape} v{v.shape}")
    logits = (q @ np.swapaxes(k, -1, -2)) / np.sqrt(d_k)
    if mask is not None:
        logits = logits + mask
    weights = softmax(logits, axis=-1)
    out = weights @ v
    return out, weights, (q, k, v, weights)


def attention_backward(d_out: np.ndarray, cache: tuple,
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of attention_forward w.r.t. (q, k, v) given d(output)."""
    q, k, v, weights = cache
    d_k = q.shape[-1]
    d_v = np.swapaxes(weights, -1, -2) @ d_out
    d_weights = d_out @ np.swapaxes(v, -1, -2)
    # softmax backward per row: w * (g - sum(g*w))
    inner = (d_weights * weights).sum(axis=-1, keepdims=True)
    d_logits = weights * (d_weights - inner)
    scale = 1.0 / np.sqrt(d_k)
    d_q = (d_logits @ k) * scale
    d_kk = (np.swapaxes(d_logits, -1, -2) @ q) * scale
    return d_q, d_kk, d_v


class MultiHeadAttention:
    """Two-head attention over vehicle embeddings.

    Single-query mode attends with the ego row only; multi-query mode emits a
    query per vehicle and reduces the per-vehicle outputs back to one ego
    pathway embedding by averaging over present rows.  Head outputs are
    concatenated and linearly transformed.  Absent vehicles (presence 0) are
    masked out of keys and values.
    """

    def __init__(self, width: int, head_count: int, d_k: int,
                 rng: np.random.Generator, query_mode: str = "single"):
        if head_count * d_k != width:
            raise ContractError(
                f"head_count*d_k must equal width: {head_count}*{d_k} != {width}")
        if query_mode not in ("single", "multi"):
            raise ContractError(f"unknown query_mode {query_mode!r}")
        self.width = width
        self.head_count = head_count
        self.d_k = d_k
        self.query_mode = query_mode
        # per-head projections stacked: (H, d_k, width); bias-free
        self.w_query = fan_in_uniform(rng, (head_count, d_k, width), width)
        self.w_key = fan_in_uniform(rng, (head_count, d_k, width), width)
        self.w_value = fan_in_uniform(rng, (head_count, d_k, width), width)
        self.w_out = fan_in_uniform(rng, (width, width), width)
        self.grad_w_query = np.zeros_like(self.w_query)
        self.grad_w_key = np.zeros_like(self.w_key)
        self.grad_w_value = np.zeros_like(self.w_value)
        self.grad_w_out = np.zeros_like(self.w_out)
        self._cache: dict | None = None

    def _project_all(self, flat: np.ndarray, weight: np.ndarray,
                     batch: int, count: int) -> np.ndarray:
        """(B*V, W) x (H, d, W) -> (B, H, V, d) via one matrix product."""
        proj = flat @ weight.reshape(self.width, self.width).T
        return proj.reshape(batch, count, self.head_count,
                            self.d_k).transpose(0, 2, 1, 3)

    def forward(self, embeddings: np.ndarray, presence: np.ndarray,
                ) -> tuple[np.ndarray, np.ndarray]:
        """embeddings (B, V, width), presence (B, V) with row 0 the ego.

        Returns (ego pathway output (B, width), ego-query attention weights
        (B, H, V) for visualization)."""
        batch, count, _ = embeddings.shape
        flat = embeddings.reshape(batch * count, self.width)
        k = self._project_all(flat, self.w_key, batch, count)
        v = self._project_all(flat, self.w_value, batch, count)
        mask = np.where(presence > 0.0, 0.0, MASK_LOGIT)[:, None, None, :]
        if self.query_mode == "single":
            q_flat = embeddings[:, 0] @ self.w_query.reshape(self.width,
                                                             self.width).T
            q = q_flat.reshape(batch, self.head_count, 1, self.d_k)
        else:
            q = self._project_all(flat, self.w_query, batch, count)
        att, weights, cache = attention_forward(q, k, v, mask=mask)
        if self.query_mode == "single":
            heads = att[:, :, 0, :]                       # (B, H, d_k)
            ego_weights = weights[:, :, 0, :]
        else:
            present = presence[:, None, :, None]
            n_present = presence.sum(axis=1)[:, None, None]
            heads = (att * present).sum(axis=2) / n_present
            ego_weights = weights[:, :, 0, :]
        concat = heads.reshape(batch, self.width)          # heads side by side
        out = concat @ self.w_out.T
        self._cache = {"embeddings": embeddings, "presence": presence,
                       "attention": cache, "concat": concat}
        return out, ego_weights

    def backward(self, d_out: np.ndarray) -> np.ndarray:
        """d_out (B, width) -> gradient w.r.t. the input embeddings."""
        cache = self._cache
        if cache is None:
            raise ContractError("backward called before forward")
        embeddings = cache["embeddings"]
        presence = cache["presence"]
        batch, count, _ = embeddings.shape
        flat = embeddings.reshape(batch * count, self.width)
        self.grad_w_out += d_out.T @ cache["concat"]
        d_concat = d_out @ self.w_out
        d_heads = d_concat.reshape(batch, self.head_count, self.d_k)
        if self.query_mode == "single":
            d_att = np.zeros((batch, self.head_count, 1, self.d_k))
            d_att[:, :, 0, :] = d_heads
        else:
            present = presence[:, None, :, None]
            n_present = presence.sum(axis=1)[:, None, None, None]
            d_att = d_heads[:, :, None, :] * present / n_present[:, :, 0:1, :]
        d_q, d_k, d_v = attention_backward(d_att, cache["attention"])

        def fold(d_proj: np.ndarray) -> np.ndarray:
            # (B, H, V, d) -> (B*V, H*d)
            return d_proj.transpose(0, 2, 1, 3).reshape(batch * count,
                                                        self.width)

        d_k2, d_v2 = fold(d_k), fold(d_v)
        w_key2 = self.w_key.reshape(self.width, self.width)
        w_value2 = self.w_value.reshape(self.width, self.width)
        d_flat = d_k2 @ w_key2 + d_v2 @ w_value2
        self.grad_w_key += (d_k2.T @ flat).reshape(self.w_key.shape)
        self.grad_w_value += (d_v2.T @ flat).reshape(self.w_value.shape)
        w_query2 = self.w_query.reshape(self.width, self.width)
        if self.query_mode == "single":
            d_ego_q = d_q[:, :, 0, :].reshape(batch, self.width)
            d_emb = d_flat.reshape(batch, count, self.width)
            d_emb[:, 0, :] += d_ego_q @ w_query2
            self.grad_w_query += (d_ego_q.T @ embeddings[:, 0]
                                  ).reshape(self.w_query.shape)
        else:
            d_q2 = fold(d_q)
            d_flat += d_q2 @ w_query2
            self.grad_w_query += (d_q2.T @ flat).reshape(self.w_query.shape)
            d_emb = d_flat.reshape(batch, count, self.width)
        return d_emb

    def parameters(self) -> dict[str, np.ndarray]:
        return {"w_query": self.w_query, "w_key": self.w_key,
                "w_value": self.w_value, "w_out": self.w_out}

    def gradients(self) -> dict[str, np.ndarray]:
        return {"w_query": self.grad_w_query, "w_key": self.grad_w_key,
                "w_value": self.grad_w_value, "w_out": self.grad_w_out}
