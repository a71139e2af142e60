"""Attention math: hand-computed oracle, softmax laws, masking, permutation
and scale invariances, and the two query modes."""

import math

import numpy as np
import pytest

from junctionlab.errors import ContractError
from junctionlab.nn import (
    MASK_LOGIT,
    AttentionQNetwork,
    MultiHeadAttention,
    attention_backward,
    attention_forward,
)


def test_single_key_value_row_passthrough():
    q = np.array([[0.3, -0.7]])
    k = np.array([[1.0, 2.0]])
    v = np.array([[5.0, -1.0]])
    out, weights, _ = attention_forward(q, k, v)
    assert np.allclose(weights, 1.0)
    assert np.allclose(out, v)


def test_identical_keys_uniform_weights():
    q = np.array([[1.0, 0.0]])
    k = np.tile([0.4, 0.2], (5, 1))
    v = np.arange(10.0).reshape(5, 2)
    out, weights, _ = attention_forward(q, k, v)
    assert np.allclose(weights, 0.2)
    assert np.allclose(out, v.mean(axis=0))


def test_hand_computed_two_by_two_example():
    # logits (1/sqrt(2), 0); sigma = e^{1/sqrt 2} / (e^{1/sqrt 2} + 1)
    q = np.array([[1.0, 0.0]])
    k = np.eye(2)
    v = np.eye(2)
    out, weights, _ = attention_forward(q, k, v)
    sigma = math.exp(1.0 / math.sqrt(2.0)) / (math.exp(1.0 / math.sqrt(2.0)) + 1.0)
    assert abs(weights[0, 0] - sigma) < 1e-12
    assert abs(weights[0, 1] - (1.0 - sigma)) < 1e-12
    assert abs(out[0, 0] - sigma) < 1e-12
    assert abs(out[0, 1] - (1.0 - sigma)) < 1e-12


def test_weight_rows_sum_to_one_within_1e9():
    rng = np.random.default_rng(0)
    q = rng.normal(size=(6, 4))
    k = rng.normal(size=(9, 4))
    v = rng.normal(size=(9, 3))
    _, weights, _ = attention_forward(q, k, v)
    assert np.max(np.abs(weights.sum(axis=-1) - 1.0)) < 1e-9
    assert np.all((weights >= 0.0) & (weights <= 1.0))


def test_rejects_zero_dk_and_bad_shapes():
    with pytest.raises(ContractError):
        attention_forward(np.zeros((1, 0)), np.zeros((2, 0)), np.zeros((2, 3)))
    with pytest.raises(ContractError):
        attention_forward(np.zeros((1, 4)), np.zeros((2, 3)), np.zeros((2, 3)))


def test_scale_property_exact_with_powers_of_two():
    # q*2 and k/2 leave every q.k product bit-identical, so the weights must
    # be bit-identical too: they depend on q k^T / sqrt(d_k) only
    rng = np.random.default_rng(1)
    q = rng.normal(size=(3, 8))
    k = rng.normal(size=(5, 8))
    v = rng.normal(size=(5, 8))
    _, w1, _ = attention_forward(q, k, v)
    _, w2, _ = attention_forward(q * 2.0, k * 0.5, v)
    assert np.array_equal(w1, w2)


def test_attention_backward_matches_finite_differences():
    rng = np.random.default_rng(2)
    q = rng.normal(size=(3, 4))
    k = rng.normal(size=(6, 4))
    v = rng.normal(size=(6, 4))
    loss_w = rng.normal(size=(3, 4))
    out, _, cache = attention_forward(q, k, v)
    dq, dk, dv = attention_backward(loss_w, cache)

    def loss(q_, k_, v_):
        return float(np.sum(attention_forward(q_, k_, v_)[0] * loss_w))

    eps = 1e-6
    for arr, grad in ((q, dq), (k, dk), (v, dv)):
        flat, gflat = arr.reshape(-1), grad.reshape(-1)
        for idx in range(0, flat.size, 3):
            orig = flat[idx]
            flat[idx] = orig + eps
            up = loss(q, k, v)
            flat[idx] = orig - eps
            down = loss(q, k, v)
            flat[idx] = orig
            numeric = (up - down) / (2 * eps)
            assert abs(numeric - gflat[idx]) < 1e-6 * max(1.0, abs(numeric))


# ---------------------------------------------------------------------------
# multi-head block
# ---------------------------------------------------------------------------

def _block(query_mode="single", width=8, heads=2, seed=0):
    return MultiHeadAttention(width, heads, width // heads,
                              np.random.default_rng(seed), query_mode=query_mode)


def test_block_rejects_mismatched_width():
    with pytest.raises(ContractError):
        MultiHeadAttention(8, 2, 3, np.random.default_rng(0))


def test_single_mode_ego_only_matches_projection_chain():
    block = _block()
    emb = np.random.default_rng(3).normal(size=(1, 1, 8))
    presence = np.ones((1, 1))
    out, weights = block.forward(emb, presence)
    assert np.allclose(weights, 1.0)
    # singleton attention: output = concat_h(v_h(ego)) @ w_out^T
    heads = [emb[0, 0] @ block.w_value[h].T for h in range(2)]
    expected = np.concatenate(heads) @ block.w_out.T
    assert np.allclose(out[0], expected)


def test_block_head_weights_sum_to_one():
    block = _block()
    rng = np.random.default_rng(4)
    emb = rng.normal(size=(3, 6, 8))
    presence = np.ones((3, 6))
    presence[:, 4:] = 0.0
    _, weights = block.forward(emb, presence)
    assert np.allclose(weights.sum(axis=-1), 1.0, atol=1e-9)
    assert np.all(weights[:, :, 4:] == 0.0)  # masked rows draw no attention


def test_single_vs_multi_identical_with_only_ego():
    rng = np.random.default_rng(5)
    emb = rng.normal(size=(2, 4, 8))
    presence = np.zeros((2, 4))
    presence[:, 0] = 1.0
    single = _block("single", seed=9)
    multi = _block("multi", seed=9)
    out_s, w_s = single.forward(emb, presence)
    out_m, w_m = multi.forward(emb, presence)
    assert np.allclose(out_s, out_m, atol=1e-12)
    assert np.allclose(w_s, w_m, atol=1e-12)


def test_multi_mode_differs_with_other_vehicles_present():
    rng = np.random.default_rng(6)
    emb = rng.normal(size=(1, 4, 8))
    presence = np.ones((1, 4))
    single = _block("single", seed=9)
    multi = _block("multi", seed=9)
    out_s, _ = single.forward(emb, presence)
    out_m, _ = multi.forward(emb, presence)
    assert not np.allclose(out_s, out_m)


# ---------------------------------------------------------------------------
# full attention Q-network
# ---------------------------------------------------------------------------

def _obs(rng, vehicles=5, limit=8, features=7):
    obs = np.zeros((limit, features))
    obs[:vehicles] = rng.uniform(-1, 1, size=(vehicles, features))
    obs[:vehicles, 0] = 1.0
    return obs


def test_qnet_all_absent_rows_well_defined():
    net = AttentionQNetwork((8, 7), 3, np.random.default_rng(0))
    obs = np.zeros((8, 7))
    obs[0] = [1.0, 0.1, -0.2, 0.5, 0.0, 1.0, 0.0]
    q, weights = net.forward(obs)
    assert np.all(np.isfinite(q))
    assert weights[0, :, 0] == pytest.approx([1.0, 1.0])  # ego-only attention


def test_qnet_permutation_of_non_ego_rows():
    rng = np.random.default_rng(7)
    net = AttentionQNetwork((8, 7), 5, rng)
    obs = _obs(np.random.default_rng(8))
    q1, _ = net.forward(obs)
    perm = np.concatenate([[0], 1 + np.random.default_rng(9).permutation(7)])
    q2, _ = net.forward(obs[perm])
    assert np.max(np.abs(q1 - q2)) < 1e-12
    assert np.argmax(q1) == np.argmax(q2)


def test_qnet_batched_forward_matches_single():
    rng = np.random.default_rng(10)
    net = AttentionQNetwork((6, 7), 3, rng)
    rows = [_obs(np.random.default_rng(s), vehicles=3, limit=6) for s in range(4)]
    batch_q, _ = net.forward(np.stack(rows))
    for i, row in enumerate(rows):
        single_q, _ = net.forward(row)
        assert np.allclose(batch_q[i], single_q[0], atol=1e-12)


def test_qnet_tiny_hand_computed_forward():
    """Width 2, one head of d_k 2, no hidden layers: the whole pipeline is a
    short chain of 2x2 matrix products recomputed here with plain numpy."""
    net = AttentionQNetwork((2, 7), 2, np.random.default_rng(0), width=2,
                            head_count=1, d_k=2, encoder_hidden=(),
                            head_hidden=())
    w_ego = np.array([[0.1, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
                      [0.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0]])
    w_oth = np.array([[0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
                      [0.2, 0.0, 0.0, 0.4, 0.0, 0.0, 0.0]])
    w_q = np.array([[[1.0, 0.0], [0.0, 1.0]]])
    w_k = np.array([[[0.0, 1.0], [1.0, 0.0]]])
    w_v = np.array([[[1.0, 1.0], [0.0, 1.0]]])
    w_out = np.array([[1.0, 0.0], [1.0, 1.0]])
    w_head = np.array([[1.0, -1.0], [0.5, 0.5]])

    net.ego_encoder.layers[0].weight[...] = w_ego
    net.ego_encoder.layers[0].bias[...] = 0.0
    net.others_encoder.layers[0].weight[...] = w_oth
    net.others_encoder.layers[0].bias[...] = 0.0
    net.attention.w_query[...] = w_q
    net.attention.w_key[...] = w_k
    net.attention.w_value[...] = w_v
    net.attention.w_out[...] = w_out
    net.head.layers[0].weight[...] = w_head
    net.head.layers[0].bias[...] = 0.0

    obs = np.array([[1.0, 0.6, -0.4, 0.2, 0.0, 1.0, 0.0],
                    [1.0, -0.2, 0.8, -0.6, 0.0, 0.0, 1.0]])
    q, weights = net.forward(obs)

    ego = w_ego @ obs[0]
    other = w_oth @ obs[1]
    emb = np.stack([ego, other])
    qv = w_q[0] @ ego
    keys = emb @ w_k[0].T
    vals = emb @ w_v[0].T
    logits = keys @ qv / math.sqrt(2.0)
    e = np.exp(logits - logits.max())
    w = e / e.sum()
    att = w @ vals
    combined = w_out @ att + ego
    mu, var = combined.mean(), combined.var()
    normed = (combined - mu) / math.sqrt(var + 1e-5)
    expected = w_head @ normed

    assert np.allclose(weights[0, 0], w, atol=1e-12)
    assert np.allclose(q[0], expected, atol=1e-12)
