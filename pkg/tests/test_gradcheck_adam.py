"""Gradient checking of the full networks, the optimizer, and checkpoints."""

import numpy as np
import pytest

from junctionlab.errors import CheckpointError, ContractError
from junctionlab.nn import (
    Adam,
    AttentionQNetwork,
    MlpNetwork,
    grad_check,
    load_checkpoint,
    save_checkpoint,
)


def _obs_batch(seed, batch=3, limit=8, vehicles=5):
    rng = np.random.default_rng(seed)
    obs = np.zeros((batch, limit, 7))
    obs[:, :vehicles] = rng.uniform(-1, 1, size=(batch, vehicles, 7))
    obs[:, :vehicles, 0] = 1.0
    return obs


def test_gradcheck_baseline_mlp_network():
    net = MlpNetwork((8, 7), 5, np.random.default_rng(0), hidden=(32, 32))
    assert grad_check(net, _obs_batch(1)) < 1e-6


@pytest.mark.parametrize("mode", ["single", "multi"])
def test_gradcheck_full_attention_network(mode):
    net = AttentionQNetwork((8, 7), 5, np.random.default_rng(2), query_mode=mode)
    assert grad_check(net, _obs_batch(3)) < 1e-4


def test_gradcheck_detects_corrupted_backward():
    net = AttentionQNetwork((6, 7), 3, np.random.default_rng(4))

    class Corrupted:
        def __init__(self, inner):
            self.inner = inner

        def forward(self, x):
            return self.inner.forward(x)

        def backward(self, dy):
            out = self.inner.backward(dy)
            self.inner.norm.grad_gain *= 1.5  # deliberate corruption
            return out

        def parameters(self):
            return self.inner.parameters()

        def gradients(self):
            return self.inner.gradients()

        def zero_gradients(self):
            self.inner.zero_gradients()

    assert grad_check(Corrupted(net), _obs_batch(5, limit=6)) > 1e-2


# ---------------------------------------------------------------------------
# adam
# ---------------------------------------------------------------------------

def _params(rng):
    return {"w": rng.normal(size=(4, 3)), "b": rng.normal(size=4)}


def test_adam_zero_gradient_keeps_parameters():
    params = _params(np.random.default_rng(0))
    before = {k: v.copy() for k, v in params.items()}
    opt = Adam(params, lr=0.1)
    assert opt.step({k: np.zeros_like(v) for k, v in params.items()})
    for k in params:
        assert np.array_equal(params[k], before[k])


def test_adam_single_step_magnitude_is_lr():
    # constant gradient g: bias-corrected ratio is 1, so |update| ~= lr
    params = {"w": np.zeros(5)}
    opt = Adam(params, lr=0.01)
    opt.step({"w": np.full(5, 3.7)})
    assert np.allclose(np.abs(params["w"]), 0.01, rtol=1e-6)


def test_adam_two_steps_follow_recurrence():
    params = {"w": np.zeros(3)}
    opt = Adam(params, lr=0.5, beta1=0.9, beta2=0.999, epsilon=1e-8)
    g = np.array([1.0, -2.0, 0.5])
    opt.step({"w": g.copy()})
    opt.step({"w": g.copy()})
    assert opt.step_count == 2
    # closed-form moments after two identical gradients
    m = 0.1 * g + 0.9 * 0.1 * g
    v = 0.001 * g**2 + 0.999 * 0.001 * g**2
    assert np.allclose(opt.m["w"], m)
    assert np.allclose(opt.v["w"], v)


def test_adam_skips_non_finite_gradients():
    params = {"w": np.ones(3)}
    opt = Adam(params, lr=0.1)
    ok = opt.step({"w": np.array([1.0, np.nan, 0.0])})
    assert not ok
    assert opt.skipped_updates == 1
    assert opt.step_count == 0
    assert np.array_equal(params["w"], np.ones(3))


def test_adam_rejects_mismatched_names():
    opt = Adam({"w": np.ones(2)})
    with pytest.raises(ContractError):
        opt.step({"x": np.ones(2)})


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    tensors = {"a.weight": rng.normal(size=(3, 4)).astype(np.float64),
               "b.bias": rng.normal(size=7)}
    meta = {"width": 64, "heads": 2, "d_k": 32, "query_mode": "single",
            "agent": {"kind": "dqn", "gamma": 0.95}}
    path = tmp_path / "net.jlck"
    save_checkpoint(path, meta, tensors)
    got_meta, got = load_checkpoint(path)
    assert got_meta == meta
    for name, arr in tensors.items():
        assert got[name].shape == arr.shape
        assert np.allclose(got[name], arr, atol=1e-6)  # float32 storage


def test_checkpoint_same_bytes_for_same_input(tmp_path):
    tensors = {"w": np.arange(6.0).reshape(2, 3)}
    p1, p2 = tmp_path / "a.jlck", tmp_path / "b.jlck"
    save_checkpoint(p1, {"k": 1}, tensors)
    save_checkpoint(p2, {"k": 1}, tensors)
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_rejects_garbage(tmp_path):
    path = tmp_path / "bad.jlck"
    path.write_bytes(b"not a checkpoint at all")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_checkpoint_rejects_truncation(tmp_path):
    path = tmp_path / "trunc.jlck"
    save_checkpoint(path, {}, {"w": np.ones((10, 10))})
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_network_parameter_roundtrip(tmp_path):
    net = AttentionQNetwork((6, 7), 3, np.random.default_rng(5))
    path = tmp_path / "net.jlck"
    save_checkpoint(path, {"query_mode": "single"}, net.parameters())
    _, tensors = load_checkpoint(path)
    clone = AttentionQNetwork((6, 7), 3, np.random.default_rng(99))
    clone.load_parameters({k: v.astype(np.float64) for k, v in tensors.items()})
    obs = _obs_batch(6, limit=6)
    q1, _ = net.forward(obs)
    q2, _ = clone.forward(obs)
    assert np.allclose(q1, q2, atol=1e-5)  # float32 round-trip noise only
