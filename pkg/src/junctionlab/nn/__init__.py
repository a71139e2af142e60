from .layers import LayerNorm, Linear, Mlp, ReLU, fan_in_uniform
from .attention import (
    MASK_LOGIT,
    MultiHeadAttention,
    attention_backward,
    attention_forward,
    softmax,
)
from .network import (
    BASELINE_HIDDEN,
    DEFAULT_D_K,
    DEFAULT_HEADS,
    DEFAULT_WIDTH,
    AttentionQNetwork,
    MlpNetwork,
)
from .adam import Adam
from .gradcheck import grad_check
from .checkpoint import FORMAT_VERSION, load_checkpoint, save_checkpoint

__all__ = [
    "LayerNorm", "Linear", "Mlp", "ReLU", "fan_in_uniform",
    "MASK_LOGIT", "MultiHeadAttention", "attention_backward",
    "attention_forward", "softmax",
    "BASELINE_HIDDEN", "DEFAULT_D_K", "DEFAULT_HEADS", "DEFAULT_WIDTH",
    "AttentionQNetwork", "MlpNetwork",
    "Adam", "grad_check",
    "FORMAT_VERSION", "load_checkpoint", "save_checkpoint",
]
