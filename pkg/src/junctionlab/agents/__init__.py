from .replay import ReplayMemory, Transition
from .exploration import linear_epsilon, select_action
from .dqn import TARGET_SYNC_PERIOD, DQNAgent, dqn_update, make_q_network, sync_target, td_targets
from .actor_critic import A2CAgent, Rollout, a2c_advantage, a2c_update, td_error
from .ppo import PpoBatch, PPOAgent, clipped_surrogate_grad, ppo_loss, ppo_ratio
from .training import (
    AGENT_KINDS,
    Hyperparameters,
    TrainingRecord,
    create_agent,
    derive_seed,
    load_agent,
    run_episode,
    save_agent,
    train_loop,
)

__all__ = [
    "ReplayMemory", "Transition",
    "linear_epsilon", "select_action",
    "TARGET_SYNC_PERIOD", "DQNAgent", "dqn_update", "make_q_network",
    "sync_target", "td_targets",
    "A2CAgent", "Rollout", "a2c_advantage", "a2c_update", "td_error",
    "PpoBatch", "PPOAgent", "clipped_surrogate_grad", "ppo_loss", "ppo_ratio",
    "AGENT_KINDS", "Hyperparameters", "TrainingRecord", "create_agent",
    "derive_seed", "load_agent", "run_episode", "save_agent", "train_loop",
]
