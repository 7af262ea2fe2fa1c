from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .data import AgentSample, ConfigError, build_sample
from .model import (
    EDHAgent,
    FrameEncoder,
    ModelConfig,
    build_future_action_mask,
    compute_loss,
    flat_action_index,
    multimodal_mask,
    predict_indices,
)
from .nn import (
    DecoderLayer,
    EncoderLayer,
    FeedForward,
    MultiHeadAttention,
    ShapeMismatch,
    TextEncoder,
    causal_mask,
    cross_modal_attend,
)
from .rollout import ReplaySetupError, Trajectory, restore_initial_state, rollout
from .train import (
    TrainConfig,
    load_agent,
    load_pretrained_text_encoder,
    make_agent,
    save_agent,
    train_agent,
    vocab_hashes,
)
