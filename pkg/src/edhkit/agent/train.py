"""Teacher-forced training loop for the action-prediction agent."""

import random
from dataclasses import dataclass

import torch

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .data import build_sample
from .model import EDHAgent, ModelConfig, compute_loss


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 2
    lr: float = 1e-5
    lr_final_factor: float = 0.1  # linear decay endpoint
    weight_decay: float = 0.33
    include_history: bool = True
    w_action: float = 1.0
    w_object: float = 1.0
    seed: int = 0


def vocab_hashes(token_vocab, action_vocab, object_vocab):
    return {
        "tokens": token_vocab.sha256(),
        "actions": action_vocab.sha256(),
        "objects": object_vocab.sha256(),
    }


def load_pretrained_text_encoder(model, path, token_hash):
    """Initialize the agent text encoder from a synthetic-simplification
    checkpoint. Refuses on vocab-hash mismatch."""
    payload = load_checkpoint(
        path, expected_kind="text_encoder", expected_vocab_hashes={"tokens": token_hash}
    )
    try:
        model.text_encoder.load_state_dict(payload["state_dict"])
    except RuntimeError as e:
        raise CheckpointError(f"text encoder shapes incompatible: {e}") from e


def make_agent(model_config, seed=0, pretrained_encoder=None, token_hash=None):
    torch.manual_seed(seed)
    model = EDHAgent(model_config)
    if model_config.init_mode == "synthetic_pretrained":
        if pretrained_encoder is None:
            raise CheckpointError("init_mode=synthetic_pretrained needs a checkpoint path")
        load_pretrained_text_encoder(model, pretrained_encoder, token_hash)
    return model


def train_agent(
    instances,
    token_vocab,
    action_vocab,
    object_vocab,
    model_config: ModelConfig,
    train_config: TrainConfig,
    pretrained_encoder=None,
):
    """Train on EDH instances; returns (model, per-epoch loss curve)."""
    if not instances:
        raise ValueError("empty instance list")
    hashes = vocab_hashes(token_vocab, action_vocab, object_vocab)
    model = make_agent(
        model_config,
        seed=train_config.seed,
        pretrained_encoder=pretrained_encoder,
        token_hash=hashes["tokens"],
    )
    samples = [
        build_sample(inst, token_vocab, action_vocab, object_vocab, model_config)
        for inst in instances
    ]
    opt = torch.optim.AdamW(
        model.parameters(), lr=train_config.lr, weight_decay=train_config.weight_decay
    )
    def lr_at(epoch):
        if train_config.epochs <= 1:
            return 1.0
        frac = epoch / (train_config.epochs - 1)
        return 1.0 - (1.0 - train_config.lr_final_factor) * frac

    sched = torch.optim.lr_scheduler.LambdaLR(opt, lr_at)
    rng = random.Random(train_config.seed)
    curve = []
    model.train()
    for _epoch in range(train_config.epochs):
        order = list(range(len(samples)))
        rng.shuffle(order)
        total = 0.0
        opt.zero_grad()
        pending = 0
        for pos, idx in enumerate(order):
            s = samples[idx]
            action_logits, object_logits = model(
                s.token_ids, s.frames, s.prev_action_flat
            )
            loss = compute_loss(
                action_logits,
                object_logits,
                s.action_targets,
                s.object_targets,
                s.interaction_mask,
                s.future_mask,
                include_history=train_config.include_history,
                w_action=train_config.w_action,
                w_object=train_config.w_object,
            )
            (loss / train_config.batch_size).backward()
            pending += 1
            total += float(loss.item())
            if pending == train_config.batch_size or pos == len(order) - 1:
                opt.step()
                opt.zero_grad()
                pending = 0
        sched.step()
        curve.append(total / len(samples))
    model.eval()
    return model, curve


def save_agent(path, model, token_vocab, action_vocab, object_vocab, extra=None):
    save_checkpoint(
        path,
        "agent",
        model.config,
        vocab_hashes(token_vocab, action_vocab, object_vocab),
        model.state_dict(),
        extra=extra,
    )


def load_agent(path, token_vocab, action_vocab, object_vocab):
    payload = load_checkpoint(
        path,
        expected_kind="agent",
        expected_vocab_hashes=vocab_hashes(token_vocab, action_vocab, object_vocab),
    )
    config = ModelConfig(**payload["config"])
    model = EDHAgent(config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
