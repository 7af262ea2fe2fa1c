"""Tensorization of EDH instances for agent training."""

from dataclasses import dataclass

import numpy as np
import torch

from ..corpus.vocab import encode_dialog
from ..worldsim import STOP_ACTION, is_interaction
from .model import flat_action_index


class ConfigError(Exception):
    pass


@dataclass
class AgentSample:
    instance_id: str
    token_ids: torch.Tensor  # [M]
    frames: torch.Tensor  # [T, C, 7, 7]
    prev_action_flat: torch.Tensor  # [T]
    action_targets: torch.Tensor  # [T]
    object_targets: torch.Tensor  # [T]
    interaction_mask: torch.Tensor  # [T] bool
    future_mask: torch.Tensor  # [T] bool, steps >= t_i plus the stop step
    n_history: int


def build_sample(instance, token_vocab, action_vocab, object_vocab, config):
    """Full training sequence: history + future actions, Stop appended."""
    steps = list(instance.action_history) + list(instance.future_actions)
    frames = list(instance.image_history) + list(instance.future_observations)
    steps.append({"action": STOP_ACTION, "object_id": None, "object_type": None})
    frames.append(instance.final_observation)
    t = len(steps)
    if t > config.max_steps:
        raise ConfigError(
            f"instance {instance.instance_id} has {t} steps > max_steps {config.max_steps}"
        )
    n_obj = len(object_vocab)
    prev = [config.start_action_index()]
    action_targets, object_targets, inter = [], [], []
    for s in steps[:-1]:
        prev.append(
            flat_action_index(
                action_vocab.encode(s["action"]),
                object_vocab.encode(s["object_type"]),
                n_obj,
            )
        )
    for s in steps:
        action_targets.append(action_vocab.encode(s["action"]))
        interacting = is_interaction(s["action"])
        inter.append(interacting)
        object_targets.append(object_vocab.encode(s["object_type"]) if interacting else 0)
    n_history = len(instance.action_history)
    future = [i >= n_history for i in range(t)]
    return AgentSample(
        instance_id=instance.instance_id,
        token_ids=torch.tensor(
            encode_dialog(instance.dialog_history, token_vocab, config.max_dialog_tokens),
            dtype=torch.long,
        ),
        frames=torch.from_numpy(np.stack(frames).astype(np.float32)),
        prev_action_flat=torch.tensor(prev, dtype=torch.long),
        action_targets=torch.tensor(action_targets, dtype=torch.long),
        object_targets=torch.tensor(object_targets, dtype=torch.long),
        interaction_mask=torch.tensor(inter, dtype=torch.bool),
        future_mask=torch.tensor(future, dtype=torch.bool),
        n_history=n_history,
    )
