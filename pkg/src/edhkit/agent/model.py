"""Multi-transformer action predictor: modality encoders, cross-modal
attention, causal multimodal encoder, and dual classification heads."""

import math
from dataclasses import dataclass, field

import torch
import torch.nn as nn
import torch.nn.functional as F

from .nn import (
    EncoderLayer,
    MultiHeadAttention,
    ShapeMismatch,
    TextEncoder,
    cross_modal_attend,
)


@dataclass
class ModelConfig:
    n_tokens: int
    n_actions: int
    n_objects: int
    d_model: int = 768
    text_layers: int = 2
    mm_encoder_layers: int = 2
    attention_heads: int = 8
    dropout: float = 0.2
    max_dialog_tokens: int = 64
    max_steps: int = 96
    channels: int = 16
    obs_size: int = 7
    use_cross_attn: bool = True
    lang_only: bool = False
    init_mode: str = "random"  # random | synthetic_pretrained

    def __post_init__(self):
        if self.d_model % self.attention_heads != 0:
            raise ValueError("d_model must be divisible by attention_heads")
        if self.mm_encoder_layers < 1:
            raise ValueError("mm_encoder_layers must be >= 1")

    def flat_action_count(self):
        # (action, optional-object) pairs flattened into one index space,
        # plus one start-of-sequence row at the end.
        return self.n_actions * self.n_objects + 1

    def start_action_index(self):
        return self.n_actions * self.n_objects


def flat_action_index(action_id, object_id, n_objects):
    return action_id * n_objects + (object_id or 0)


class FrameEncoder(nn.Module):
    """Small conv stack over symbolic frames; frames are encoded independently."""

    def __init__(self, channels, obs_size, d_model):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, 32, 3, padding=1)
        self.conv2 = nn.Conv2d(32, 32, 3, stride=2, padding=1)
        flat = 32 * ((obs_size + 1) // 2) ** 2
        self.proj = nn.Linear(flat, d_model)

    def forward(self, frames):
        # frames: [T, C, H, W]
        x = F.relu(self.conv1(frames))
        x = F.relu(self.conv2(x))
        x = x.flatten(start_dim=1)
        return self.proj(x)


def build_future_action_mask(t_now, total):
    """Boolean visibility over time positions: index <= t_now is visible."""
    idx = torch.arange(total)
    return idx <= t_now


def multimodal_mask(n_text, n_steps, text_visible=None, device=None):
    """Self-attention visibility over the [text | vis | act] stream.

    Text rows attend only over (non-pad) text; vis/act rows at time t attend
    to all non-pad text plus vis/act positions <= t. Restricting text rows to
    the text block keeps every future->past path closed even with stacked
    layers.
    """
    n = n_text + 2 * n_steps
    mask = torch.zeros(n, n, dtype=torch.bool, device=device)
    if text_visible is None:
        text_visible = torch.ones(n_text, dtype=torch.bool, device=device)
    mask[:, :n_text] = text_visible.unsqueeze(0)
    steps = torch.arange(n_steps, device=device)
    causal = steps.unsqueeze(1) >= steps.unsqueeze(0)  # query t sees key t' <= t
    vis_sl = slice(n_text, n_text + n_steps)
    act_sl = slice(n_text + n_steps, n)
    mask[vis_sl, vis_sl] = causal
    mask[vis_sl, act_sl] = causal
    mask[act_sl, vis_sl] = causal
    mask[act_sl, act_sl] = causal
    return mask


class EDHAgent(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        c = config
        self.text_encoder = TextEncoder(
            c.n_tokens, c.d_model, c.text_layers, c.attention_heads,
            c.max_dialog_tokens, c.dropout,
        )
        self.frame_encoder = FrameEncoder(c.channels, c.obs_size, c.d_model)
        self.action_embed = nn.Embedding(c.flat_action_count(), c.d_model)
        self.step_pos = nn.Embedding(c.max_steps, c.d_model)
        self.modality_embed = nn.Embedding(3, c.d_model)  # text / vis / act
        self.ca_vis = MultiHeadAttention(c.d_model, c.attention_heads, c.dropout)
        self.ca_act = MultiHeadAttention(c.d_model, c.attention_heads, c.dropout)
        self.mm_layers = nn.ModuleList(
            EncoderLayer(c.d_model, c.attention_heads, c.dropout)
            for _ in range(c.mm_encoder_layers)
        )
        self.action_head = nn.Linear(c.d_model, c.n_actions)
        self.object_head = nn.Linear(c.d_model, c.n_objects)

    # --------------------------------------------------------- sub-encoders

    def encode_text(self, token_ids):
        return self.text_encoder(token_ids)

    def encode_frames(self, frames):
        return self.frame_encoder(frames)

    def embed_actions(self, flat_ids):
        return self.action_embed(flat_ids)

    # -------------------------------------------------------------- forward

    def fuse(self, h_text, h_vis, h_act, text_visible):
        """Cross-modal attention (optional) + causal multimodal encoding."""
        t = h_vis.shape[0]
        if h_act.shape[0] != t:
            raise ShapeMismatch("vis and act streams must have equal length")
        if t > self.config.max_steps:
            raise ShapeMismatch(f"{t} steps exceed max_steps {self.config.max_steps}")
        pos = self.step_pos.weight[:t]
        m_text, m_vis, m_act = self.modality_embed.weight
        h_text = h_text + m_text
        h_vis = h_vis + pos + m_vis
        h_act = h_act + pos + m_act
        if self.config.use_cross_attn:
            ca_mask = text_visible.unsqueeze(0).expand(t, -1)
            h_vis = cross_modal_attend(self.ca_vis, h_vis, h_text, ca_mask)
            h_act = cross_modal_attend(self.ca_act, h_act, h_text, ca_mask)
        n_text = h_text.shape[0]
        x = torch.cat([h_text, h_vis, h_act], dim=0)
        mask = multimodal_mask(n_text, t, text_visible, device=x.device)
        for layer in self.mm_layers:
            x = layer(x, mask)
        z_text = x[:n_text]
        z_vis = x[n_text : n_text + t]
        z_act = x[n_text + t :]
        return z_text, z_vis, z_act

    def classify_heads(self, z_vis):
        return self.action_head(z_vis), self.object_head(z_vis)

    def forward(self, token_ids, frames, prev_action_flat):
        h_text = self.encode_text(token_ids)
        h_vis = self.encode_frames(frames)
        h_act = self.embed_actions(prev_action_flat)
        if self.config.lang_only:
            h_vis = torch.zeros_like(h_vis)
            h_act = torch.zeros_like(h_act)
        text_visible = self.text_encoder.pad_mask(token_ids)
        _, z_vis, _ = self.fuse(h_text, h_vis, h_act, text_visible)
        return self.classify_heads(z_vis)


def predict_indices(action_logits, object_logits):
    """Argmax with ties broken toward the lowest index."""
    amax = action_logits.max()
    act = int((action_logits == amax).nonzero()[0].item())
    omax = object_logits.max()
    obj = int((object_logits == omax).nonzero()[0].item())
    return act, obj


def compute_loss(
    action_logits,
    object_logits,
    action_targets,
    object_targets,
    interaction_mask,
    future_mask,
    include_history=True,
    w_action=1.0,
    w_object=1.0,
):
    """Summed cross-entropy of the two heads.

    Object loss is taken only at interaction steps; include_history=False
    restricts both losses to future (>= t_i) steps. Each head is normalized
    by its number of supervised *future* steps, so turning history loss on
    adds supervision without shrinking the per-step weight of the future
    steps the rollout is scored on.
    """
    keep = future_mask.clone() if not include_history else torch.ones_like(future_mask)
    keep = keep.bool()
    future = future_mask.bool()
    act_keep = keep
    obj_keep = keep & interaction_mask.bool()
    loss = action_logits.new_zeros(())
    if act_keep.any():
        denom = max(int((future & act_keep).sum()), 1)
        loss = loss + w_action * F.cross_entropy(
            action_logits[act_keep], action_targets[act_keep], reduction="sum"
        ) / denom
    if obj_keep.any():
        denom = max(int((future & obj_keep).sum()), 1)
        loss = loss + w_object * F.cross_entropy(
            object_logits[obj_keep], object_targets[obj_keep], reduction="sum"
        ) / denom
    return loss
