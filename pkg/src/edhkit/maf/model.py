"""Generative action decoding: fused conditioning matrix plus an
autoregressive transformer decoder over action tokens."""

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..agent.model import FrameEncoder
from ..agent.nn import DecoderLayer, TextEncoder, causal_mask
from ..worldsim import ACTION_ORDER

PAD, BOS, EOS = 0, 1, 2
SPECIALS = ["<pad>", "<bos>", "<eos>"]

ACTION_TOKENS = SPECIALS + ACTION_ORDER
ACTION_TOKEN_INDEX = {t: i for i, t in enumerate(ACTION_TOKENS)}


@dataclass
class MAFConfig:
    n_tokens: int
    n_flat_actions: int  # size of the (action, object) context index space
    d_model: int = 64
    d_context: int = 32
    n_heads: int = 4
    enc_layers: int = 1
    dec_layers: int = 2
    max_src_len: int = 48
    max_tgt_len: int = 48
    channels: int = 16
    obs_size: int = 7
    dropout: float = 0.0


class MAFActionDecoder(nn.Module):
    def __init__(self, config: MAFConfig):
        super().__init__()
        from .fusion import MCA2Attention

        c = config
        self.config = c
        self.text_encoder = TextEncoder(
            c.n_tokens, c.d_model, c.enc_layers, c.n_heads, c.max_src_len, c.dropout
        )
        self.action_ctx_embed = nn.Embedding(c.n_flat_actions, c.d_context)
        self.frame_ctx_encoder = FrameEncoder(c.channels, c.obs_size, c.d_context)
        self.mca2_act = MCA2Attention(c.max_src_len, c.d_model, c.d_context)
        self.mca2_vis = MCA2Attention(c.max_src_len, c.d_model, c.d_context)
        self.gate_act_raw = nn.Parameter(torch.zeros(c.max_src_len, c.d_model))
        self.gate_vis_raw = nn.Parameter(torch.zeros(c.max_src_len, c.d_model))
        self.combine = nn.Linear(2 * c.d_model, c.d_model)
        self.tok_embed = nn.Embedding(len(ACTION_TOKENS), c.d_model)
        self.tok_pos = nn.Embedding(c.max_tgt_len, c.d_model)
        self.dec_layers = nn.ModuleList(
            DecoderLayer(c.d_model, c.n_heads, c.dropout) for _ in range(c.dec_layers)
        )
        self.out = nn.Linear(c.d_model, len(ACTION_TOKENS))

    # ---------------------------------------------------------- conditioning

    def fuse_inputs(self, dialog_ids, action_ctx_flat, observations):
        """Build the [M, d] conditioning matrix from dialog, action history
        and synchronized observations.

        Empty histories contribute a zero context stream.
        """
        from .fusion import gif_fuse

        h = self.text_encoder(dialog_ids)
        if action_ctx_flat is not None and action_ctx_flat.numel() > 0:
            c_act = self.action_ctx_embed(action_ctx_flat)
        else:
            c_act = h.new_zeros(1, self.config.d_context)
        if observations is not None and observations.shape[0] > 0:
            c_vis = self.frame_ctx_encoder(observations)
        else:
            c_vis = h.new_zeros(1, self.config.d_context)
        h_act = self.mca2_act(h, c_act)
        h_vis = self.mca2_vis(h, c_vis)
        gates = [torch.sigmoid(self.gate_act_raw), torch.sigmoid(self.gate_vis_raw)]
        h_hat = gif_fuse(h, [h_act, h_vis], gates)
        return self.combine(torch.cat([h, h_hat], dim=-1))

    # --------------------------------------------------------------- decoder

    def decode_logits(self, x_in, prefix_ids):
        n = prefix_ids.shape[0]
        x = self.tok_embed(prefix_ids) + self.tok_pos.weight[:n]
        self_mask = causal_mask(n, device=x.device)
        for layer in self.dec_layers:
            x = layer(x, x_in, self_mask=self_mask)
        return self.out(x)

    def decode_step(self, x_in, prefix_ids):
        """Distribution over the next action token given the prefix."""
        logits = self.decode_logits(x_in, prefix_ids)
        return F.softmax(logits[-1], dim=-1)

    @torch.no_grad()
    def greedy_decode(self, x_in, max_len=None):
        self.eval()
        max_len = max_len or self.config.max_tgt_len
        prefix = [BOS]
        out = []
        for _ in range(max_len - 1):
            probs = self.decode_step(x_in, torch.tensor(prefix, dtype=torch.long))
            nxt = int(torch.argmax(probs).item())
            if nxt == EOS:
                break
            out.append(nxt)
            prefix.append(nxt)
        return out


def encode_action_tokens(names):
    return [ACTION_TOKEN_INDEX[n] for n in names]


def decode_action_tokens(ids):
    return [ACTION_TOKENS[i] for i in ids if i not in (PAD, BOS, EOS)]


def train_decoder(model, examples, epochs=200, lr=1e-3, seed=0):
    """Teacher-forced overfitting loop for small corpora.

    examples: list of (dialog_ids, action_ctx_flat, observations, target_names).
    """
    torch.manual_seed(seed)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    model.train()
    curve = []
    for _ in range(epochs):
        total = 0.0
        for dialog_ids, act_ctx, obs, target_names in examples:
            tgt = [BOS] + encode_action_tokens(target_names) + [EOS]
            tgt_t = torch.tensor(tgt, dtype=torch.long)
            x_in = model.fuse_inputs(dialog_ids, act_ctx, obs)
            logits = model.decode_logits(x_in, tgt_t[:-1])
            loss = F.cross_entropy(logits, tgt_t[1:])
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += float(loss.item())
        curve.append(total / len(examples))
    model.eval()
    return curve
