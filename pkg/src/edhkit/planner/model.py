"""Dialog-to-plan sequence-to-sequence transformer."""

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..agent.nn import DecoderLayer, TextEncoder, causal_mask
from ..corpus.vocab import BOS, EOS, PAD


class ConfigError(Exception):
    pass


@dataclass
class PlannerConfig:
    n_tokens: int
    d_model: int = 128
    encoder_layers: int = 2
    decoder_layers: int = 2
    attention_heads: int = 4
    max_src_len: int = 64
    max_tgt_len: int = 24
    dropout: float = 0.1
    lr: float = 5e-5
    warmup_steps: int = 500
    weight_decay: float = 0.01
    epochs: int = 20
    batch_size: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.d_model <= 0 or self.max_src_len <= 0 or self.max_tgt_len <= 0:
            raise ConfigError("dimensions must be positive")
        if self.d_model % self.attention_heads != 0:
            raise ConfigError("d_model must be divisible by attention_heads")
        # Alternating (action, object) pairs need an even token budget plus
        # room for BOS/EOS.
        if self.max_tgt_len % 2 != 0:
            raise ConfigError("max_tgt_len must be even plus EOS headroom")


class PlannerModel(nn.Module):
    def __init__(self, config: PlannerConfig):
        super().__init__()
        c = config
        self.config = c
        self.encoder = TextEncoder(
            c.n_tokens, c.d_model, c.encoder_layers, c.attention_heads,
            c.max_src_len, c.dropout,
        )
        self.tgt_embed = nn.Embedding(c.n_tokens, c.d_model)
        self.tgt_pos = nn.Embedding(c.max_tgt_len + 2, c.d_model)
        self.layers = nn.ModuleList(
            DecoderLayer(c.d_model, c.attention_heads, c.dropout)
            for _ in range(c.decoder_layers)
        )
        self.out = nn.Linear(c.d_model, c.n_tokens)

    def encode(self, src_ids):
        memory = self.encoder(src_ids)
        return memory, self.encoder.pad_mask(src_ids)

    def decode(self, memory, memory_visible, tgt_ids):
        n = tgt_ids.shape[0]
        x = self.tgt_embed(tgt_ids) + self.tgt_pos.weight[:n]
        self_mask = causal_mask(n, device=x.device)
        mem_mask = memory_visible.unsqueeze(0).expand(n, -1)
        for layer in self.layers:
            x = layer(x, memory, self_mask=self_mask, memory_mask=mem_mask)
        return self.out(x)

    def forward(self, src_ids, tgt_in_ids):
        memory, visible = self.encode(src_ids)
        return self.decode(memory, visible, tgt_in_ids)

    @torch.no_grad()
    def greedy_decode(self, src_ids, max_len=None):
        self.eval()
        max_len = max_len or self.config.max_tgt_len
        memory, visible = self.encode(src_ids)
        prefix = [BOS]
        out = []
        for _ in range(max_len + 1):
            logits = self.decode(
                memory, visible, torch.tensor(prefix, dtype=torch.long)
            )
            nxt = int(torch.argmax(logits[-1]).item())
            if nxt == EOS:
                break
            out.append(nxt)
            prefix.append(nxt)
        return out


def sequence_loss(logits, targets):
    return F.cross_entropy(logits, targets, ignore_index=PAD)
