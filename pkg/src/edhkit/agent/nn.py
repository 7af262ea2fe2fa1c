"""Shared transformer building blocks.

Attention is implemented with explicit matmuls and boolean visibility masks
(True = may attend) so that masked positions contribute exactly zero: blocked
logits get -inf, exp(-inf) == 0.0, and 0.0 * v == 0.0 bitwise. This is what
makes the causality invariants checkable at bit level in eval mode.
"""

import math

import torch
import torch.nn as nn
import torch.nn.functional as F


class ShapeMismatch(Exception):
    pass


class MultiHeadAttention(nn.Module):
    """Q/K/V attention over 2D tensors [len, d_model].

    Rows whose mask admits no source fall back to zero output (the caller's
    residual then passes the target through unchanged). The output projection
    carries no bias for the same reason.
    """

    def __init__(self, d_model, n_heads, dropout=0.0):
        super().__init__()
        if d_model % n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        self.d_model = d_model
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.w_q = nn.Linear(d_model, d_model)
        self.w_k = nn.Linear(d_model, d_model)
        self.w_v = nn.Linear(d_model, d_model)
        self.w_o = nn.Linear(d_model, d_model, bias=False)
        self.dropout = nn.Dropout(dropout)

    def forward(self, query, key, value, mask=None):
        if query.shape[-1] != self.d_model or key.shape[-1] != self.d_model:
            raise ShapeMismatch(
                f"expected feature dim {self.d_model}, got {query.shape[-1]}/{key.shape[-1]}"
            )
        lq, lk = query.shape[0], key.shape[0]
        if mask is not None and tuple(mask.shape) != (lq, lk):
            raise ShapeMismatch(f"mask shape {tuple(mask.shape)} != ({lq}, {lk})")
        q = self.w_q(query).view(lq, self.n_heads, self.d_head).transpose(0, 1)
        k = self.w_k(key).view(lk, self.n_heads, self.d_head).transpose(0, 1)
        v = self.w_v(value).view(lk, self.n_heads, self.d_head).transpose(0, 1)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_head)
        if mask is not None:
            scores = scores.masked_fill(~mask.unsqueeze(0), float("-inf"))
        attn = F.softmax(scores, dim=-1)
        if mask is not None:
            dead = ~mask.any(dim=-1)  # rows with no visible source
            if dead.any():
                attn = attn.masked_fill(dead.view(1, lq, 1), 0.0)
        attn = self.dropout(attn)
        out = (attn @ v).transpose(0, 1).reshape(lq, self.d_model)
        return self.w_o(out)


def cross_modal_attend(mha, target, source, mask=None):
    """One cross-modal block: target queries the source modality, residual add.

    Fully masked target rows pass through unchanged.
    """
    return target + mha(target, source, source, mask)


class FeedForward(nn.Module):
    def __init__(self, d_model, d_ff=None, dropout=0.0):
        super().__init__()
        d_ff = d_ff or 4 * d_model
        self.net = nn.Sequential(
            nn.Linear(d_model, d_ff),
            nn.ReLU(),
            nn.Dropout(dropout),
            nn.Linear(d_ff, d_model),
        )

    def forward(self, x):
        return self.net(x)


class EncoderLayer(nn.Module):
    """Post-norm self-attention layer with an arbitrary visibility mask."""

    def __init__(self, d_model, n_heads, dropout=0.0):
        super().__init__()
        self.attn = MultiHeadAttention(d_model, n_heads, dropout)
        self.ff = FeedForward(d_model, dropout=dropout)
        self.norm1 = nn.LayerNorm(d_model)
        self.norm2 = nn.LayerNorm(d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x, mask=None):
        x = self.norm1(x + self.dropout(self.attn(x, x, x, mask)))
        x = self.norm2(x + self.dropout(self.ff(x)))
        return x


class DecoderLayer(nn.Module):
    """Causal self-attention plus cross-attention to an encoded memory."""

    def __init__(self, d_model, n_heads, dropout=0.0):
        super().__init__()
        self.self_attn = MultiHeadAttention(d_model, n_heads, dropout)
        self.cross_attn = MultiHeadAttention(d_model, n_heads, dropout)
        self.ff = FeedForward(d_model, dropout=dropout)
        self.norm1 = nn.LayerNorm(d_model)
        self.norm2 = nn.LayerNorm(d_model)
        self.norm3 = nn.LayerNorm(d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x, memory, self_mask=None, memory_mask=None):
        x = self.norm1(x + self.dropout(self.self_attn(x, x, x, self_mask)))
        x = self.norm2(
            x + self.dropout(self.cross_attn(x, memory, memory, memory_mask))
        )
        x = self.norm3(x + self.dropout(self.ff(x)))
        return x


def causal_mask(n, device=None, dtype=torch.bool):
    return torch.ones(n, n, dtype=torch.bool, device=device).tril()


class TextEncoder(nn.Module):
    """Bidirectional self-attention stack over token ids; PAD masked out."""

    def __init__(self, vocab_size, d_model, n_layers, n_heads, max_len, dropout=0.0, pad_id=0):
        super().__init__()
        self.pad_id = pad_id
        self.max_len = max_len
        self.embed = nn.Embedding(vocab_size, d_model)
        self.pos = nn.Embedding(max_len, d_model)
        self.layers = nn.ModuleList(
            EncoderLayer(d_model, n_heads, dropout) for _ in range(n_layers)
        )
        self.dropout = nn.Dropout(dropout)

    def forward(self, token_ids):
        if token_ids.shape[0] > self.max_len:
            raise ShapeMismatch(
                f"sequence length {token_ids.shape[0]} exceeds max {self.max_len}"
            )
        n = token_ids.shape[0]
        x = self.embed(token_ids) + self.pos.weight[:n]
        x = self.dropout(x)
        visible = token_ids != self.pad_id  # [n]
        mask = visible.unsqueeze(0).expand(n, n)
        for layer in self.layers:
            x = layer(x, mask)
        return x

    def pad_mask(self, token_ids):
        return token_ids != self.pad_id
