"""Multimodal key/value infusion and gated global fusion primitives."""

import math

import torch
import torch.nn as nn

from ..agent.nn import ShapeMismatch


class MCA2Params(nn.Module):
    """Learnable mixing parameters for context-aware key/value infusion.

    lambda_k / lambda_v are stored pre-squash and passed through a sigmoid, so
    the mixed keys/values are always convex combinations. u_k / u_v project
    the context modality into the text subspace.
    """

    def __init__(self, n, d, d_context):
        super().__init__()
        self.n = n
        self.d = d
        self.d_context = d_context
        self.lambda_k_raw = nn.Parameter(torch.zeros(n, 1))
        self.lambda_v_raw = nn.Parameter(torch.zeros(n, 1))
        scale = 1.0 / math.sqrt(d_context)
        self.u_k = nn.Parameter(torch.empty(d_context, d).uniform_(-scale, scale))
        self.u_v = nn.Parameter(torch.empty(d_context, d).uniform_(-scale, scale))

    def lambdas(self):
        return torch.sigmoid(self.lambda_k_raw), torch.sigmoid(self.lambda_v_raw)


def align_context(c, n):
    """Broadcast a [c, d_c] context to n rows; c != n mean-pools first."""
    if c.shape[0] == n:
        return c
    return c.mean(dim=0, keepdim=True).expand(n, -1)


def mca2_infuse(k, v, c, params: MCA2Params):
    """Convex mix of text keys/values with the projected context modality:

        K_hat = (1 - lambda_k) * K + lambda_k * (C @ U_k)
        V_hat = (1 - lambda_v) * V + lambda_v * (C @ U_v)
    """
    n, d = k.shape
    if v.shape != k.shape:
        raise ShapeMismatch(f"K {tuple(k.shape)} vs V {tuple(v.shape)}")
    if n != params.n or d != params.d:
        raise ShapeMismatch(
            f"params built for ({params.n}, {params.d}), got ({n}, {d})"
        )
    if c.shape[-1] != params.d_context:
        raise ShapeMismatch(
            f"context dim {c.shape[-1]} != expected {params.d_context}"
        )
    c = align_context(c, n)
    lam_k, lam_v = params.lambdas()
    k_hat = (1.0 - lam_k) * k + lam_k * (c @ params.u_k)
    v_hat = (1.0 - lam_v) * v + lam_v * (c @ params.u_v)
    return k_hat, v_hat


def gif_fuse(h, modality_streams, gates):
    """Residual sum of gated modality streams: H + sum_m g_m * H_m."""
    out = h
    if len(modality_streams) != len(gates):
        raise ShapeMismatch("one gate per modality stream required")
    for h_m, g_m in zip(modality_streams, gates):
        if h_m.shape != h.shape:
            raise ShapeMismatch(
                f"stream shape {tuple(h_m.shape)} != H shape {tuple(h.shape)}"
            )
        out = out + g_m * h_m
    return out


class MCA2Attention(nn.Module):
    """Single-head dot-product attention with context-infused keys/values."""

    def __init__(self, n, d, d_context):
        super().__init__()
        self.w_q = nn.Linear(d, d)
        self.w_k = nn.Linear(d, d)
        self.w_v = nn.Linear(d, d)
        self.params = MCA2Params(n, d, d_context)
        self.scale = math.sqrt(d)

    def forward(self, h, context):
        q, k, v = self.w_q(h), self.w_k(h), self.w_v(h)
        k_hat, v_hat = mca2_infuse(k, v, context, self.params)
        attn = torch.softmax(q @ k_hat.transpose(0, 1) / self.scale, dim=-1)
        return attn @ v_hat
