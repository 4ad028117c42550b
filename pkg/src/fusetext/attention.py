"""Auxiliary fusion and dual attention pooling.

Each pool scores every position with a learned row vector, softmaxes the
scores over positions, and returns the weight vector together with the
weighted sum of its input rows. Self-attention pools the fused encoder
states; cross-attention pools per-position concatenations of those states
with the (broadcast) auxiliary embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor, concat_features, matmul, softmax_rows, transpose
from .errors import ShapeError


def fuse_aux(h_concat: Tensor, aux: Tensor) -> tuple[Tensor, Tensor]:
    """Broadcast the tweet-level auxiliary embedding onto every position.

    Returns (h_fused, e): h_fused rows are [h_i ; aux] and e is the
    broadcast auxiliary block alone (one identical row per position).
    """
    if aux.shape[0] != 1:
        raise ShapeError(f"aux embedding must be a single row, got {aux.shape}")
    n = h_concat.shape[0]
    ones = Tensor(np.ones((n, 1)))
    e = matmul(ones, aux)
    return concat_features(h_concat, e), e


def self_attention_pool(h: Tensor, w_s: Tensor) -> tuple[Tensor, Tensor]:
    """Softmax-over-positions pooling: returns (alpha, h_sa) where alpha is
    the (1 x n) weight row and h_sa the alpha-weighted sum of rows of h.
    """
    if w_s.shape != (1, h.shape[1]):
        raise ShapeError(f"scorer shape {w_s.shape} incompatible with rows of width {h.shape[1]}")
    scores = matmul(h, transpose(w_s))
    alpha = softmax_rows(transpose(scores))
    h_sa = matmul(alpha, h)
    return alpha, h_sa


def cross_attention_pool(h: Tensor, e: Tensor, w_c: Tensor) -> tuple[Tensor, Tensor]:
    """Same pooling applied to per-position concatenations [h_i ; e_i]."""
    if h.shape[0] != e.shape[0]:
        raise ShapeError(f"row counts differ: {h.shape} vs {e.shape}")
    he = concat_features(h, e)
    return self_attention_pool(he, w_c)


def concat_attention(h_sa: Tensor, h_ca: Tensor) -> Tensor:
    """Combined pooled output [h_sa ; h_ca]."""
    return concat_features(h_sa, h_ca)


@dataclass
class AttentionOutput:
    alpha: Tensor
    beta: Tensor | None
    h_sa: Tensor
    h_ca: Tensor
    h_att: Tensor
