"""Miniature BERT-style encoder: summed input embeddings, a stack of
post-norm transformer blocks giving per-position token states, one extra
block with its own parameters for sequence-level states, and the
per-position fusion of the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import (
    Tensor,
    add,
    concat_features,
    gather_rows,
    gelu,
    hstack,
    layer_norm_rows,
    matmul,
    parameter,
    scale,
    slice_cols,
    slice_rows,
    softmax_rows,
    transpose,
)
from .errors import ConfigError, ContractError, ShapeError


@dataclass(frozen=True)
class EncoderConfig:
    d: int = 64
    layers: int = 2
    heads: int = 2
    ffn_dim: int = 128
    max_len: int = 64
    vocab_size: int = 0  # resolved from the subword vocab before init

    def __post_init__(self):
        if self.d < 1 or self.layers < 1 or self.heads < 1 or self.ffn_dim < 1:
            raise ConfigError("encoder dimensions must be positive")
        if self.d % self.heads != 0:
            raise ConfigError(f"d={self.d} not divisible by heads={self.heads}")
        if self.max_len < 2:
            raise ConfigError("max_len must be at least 2 (room for [CLS])")
        if self.vocab_size < 0:
            raise ConfigError("vocab_size cannot be negative")


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _block_param_specs(config: EncoderConfig, prefix: str):
    d, f = config.d, config.ffn_dim
    return [
        (f"{prefix}.attn.wq", (d, d)),
        (f"{prefix}.attn.bq", (1, d)),
        (f"{prefix}.attn.wk", (d, d)),
        (f"{prefix}.attn.wv", (d, d)),
        (f"{prefix}.attn.bv", (1, d)),
        (f"{prefix}.attn.wo", (d, d)),
        (f"{prefix}.attn.bo", (1, d)),
        (f"{prefix}.ln1.gain", (1, d)),
        (f"{prefix}.ln1.bias", (1, d)),
        (f"{prefix}.ffn.w1", (d, f)),
        (f"{prefix}.ffn.b1", (1, f)),
        (f"{prefix}.ffn.w2", (f, d)),
        (f"{prefix}.ffn.b2", (1, d)),
        (f"{prefix}.ln2.gain", (1, d)),
        (f"{prefix}.ln2.bias", (1, d)),
    ]


def block_prefixes(config: EncoderConfig) -> list[str]:
    return [f"enc{i}" for i in range(config.layers)] + ["seq"]


def encoder_param_specs(config: EncoderConfig) -> list[tuple[str, tuple[int, int]]]:
    if config.vocab_size < 1:
        raise ConfigError("vocab_size must be resolved before building parameters")
    specs = [
        ("embed.token", (config.vocab_size, config.d)),
        ("embed.position", (config.max_len, config.d)),
        ("embed.segment", (2, config.d)),
    ]
    for prefix in block_prefixes(config):
        specs.extend(_block_param_specs(config, prefix))
    return specs


def init_encoder_params(config: EncoderConfig, rng: np.random.Generator) -> dict[str, Tensor]:
    params: dict[str, Tensor] = {}
    for name, shape in encoder_param_specs(config):
        leaf = name.rsplit(".", 1)[-1]
        if leaf == "gain":
            data = np.ones(shape)
        elif leaf.startswith("b"):
            data = np.zeros(shape)
        else:
            data = _glorot(rng, *shape)
        params[name] = parameter(data, name)
    return params


def embed_inputs(
    params: dict[str, Tensor],
    token_ids,
    segment_ids,
    config: EncoderConfig,
) -> Tensor:
    """Row i = token_table[id_i] + position_table[i] + segment_table[seg_i]."""
    token_ids = np.asarray(token_ids, dtype=np.intp)
    segment_ids = np.asarray(segment_ids, dtype=np.intp)
    if token_ids.size != segment_ids.size:
        raise ShapeError("token and segment id lists differ in length")
    n = token_ids.size
    if n == 0:
        raise ContractError("cannot embed an empty id sequence")
    if n > config.max_len:
        raise ContractError(f"sequence length {n} exceeds max_len {config.max_len}")
    tok = gather_rows(params["embed.token"], token_ids)
    pos = gather_rows(params["embed.position"], np.arange(n))
    seg = gather_rows(params["embed.segment"], segment_ids)
    return add(add(tok, pos), seg)


def _linear(x: Tensor, params, prefix: str, w: str, b: str) -> Tensor:
    return add(matmul(x, params[f"{prefix}.{w}"]), params[f"{prefix}.{b}"])


def _self_attention(x: Tensor, params, prefix: str, config: EncoderConfig, trace) -> Tensor:
    head_dim = config.d // config.heads
    q = _linear(x, params, prefix, "attn.wq", "attn.bq")
    # No key bias: a per-key constant shifts each score row uniformly and
    # softmax cancels it, so the parameter would be permanently gradient-free.
    k = matmul(x, params[f"{prefix}.attn.wk"])
    v = _linear(x, params, prefix, "attn.wv", "attn.bv")
    contexts = []
    inv_sqrt = 1.0 / np.sqrt(head_dim)
    for h in range(config.heads):
        lo, hi = h * head_dim, (h + 1) * head_dim
        qh, kh, vh = (slice_cols(t, lo, hi) for t in (q, k, v))
        scores = scale(matmul(qh, transpose(kh)), inv_sqrt)
        weights = softmax_rows(scores)
        if trace is not None:
            trace.setdefault(f"{prefix}.attn.weights", []).append(weights.data.copy())
        contexts.append(matmul(weights, vh))
    merged = hstack(contexts)
    return add(matmul(merged, params[f"{prefix}.attn.wo"]), params[f"{prefix}.attn.bo"])


def transformer_block(x: Tensor, params, prefix: str, config: EncoderConfig, trace=None) -> Tensor:
    """Post-norm order: attention, residual, norm, GELU feed-forward, residual, norm."""
    att = _self_attention(x, params, prefix, config, trace)
    x1 = layer_norm_rows(add(x, att), params[f"{prefix}.ln1.gain"], params[f"{prefix}.ln1.bias"])
    hidden = gelu(_linear(x1, params, prefix, "ffn.w1", "ffn.b1"))
    ff = add(matmul(hidden, params[f"{prefix}.ffn.w2"]), params[f"{prefix}.ffn.b2"])
    return layer_norm_rows(add(x1, ff), params[f"{prefix}.ln2.gain"], params[f"{prefix}.ln2.bias"])


def encoder_forward(x: Tensor, params, config: EncoderConfig, trace=None) -> Tensor:
    for i in range(config.layers):
        x = transformer_block(x, params, f"enc{i}", config, trace)
    return x


def sequence_layer(h_token: Tensor, params, config: EncoderConfig, trace=None) -> Tensor:
    """The extra transformer block with independent ("seq.*") parameters."""
    return transformer_block(h_token, params, "seq", config, trace)


def fuse_token_sequence(h_token: Tensor, h_sequence: Tensor) -> Tensor:
    """Per-position feature concatenation: row i is [h_i ; s_i]."""
    if h_token.shape != h_sequence.shape:
        raise ShapeError(
            f"token and sequence states differ in shape: {h_token.shape} vs {h_sequence.shape}"
        )
    return concat_features(h_token, h_sequence)


@dataclass
class EncoderOutput:
    h_token: Tensor
    h_sequence: Tensor
    h_cls: Tensor
    h_concat: Tensor


def encode(params, token_ids, segment_ids, config: EncoderConfig, trace=None) -> EncoderOutput:
    x = embed_inputs(params, token_ids, segment_ids, config)
    h_token = encoder_forward(x, params, config, trace)
    h_sequence = sequence_layer(h_token, params, config, trace)
    h_cls = slice_rows(h_token, 0, 1)
    h_concat = fuse_token_sequence(h_token, h_sequence)
    return EncoderOutput(h_token, h_sequence, h_cls, h_concat)
