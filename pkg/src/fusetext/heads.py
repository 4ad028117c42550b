"""Hierarchical classification head: a multi-class layer, a binary
harm layer, expansion of the binary probability over the class set, and
the gated fusion of the two distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor, add, div, matmul, mul, neg, scale, sigmoid, softmax_rows, sum_all, transpose
from .errors import ContractError, ShapeError


def primary_head(h_att: Tensor, w_p: Tensor, b_p: Tensor) -> Tensor:
    """Class distribution softmax(h_att w_p^T + b_p), shape (1, C)."""
    if w_p.shape[1] != h_att.shape[1]:
        raise ShapeError(f"w_p width {w_p.shape} incompatible with features {h_att.shape}")
    logits = add(matmul(h_att, transpose(w_p)), b_p)
    return softmax_rows(logits)


def binary_head(h_att: Tensor, w_b: Tensor, b_b: Tensor) -> Tensor:
    """Harm probability sigmoid(h_att w_b^T + b_b), a (1, 1) tensor."""
    if w_b.shape != (1, h_att.shape[1]):
        raise ShapeError(f"w_b shape {w_b.shape} incompatible with features {h_att.shape}")
    return sigmoid(add(matmul(h_att, transpose(w_b)), b_b))


def validate_harmful_mask(mask) -> np.ndarray:
    arr = np.asarray(mask, dtype=bool).reshape(-1)
    if not arr.any() or arr.all():
        raise ContractError("harmful mask needs at least one harmful and one non-harmful class")
    return arr


def expand_binary(y_binary: Tensor, y_primary: Tensor, harmful_mask) -> Tensor:
    """Spread the harm probability over the class set.

    Mass y_binary goes to harmful classes in proportion to y_primary's
    harmful coordinates (uniformly when that block sums to zero); mass
    1 - y_binary goes likewise to the non-harmful classes. The result is a
    distribution over all C classes.
    """
    mask = validate_harmful_mask(harmful_mask)
    if mask.size != y_primary.shape[1]:
        raise ShapeError(f"mask length {mask.size} != class count {y_primary.shape[1]}")
    if y_binary.shape != (1, 1):
        raise ShapeError(f"y_binary must be (1, 1), got {y_binary.shape}")

    complement = add(Tensor(1.0), neg(y_binary))
    parts = []
    for block_mask, head_mass in ((mask, y_binary), (~mask, complement)):
        m = Tensor(block_mask.astype(float).reshape(1, -1))
        block = mul(y_primary, m)
        block_sum = float(block.data.sum())
        if block_sum == 0.0:
            uniform = Tensor(block_mask / block_mask.sum())
            parts.append(mul(head_mass, uniform))
        else:
            parts.append(mul(head_mass, div(block, sum_all(block))))
    return add(parts[0], parts[1])


def gate_fuse(y_primary: Tensor, expanded_binary: Tensor, lambda_gate: float) -> Tensor:
    """Convex combination lambda * y_primary + (1 - lambda) * expanded_binary."""
    if not 0.0 <= lambda_gate <= 1.0:
        raise ContractError(f"gate weight must lie in [0, 1], got {lambda_gate}")
    if y_primary.shape != expanded_binary.shape:
        raise ShapeError(
            f"distribution shapes differ: {y_primary.shape} vs {expanded_binary.shape}"
        )
    return add(scale(y_primary, lambda_gate), scale(expanded_binary, 1.0 - lambda_gate))


def predict_class(y_final) -> int:
    """Argmax with lowest-index tie-break (numpy argmax semantics)."""
    data = y_final.data if isinstance(y_final, Tensor) else np.asarray(y_final)
    return int(np.argmax(data))


@dataclass
class Prediction:
    y_primary: np.ndarray
    y_binary: float
    y_final: np.ndarray
    predicted_class: int
