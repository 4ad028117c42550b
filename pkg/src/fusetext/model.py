"""The full fusion model: parameter container, end-to-end forward pass, and
a text-level predictor that couples the model with its featurizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attention import AttentionOutput, concat_attention, cross_attention_pool, fuse_aux, self_attention_pool
from .autodiff import Tensor, parameter
from .data import RunConfig
from .encoder import EncoderOutput, encode, encoder_param_specs, init_encoder_params, _glorot
from .errors import ConfigError
from .features import TweetFeaturizer, TweetFeatures, aux_dimension
from .heads import Prediction, binary_head, expand_binary, gate_fuse, predict_class, primary_head
from .lda import LdaModel


def head_param_specs(config: RunConfig) -> list[tuple[str, tuple[int, int]]]:
    d = config.encoder.d
    a = aux_dimension(config.lda.topics, config.glove_dim)
    c = config.num_classes
    return [
        ("w_s", (1, 2 * d)),
        ("w_c", (1, 2 * d + a)),
        ("w_p", (c, 4 * d + a)),
        ("b_p", (1, c)),
        ("w_b", (1, 4 * d + a)),
        ("b_b", (1, 1)),
    ]


def expected_tensor_names(config: RunConfig) -> dict[str, tuple[int, int]]:
    specs = dict(encoder_param_specs(config.encoder))
    specs.update(dict(head_param_specs(config)))
    return specs


@dataclass
class ModelOutput:
    encoder: EncoderOutput
    attention: AttentionOutput
    y_primary: Tensor
    y_binary: Tensor
    y_final: Tensor


class FusionModel:
    """Named parameter tensors plus the resolved run configuration and the
    fitted topic model the auxiliary features came from.
    """

    def __init__(self, config: RunConfig, params: dict[str, Tensor], lda_model: LdaModel):
        if config.encoder.vocab_size < 1 or config.glove_dim < 1:
            raise ConfigError("model needs a resolved config (vocab_size, glove_dim)")
        if lda_model.topics != config.lda.topics:
            raise ConfigError("topic model size disagrees with the configuration")
        self.config = config
        self.params = params
        self.lda_model = lda_model

    @classmethod
    def initialize(cls, config: RunConfig, lda_model: LdaModel, seed: int) -> "FusionModel":
        rng = np.random.Generator(np.random.PCG64(seed))
        params = init_encoder_params(config.encoder, rng)
        for name, shape in head_param_specs(config):
            if name.startswith("b"):
                params[name] = parameter(np.zeros(shape), name)
            else:
                params[name] = parameter(_glorot(rng, *shape), name)
        return cls(config, params, lda_model)

    @property
    def aux_dim(self) -> int:
        return aux_dimension(self.config.lda.topics, self.config.glove_dim)

    def forward(self, features: TweetFeatures, trace=None) -> ModelOutput:
        cfg = self.config
        enc = encode(self.params, features.token_ids, features.segment_ids, cfg.encoder, trace)

        aux_vec = features.aux.vector
        if aux_vec.shape[1] != self.aux_dim:
            raise ConfigError(
                f"aux embedding has dimension {aux_vec.shape[1]}, model expects {self.aux_dim}"
            )
        if cfg.train.disable_aux:
            aux_vec = np.zeros_like(aux_vec)
        h_fused, e = fuse_aux(enc.h_concat, Tensor(aux_vec))

        alpha, h_sa = self_attention_pool(enc.h_concat, self.params["w_s"])
        if cfg.train.disable_cross_attention:
            beta = None
            h_ca = Tensor(np.zeros((1, 2 * cfg.encoder.d + self.aux_dim)))
        else:
            beta, h_ca = cross_attention_pool(enc.h_concat, e, self.params["w_c"])
        h_att = concat_attention(h_sa, h_ca)
        att = AttentionOutput(alpha, beta, h_sa, h_ca, h_att)

        y_primary = primary_head(h_att, self.params["w_p"], self.params["b_p"])
        y_binary = binary_head(h_att, self.params["w_b"], self.params["b_b"])
        if cfg.train.disable_gating:
            y_final = y_primary
        else:
            expanded = expand_binary(y_binary, y_primary, cfg.harmful_mask)
            y_final = gate_fuse(y_primary, expanded, cfg.train.lambda_gate)
        return ModelOutput(enc, att, y_primary, y_binary, y_final)

    def predict(self, features: TweetFeatures) -> Prediction:
        out = self.forward(features)
        y_final = out.y_final.data.reshape(-1).copy()
        return Prediction(
            y_primary=out.y_primary.data.reshape(-1).copy(),
            y_binary=float(out.y_binary.data[0, 0]),
            y_final=y_final,
            predicted_class=predict_class(y_final),
        )


class Predictor:
    """Model plus featurizer: maps raw text straight to a Prediction."""

    def __init__(self, model: FusionModel, featurizer: TweetFeaturizer):
        self.model = model
        self.featurizer = featurizer

    def predict_text(self, text: str, seed: int = 0) -> Prediction:
        return self.model.predict(self.featurizer.features(text, seed))
