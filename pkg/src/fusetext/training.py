"""Two-task losses, the loss-balancing rule, the Adam optimizer, the
training loop, and checkpoint / metric-history persistence.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor, add, backward, log_clamped, mean_all, mul, neg, scale, sum_all, vstack
from .data import LabeledExample, TrainConfig, config_to_dict, resolve_config
from .errors import CheckpointError, ContractError, ShapeError, TrainingError
from .features import TweetFeaturizer, TweetFeatures
from .ioutil import write_atomic
from .lda import LdaModel
from .metrics import evaluate_predictions
from .model import FusionModel, expected_tensor_names

CHECKPOINT_FORMAT_VERSION = 1

WEIGHT_FLOOR = 0.1
WEIGHT_CEIL = 0.9


@dataclass(frozen=True)
class LossWeights:
    lambda1: float
    lambda2: float

    def __post_init__(self):
        for name, v in (("lambda1", self.lambda1), ("lambda2", self.lambda2)):
            if not WEIGHT_FLOOR <= v <= WEIGHT_CEIL:
                raise ContractError(f"{name} must lie in [{WEIGHT_FLOOR}, {WEIGHT_CEIL}], got {v}")
        if abs(self.lambda1 + self.lambda2 - 1.0) > 1e-12:
            raise ContractError("loss weights must sum to 1")


def ce_loss(y_true: np.ndarray, y_hat: Tensor, class_weight: float | None = None) -> Tensor:
    """Categorical cross-entropy -sum(y log yhat) for one example.

    Probabilities are clamped to [1e-7, 1 - 1e-7] before the log. The
    optional class weight scales the (single) true-class term.
    """
    y = np.asarray(y_true, dtype=np.float64).reshape(1, -1)
    if y.shape != y_hat.shape:
        raise ShapeError(f"one-hot shape {y.shape} != prediction shape {y_hat.shape}")
    if not (np.isin(y, (0.0, 1.0)).all() and y.sum() == 1.0):
        raise ContractError("y_true must be a one-hot vector")
    loss = neg(sum_all(mul(Tensor(y), log_clamped(y_hat))))
    if class_weight is not None:
        loss = scale(loss, float(class_weight))
    return loss


def bce_loss(y_true, y_hat: Tensor) -> Tensor:
    """Binary cross-entropy, averaged over the batch."""
    y = np.asarray(y_true, dtype=np.float64).reshape(-1, 1)
    if y.size == 0:
        raise ContractError("bce_loss needs a nonempty batch")
    if y.shape != y_hat.shape:
        raise ShapeError(f"label shape {y.shape} != prediction shape {y_hat.shape}")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ContractError("binary labels must be 0 or 1")
    pos = mul(Tensor(y), log_clamped(y_hat))
    negt = mul(Tensor(1.0 - y), log_clamped(add(Tensor(1.0), neg(y_hat))))
    return neg(mean_all(add(pos, negt)))


def combined_loss(l_ce, l_bce, weights: LossWeights) -> Tensor:
    """Weighted sum lambda1 * CE + lambda2 * BCE."""
    l_ce = l_ce if isinstance(l_ce, Tensor) else Tensor(float(l_ce))
    l_bce = l_bce if isinstance(l_bce, Tensor) else Tensor(float(l_bce))
    return add(scale(l_ce, weights.lambda1), scale(l_bce, weights.lambda2))


def update_loss_weights(recent_ce: float, recent_bce: float) -> LossWeights:
    """Rebalance toward the lagging task: lambda1 tracks the CE share of the
    recent loss mass, clamped to [0.1, 0.9]. Zero losses give (0.5, 0.5).
    """
    if recent_ce < 0 or recent_bce < 0:
        raise ContractError("recent loss means must be nonnegative")
    total = recent_ce + recent_bce
    if total == 0.0:
        return LossWeights(0.5, 0.5)
    lam1 = min(max(recent_ce / total, WEIGHT_FLOOR), WEIGHT_CEIL)
    # Clamp the complement as well: 1.0 - 0.9 rounds just below the floor.
    lam2 = min(max(1.0 - lam1, WEIGHT_FLOOR), WEIGHT_CEIL)
    return LossWeights(lam1, lam2)


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0

    @classmethod
    def fresh(cls, params: dict[str, Tensor]) -> "AdamState":
        return cls(
            m={name: np.zeros_like(p.data) for name, p in params.items()},
            v={name: np.zeros_like(p.data) for name, p in params.items()},
        )


def adam_step(
    params: dict[str, Tensor],
    grads: dict[str, Tensor],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Standard bias-corrected Adam update, in place on params between steps."""
    state.step += 1
    t = state.step
    for name, p in params.items():
        g = grads.get(name)
        g_data = np.zeros_like(p.data) if g is None else (g.data if isinstance(g, Tensor) else g)
        if g_data.shape != p.data.shape:
            raise ShapeError(f"gradient shape {g_data.shape} != parameter {name} {p.data.shape}")
        m = state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * g_data
        v = state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * g_data * g_data
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)


@dataclass
class EpochRow:
    epoch: int
    train_loss: float
    lambda1: float
    lambda2: float
    accuracy: float
    precision: float
    recall: float
    f1: float


HISTORY_HEADER = "epoch,train_loss,lambda1,lambda2,accuracy,precision,recall,f1"


def history_to_csv(rows: list[EpochRow]) -> str:
    lines = [HISTORY_HEADER]
    for r in rows:
        lines.append(
            f"{r.epoch},{r.train_loss!r},{r.lambda1!r},{r.lambda2!r},"
            f"{r.accuracy!r},{r.precision!r},{r.recall!r},{r.f1!r}"
        )
    return "\n".join(lines) + "\n"


def save_history(rows: list[EpochRow], path: str) -> None:
    write_atomic(path, history_to_csv(rows))


def _feature_seed(seed: int, stream: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, stream, index]).generate_state(1)[0])


def featurize_examples(
    examples: list[LabeledExample],
    featurizer: TweetFeaturizer,
    seed: int,
    stream: int,
) -> list[TweetFeatures]:
    return [
        featurizer.features(ex.text, seed=_feature_seed(seed, stream, i))
        for i, ex in enumerate(examples)
    ]


def inverse_frequency_weights(examples: list[LabeledExample], num_classes: int) -> np.ndarray:
    """w_c = N / (C * count_c); classes absent from the split get weight 0."""
    counts = np.zeros(num_classes)
    for ex in examples:
        counts[ex.class_label] += 1
    weights = np.zeros(num_classes)
    nonzero = counts > 0
    weights[nonzero] = len(examples) / (num_classes * counts[nonzero])
    return weights


def _eval_metrics(model: FusionModel, feats: list[TweetFeatures], labels: list[int]):
    preds = [model.predict(f).predicted_class for f in feats]
    rep = evaluate_predictions(preds, labels, list(model.config.label_set))
    return rep.accuracy, rep.macro_precision, rep.macro_recall, rep.macro_f1


def train(
    model: FusionModel,
    train_set: list[LabeledExample],
    val_set: list[LabeledExample] | None,
    featurizer: TweetFeaturizer,
    config: TrainConfig,
) -> list[EpochRow]:
    """Mini-batch training of the fusion model.

    Per epoch: seeded shuffle, forward/backward/Adam per batch, then a
    metric row on the validation split and (when enabled) loss-weight
    rebalancing from the epoch's mean losses. Deterministic given the seed.
    """
    if not train_set:
        raise TrainingError("training split is empty")
    binaries = {ex.binary_label for ex in train_set}
    if binaries != {0, 1}:
        raise TrainingError("training split needs both harmful and non-harmful examples")

    num_classes = model.config.num_classes
    feats = featurize_examples(train_set, featurizer, config.seed, stream=0)
    if val_set:
        val_feats = featurize_examples(val_set, featurizer, config.seed, stream=1)
        val_labels = [ex.class_label for ex in val_set]
    else:
        val_feats, val_labels = feats, [ex.class_label for ex in train_set]

    class_weights = None
    if config.class_weights_enabled:
        class_weights = inverse_frequency_weights(train_set, num_classes)

    onehots = np.eye(num_classes)
    weights = LossWeights(config.lambda1, config.lambda2)
    state = AdamState.fresh(model.params)
    shuffle_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([config.seed, 2])))

    history: list[EpochRow] = []
    n = len(train_set)
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n)
        ce_means, bce_means, loss_means = [], [], []
        for b_start in range(0, n, config.batch_size):
            batch = order[b_start : b_start + config.batch_size]
            ce_terms = []
            yb_outputs = []
            yb_labels = []
            for i in batch:
                ex = train_set[i]
                out = model.forward(feats[i])
                w = class_weights[ex.class_label] if class_weights is not None else None
                ce_terms.append(ce_loss(onehots[ex.class_label], out.y_final, w))
                yb_outputs.append(out.y_binary)
                yb_labels.append(ex.binary_label)
            l_ce = scale(functools.reduce(add, ce_terms), 1.0 / len(batch))
            l_bce = bce_loss(np.array(yb_labels, dtype=np.float64), vstack(yb_outputs))
            loss = combined_loss(l_ce, l_bce, weights)
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingError(
                    f"non-finite loss {value} at epoch {epoch}, "
                    f"batch starting at shuffled index {b_start}"
                )
            grads = backward(loss)
            adam_step(model.params, grads, state, config.learning_rate)
            ce_means.append(l_ce.item())
            bce_means.append(l_bce.item())
            loss_means.append(value)

        acc, prec, rec, f1 = _eval_metrics(model, val_feats, val_labels)
        history.append(
            EpochRow(
                epoch,
                float(np.mean(loss_means)),
                weights.lambda1,
                weights.lambda2,
                acc,
                prec,
                rec,
                f1,
            )
        )
        if config.balancing_enabled:
            weights = update_loss_weights(float(np.mean(ce_means)), float(np.mean(bce_means)))
    return history


def _tensor_block(data: np.ndarray) -> dict:
    return {"shape": list(data.shape), "data": [float(v) for v in data.reshape(-1)]}


def save_checkpoint(model: FusionModel, path: str) -> None:
    """Serialize the model as one self-describing JSON document."""
    lda = model.lda_model
    vocab_words = sorted(lda.vocab, key=lda.vocab.get)
    doc = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": config_to_dict(model.config),
        "label_set": list(model.config.label_set),
        "harmful_mask": list(model.config.harmful_mask),
        "lda": {
            "topics": lda.topics,
            "alpha": lda.alpha,
            "beta": lda.beta,
            "vocab": vocab_words,
            "phi": _tensor_block(lda.phi),
        },
        "tensors": {name: _tensor_block(p.data) for name, p in model.params.items()},
    }
    write_atomic(path, json.dumps(doc, sort_keys=True, allow_nan=False))


def load_checkpoint(path: str) -> FusionModel:
    """Rebuild a FusionModel; every tensor round-trips bitwise."""
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise CheckpointError(f"cannot open checkpoint {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CheckpointError(f"checkpoint {path} must be a JSON object")

    version = doc.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format_version {version!r} "
            f"(this build reads version {CHECKPOINT_FORMAT_VERSION})"
        )
    for key in ("config", "label_set", "harmful_mask", "lda", "tensors"):
        if key not in doc:
            raise CheckpointError(f"checkpoint missing top-level key {key!r}")

    config = resolve_config(doc["config"])
    if list(config.label_set) != list(doc["label_set"]) or list(config.harmful_mask) != [
        bool(v) for v in doc["harmful_mask"]
    ]:
        raise CheckpointError("checkpoint label data disagrees with its stored config")

    lda_doc = doc["lda"]
    try:
        phi_block = lda_doc["phi"]
        phi = np.array(phi_block["data"], dtype=np.float64).reshape(phi_block["shape"])
        vocab = {w: i for i, w in enumerate(lda_doc["vocab"])}
        lda = LdaModel(int(lda_doc["topics"]), float(lda_doc["alpha"]), float(lda_doc["beta"]), phi, vocab)
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"checkpoint has a malformed lda block: {exc}") from exc

    expected = expected_tensor_names(config)
    tensors = doc["tensors"]
    missing = sorted(set(expected) - set(tensors))
    if missing:
        raise CheckpointError(f"checkpoint missing tensor {missing[0]!r}")
    extra = sorted(set(tensors) - set(expected))
    if extra:
        raise CheckpointError(f"checkpoint has unexpected tensor {extra[0]!r}")

    from .autodiff import parameter

    params = {}
    for name, shape in expected.items():
        block = tensors[name]
        if tuple(block.get("shape", ())) != shape:
            raise CheckpointError(
                f"tensor {name!r} has shape {block.get('shape')}, expected {list(shape)}"
            )
        data = np.array(block["data"], dtype=np.float64)
        if data.size != shape[0] * shape[1]:
            raise CheckpointError(f"tensor {name!r} data length disagrees with its shape")
        params[name] = parameter(data.reshape(shape), name)
    return FusionModel(config, params, lda)
