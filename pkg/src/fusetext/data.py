"""Dataset ingestion, deterministic stratified splitting, and the run
configuration document with its defaults and validation.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from .encoder import EncoderConfig
from .errors import ConfigError, DataError
from .heads import validate_harmful_mask

DEFAULT_LABEL_SET = (
    "not_cyberbullying",
    "gender",
    "religion",
    "age",
    "ethnicity",
    "other_cyberbullying",
)
DEFAULT_HARMFUL_MASK = (False, True, True, True, True, True)

TEXT_COLUMN = "tweet_text"
LABEL_COLUMN = "cyberbullying_type"


@dataclass
class LabeledExample:
    text: str
    class_label: int
    binary_label: int


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 1e-3
    seed: int = 42
    lambda_gate: float = 0.7
    lambda1: float = 0.5
    lambda2: float = 0.5
    balancing_enabled: bool = True
    class_weights_enabled: bool = False
    disable_aux: bool = False
    disable_cross_attention: bool = False
    disable_gating: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not 0.0 <= self.lambda_gate <= 1.0:
            raise ConfigError(f"lambda_gate must lie in [0, 1], got {self.lambda_gate}")
        for name in ("lambda1", "lambda2"):
            v = getattr(self, name)
            if not 0.1 <= v <= 0.9:
                raise ConfigError(f"{name} must lie in [0.1, 0.9], got {v}")
        if abs(self.lambda1 + self.lambda2 - 1.0) > 1e-9:
            raise ConfigError("lambda1 + lambda2 must equal 1")


@dataclass(frozen=True)
class LdaConfig:
    topics: int = 8
    alpha: float = 0.1
    beta: float = 0.01
    iterations: int = 200
    infer_iterations: int = 50

    def __post_init__(self):
        if self.topics < 2:
            raise ConfigError("lda topics must be at least 2")
        if self.alpha <= 0 or self.beta <= 0:
            raise ConfigError("lda priors must be positive")
        if self.iterations < 1 or self.infer_iterations < 1:
            raise ConfigError("lda iteration counts must be at least 1")


@dataclass(frozen=True)
class DataPaths:
    glove: str = ""
    vocab: str = ""
    lexicon: str = ""
    dataset: str = ""


@dataclass(frozen=True)
class RunConfig:
    label_set: tuple[str, ...] = DEFAULT_LABEL_SET
    harmful_mask: tuple[bool, ...] = DEFAULT_HARMFUL_MASK
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    lda: LdaConfig = field(default_factory=LdaConfig)
    paths: DataPaths = field(default_factory=DataPaths)
    train_fraction: float = 0.8
    glove_dim: int = 0  # resolved from the vector file before training

    def __post_init__(self):
        if not self.label_set:
            raise ConfigError("label_set must be nonempty")
        if len(set(self.label_set)) != len(self.label_set):
            raise ConfigError("label_set entries must be unique")
        if len(self.harmful_mask) != len(self.label_set):
            raise ConfigError("harmful_mask length must match label_set")
        validate_harmful_mask(self.harmful_mask)
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.glove_dim < 0:
            raise ConfigError("glove_dim cannot be negative")

    @property
    def num_classes(self) -> int:
        return len(self.label_set)

    def resolved(self, vocab_size: int, glove_dim: int) -> "RunConfig":
        return dataclasses.replace(
            self,
            encoder=dataclasses.replace(self.encoder, vocab_size=vocab_size),
            glove_dim=glove_dim,
        )


_SECTION_TYPES = {
    "encoder": EncoderConfig,
    "train": TrainConfig,
    "lda": LdaConfig,
    "paths": DataPaths,
}


def resolve_config(doc: dict) -> RunConfig:
    """Fill unspecified fields with defaults; reject unknown keys and
    out-of-range values.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    known_top = {"label_set", "harmful_mask", "train_fraction", "glove_dim", *_SECTION_TYPES}
    unknown = set(doc) - known_top
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    kwargs = {}
    if "label_set" in doc:
        kwargs["label_set"] = tuple(doc["label_set"])
    if "harmful_mask" in doc:
        kwargs["harmful_mask"] = tuple(bool(v) for v in doc["harmful_mask"])
    if "train_fraction" in doc:
        kwargs["train_fraction"] = float(doc["train_fraction"])
    if "glove_dim" in doc:
        kwargs["glove_dim"] = int(doc["glove_dim"])
    for section, cls in _SECTION_TYPES.items():
        body = doc.get(section, {})
        if not isinstance(body, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        valid = {f.name for f in dataclasses.fields(cls)}
        bad = set(body) - valid
        if bad:
            raise ConfigError(f"unknown keys in config section {section!r}: {sorted(bad)}")
        try:
            kwargs[section] = cls(**body)
        except TypeError as exc:
            raise ConfigError(f"bad config section {section!r}: {exc}") from exc
    try:
        return RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(config: RunConfig) -> dict:
    return {
        "label_set": list(config.label_set),
        "harmful_mask": list(config.harmful_mask),
        "encoder": dataclasses.asdict(config.encoder),
        "train": dataclasses.asdict(config.train),
        "lda": dataclasses.asdict(config.lda),
        "paths": dataclasses.asdict(config.paths),
        "train_fraction": config.train_fraction,
        "glove_dim": config.glove_dim,
    }


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot open config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return resolve_config(doc)


def load_dataset(path: str, label_set, harmful_mask) -> list[LabeledExample]:
    """Read a labeled CSV with header columns tweet_text,cyberbullying_type.

    Quoted fields may contain commas and newlines. The binary label is
    derived from the class label through the harmful mask.
    """
    mask = validate_harmful_mask(harmful_mask)
    label_index = {name: i for i, name in enumerate(label_set)}
    try:
        handle = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open dataset file {path}: {exc}") from exc
    examples: list[LabeledExample] = []
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataError(f"dataset file {path} is empty (no header row)")
        missing = {TEXT_COLUMN, LABEL_COLUMN} - set(reader.fieldnames)
        if missing:
            raise DataError(f"dataset file {path} lacks required columns: {sorted(missing)}")
        for row_num, row in enumerate(reader, start=1):
            text = row.get(TEXT_COLUMN)
            label = row.get(LABEL_COLUMN)
            if text is None or label is None:
                raise DataError(f"{path}: row {row_num} is malformed")
            if label not in label_index:
                raise DataError(
                    f"{path}: row {row_num} has unknown label {label!r} "
                    f"(expected one of {list(label_set)})"
                )
            cls = label_index[label]
            examples.append(LabeledExample(text, cls, int(mask[cls])))
    if not examples:
        raise DataError(f"dataset file {path} has no data rows")
    return examples


def split(
    examples: list[LabeledExample],
    train_fraction: float,
    seed: int,
    label_names=None,
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Deterministic stratified split: per class, shuffle with the seeded
    generator and take floor(fraction * count) examples for training.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    if len(examples) < 2:
        raise DataError("need at least 2 examples to split")

    by_class: dict[int, list[int]] = {}
    for i, ex in enumerate(examples):
        by_class.setdefault(ex.class_label, []).append(i)

    rng = np.random.Generator(np.random.PCG64(seed))
    train_idx: list[int] = []
    test_idx: list[int] = []
    for cls in sorted(by_class):
        idxs = by_class[cls]
        if len(idxs) < 2:
            name = label_names[cls] if label_names else f"#{cls}"
            raise DataError(f"class {name} has fewer than 2 examples; cannot stratify")
        order = rng.permutation(len(idxs))
        n_train = int(np.floor(train_fraction * len(idxs)))
        train_idx.extend(idxs[j] for j in order[:n_train])
        test_idx.extend(idxs[j] for j in order[n_train:])
    train_idx.sort()
    test_idx.sort()
    return [examples[i] for i in train_idx], [examples[i] for i in test_idx]
