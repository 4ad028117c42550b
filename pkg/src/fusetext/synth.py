"""Synthetic corpora and resource files for experiments, tests, and demos.

Three generators:

* ``two_topic_docs`` - bags of words drawn from two disjoint vocabularies,
  for exercising the topic model in isolation.
* ``generate_overfit_corpus`` - a tiny dataset whose class is determined by
  dedicated vocabulary, for trainability checks.
* ``generate_fusion_corpus`` - tweets whose harm signal is carried by
  sentiment vocabulary (with many rare suffixed variants covered by the
  lexicon but sparse in training text) and whose harm category is carried
  by topic vocabulary. Word-level bag models see only surface forms, so
  auxiliary resources genuinely help here.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .ioutil import write_atomic

TOPIC_WORDS = {
    "age": ["boomer", "granny", "elder", "senior", "teen", "toddler", "young", "aged", "retire", "decade"],
    "religion": ["church", "temple", "faith", "pray", "holy", "ritual", "sect", "sacred", "shrine", "monk"],
}
POS_BASES = ["kind", "smart", "great", "sweet", "cool", "brave", "funny", "nice", "warm", "gentle"]
NEG_BASES = ["awful", "dumb", "gross", "nasty", "weird", "stupid", "ugly", "lame", "creepy", "vile"]
SUFFIXES = ["ly", "ness", "ish", "est", "er"]
FILLER = [
    "the", "you", "and", "today", "people", "really", "very", "just", "online", "post",
    "thread", "reply", "account", "wall", "group", "chat", "message", "friend", "story", "feed",
]


def two_topic_docs(n_docs: int = 60, seed: int = 0, doc_len: tuple[int, int] = (8, 16)):
    """Documents sampled from two known disjoint word sets with skewed
    per-document topic mixtures. Returns (docs, set_a, set_b).
    """
    set_a = ["ball", "game", "team", "score", "coach", "play", "match", "goal", "win", "field"]
    set_b = ["code", "bug", "compile", "tensor", "python", "loop", "array", "debug", "commit", "merge"]
    rng = np.random.default_rng(seed)
    docs = []
    for d in range(n_docs):
        theta_a = 0.9 if d % 2 == 0 else 0.1
        length = rng.integers(doc_len[0], doc_len[1] + 1)
        doc = []
        for _ in range(length):
            source = set_a if rng.random() < theta_a else set_b
            doc.append(source[rng.integers(len(source))])
        docs.append(doc)
    return docs, set_a, set_b


@dataclass
class CorpusBundle:
    """A dataset plus every resource file the pipeline needs for it."""

    examples: list[tuple[str, str]]  # (text, label name)
    label_set: tuple[str, ...]
    harmful_mask: tuple[bool, ...]
    glove: dict[str, np.ndarray]
    vocab_tokens: list[str]
    lexicon: dict[str, int]
    config_overrides: dict = field(default_factory=dict)


def _sentiment_forms(bases: list[str], rng: np.random.Generator):
    """All suffixed variants of the base adjectives (chains up to length 3).

    The long tail of rare forms is the point: a word-level bag model sees
    each as a distinct atom, while the lexicon and the subword vocabulary
    cover them all.
    """
    forms = []
    for base in bases:
        forms.append(base)
        for s1 in SUFFIXES:
            forms.append(base + s1)
            for s2 in SUFFIXES:
                if s2 == s1:
                    continue
                forms.append(base + s1 + s2)
                for s3 in SUFFIXES:
                    if s3 != s2:
                        forms.append(base + s1 + s2 + s3)
    return forms


def _suffix_chain(rng: np.random.Generator) -> str:
    chain = [_pick(rng, SUFFIXES)]
    if rng.random() < 0.5:
        second = _pick(rng, SUFFIXES)
        if second != chain[-1]:
            chain.append(second)
            if rng.random() < 0.5:
                third = _pick(rng, SUFFIXES)
                if third != chain[-1]:
                    chain.append(third)
    return "".join(chain)


def _structured_vector(rng, dim, sentiment, topic_block):
    vec = rng.normal(scale=0.05, size=dim)
    vec[0:4] += sentiment
    if topic_block == "age":
        vec[4:8] += 1.0
    elif topic_block == "religion":
        vec[8:12] += 1.0
    return vec


def _fusion_glove(rng, dim=16) -> dict[str, np.ndarray]:
    table = {}
    for word in TOPIC_WORDS["age"]:
        table[word] = _structured_vector(rng, dim, 0.0, "age")
    for word in TOPIC_WORDS["religion"]:
        table[word] = _structured_vector(rng, dim, 0.0, "religion")
    for base in POS_BASES:
        core = _structured_vector(rng, dim, 1.0, None)
        for form in _sentiment_forms([base], rng):
            table[form] = core + rng.normal(scale=0.02, size=dim)
    for base in NEG_BASES:
        core = _structured_vector(rng, dim, -1.0, None)
        for form in _sentiment_forms([base], rng):
            table[form] = core + rng.normal(scale=0.02, size=dim)
    for word in FILLER:
        table[word] = rng.normal(scale=0.05, size=dim)
    return table


def _fusion_vocab() -> list[str]:
    tokens = ["[UNK]", "[CLS]"]
    tokens.extend(TOPIC_WORDS["age"])
    tokens.extend(TOPIC_WORDS["religion"])
    tokens.extend(POS_BASES)
    tokens.extend(NEG_BASES)
    tokens.extend(FILLER)
    tokens.extend("##" + s for s in SUFFIXES)
    tokens.append("!")
    tokens.append("<user>")
    return tokens


def _pick(rng, pool):
    return pool[rng.integers(len(pool))]


def generate_fusion_corpus(n_examples: int = 600, seed: int = 0) -> CorpusBundle:
    """Tweets with topic-determined harm category and sentiment-determined
    harm polarity; sentiment words are frequently rare suffixed variants.
    """
    rng = np.random.default_rng(seed)
    label_set = ("not_cyberbullying", "age", "religion")
    harmful_mask = (False, True, True)
    lexicon = {}
    for base in POS_BASES:
        for form in _sentiment_forms([base], rng):
            lexicon[form] = 1
    for base in NEG_BASES:
        for form in _sentiment_forms([base], rng):
            lexicon[form] = -1

    examples = []
    for _ in range(n_examples):
        label = _pick(rng, label_set)
        variant_rate = rng.uniform(0.4, 1.0)
        if label == "not_cyberbullying":
            bases, topic_pool = POS_BASES, TOPIC_WORDS["age"] + TOPIC_WORDS["religion"]
        else:
            bases = NEG_BASES
            topic_pool = TOPIC_WORDS[label]
        tokens = []
        for _ in range(rng.integers(2, 5)):
            tokens.append(_pick(rng, topic_pool))
        for _ in range(rng.integers(2, 5)):
            base = _pick(rng, bases)
            if rng.random() < variant_rate:
                tokens.append(base + _suffix_chain(rng))
            else:
                tokens.append(base)
        for _ in range(rng.integers(3, 7)):
            tokens.append(_pick(rng, FILLER))
        order = rng.permutation(len(tokens))
        tokens = [tokens[i] for i in order]
        if rng.random() < 0.3:
            tokens.insert(0, "@someone")
        if rng.random() < 0.4:
            tokens.append("!")
        examples.append((" ".join(tokens), label))

    return CorpusBundle(
        examples=examples,
        label_set=label_set,
        harmful_mask=harmful_mask,
        glove=_fusion_glove(rng),
        vocab_tokens=_fusion_vocab(),
        lexicon=lexicon,
        config_overrides={
            "encoder": {"d": 32, "layers": 1, "heads": 2, "ffn_dim": 64, "max_len": 32},
            "lda": {"topics": 4, "iterations": 150, "infer_iterations": 30},
            "train": {"epochs": 12, "batch_size": 16, "learning_rate": 2e-3},
        },
    )


def generate_overfit_corpus(n_examples: int = 64, seed: int = 0) -> CorpusBundle:
    """Small dataset whose label is fixed by dedicated class vocabulary."""
    rng = np.random.default_rng(seed)
    label_set = ("not_cyberbullying", "age", "religion", "ethnicity")
    harmful_mask = (False, True, True, True)
    class_words = {
        "not_cyberbullying": ["sunny", "picnic", "garden"],
        "age": ["boomer", "granny", "elder"],
        "religion": ["church", "temple", "pray"],
        "ethnicity": ["accent", "border", "passport"],
    }
    filler = ["the", "you", "and", "today", "very"]
    examples = []
    for i in range(n_examples):
        label = label_set[i % len(label_set)]
        tokens = [_pick(rng, class_words[label]) for _ in range(rng.integers(2, 4))]
        tokens.extend(_pick(rng, filler) for _ in range(rng.integers(2, 5)))
        order = rng.permutation(len(tokens))
        examples.append((" ".join(tokens[j] for j in order), label))

    all_words = sorted({w for ws in class_words.values() for w in ws} | set(filler))
    glove = {w: rng.normal(scale=0.5, size=8) for w in all_words}
    lexicon = {w: 1 for w in class_words["not_cyberbullying"]}
    lexicon.update({w: -1 for ws in list(class_words.values())[1:] for w in ws})
    return CorpusBundle(
        examples=examples,
        label_set=label_set,
        harmful_mask=harmful_mask,
        glove=glove,
        vocab_tokens=["[UNK]", "[CLS]", *all_words],
        lexicon=lexicon,
        config_overrides={
            "encoder": {"d": 16, "layers": 1, "heads": 2, "ffn_dim": 32, "max_len": 16},
            "lda": {"topics": 2, "iterations": 60, "infer_iterations": 15},
            "train": {"epochs": 60, "batch_size": 16, "learning_rate": 5e-3},
        },
    )


def dataset_csv(examples: list[tuple[str, str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tweet_text", "cyberbullying_type"])
    for text, label in examples:
        writer.writerow([text, label])
    return buf.getvalue()


def glove_text(table: dict[str, np.ndarray]) -> str:
    lines = []
    for word in sorted(table):
        values = " ".join(repr(float(v)) for v in table[word])
        lines.append(f"{word} {values}")
    return "\n".join(lines) + "\n"


def lexicon_text(lexicon: dict[str, int]) -> str:
    lines = [f"{w}\t{'+1' if p > 0 else '-1'}" for w, p in sorted(lexicon.items())]
    return "\n".join(lines) + "\n"


def write_bundle(bundle: CorpusBundle, out_dir: str, extra_config: dict | None = None) -> dict[str, str]:
    """Write dataset, resources, and a ready-to-train config into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "dataset": os.path.join(out_dir, "dataset.csv"),
        "glove": os.path.join(out_dir, "glove.txt"),
        "vocab": os.path.join(out_dir, "vocab.txt"),
        "lexicon": os.path.join(out_dir, "lexicon.txt"),
        "config": os.path.join(out_dir, "config.json"),
    }
    write_atomic(paths["dataset"], dataset_csv(bundle.examples))
    write_atomic(paths["glove"], glove_text(bundle.glove))
    write_atomic(paths["vocab"], "\n".join(bundle.vocab_tokens) + "\n")
    write_atomic(paths["lexicon"], lexicon_text(bundle.lexicon))

    config = {
        "label_set": list(bundle.label_set),
        "harmful_mask": list(bundle.harmful_mask),
        "paths": {
            "dataset": paths["dataset"],
            "glove": paths["glove"],
            "vocab": paths["vocab"],
            "lexicon": paths["lexicon"],
        },
    }
    config.update(bundle.config_overrides)
    if extra_config:
        for key, value in extra_config.items():
            if isinstance(value, dict) and isinstance(config.get(key), dict):
                config[key].update(value)
            else:
                config[key] = value
    write_atomic(paths["config"], json.dumps(config, indent=2, sort_keys=True))
    return paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m fusetext.synth",
        description="Emit a synthetic corpus plus resource files and config.",
    )
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--examples", type=int, default=600)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--kind", choices=("fusion", "overfit"), default="fusion", help="corpus flavor"
    )
    args = parser.parse_args(argv)
    if args.kind == "fusion":
        bundle = generate_fusion_corpus(args.examples, args.seed)
    else:
        bundle = generate_overfit_corpus(args.examples, args.seed)
    paths = write_bundle(bundle, args.out)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
