"""Command-line surface: train, evaluate (optionally against the TF-IDF
baseline), and single-text prediction.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 runtime
failure. Artifacts are written via temp-and-rename, so a nonzero exit never
leaves a partially written file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import __version__
from .baseline import tfidf_lr_baseline
from .data import load_config, load_dataset, split
from .errors import CheckpointError, ConfigError, DataError, FusetextError
from .metrics import evaluate_predictions, render_reports
from .model import Predictor
from .pipeline import build_model, fit_topic_model, load_resources, make_featurizer
from .textpipe import normalize_and_tokenize
from .training import featurize_examples, load_checkpoint, save_checkpoint, save_history, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

SEED_ENV_VAR = "FUSETEXT_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fusetext", description=__doc__)
    parser.add_argument("--version", action="version", version=f"fusetext {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model and write checkpoint + history")
    p_train.add_argument("--config", required=True, help="run configuration (JSON)")
    p_train.add_argument("--data", required=True, help="labeled dataset (CSV)")
    p_train.add_argument("--out", required=True, help="output directory")

    p_eval = sub.add_parser("evaluate", help="evaluate a checkpoint on a dataset split")
    p_eval.add_argument("--model", required=True, help="checkpoint path")
    p_eval.add_argument("--data", required=True, help="labeled dataset (CSV)")
    p_eval.add_argument("--baseline", action="store_true", help="also run the TF-IDF baseline")
    p_eval.add_argument("--json", action="store_true", dest="as_json", help="emit JSON")

    p_pred = sub.add_parser("predict", help="classify one text")
    p_pred.add_argument("--model", required=True, help="checkpoint path")
    p_pred.add_argument("--text", required=True, help="text to classify")
    return parser


def _apply_seed_env(config):
    value = os.environ.get(SEED_ENV_VAR)
    if value is None:
        return config
    try:
        seed = int(value)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {value!r}") from exc
    return dataclasses.replace(config, train=dataclasses.replace(config.train, seed=seed))


def cmd_train(args) -> int:
    config = _apply_seed_env(load_config(args.config))
    examples = load_dataset(args.data, config.label_set, config.harmful_mask)
    train_set, val_set = split(
        examples, config.train_fraction, config.train.seed, list(config.label_set)
    )
    vocab, glove, lexicon = load_resources(config)
    lda_model = fit_topic_model(train_set, config)
    model, featurizer = build_model(config, vocab, glove, lexicon, lda_model)

    print(
        f"training on {len(train_set)} examples "
        f"({len(val_set)} held out), {config.train.epochs} epochs",
        file=sys.stderr,
    )
    history = train(model, train_set, val_set, featurizer, config.train)

    os.makedirs(args.out, exist_ok=True)
    ckpt_path = os.path.join(args.out, "model.ckpt.json")
    history_path = os.path.join(args.out, "history.csv")
    save_checkpoint(model, ckpt_path)
    save_history(history, history_path)

    last = history[-1]
    print(f"checkpoint: {ckpt_path}")
    print(f"history: {history_path}")
    print(
        f"final epoch {last.epoch}: loss={last.train_loss:.4f} "
        f"accuracy={last.accuracy:.4f} precision={last.precision:.4f} "
        f"recall={last.recall:.4f} f1={last.f1:.4f}"
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = load_checkpoint(args.model)
    config = model.config
    examples = load_dataset(args.data, config.label_set, config.harmful_mask)
    train_set, test_set = split(
        examples, config.train_fraction, config.train.seed, list(config.label_set)
    )
    vocab, glove, lexicon = load_resources(config)
    featurizer = make_featurizer(model, vocab, glove, lexicon)

    feats = featurize_examples(test_set, featurizer, config.train.seed, stream=1)
    preds = [model.predict(f).predicted_class for f in feats]
    labels = [ex.class_label for ex in test_set]
    reports = {"fusion": evaluate_predictions(preds, labels, list(config.label_set))}
    if args.baseline:
        reports["tfidf_logreg"] = tfidf_lr_baseline(
            train_set, test_set, config.train.seed, list(config.label_set)
        )

    if args.as_json:
        if args.baseline:
            doc = {name: rep.to_dict() for name, rep in reports.items()}
        else:
            doc = reports["fusion"].to_dict()
        print(json.dumps(doc, sort_keys=True))
    else:
        print(render_reports(reports))
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_checkpoint(args.model)
    config = model.config
    if not normalize_and_tokenize(args.text):
        raise DataError("text is empty after normalization")
    vocab, glove, lexicon = load_resources(config)
    featurizer = make_featurizer(model, vocab, glove, lexicon)
    prediction = Predictor(model, featurizer).predict_text(args.text, seed=config.train.seed)

    print(f"predicted_class: {config.label_set[prediction.predicted_class]}")
    print(f"y_binary: {prediction.y_binary!r}")
    for name, p in zip(config.label_set, prediction.y_final):
        print(f"y_final[{name}]: {float(p)!r}")
    return EXIT_OK


_DISPATCH = {"train": cmd_train, "evaluate": cmd_evaluate, "predict": cmd_predict}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ConfigError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FusetextError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
