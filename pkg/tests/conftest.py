"""Shared builders for tests that need a full model stack in memory."""

from fusetext.data import LabeledExample, resolve_config
from fusetext.features import SentimentLexicon
from fusetext.pipeline import build_model, fit_topic_model
from fusetext.synth import CorpusBundle
from fusetext.textpipe import GloveTable, WordPieceVocab


def bundle_examples(bundle: CorpusBundle) -> list[LabeledExample]:
    label_index = {name: i for i, name in enumerate(bundle.label_set)}
    return [
        LabeledExample(text, label_index[name], int(bundle.harmful_mask[label_index[name]]))
        for text, name in bundle.examples
    ]


def _merge(base: dict, extra: dict) -> dict:
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            base[key] = {**base[key], **value}
        else:
            base[key] = value
    return base


def build_stack(bundle: CorpusBundle, config_extra: dict | None = None, lda_examples=None):
    """Build (model, featurizer, examples, config) from an in-memory bundle,
    the same wiring the CLI performs from files.
    """
    examples = bundle_examples(bundle)
    doc = _merge(
        {
            "label_set": list(bundle.label_set),
            "harmful_mask": list(bundle.harmful_mask),
        },
        {k: dict(v) if isinstance(v, dict) else v for k, v in bundle.config_overrides.items()},
    )
    if config_extra:
        doc = _merge(doc, config_extra)
    config = resolve_config(doc)

    glove_dim = len(next(iter(bundle.glove.values())))
    vocab = WordPieceVocab(list(bundle.vocab_tokens))
    glove = GloveTable(glove_dim, dict(bundle.glove))
    lexicon = SentimentLexicon(dict(bundle.lexicon))
    lda_model = fit_topic_model(lda_examples or examples, config)
    model, featurizer = build_model(config, vocab, glove, lexicon, lda_model)
    return model, featurizer, examples, model.config
