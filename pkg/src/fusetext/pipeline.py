"""Assembly helpers wiring resources, topic model, featurizer, and model
together; used by the CLI and by anything driving the stack end to end.
"""

from __future__ import annotations

import numpy as np

from .data import LabeledExample, RunConfig
from .features import SentimentLexicon, TweetFeaturizer, load_lexicon
from .lda import LdaModel, lda_fit
from .model import FusionModel
from .textpipe import GloveTable, WordPieceVocab, load_glove_table, load_vocab, normalize_and_tokenize

LDA_SEED_STREAM = 3
INIT_SEED_STREAM = 4


def _derive_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1)[0])


def load_resources(config: RunConfig) -> tuple[WordPieceVocab, GloveTable, SentimentLexicon]:
    vocab = load_vocab(config.paths.vocab)
    glove = load_glove_table(config.paths.glove)
    lexicon = load_lexicon(config.paths.lexicon)
    return vocab, glove, lexicon


def fit_topic_model(examples: list[LabeledExample], config: RunConfig) -> LdaModel:
    corpus = [normalize_and_tokenize(ex.text) for ex in examples]
    return lda_fit(
        corpus,
        topics=config.lda.topics,
        alpha=config.lda.alpha,
        beta=config.lda.beta,
        iterations=config.lda.iterations,
        seed=_derive_seed(config.train.seed, LDA_SEED_STREAM),
    )


def build_model(
    config: RunConfig,
    vocab: WordPieceVocab,
    glove: GloveTable,
    lexicon: SentimentLexicon,
    lda_model: LdaModel,
) -> tuple[FusionModel, TweetFeaturizer]:
    resolved = config.resolved(vocab_size=len(vocab), glove_dim=glove.dimension)
    featurizer = TweetFeaturizer(
        vocab,
        glove,
        lexicon,
        lda_model,
        max_len=resolved.encoder.max_len,
        infer_iterations=resolved.lda.infer_iterations,
    )
    model = FusionModel.initialize(
        resolved, lda_model, seed=_derive_seed(config.train.seed, INIT_SEED_STREAM)
    )
    return model, featurizer


def make_featurizer(model: FusionModel, vocab, glove, lexicon) -> TweetFeaturizer:
    """Featurizer for a loaded checkpoint (resources reloaded from paths)."""
    return TweetFeaturizer(
        vocab,
        glove,
        lexicon,
        model.lda_model,
        max_len=model.config.encoder.max_len,
        infer_iterations=model.config.lda.infer_iterations,
    )
