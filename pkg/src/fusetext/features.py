"""Auxiliary tweet-level features: lexicon sentiment, topic distribution,
and the mean word vector, assembled into one fixed-order embedding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DataError
from .lda import LdaModel, lda_infer
from .textpipe import (
    CLS_TOKEN,
    GloveTable,
    WordPieceVocab,
    normalize_and_tokenize,
    truncate_tweet,
    wordpiece_tokenize,
)

SENTIMENT_DIM = 4


@dataclass
class SentimentLexicon:
    """Word polarity map: +1 positive, -1 negative."""

    polarity: dict[str, int]

    def __post_init__(self):
        bad = {w: p for w, p in self.polarity.items() if p not in (1, -1)}
        if bad:
            raise ContractError(f"lexicon polarities must be +1 or -1: {bad}")


def load_lexicon(path: str) -> SentimentLexicon:
    """Parse a lexicon file, one `word<TAB>+1|-1` entry per line."""
    polarity: dict[str, int] = {}
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open lexicon file {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected `word<TAB>polarity`")
            word, value = parts
            if value not in ("+1", "-1", "1"):
                raise DataError(f"{path}:{lineno}: polarity must be +1 or -1, got {value!r}")
            if word in polarity:
                raise DataError(f"{path}:{lineno}: duplicate word {word!r}")
            polarity[word] = 1 if value in ("+1", "1") else -1
    return SentimentLexicon(polarity)


def sentiment_features(words: list[str], lexicon: SentimentLexicon) -> np.ndarray:
    """Four reals: polarity score, then positive/negative/neutral fractions.

    score = (#pos - #neg) / max(1, #words); an empty word list is fully
    neutral: (0, 0, 0, 1).
    """
    n = len(words)
    if n == 0:
        return np.array([0.0, 0.0, 0.0, 1.0])
    pos = sum(1 for w in words if lexicon.polarity.get(w) == 1)
    neg = sum(1 for w in words if lexicon.polarity.get(w) == -1)
    score = (pos - neg) / max(1, n)
    return np.array([score, pos / n, neg / n, (n - pos - neg) / n])


@dataclass
class AuxEmbedding:
    """Fixed-order concatenation: sentiment (4), topic (K), mean word vector."""

    sentiment: np.ndarray
    topic: np.ndarray
    glove_mean: np.ndarray

    def __post_init__(self):
        self.sentiment = np.asarray(self.sentiment, dtype=np.float64).reshape(-1)
        self.topic = np.asarray(self.topic, dtype=np.float64).reshape(-1)
        self.glove_mean = np.asarray(self.glove_mean, dtype=np.float64).reshape(-1)
        if self.sentiment.size != SENTIMENT_DIM:
            raise ContractError(f"sentiment block must have {SENTIMENT_DIM} entries")
        if abs(self.topic.sum() - 1.0) > 1e-9:
            raise ContractError("topic block must sum to 1")

    @property
    def dimension(self) -> int:
        return self.sentiment.size + self.topic.size + self.glove_mean.size

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.sentiment, self.topic, self.glove_mean]).reshape(1, -1)


def build_aux_embedding(sentiment, topic, glove_mean) -> AuxEmbedding:
    return AuxEmbedding(sentiment, topic, glove_mean)


def aux_dimension(topics: int, glove_dim: int) -> int:
    return SENTIMENT_DIM + topics + glove_dim


@dataclass
class TweetFeatures:
    """Model-ready view of one tweet."""

    words: list[str]
    pieces: list[str]
    token_ids: np.ndarray  # includes the leading [CLS] id
    segment_ids: np.ndarray
    aux: AuxEmbedding


class TweetFeaturizer:
    """Turns raw text into encoder inputs plus the auxiliary embedding.

    Stateless per call apart from the immutable resources it holds, so one
    instance can serve concurrent callers.
    """

    def __init__(
        self,
        vocab: WordPieceVocab,
        glove: GloveTable,
        lexicon: SentimentLexicon,
        lda_model: LdaModel,
        max_len: int,
        infer_iterations: int = 50,
    ):
        if CLS_TOKEN not in vocab:
            raise DataError(f"vocab must reserve {CLS_TOKEN} for sequence summaries")
        if max_len < 2:
            raise ContractError("max_len must leave room for [CLS] plus one piece")
        self.vocab = vocab
        self.glove = glove
        self.lexicon = lexicon
        self.lda_model = lda_model
        self.max_pieces = max_len - 1
        self.infer_iterations = infer_iterations
        self.cls_id = vocab.token_to_id[CLS_TOKEN]

    @property
    def aux_dim(self) -> int:
        return aux_dimension(self.lda_model.topics, self.glove.dimension)

    def glove_mean(self, words: list[str]) -> np.ndarray:
        if not words:
            return np.zeros(self.glove.dimension)
        rows = np.stack([self.glove.vector(w) for w in words])
        return rows.mean(axis=0)

    def aux_embedding(self, words: list[str], seed: int = 0) -> AuxEmbedding:
        sentiment = sentiment_features(words, self.lexicon)
        topic = lda_infer(words, self.lda_model, self.infer_iterations, seed)
        return AuxEmbedding(sentiment, topic, self.glove_mean(words))

    def features(self, text: str, seed: int = 0) -> TweetFeatures:
        words = normalize_and_tokenize(text)
        tok = truncate_tweet(wordpiece_tokenize(words, self.vocab), self.max_pieces)
        token_ids = np.array([self.cls_id] + tok.token_ids, dtype=np.intp)
        segment_ids = np.zeros(token_ids.size, dtype=np.intp)
        # Aux channels summarize the whole tweet, not the truncated piece window.
        aux = self.aux_embedding(words, seed)
        return TweetFeatures(words, tok.pieces, token_ids, segment_ids, aux)
