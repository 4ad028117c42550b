"""Tweet preprocessing: normalization, whitespace word tokenization, greedy
subword tokenization, word-vector lookup, and word-level averaging of
per-piece states.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor, matmul
from .errors import ContractError, DataError

URL_TOKEN = "<url>"
USER_TOKEN = "<user>"
UNK_TOKEN = "[UNK]"
CLS_TOKEN = "[CLS]"
CONTINUATION_PREFIX = "##"

_URL_RE = re.compile(r"(https?://\S+|www\.\S+)")
_MENTION_RE = re.compile(r"@\w+")
# A word run, or a single non-word non-space character (punctuation).
_PIECE_RE = re.compile(r"\w+|[^\w\s]")


def normalize_and_tokenize(text: str) -> list[str]:
    """Lowercase, mask URLs/@-mentions, split on whitespace, and detach each
    punctuation character as its own token. Empty input gives an empty list.
    """
    lowered = text.lower()
    lowered = _URL_RE.sub(f" {URL_TOKEN} ", lowered)
    lowered = _MENTION_RE.sub(f" {USER_TOKEN} ", lowered)
    words: list[str] = []
    for chunk in lowered.split():
        if chunk in (URL_TOKEN, USER_TOKEN):
            words.append(chunk)
        else:
            words.extend(_PIECE_RE.findall(chunk))
    return words


@dataclass
class TokenizedTweet:
    """Subword decomposition of one tweet with the piece-to-word alignment."""

    words: list[str]
    pieces: list[str]
    piece_to_word: list[int]
    token_ids: list[int]

    def __post_init__(self):
        if not (len(self.pieces) == len(self.piece_to_word) == len(self.token_ids)):
            raise ContractError("pieces, alignment, and token ids must be equally long")
        if self.piece_to_word:
            if any(b < a for a, b in zip(self.piece_to_word, self.piece_to_word[1:])):
                raise ContractError("piece_to_word must be nondecreasing")
            covered = set(self.piece_to_word)
            if covered != set(range(len(self.words))):
                raise ContractError("piece_to_word must cover every word index")
        elif self.words:
            raise ContractError("nonempty word list with no pieces")


@dataclass
class WordPieceVocab:
    tokens: list[str]
    token_to_id: dict[str, int] = field(init=False)
    unk_id: int = field(init=False)

    def __post_init__(self):
        self.token_to_id = {}
        for i, tok in enumerate(self.tokens):
            if tok in self.token_to_id:
                raise DataError(f"duplicate vocab token: {tok!r}")
            self.token_to_id[tok] = i
        if UNK_TOKEN not in self.token_to_id:
            raise DataError(f"vocab must contain {UNK_TOKEN}")
        self.unk_id = self.token_to_id[UNK_TOKEN]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id


def wordpiece_tokenize(words: list[str], vocab: WordPieceVocab) -> TokenizedTweet:
    """Greedy longest-match-first subword split. Continuation pieces are
    matched with the "##" prefix; a word with no decomposition becomes the
    single unknown token.
    """
    pieces: list[str] = []
    alignment: list[int] = []
    for w_idx, word in enumerate(words):
        word_pieces = _split_word(word, vocab)
        pieces.extend(word_pieces)
        alignment.extend([w_idx] * len(word_pieces))
    ids = [vocab.token_to_id[p] for p in pieces]
    return TokenizedTweet(list(words), pieces, alignment, ids)


def _split_word(word: str, vocab: WordPieceVocab) -> list[str]:
    out: list[str] = []
    start = 0
    while start < len(word):
        end = len(word)
        match = None
        while start < end:
            candidate = word[start:end]
            if start > 0:
                candidate = CONTINUATION_PREFIX + candidate
            if candidate in vocab:
                match = candidate
                break
            end -= 1
        if match is None:
            return [UNK_TOKEN]
        out.append(match)
        start = end
    return out if out else [UNK_TOKEN]


def truncate_tweet(tok: TokenizedTweet, max_pieces: int) -> TokenizedTweet:
    """Cap a tokenized tweet at max_pieces pieces, dropping now-uncovered words."""
    if max_pieces < 1:
        raise ContractError("max_pieces must be >= 1")
    if len(tok.pieces) <= max_pieces:
        return tok
    alignment = tok.piece_to_word[:max_pieces]
    last_word = alignment[-1]
    return TokenizedTweet(
        tok.words[: last_word + 1],
        tok.pieces[:max_pieces],
        alignment,
        tok.token_ids[:max_pieces],
    )


@dataclass
class GloveTable:
    dimension: int
    entries: dict[str, np.ndarray]

    def vector(self, word: str) -> np.ndarray:
        """Stored vector for the word, or the zero vector when out of vocabulary."""
        vec = self.entries.get(word)
        if vec is None:
            return np.zeros(self.dimension)
        return vec


def glove_embed(words: list[str], table: GloveTable) -> Tensor:
    """Stack per-word table vectors into an (n_words x dimension) tensor."""
    if not words:
        raise ContractError("glove_embed needs at least one word")
    rows = np.stack([table.vector(w) for w in words])
    return Tensor(rows)


def word_average(subword_states: Tensor, piece_to_word: list[int]) -> Tensor:
    """Average piece rows per source word: row w of the result is the mean of
    all rows whose alignment entry is w. Differentiable (built on matmul).
    """
    n_pieces = subword_states.shape[0]
    if len(piece_to_word) != n_pieces:
        raise ContractError(
            f"alignment length {len(piece_to_word)} != piece rows {n_pieces}"
        )
    n_words = max(piece_to_word) + 1
    counts = np.zeros(n_words)
    for w in piece_to_word:
        if w < 0:
            raise ContractError("alignment indices must be nonnegative")
        counts[w] += 1
    if (counts == 0).any():
        missing = int(np.argmax(counts == 0))
        raise ContractError(f"word {missing} has no aligned pieces")
    averager = np.zeros((n_words, n_pieces))
    for p, w in enumerate(piece_to_word):
        averager[w, p] = 1.0 / counts[w]
    return matmul(Tensor(averager), subword_states)


def load_glove_table(path: str) -> GloveTable:
    """Parse a text table, one `word v1 v2 ... v_dim` entry per line."""
    entries: dict[str, np.ndarray] = {}
    dimension = None
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open word-vector file {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            parts = line.split()
            word, values = parts[0], parts[1:]
            if dimension is None:
                if not values:
                    raise DataError(f"{path}:{lineno}: entry has no values")
                dimension = len(values)
            if len(values) != dimension:
                raise DataError(
                    f"{path}:{lineno}: expected {dimension} values, found {len(values)}"
                )
            if word in entries:
                raise DataError(f"{path}:{lineno}: duplicate word {word!r}")
            try:
                entries[word] = np.array([float(v) for v in values])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric value ({exc})") from exc
    if dimension is None:
        raise DataError(f"word-vector file {path} is empty")
    return GloveTable(dimension, entries)


def load_vocab(path: str) -> WordPieceVocab:
    """Parse a subword vocabulary, one token per line."""
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open vocab file {path}: {exc}") from exc
    with handle:
        tokens = [line.strip() for line in handle if line.strip()]
    if not tokens:
        raise DataError(f"vocab file {path} is empty")
    return WordPieceVocab(tokens)
