"""Latent topic model fitted by collapsed Gibbs sampling.

The per-token sweep is the hot loop; it runs in the compiled extension when
that was built and falls back to a pure-Python twin otherwise. Both kernels
consume one pre-drawn uniform per token, so a given seed yields the same
assignments regardless of which kernel is active.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

try:
    from . import _gibbs as _kernel

    COMPILED_KERNEL = True
except ImportError:  # extension not built; use the Python twin
    from . import _gibbs_py as _kernel

    COMPILED_KERNEL = False


def kernel_name() -> str:
    return "cython" if COMPILED_KERNEL else "python"


@dataclass
class LdaModel:
    """Fitted topic model: topic-word distributions plus the priors."""

    topics: int
    alpha: float
    beta: float
    phi: np.ndarray  # (topics, vocab) rows on the simplex
    vocab: dict[str, int]
    ll_history: list[float] = field(default_factory=list, repr=False)
    fit_theta: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.topics < 2:
            raise ContractError("topic count must be at least 2")
        if self.alpha <= 0 or self.beta <= 0:
            raise ContractError("alpha and beta priors must be positive")
        if self.phi.shape != (self.topics, len(self.vocab)):
            raise ContractError(
                f"phi shape {self.phi.shape} != (topics, vocab) = "
                f"({self.topics}, {len(self.vocab)})"
            )

    def top_words(self, topic: int, n: int = 5) -> list[str]:
        by_index = sorted(self.vocab, key=self.vocab.get)
        order = np.argsort(-self.phi[topic])[:n]
        return [by_index[i] for i in order]


def _flatten(corpus: list[list[str]], vocab: dict[str, int]):
    word_ids, doc_of = [], []
    for d, doc in enumerate(corpus):
        for w in doc:
            word_ids.append(vocab[w])
            doc_of.append(d)
    return (
        np.asarray(word_ids, dtype=np.int64),
        np.asarray(doc_of, dtype=np.int64),
    )


def _log_likelihood(theta, phi, word_ids, doc_of):
    """Corpus token log-likelihood under the current smoothed estimates."""
    probs = np.einsum("tk,kt->t", theta[doc_of], phi[:, word_ids])
    return float(np.log(probs).sum())


def lda_fit(
    corpus: list[list[str]],
    topics: int = 8,
    alpha: float = 0.1,
    beta: float = 0.01,
    iterations: int = 200,
    seed: int = 0,
    ll_every: int = 50,
) -> LdaModel:
    """Collapsed Gibbs sampling over topic assignments. Deterministic for a
    given seed. Topic-word rows are count estimates with beta smoothing.
    """
    if topics < 2:
        raise ContractError("topic count must be at least 2")
    if not corpus:
        raise ContractError("corpus must be nonempty")
    if iterations < 1:
        raise ContractError("iterations must be at least 1")

    words = sorted({w for doc in corpus for w in doc})
    if not words:
        raise ContractError("corpus has an empty vocabulary")
    vocab = {w: i for i, w in enumerate(words)}
    vsize = len(vocab)

    word_ids, doc_of = _flatten(corpus, vocab)
    n_tokens = word_ids.size
    n_docs = len(corpus)

    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.integers(0, topics, size=n_tokens, dtype=np.int64)

    n_dk = np.zeros((n_docs, topics), dtype=np.int64)
    n_kw = np.zeros((topics, vsize), dtype=np.int64)
    n_k = np.zeros(topics, dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    np.add.at(n_kw, (z, word_ids), 1)
    np.add.at(n_k, z, 1)

    doc_lens = n_dk.sum(axis=1, keepdims=True)
    ll_history: list[float] = []
    for it in range(iterations):
        uniforms = rng.random(n_tokens)
        _kernel.fit_sweep(word_ids, doc_of, z, n_dk, n_kw, n_k, alpha, beta, uniforms)
        if (it + 1) % ll_every == 0:
            theta = (n_dk + alpha) / (doc_lens + topics * alpha)
            phi = (n_kw + beta) / (n_k[:, None] + vsize * beta)
            ll_history.append(_log_likelihood(theta, phi, word_ids, doc_of))

    phi = (n_kw + beta) / (n_k[:, None] + vsize * beta)
    fit_theta = (n_dk + alpha) / (doc_lens + topics * alpha)
    return LdaModel(topics, alpha, beta, phi, vocab, ll_history, fit_theta)


def lda_infer(
    words: list[str],
    model: LdaModel,
    iterations: int = 50,
    seed: int = 0,
) -> np.ndarray:
    """Topic distribution for one document with phi held fixed.

    Unknown words are skipped; a document with no known words gets the
    uniform distribution. The returned vector is the smoothed assignment
    proportion (count_k + alpha) / (n + topics * alpha).
    """
    if iterations < 1:
        raise ContractError("iterations must be at least 1")
    known = [model.vocab[w] for w in words if w in model.vocab]
    if not known:
        return np.full(model.topics, 1.0 / model.topics)

    word_ids = np.asarray(known, dtype=np.int64)
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.integers(0, model.topics, size=word_ids.size, dtype=np.int64)
    c_k = np.bincount(z, minlength=model.topics).astype(np.int64)

    for _ in range(iterations):
        uniforms = rng.random(word_ids.size)
        _kernel.infer_sweep(word_ids, z, c_k, model.phi, model.alpha, uniforms)

    theta = (c_k + model.alpha) / (word_ids.size + model.topics * model.alpha)
    return theta
