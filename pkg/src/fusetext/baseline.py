"""Word-level TF-IDF features into a multinomial logistic regression,
trained by full-batch gradient descent. Serves as the comparison row next
to the fusion model and stays independent of the autodiff stack.
"""

from __future__ import annotations

import numpy as np

from .data import LabeledExample
from .errors import DataError
from .metrics import MetricsReport, evaluate_predictions
from .textpipe import normalize_and_tokenize


def _count_matrix(docs: list[list[str]], vocab: dict[str, int]) -> np.ndarray:
    counts = np.zeros((len(docs), len(vocab)))
    for i, words in enumerate(docs):
        for w in words:
            j = vocab.get(w)
            if j is not None:
                counts[i, j] += 1.0
    return counts


def tfidf_matrix(docs: list[list[str]], vocab: dict[str, int], idf: np.ndarray) -> np.ndarray:
    """Raw-count tf scaled by idf, then L2-normalized per row."""
    x = _count_matrix(docs, vocab) * idf
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return x / norms


def smoothed_idf(docs: list[list[str]], vocab: dict[str, int]) -> np.ndarray:
    """idf_t = ln((1 + N) / (1 + df_t)) + 1."""
    n = len(docs)
    df = np.zeros(len(vocab))
    for words in docs:
        for j in {vocab[w] for w in words if w in vocab}:
            df[j] += 1.0
    return np.log((1.0 + n) / (1.0 + df)) + 1.0


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def tfidf_lr_baseline(
    train_set: list[LabeledExample],
    test_set: list[LabeledExample],
    seed: int,
    label_names: list[str],
    iterations: int = 500,
    learning_rate: float = 2.0,
    l2: float = 1e-4,
) -> MetricsReport:
    """Train on the training split, evaluate on the test split."""
    if not train_set or not test_set:
        raise DataError("baseline needs nonempty train and test splits")
    train_docs = [normalize_and_tokenize(ex.text) for ex in train_set]
    test_docs = [normalize_and_tokenize(ex.text) for ex in test_set]
    words = sorted({w for doc in train_docs for w in doc})
    if not words:
        raise DataError("baseline training vocabulary is empty")
    vocab = {w: j for j, w in enumerate(words)}

    idf = smoothed_idf(train_docs, vocab)
    x_train = tfidf_matrix(train_docs, vocab, idf)
    x_test = tfidf_matrix(test_docs, vocab, idf)

    classes = len(label_names)
    y = np.zeros((len(train_set), classes))
    for i, ex in enumerate(train_set):
        y[i, ex.class_label] = 1.0

    rng = np.random.Generator(np.random.PCG64(seed))
    w = rng.uniform(-1e-3, 1e-3, size=(len(vocab), classes))
    b = np.zeros((1, classes))
    n = len(train_set)
    for _ in range(iterations):
        probs = _softmax(x_train @ w + b)
        delta = (probs - y) / n
        w -= learning_rate * (x_train.T @ delta + l2 * w)
        b -= learning_rate * delta.sum(axis=0, keepdims=True)

    preds = np.argmax(x_test @ w + b, axis=1).tolist()
    labels = [ex.class_label for ex in test_set]
    return evaluate_predictions(preds, labels, label_names)
