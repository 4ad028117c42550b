"""Benchmark the compiled Gibbs-sweep kernel against the pure-Python twin.

Both kernels consume the same pre-drawn uniforms, so besides timing them
this also re-verifies that their outputs are bitwise identical.

Usage: python benchmarks/bench_gibbs.py [--docs 400] [--topics 8] [--sweeps 20]
"""

import argparse
import time

import numpy as np

from fusetext import _gibbs_py
from fusetext.lda import COMPILED_KERNEL
from fusetext.synth import two_topic_docs

try:
    from fusetext import _gibbs
except ImportError:
    _gibbs = None


def prepare(docs, topics, seed):
    vocab = {w: i for i, w in enumerate(sorted({w for d in docs for w in d}))}
    word_ids = np.array([vocab[w] for d in docs for w in d], dtype=np.int64)
    doc_of = np.array([i for i, d in enumerate(docs) for _ in d], dtype=np.int64)
    rng = np.random.default_rng(seed)
    z = rng.integers(0, topics, size=word_ids.size, dtype=np.int64)
    n_dk = np.zeros((len(docs), topics), dtype=np.int64)
    n_kw = np.zeros((topics, len(vocab)), dtype=np.int64)
    n_k = np.zeros(topics, dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    np.add.at(n_kw, (z, word_ids), 1)
    np.add.at(n_k, z, 1)
    return word_ids, doc_of, z, n_dk, n_kw, n_k


def run(kernel, state, sweeps, seed):
    word_ids, doc_of, z, n_dk, n_kw, n_k = state
    uniform_rng = np.random.default_rng(seed)
    started = time.perf_counter()
    for _ in range(sweeps):
        uniforms = uniform_rng.random(word_ids.size)
        kernel.fit_sweep(word_ids, doc_of, z, n_dk, n_kw, n_k, 0.1, 0.01, uniforms)
    elapsed = time.perf_counter() - started
    return elapsed, z.copy(), n_kw.copy()


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=400)
    parser.add_argument("--topics", type=int, default=8)
    parser.add_argument("--sweeps", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    docs, _, _ = two_topic_docs(n_docs=args.docs, seed=args.seed, doc_len=(20, 40))
    n_tokens = sum(len(d) for d in docs)
    total = args.sweeps * n_tokens
    print(f"{len(docs)} docs, {n_tokens} tokens, {args.topics} topics, {args.sweeps} sweeps")
    print(f"active kernel at import time: {'cython' if COMPILED_KERNEL else 'python'}")

    py_time, py_z, py_nkw = run(
        _gibbs_py, prepare(docs, args.topics, args.seed), args.sweeps, args.seed + 1
    )
    print(f"python kernel: {py_time:8.3f}s  ({total / py_time / 1e6:6.2f} M tokens/s)")

    if _gibbs is None:
        print("compiled kernel not built; nothing to compare against")
        return

    cy_time, cy_z, cy_nkw = run(
        _gibbs, prepare(docs, args.topics, args.seed), args.sweeps, args.seed + 1
    )
    print(f"cython kernel: {cy_time:8.3f}s  ({total / cy_time / 1e6:6.2f} M tokens/s)")
    print(f"speedup: {py_time / cy_time:.1f}x")

    identical = np.array_equal(py_z, cy_z) and np.array_equal(py_nkw, cy_nkw)
    print(f"outputs bitwise identical: {identical}")
    if not identical:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
