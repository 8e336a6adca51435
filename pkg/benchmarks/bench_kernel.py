#!/usr/bin/env python3
"""Benchmark the compiled gap-score kernel against the NumPy fallback.

Trains a model on a generated corpus, then times full gap-posterior
sweeps (every candidate at a random position of a random sentence)
through both backends.  Run from the repository root:

    python3 benchmarks/bench_kernel.py --sentences 20000 --queries 300
"""

import argparse
import random
import sys
import time

import numpy as np

from gapfill import _kernel_py, ngram_lm

try:
    from gapfill import _ckernel
except ImportError:
    _ckernel = None

WORDS = [f"w{idx:04d}" for idx in range(6000)]


def generate_corpus(rng: random.Random, n_sentences: int) -> list[list[str]]:
    sentences = []
    for _ in range(n_sentences):
        length = rng.randint(5, 20)
        # zipf-ish draw keeps a realistic frequency profile
        sentences.append(
            [WORDS[min(int(rng.expovariate(0.002)), len(WORDS) - 1)] for _ in range(length)]
        )
    return sentences


def time_backend(backend, model, queries, repeats: int) -> float:
    tables = model._tables()
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for stream, kpos in queries:
            backend.gap_scores(stream, kpos, model.candidate_ids, *tables)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sentences", type=int, default=20000)
    parser.add_argument("--queries", type=int, default=300)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    print(f"training on {args.sentences} sentences ...", flush=True)
    corpus = generate_corpus(rng, args.sentences)
    started = time.perf_counter()
    model = ngram_lm.train(corpus, min_count=2)
    print(
        f"trained in {time.perf_counter() - started:.1f}s: |V|={len(model.vocab)}, "
        f"{len(model.tri_keys)} trigrams, {len(model.bi_keys)} bigrams"
    )

    queries = []
    for _ in range(args.queries):
        sent = rng.choice(corpus)
        ids = model.ids(sent)
        queries.append((model._stream(ids), rng.randrange(len(ids)) + 2))

    results = {}
    results["numpy"] = time_backend(_kernel_py, model, queries, args.repeats)
    if _ckernel is not None:
        results["cython"] = time_backend(_ckernel, model, queries, args.repeats)
        # both backends must agree before their timings mean anything
        stream, kpos = queries[0]
        a = _ckernel.gap_scores(stream, kpos, model.candidate_ids, *model._tables())
        b = _kernel_py.gap_scores(stream, kpos, model.candidate_ids, *model._tables())
        assert np.allclose(a, b, atol=1e-12), "backend mismatch"

    n_cands = len(model.candidate_ids)
    print(f"\n{args.queries} posterior sweeps x {n_cands} candidates (best of {args.repeats}):")
    for name, seconds in results.items():
        per_query = seconds / args.queries * 1e3
        print(f"  {name:>7}: {seconds:8.3f}s total  {per_query:8.3f} ms/sweep")
    if "cython" in results:
        print(f"  speedup: {results['numpy'] / results['cython']:.1f}x")
    else:
        print("  compiled kernel not built; numpy fallback only")
    return 0


if __name__ == "__main__":
    sys.exit(main())
