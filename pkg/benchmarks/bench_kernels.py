"""Time the sampler kernels with and without compilation.

Runs the same seeded fit twice in subprocesses, once with the compiled
kernels and once with the pure-numpy fallback (PETMINE_NUMBA=0), checks
that both produce byte-identical model files, and reports the speedup.

    python3 benchmarks/bench_kernels.py [--docs 600] [--sweeps 40]

Defaults are sized so the fallback finishes in about a minute; pass larger
values to stress the compiled path.
"""

import argparse
import hashlib
import json
import os
import pathlib
import subprocess
import sys
import tempfile
import time


def worker(args) -> None:
    import numpy as np
    import scipy.sparse as sp

    from petmine import lda, textprep

    rng = np.random.Generator(np.random.PCG64(11))
    vocab = args.vocab
    rows, cols, vals = [], [], []
    for d in range(args.docs):
        words = rng.integers(0, vocab, size=args.tokens_per_doc)
        uniq, counts = np.unique(words, return_counts=True)
        rows.extend([d] * len(uniq))
        cols.extend(uniq.tolist())
        vals.extend(counts.tolist())
    counts = sp.csr_matrix(
        (vals, (rows, cols)), shape=(args.docs, vocab), dtype=np.int32)
    df = np.asarray((counts > 0).sum(axis=0)).ravel().astype(np.int64)
    dtm = textprep.DocumentTermMatrix(
        n_docs=args.docs,
        vocabulary=textprep.Vocabulary(
            terms=tuple(f"w{i}" for i in range(vocab)), doc_frequency=df),
        counts=counts,
        doc_ids=tuple(str(i) for i in range(args.docs)),
        prune_report=None)
    config = lda.LdaConfig(k=args.k, iterations=args.sweeps,
                           burn_in=args.sweeps // 2, sample_every=5, seed=3)

    from petmine import kernels
    if kernels.NUMBA_ENABLED:
        lda.fit(dtm, config)           # warm-up: compilation cost stays out
    t0 = time.perf_counter()
    model = lda.fit(dtm, config)
    elapsed = time.perf_counter() - t0

    lda.save_model(model, args.out)
    digest = hashlib.sha256(pathlib.Path(args.out).read_bytes()).hexdigest()
    n_tokens = int(counts.sum())
    print(json.dumps({
        "elapsed": elapsed,
        "tokens_per_s": n_tokens * args.sweeps / elapsed,
        "digest": digest,
    }))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=600)
    parser.add_argument("--vocab", type=int, default=2000)
    parser.add_argument("--tokens-per-doc", type=int, default=80)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--sweeps", type=int, default=40)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    parser.add_argument("--out", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.worker:
        worker(args)
        return 0

    results = {}
    with tempfile.TemporaryDirectory() as tmp:
        for label, flag in [("compiled", "1"), ("fallback", "0")]:
            env = dict(os.environ, PETMINE_NUMBA=flag)
            out = os.path.join(tmp, f"model_{label}.bin")
            cmd = [sys.executable, os.path.abspath(__file__), "--worker",
                   "--out", out,
                   "--docs", str(args.docs), "--vocab", str(args.vocab),
                   "--tokens-per-doc", str(args.tokens_per_doc),
                   "--k", str(args.k), "--sweeps", str(args.sweeps)]
            proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
            if proc.returncode != 0:
                print(proc.stderr, file=sys.stderr)
                return 1
            results[label] = json.loads(proc.stdout.strip().splitlines()[-1])
            print(f"{label:9s} {results[label]['elapsed']:8.2f} s "
                  f"({results[label]['tokens_per_s']:12.0f} tokens/s)")

    if results["compiled"]["digest"] != results["fallback"]["digest"]:
        print("FAIL: modes disagree", file=sys.stderr)
        return 1
    speedup = results["fallback"]["elapsed"] / results["compiled"]["elapsed"]
    print(f"models byte-identical; compiled kernels {speedup:.1f}x faster")
    return 0


if __name__ == "__main__":
    sys.exit(main())
